#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tablenet/lexicon.hpp"
#include "tablenet/record.hpp"
#include "tablenet/rng.hpp"
#include "tablenet/table.hpp"

namespace tablenet {

// Five untransformed plus four transformed variants per skeleton.
inline constexpr std::size_t kDefaultBodyVariants = 9;

class ProviderError : public Error {
 public:
  explicit ProviderError(const std::string& message, bool retryable = true)
      : Error("ProviderError", message), retryable_(retryable) {}

  bool retryable() const noexcept { return retryable_; }

 private:
  bool retryable_;
};

class ResponseFormatError : public Error {
 public:
  explicit ResponseFormatError(const std::string& message)
      : Error("ResponseFormatError", message) {}
};

struct RowWidthDiff {
  std::size_t row;
  std::optional<std::size_t> before;  // nullopt: row absent on that side
  std::optional<std::size_t> after;
};

class StructureDriftError : public Error {
 public:
  StructureDriftError(std::vector<RowWidthDiff> diffs, const std::string& detail)
      : Error("StructureDriftError", "structure drift: " + detail + describe(diffs)),
        diffs_(std::move(diffs)) {}

  const std::vector<RowWidthDiff>& diffs() const noexcept { return diffs_; }

 private:
  static std::string describe(const std::vector<RowWidthDiff>& diffs) {
    std::string out;
    for (const auto& d : diffs) {
      out += "; row " + std::to_string(d.row) + ": " +
             (d.before ? std::to_string(*d.before) : "-") + " -> " +
             (d.after ? std::to_string(*d.after) : "-");
    }
    return out;
  }

  std::vector<RowWidthDiff> diffs_;
};

// Throws StructureDriftError unless `after` has the same per-row logical
// widths, spans and header flags as `before`. Content may differ.
inline void check_structure_preserved(std::string_view before, std::string_view after) {
  const TableAnalysis a = analyze_table(before);
  const TableAnalysis b = analyze_table(after);
  std::vector<RowWidthDiff> diffs;
  const std::size_t n = std::max(a.row_widths.size(), b.row_widths.size());
  for (std::size_t r = 0; r < n; ++r) {
    std::optional<std::size_t> wa, wb;
    if (r < a.row_widths.size()) wa = a.row_widths[r];
    if (r < b.row_widths.size()) wb = b.row_widths[r];
    if (wa != wb) diffs.push_back({r, wa, wb});
  }
  if (!diffs.empty()) throw StructureDriftError(std::move(diffs), "logical row widths changed");
  if (!b.valid()) {
    throw StructureDriftError({}, "filled table is invalid: " +
                                      std::string(to_string(b.defects.front().kind)) + " " +
                                      b.defects.front().detail);
  }
  if (a.valid() && !a.grid->same_structure(*b.grid, false)) {
    throw StructureDriftError({}, "spans or header cells changed");
  }
}

// Source of topics and cell contents. Implementations must tolerate
// concurrent calls and must never alter table structure.
class ContentProvider {
 public:
  virtual ~ContentProvider() = default;

  virtual std::vector<std::string> topic(std::string_view domain, Language lang,
                                         const std::vector<std::string>& used_topics,
                                         std::size_t n) const = 0;

  // Fills every <th> of `html`.
  virtual std::string fill_headers(std::string_view html, std::string_view topic,
                                   std::string_view domain, Language lang) const = 0;

  // Returns `n_variants` copies of `html` with every <td> filled.
  virtual std::vector<std::string> fill_bodies(std::string_view html, std::string_view topic,
                                               std::string_view domain, Language lang,
                                               std::size_t n_variants) const = 0;

  // False when the provider has no dedicated vocabulary for the domain.
  virtual bool knows_domain(std::string_view) const { return true; }
};

namespace detail {

// Attribute plan shared by header and body filling: one ColumnSpec per
// attribute axis position (columns for vertical/matrix, rows for horizontal).
inline std::vector<ColumnSpec> attribute_plan(const Lexicon& lex, std::size_t count,
                                              std::uint64_t seed) {
  Rng rng(seed);
  std::vector<ColumnSpec> entities;
  std::vector<ColumnSpec> others;
  for (const auto& c : lex.columns) {
    (is_numeric_kind(c.kind) ? others : entities).push_back(c);
  }
  rng.shuffle(entities);
  std::vector<ColumnSpec> pool = others;
  pool.insert(pool.end(), entities.begin() + 1, entities.end());
  rng.shuffle(pool);
  std::vector<ColumnSpec> plan;
  plan.push_back(entities.front());
  for (std::size_t i = 1; i < count; ++i) {
    ColumnSpec spec = pool[(i - 1) % pool.size()];
    if (i - 1 >= pool.size()) spec.name += " " + std::to_string((i - 1) / pool.size() + 1);
    plan.push_back(std::move(spec));
  }
  plan.resize(count);
  return plan;
}

inline std::string topic_keyword(const Lexicon& lex, std::string_view topic) {
  std::string best;
  for (const auto& kw : lex.keywords) {
    if (topic.find(kw) != std::string_view::npos && kw.size() > best.size()) best = kw;
  }
  return best.empty() ? lex.keywords.front() : best;
}

}  // namespace detail

// Deterministic provider backed by the bundled lexicons. Outputs depend only
// on the provider seed and the call arguments, so it is safe to share across
// threads and reproducible across runs.
class TemplateProvider : public ContentProvider {
 public:
  explicit TemplateProvider(std::uint64_t seed = 0) : seed_(seed) {}

  std::vector<std::string> topic(std::string_view domain, Language lang,
                                 const std::vector<std::string>& used_topics,
                                 std::size_t n) const override {
    const Lexicon& lex = lexicon_for(domain, lang);
    std::set<std::string> taken(used_topics.begin(), used_topics.end());
    Rng rng(mix_seed(seed_, fnv1a(domain) ^ fnv1a(to_string(lang)) ^ used_topics.size()));
    std::vector<std::string> out;
    std::size_t attempts = 0;
    while (out.size() < n) {
      std::string t = rng.pick(lex.topic_patterns);
      detail::replace_all(t, "{kw}", rng.pick(lex.keywords));
      detail::replace_all(t, "{org}", rng.pick(lex.organizations));
      detail::replace_all(t, "{year}", std::to_string(rng.uniform(2018, 2025)));
      if (++attempts > 64 * (n + 1)) t += " #" + std::to_string(attempts);
      if (taken.insert(t).second) out.push_back(std::move(t));
    }
    return out;
  }

  std::string fill_headers(std::string_view html, std::string_view topic,
                           std::string_view domain, Language lang) const override {
    const TableGrid grid = html_to_grid(html);
    const Lexicon& lex = lexicon_for(domain, lang);
    const HeaderLayout layout = infer_header_layout(grid);
    const bool by_row = layout == HeaderLayout::horizontal;
    const auto plan = detail::attribute_plan(lex, by_row ? grid.rows() : grid.cols(),
                                             plan_seed(topic, domain, lang, grid));
    const std::size_t top = top_header_rows(grid);
    const std::size_t left = left_header_cols(grid);
    Rng rng(mix_seed(seed_, fnv1a(html) ^ fnv1a(topic)));

    std::vector<std::string> entity_labels = row_entities(lex, plan, grid.rows(), rng);
    std::vector<std::optional<std::string>> contents;
    for (const Cell& c : grid.cells()) {
      if (!c.is_header) {
        contents.emplace_back(std::nullopt);
        continue;
      }
      std::string text;
      if (c.row_start == 0 && c.col_start == 0) {
        text = std::string(topic);
      } else if (c.row_start < top) {
        // top band: leaf headers name attributes, upper levels name groups
        if (c.row_end() == top && c.colspan == 1) {
          text = by_row ? rng.pick(lex.groups) : plan[c.col_start].name;
        } else {
          text = rng.pick(lex.groups);
        }
      } else if (c.col_start < left) {
        if (c.col_end() == left && c.rowspan == 1) {
          text = by_row ? plan[c.row_start].name : entity_labels[c.row_start];
        } else {
          text = rng.pick(lex.groups);
        }
      } else {
        text = by_row ? plan[c.row_start].name : plan[c.col_start].name;
      }
      contents.emplace_back(std::move(text));
    }
    return rewrite_cells(html, contents);
  }

  std::vector<std::string> fill_bodies(std::string_view html, std::string_view topic,
                                       std::string_view domain, Language lang,
                                       std::size_t n_variants) const override {
    const TableGrid grid = html_to_grid(html);
    const Lexicon& lex = lexicon_for(domain, lang);
    const bool by_row = infer_header_layout(grid) == HeaderLayout::horizontal;
    const auto plan = detail::attribute_plan(lex, by_row ? grid.rows() : grid.cols(),
                                             plan_seed(topic, domain, lang, grid));
    const std::string keyword = detail::topic_keyword(lex, topic);

    std::vector<std::string> out;
    std::set<std::vector<std::string>> seen;
    for (std::size_t v = 0; v < n_variants; ++v) {
      for (std::uint64_t attempt = 0;; ++attempt) {
        Rng rng(mix_seed(seed_, fnv1a(html) ^ fnv1a(topic) ^ ((v + 1) * 0x9e37ULL) ^
                                    (attempt << 32)));
        std::vector<std::optional<std::string>> contents;
        std::vector<std::string> key;
        for (const Cell& c : grid.cells()) {
          if (c.is_header) {
            contents.emplace_back(std::nullopt);
            continue;
          }
          const ColumnSpec& spec = plan[by_row ? c.row_start : c.col_start];
          std::string value = make_value(spec.kind, lex, rng, keyword);
          key.push_back(value);
          contents.emplace_back(std::move(value));
        }
        // A table without body cells has nothing to vary.
        if (seen.insert(key).second || key.empty() || attempt >= 32) {
          out.push_back(rewrite_cells(html, contents));
          break;
        }
      }
    }
    return out;
  }

  bool knows_domain(std::string_view domain) const override { return is_known_domain(domain); }

 private:
  std::uint64_t plan_seed(std::string_view topic, std::string_view domain, Language lang,
                          const TableGrid& grid) const {
    return mix_seed(seed_, fnv1a(topic) ^ fnv1a(domain) ^ fnv1a(to_string(lang)) ^
                               (grid.rows() * 1315423911ULL + grid.cols()));
  }

  static std::vector<std::string> row_entities(const Lexicon& lex,
                                               const std::vector<ColumnSpec>& plan,
                                               std::size_t rows, Rng& rng) {
    std::vector<std::string> pool;
    switch (plan.front().kind) {
      case ValueKind::organization: pool = lex.organizations; break;
      case ValueKind::technology: pool = lex.technologies; break;
      default: pool = lex.regions; break;
    }
    if (pool.size() < rows) pool.insert(pool.end(), lex.regions.begin(), lex.regions.end());
    rng.shuffle(pool);
    std::vector<std::string> labels(rows);
    for (std::size_t r = 0; r < rows; ++r) {
      labels[r] = r < pool.size() ? pool[r] : pool[r % pool.size()] + " " + std::to_string(r);
    }
    return labels;
  }

  std::uint64_t seed_;
};

}  // namespace tablenet
