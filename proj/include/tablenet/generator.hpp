#pragma once

#include <array>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "tablenet/checker.hpp"
#include "tablenet/infill.hpp"
#include "tablenet/manifest.hpp"
#include "tablenet/record.hpp"
#include "tablenet/rng.hpp"
#include "tablenet/table.hpp"

namespace tablenet {

enum class Complexity { simple, complex, mixed };
enum class TriState { yes, no, any };

NLOHMANN_JSON_SERIALIZE_ENUM(Complexity, {{Complexity::simple, "simple"},
                                          {Complexity::complex, "complex"},
                                          {Complexity::mixed, "mixed"}})
NLOHMANN_JSON_SERIALIZE_ENUM(TriState,
                             {{TriState::yes, "yes"}, {TriState::no, "no"}, {TriState::any, "any"}})

struct IntRange {
  int lo = 1;
  int hi = 1;
  friend bool operator==(const IntRange&, const IntRange&) = default;
};

struct GenerationRequest {
  std::size_t count = 1;
  Complexity complexity = Complexity::mixed;
  TriState colored = TriState::any;
  TriState lined = TriState::any;
  IntRange rows{2, 12};
  IntRange cols{2, 8};
  // horizontal, vertical, matrix
  std::array<double, 3> header_layout_weights{1.0, 1.0, 1.0};
  std::string domain = "telecommunication";
  Language language = Language::en;
  std::uint64_t seed = 0;
  int max_fallback = 3;
  std::size_t workers = 0;  // 0: hardware concurrency

  void validate() const {
    if (count == 0) throw ConfigError("count must be >= 1");
    if (rows.lo < 1 || rows.hi < rows.lo) throw ConfigError("row range must be non-empty and positive");
    if (cols.lo < 1 || cols.hi < cols.lo) throw ConfigError("column range must be non-empty and positive");
    double total = 0;
    for (double w : header_layout_weights) {
      if (!(w >= 0.0)) throw ConfigError("header layout weights must be nonnegative");
      total += w;
    }
    if (total <= 0.0) throw ConfigError("header layout weights must sum to a positive value");
    if (max_fallback < 0) throw ConfigError("max_fallback must be >= 0");
  }
};

struct AttributeCombo {
  bool simple = true;
  bool colored = false;
  bool lined = true;

  friend bool operator==(const AttributeCombo&, const AttributeCombo&) = default;
};

inline std::array<AttributeCombo, 8> all_combos() {
  std::array<AttributeCombo, 8> out{};
  for (int i = 0; i < 8; ++i) out[i] = {(i & 1) == 0, (i & 2) != 0, (i & 4) == 0};
  return out;
}

// Combos compatible with the request's constraints, in canonical order.
inline std::vector<AttributeCombo> allowed_combos(const GenerationRequest& req) {
  std::vector<AttributeCombo> out;
  for (const auto& c : all_combos()) {
    if (req.complexity == Complexity::simple && !c.simple) continue;
    if (req.complexity == Complexity::complex && c.simple) continue;
    if (req.colored == TriState::yes && !c.colored) continue;
    if (req.colored == TriState::no && c.colored) continue;
    if (req.lined == TriState::yes && !c.lined) continue;
    if (req.lined == TriState::no && c.lined) continue;
    out.push_back(c);
  }
  return out;
}

namespace detail {

inline bool layout_feasible(HeaderLayout layout, std::size_t rows, std::size_t cols) {
  switch (layout) {
    case HeaderLayout::vertical: return rows >= 2;
    case HeaderLayout::horizontal: return cols >= 2;
    case HeaderLayout::matrix: return rows >= 2 && cols >= 2;
  }
  return false;
}

struct Band {
  std::size_t row_cut;  // spans may not cross this row boundary (0: none)
  std::size_t col_cut;
};

// Largest extent of a span anchored at (r,c) along one axis, limited by
// occupied positions, band boundaries and a cap.
inline std::size_t free_run(const Matrix<int>& rs, std::size_t r, std::size_t c, bool down,
                            std::size_t cut, std::size_t limit, std::size_t cap) {
  std::size_t n = 0;
  std::size_t pos = down ? r : c;
  const std::size_t start = pos;
  while (pos < limit && n < cap) {
    if (pos != start && cut > 0 && pos == cut) break;
    if (rs(down ? pos : r, down ? c : pos) != 1) break;
    ++n;
    ++pos;
  }
  return n;
}

// Places k spanning anchors uniformly among positions that can host one.
// Returns false when no position can host a span at all.
inline bool place_spans(TableSchema& s, Rng& rng) {
  const Band band{s.has_top_band() ? s.header_rows : 0, s.has_left_band() ? s.header_cols : 0};
  const std::size_t cap_k = std::max<std::size_t>(1, std::min<std::size_t>(3, s.n_rows * s.n_cols / 4));
  const std::size_t k = 1 + rng.index(cap_k);
  // Working marks: 1 = free unit cell, other values = claimed.
  Matrix<int> mark(s.n_rows, s.n_cols, 1);
  std::size_t placed = 0;
  for (std::size_t step = 0; step < k; ++step) {
    struct Candidate {
      std::size_t r, c, max_down, max_right;
    };
    std::vector<Candidate> candidates;
    for (std::size_t r = 0; r < s.n_rows; ++r) {
      for (std::size_t c = 0; c < s.n_cols; ++c) {
        if (mark(r, c) != 1) continue;
        const std::size_t down = free_run(mark, r, c, true, band.row_cut, s.n_rows, 4);
        const std::size_t right = free_run(mark, r, c, false, band.col_cut, s.n_cols, 4);
        if (down > 1 || right > 1) candidates.push_back({r, c, down, right});
      }
    }
    if (candidates.empty()) break;
    const Candidate& at = candidates[rng.index(candidates.size())];
    std::size_t rs = 1, cs = 1;
    const bool can_down = at.max_down > 1;
    const bool can_right = at.max_right > 1;
    const bool vertical = can_down && (!can_right || rng.chance(0.5));
    if (vertical) {
      rs = 2 + rng.index(at.max_down - 1);
    } else {
      cs = 2 + rng.index(at.max_right - 1);
    }
    // Occasionally grow into a rectangle when the block is free.
    if (rng.chance(0.2)) {
      const std::size_t other = vertical ? at.max_right : at.max_down;
      if (other > 1) {
        bool free = true;
        const std::size_t rs2 = vertical ? rs : 2;
        const std::size_t cs2 = vertical ? 2 : cs;
        for (std::size_t r = at.r; r < at.r + rs2 && free; ++r) {
          for (std::size_t c = at.c; c < at.c + cs2 && free; ++c) {
            if (r >= s.n_rows || c >= s.n_cols || mark(r, c) != 1) free = false;
            if (band.row_cut > 0 && r != at.r && r == band.row_cut) free = false;
            if (band.col_cut > 0 && c != at.c && c == band.col_cut) free = false;
          }
        }
        if (free) {
          rs = rs2;
          cs = cs2;
        }
      }
    }
    for (std::size_t r = at.r; r < at.r + rs; ++r) {
      for (std::size_t c = at.c; c < at.c + cs; ++c) {
        mark(r, c) = 0;
        s.row_spans(r, c) = 0;
        s.col_spans(r, c) = 0;
      }
    }
    s.row_spans(at.r, at.c) = static_cast<int>(rs);
    s.col_spans(at.r, at.c) = static_cast<int>(cs);
    ++placed;
  }
  return placed > 0;
}

}  // namespace detail

// Samples a schema for a fixed complexity. Dimensions and layouts that cannot
// host a requested span are resampled; ConfigError when none can.
inline TableSchema sample_schema(const GenerationRequest& req, bool simple, Rng& rng) {
  req.validate();
  for (int attempt = 0; attempt < 256; ++attempt) {
    const auto rows = static_cast<std::size_t>(rng.uniform(req.rows.lo, req.rows.hi));
    const auto cols = static_cast<std::size_t>(rng.uniform(req.cols.lo, req.cols.hi));
    std::vector<double> weights(req.header_layout_weights.begin(), req.header_layout_weights.end());
    for (std::size_t i = 0; i < weights.size(); ++i) {
      if (!detail::layout_feasible(kHeaderLayouts[i], rows, cols)) weights[i] = 0.0;
    }
    if (std::all_of(weights.begin(), weights.end(), [](double w) { return w <= 0.0; })) continue;
    TableSchema s = TableSchema::unit(rows, cols, kHeaderLayouts[rng.weighted(weights)]);
    if (!simple && s.has_top_band() && rows >= 4 && rng.chance(0.3)) s.header_rows = 2;
    if (simple) return s;
    if (detail::place_spans(s, rng)) {
      validate_schema(s);
      return s;
    }
  }
  throw ConfigError("row/column ranges [" + std::to_string(req.rows.lo) + "," +
                    std::to_string(req.rows.hi) + "]x[" + std::to_string(req.cols.lo) + "," +
                    std::to_string(req.cols.hi) + "] cannot host the requested spans");
}

inline TableSchema sample_schema(const GenerationRequest& req, Rng& rng) {
  bool simple = req.complexity == Complexity::simple;
  if (req.complexity == Complexity::mixed) simple = rng.chance(0.5);
  return sample_schema(req, simple, rng);
}

inline StyleSpec style_from_combo(const AttributeCombo& combo, Rng& rng) {
  static const std::vector<std::string> kFonts = {"Arial", "Helvetica", "Times New Roman",
                                                  "Verdana", "SimSun", "Microsoft YaHei"};
  static const std::vector<std::string> kHeaderFills = {"#d9e1f2", "#fce4d6", "#e2efda",
                                                        "#fff2cc", "#4472c4", "#ededed"};
  static const std::vector<std::string> kBodyFills = {"#f7f9fc", "#fffaf0", "#f2f8ee", "#fdfdf2"};
  static const std::vector<std::string> kInk = {"#1f3864", "#833c0b", "#375623", "#7030a0"};
  static const std::vector<std::string> kBorders = {"#4472c4", "#a5a5a5", "#c00000", "#70ad47"};
  static const std::vector<LineStyle> kUnlined = {LineStyle::horizontally_lineless,
                                                  LineStyle::vertically_lineless,
                                                  LineStyle::lined_headers_only, LineStyle::lineless};
  StyleSpec s;
  s.line_style = combo.lined ? LineStyle::fully_lined : rng.pick(kUnlined);
  s.border_thickness = rng.uniform(1, 3);
  s.font_family = rng.pick(kFonts);
  s.font_size_px = rng.uniform(12, 16);
  if (combo.colored) {
    if (rng.chance(0.8)) s.header_background = rng.pick(kHeaderFills);
    if (rng.chance(0.3)) s.body_background = rng.pick(kBodyFills);
    if (rng.chance(0.3)) s.font_color = rng.pick(kInk);
    if (rng.chance(0.3)) s.border_color = rng.pick(kBorders);
    if (rng.chance(0.5)) {
      s.zebra = true;
      s.zebra_color = rng.pick(kBodyFills);
    }
    if (!s.is_colored()) s.header_background = rng.pick(kHeaderFills);
  }
  return s;
}

inline std::string fallback_regenerate(const TableSchema& schema, const std::exception&) {
  return grid_to_html(grid_from_schema(schema), schema.style);
}

// Exact-string set of topics already handed out, optionally persisted.
class TopicMemory {
 public:
  TopicMemory() = default;
  explicit TopicMemory(std::filesystem::path file) : file_(std::move(file)) {
    if (file_.empty() || !std::filesystem::exists(file_)) return;
    std::ifstream in(file_);
    const json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.contains("used_topics")) {
      throw ConfigError("malformed topic memory " + file_.string());
    }
    used_ = j["used_topics"].get<std::vector<std::string>>();
  }

  const std::vector<std::string>& used() const { return used_; }
  bool contains(const std::string& t) const {
    return std::find(used_.begin(), used_.end(), t) != used_.end();
  }
  void add(const std::string& t) {
    if (!contains(t)) used_.push_back(t);
  }
  void save() const {
    if (file_.empty()) return;
    std::ofstream out(file_, std::ios::binary | std::ios::trunc);
    if (!out) throw PathError(file_.string());
    out << json{{"used_topics", used_}}.dump(2) << '\n';
  }

 private:
  std::filesystem::path file_;
  std::vector<std::string> used_;
};

struct ItemStatus {
  std::size_t index = 0;
  std::string id;
  bool ok = false;
  int fallbacks = 0;
  std::string error;  // last failure, kept for failed and recovered items
  AttributeCombo combo;
  TableSchema schema;
};

struct BatchReport {
  std::size_t requested = 0;
  std::size_t produced = 0;
  std::size_t failed = 0;
  std::vector<ItemStatus> items;
  std::map<int, std::size_t> fallback_histogram;
  double mean_iterations = 0.0;
  double duration_ms = 0.0;
  bool unknown_domain = false;
};

inline json to_json(const BatchReport& r) {
  json items = json::array();
  for (const auto& it : r.items) {
    json j = {{"index", it.index},
              {"id", it.id},
              {"status", it.ok ? "ok" : "GenerationFailed"},
              {"fallbacks", it.fallbacks},
              {"combo", {{"simple", it.combo.simple}, {"colored", it.combo.colored}, {"lined", it.combo.lined}}},
              {"schema", schema_to_json(it.schema)}};
    if (!it.error.empty()) j["error"] = it.error;
    items.push_back(std::move(j));
  }
  json hist = json::object();
  for (const auto& [k, v] : r.fallback_histogram) hist[std::to_string(k)] = v;
  return {{"counts", {{"requested", r.requested}, {"produced", r.produced}, {"failed", r.failed}}},
          {"mean_iterations", r.mean_iterations},
          {"fallback_histogram", hist},
          {"duration_ms", r.duration_ms},
          {"unknown_domain_warning", r.unknown_domain},
          {"items", std::move(items)}};
}

struct BatchResult {
  std::vector<AnnotationRecord> records;  // produced items, in index order
  BatchReport report;
};

// Provider outage mid-batch; carries whatever finished before it.
class BatchAborted : public ProviderError {
 public:
  BatchAborted(const std::string& message, BatchResult partial)
      : ProviderError(message, true), partial_(std::move(partial)) {}
  const BatchResult& partial() const noexcept { return partial_; }

 private:
  BatchResult partial_;
};

inline std::string record_id(std::uint64_t seed, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "tn-%llu-%06zu", static_cast<unsigned long long>(seed), index);
  return buf;
}

namespace detail {

struct ItemOutcome {
  std::optional<AnnotationRecord> record;
  ItemStatus status;
};

inline ItemOutcome generate_item(const GenerationRequest& req, std::size_t index,
                                 const AttributeCombo& combo, const std::string& topic,
                                 const ContentProvider& provider, const FillingChecker& checker) {
  Rng rng(req.seed ^ static_cast<std::uint64_t>(index));
  ItemOutcome out;
  out.status.index = index;
  out.status.id = record_id(req.seed, index);
  out.status.combo = combo;
  TableSchema schema = sample_schema(req, combo.simple, rng);
  schema.style = style_from_combo(combo, rng);
  out.status.schema = schema;

  std::string skeleton = grid_to_html(grid_from_schema(schema), schema.style);
  const std::string reference = skeleton;
  for (int fallbacks = 0;; ++fallbacks) {
    std::string failure;
    try {
      const std::string headed = provider.fill_headers(skeleton, topic, req.domain, req.language);
      check_structure_preserved(reference, headed);
      const auto bodies = provider.fill_bodies(headed, topic, req.domain, req.language, 1);
      if (bodies.empty()) throw ResponseFormatError("provider returned no body variant");
      const std::string& filled = bodies.front();
      check_structure_preserved(reference, filled);
      const ValidationReport v = validate_table(filled);
      if (!v.valid) throw TableParseError(v.defects.front());
      const RankReport rank = checker.rank(filled, topic);
      if (!checker.accepts(rank)) {
        failure = "checker rank " + std::to_string(rank.overall) + " below threshold";
      } else {
        out.record = make_record_from_html(out.status.id, filled, schema.style, topic, req.language);
        out.status.ok = true;
        out.status.fallbacks = fallbacks;
        return out;
      }
    } catch (const ProviderError&) {
      throw;
    } catch (const StructureDriftError& e) {
      failure = e.what();
    } catch (const ResponseFormatError& e) {
      failure = e.what();
    } catch (const TableParseError& e) {
      failure = e.what();
    }
    out.status.error = failure;
    if (fallbacks >= req.max_fallback) {
      out.status.fallbacks = fallbacks;
      return out;
    }
    skeleton = fallback_regenerate(schema, std::runtime_error(failure));
  }
}

}  // namespace detail

// Runs schema -> skeleton -> header fill -> body fill -> validate/check for
// every item, regenerating from the schema on failure. Items fan out across
// workers; results are ordered by index so output is worker-count independent.
inline BatchResult generate_batch(const GenerationRequest& req, const ContentProvider& provider,
                                  const FillingChecker& checker, TopicMemory* memory = nullptr) {
  req.validate();
  const auto started = std::chrono::steady_clock::now();
  const auto combos = allowed_combos(req);

  TopicMemory local;
  TopicMemory& topics_memory = memory ? *memory : local;
  const std::vector<std::string> topics =
      provider.topic(req.domain, req.language, topics_memory.used(), req.count);
  if (topics.size() < req.count) throw ResponseFormatError("provider returned too few topics");
  for (std::size_t i = 0; i < req.count; ++i) topics_memory.add(topics[i]);

  std::vector<std::optional<detail::ItemOutcome>> outcomes(req.count);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::mutex error_mutex;
  std::optional<std::string> provider_error;
  std::exception_ptr config_error;

  const auto work = [&] {
    for (;;) {
      if (abort.load()) return;
      const std::size_t i = next.fetch_add(1);
      if (i >= req.count) return;
      try {
        outcomes[i] = detail::generate_item(req, i, combos[i % combos.size()], topics[i],
                                            provider, checker);
      } catch (const ProviderError& e) {
        std::lock_guard lock(error_mutex);
        if (!provider_error) provider_error = e.what();
        abort = true;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!config_error) config_error = std::current_exception();
        abort = true;
      }
    }
  };
  std::size_t workers = req.workers ? req.workers : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, req.count);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  }
  if (config_error) std::rethrow_exception(config_error);

  BatchResult result;
  BatchReport& report = result.report;
  report.requested = req.count;
  report.unknown_domain = !provider.knows_domain(req.domain);
  double iterations = 0;
  for (auto& o : outcomes) {
    if (!o) continue;
    const ItemStatus& st = o->status;
    report.fallback_histogram[st.fallbacks]++;
    iterations += 1 + st.fallbacks;
    if (o->record) {
      result.records.push_back(std::move(*o->record));
      ++report.produced;
    } else {
      ++report.failed;
    }
    report.items.push_back(st);
  }
  if (!report.items.empty()) report.mean_iterations = iterations / static_cast<double>(report.items.size());
  report.duration_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  if (provider_error) throw BatchAborted(*provider_error, std::move(result));
  return result;
}

}  // namespace tablenet
