#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "tablenet/http_provider.hpp"
#include "tablenet/record.hpp"
#include "tablenet/table.hpp"

namespace tablenet {

struct ValidationReport {
  bool valid = true;
  std::vector<Defect> defects;
};

inline ValidationReport validate_table(std::string_view html) {
  TableAnalysis a = analyze_table(html);
  ValidationReport report;
  report.defects = std::move(a.defects);
  report.valid = report.defects.empty();
  return report;
}

inline json to_json(const ValidationReport& r) {
  json defects = json::array();
  for (const auto& d : r.defects) {
    defects.push_back({{"kind", to_string(d.kind)}, {"location", d.location}, {"detail", d.detail}});
  }
  return {{"valid", r.valid}, {"defects", std::move(defects)}};
}

inline int defect_penalty(DefectKind kind) {
  switch (kind) {
    case DefectKind::ragged_rows:
    case DefectKind::overlapping_spans:
    case DefectKind::span_out_of_bounds:
      return 2;
    case DefectKind::disallowed_tag:
      return 1;
    case DefectKind::empty_structure:
    case DefectKind::missing_table:
      return 4;
  }
  return 4;
}

// 5 for a clean table; each distinct defect kind present deducts its penalty
// once. Tables with no usable structure score 1.
inline int structure_rank(const std::vector<Defect>& defects) {
  std::set<DefectKind> kinds;
  for (const auto& d : defects) kinds.insert(d.kind);
  if (kinds.count(DefectKind::empty_structure) || kinds.count(DefectKind::missing_table)) return 1;
  int rank = 5;
  for (DefectKind k : kinds) rank -= defect_penalty(k);
  return std::max(rank, 1);
}

inline int structure_rank(std::string_view html) { return structure_rank(validate_table(html).defects); }

struct RankReport {
  int structure_rank = 1;
  int topic_rank = 1;
  int semantic_rank = 1;
  int overall = 1;
};

inline void to_json(json& j, const RankReport& r) {
  j = json{{"structure_rank", r.structure_rank},
           {"topic_rank", r.topic_rank},
           {"semantic_rank", r.semantic_rank},
           {"overall", r.overall}};
}

class RankerError : public Error {
 public:
  explicit RankerError(const std::string& message) : Error("RankerError", message) {}
};

class RankerProvider {
 public:
  virtual ~RankerProvider() = default;
  virtual int rank_topic(std::string_view html, std::string_view topic,
                         const std::vector<std::string>& entities) const = 0;
  virtual int rank_semantics(std::string_view html, std::string_view topic) const = 0;
};

namespace detail {

inline std::size_t utf8_length(unsigned char lead) {
  if (lead < 0x80) return 1;
  if ((lead >> 5) == 0x6) return 2;
  if ((lead >> 4) == 0xe) return 3;
  if ((lead >> 3) == 0x1e) return 4;
  return 1;
}

// CJK ideographs and fullwidth punctuation all encode as 3 bytes; ASCII words
// are split on non-alphanumerics.
inline bool is_cjk_ideograph(std::string_view ch) {
  if (ch.size() != 3) return false;
  const auto b0 = static_cast<unsigned char>(ch[0]);
  const std::uint32_t cp = ((b0 & 0x0f) << 12) | ((static_cast<unsigned char>(ch[1]) & 0x3f) << 6) |
                           (static_cast<unsigned char>(ch[2]) & 0x3f);
  return cp >= 0x4e00 && cp <= 0x9fff;
}

inline bool is_stopword(std::string_view w) {
  static const std::set<std::string, std::less<>> kStop = {
      "a",    "an",   "and",  "by",      "for",  "from",    "in",      "of",
      "on",   "the",  "to",   "with",    "vs",   "overview", "summary", "statistics",
      "report", "review", "breakdown", "analysis", "comparison", "across", "per"};
  return kStop.count(w) > 0;
}

}  // namespace detail

// Approximates the entities a topic names: lowercased ASCII words minus
// stopwords, plus character bigrams of CJK runs.
inline std::vector<std::string> extract_entities(std::string_view topic) {
  std::vector<std::string> out;
  std::set<std::string> seen;
  const auto add = [&](std::string e) {
    if (!e.empty() && seen.insert(e).second) out.push_back(std::move(e));
  };
  std::string word;
  std::vector<std::string> cjk_run;
  const auto flush_word = [&] {
    if (!word.empty() && !detail::is_stopword(word)) add(word);
    word.clear();
  };
  const auto flush_run = [&] {
    if (cjk_run.size() == 1) add(cjk_run[0]);
    for (std::size_t i = 0; i + 1 < cjk_run.size(); ++i) add(cjk_run[i] + cjk_run[i + 1]);
    cjk_run.clear();
  };
  for (std::size_t i = 0; i < topic.size();) {
    const std::size_t n = std::min(detail::utf8_length(static_cast<unsigned char>(topic[i])),
                                   topic.size() - i);
    const std::string_view ch = topic.substr(i, n);
    i += n;
    if (n == 1 && std::isalnum(static_cast<unsigned char>(ch[0]))) {
      flush_run();
      word.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch[0]))));
    } else if (detail::is_cjk_ideograph(ch)) {
      flush_word();
      cjk_run.emplace_back(ch);
    } else {
      flush_word();
      flush_run();
    }
  }
  flush_word();
  flush_run();
  return out;
}

namespace detail {

inline bool looks_numeric(std::string_view text) {
  bool digit = false;
  for (char c : text) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digit = true;
    } else if (c != '.' && c != ',' && c != '%' && c != '-' && c != '+' && c != ' ') {
      return false;
    }
  }
  return digit;
}

inline int ratio_rank(double issue_ratio) {
  if (issue_ratio <= 0.0) return 5;
  if (issue_ratio <= 0.1) return 4;
  if (issue_ratio <= 0.25) return 3;
  if (issue_ratio <= 0.5) return 2;
  return 1;
}

}  // namespace detail

// Deterministic test double for LLM ranking. Topic relevance is the fraction
// of entities found in the table text; semantic consistency penalises empty
// cells and cells whose numeric/text type disagrees with their column.
class SurrogateRanker : public RankerProvider {
 public:
  int rank_topic(std::string_view html, std::string_view,
                 const std::vector<std::string>& entities) const override {
    const TableAnalysis a = analyze_table(html);
    if (!a.grid) return 1;
    if (entities.empty()) return 5;
    std::string text;
    for (const Cell& c : a.grid->cells()) text += detail::lowercase(c.content) + "\n";
    std::size_t hits = 0;
    for (const auto& e : entities) hits += text.find(e) != std::string::npos;
    return overlap_rank(static_cast<double>(hits) / static_cast<double>(entities.size()));
  }

  int rank_semantics(std::string_view html, std::string_view) const override {
    const TableAnalysis a = analyze_table(html);
    if (!a.grid) return 1;
    const TableGrid& g = *a.grid;
    const bool by_row = infer_header_layout(g) == HeaderLayout::horizontal;
    const std::size_t lanes = by_row ? g.rows() : g.cols();
    std::vector<std::size_t> numeric(lanes, 0), textual(lanes, 0);
    std::size_t body = 0;
    std::size_t issues = 0;
    for (const Cell& c : g.cells()) {
      if (html::is_blank(c.content)) {
        ++issues;
        if (!c.is_header) ++body;
        continue;
      }
      if (c.is_header) continue;
      ++body;
      const std::size_t lane = by_row ? c.row_start : c.col_start;
      (detail::looks_numeric(c.content) ? numeric : textual)[lane]++;
    }
    for (std::size_t k = 0; k < lanes; ++k) issues += std::min(numeric[k], textual[k]);
    const std::size_t total = std::max<std::size_t>(g.cells().size(), 1);
    return detail::ratio_rank(static_cast<double>(issues) / static_cast<double>(total));
  }

  static int overlap_rank(double ratio) {
    if (ratio >= 0.6) return 5;
    if (ratio >= 0.4) return 4;
    if (ratio >= 0.25) return 3;
    if (ratio >= 0.1) return 2;
    return 1;
  }
};

// LLM-backed ranker using the ranking prompt; the structure score is always
// the heuristic one, injected into the prompt.
class HttpRanker : public RankerProvider {
 public:
  HttpRanker(std::shared_ptr<Transport> transport, std::string model, PromptSet prompts = {})
      : client_(std::move(transport), std::move(model), 0.0), prompts_(std::move(prompts)) {}

  int rank_topic(std::string_view html, std::string_view topic,
                 const std::vector<std::string>& entities) const override {
    return ask(html, topic, entities).at(0);
  }

  int rank_semantics(std::string_view html, std::string_view topic) const override {
    return ask(html, topic, extract_entities(topic)).at(1);
  }

 private:
  std::vector<int> ask(std::string_view html, std::string_view topic,
                       const std::vector<std::string>& entities) const {
    const TableAnalysis a = analyze_table(html);
    std::string widths;
    for (std::size_t r = 0; r < a.row_widths.size(); ++r) {
      if (r) widths += ", ";
      widths += "row " + std::to_string(r + 1) + ": " + std::to_string(a.row_widths[r]);
    }
    std::string entity_list;
    for (const auto& e : entities) entity_list += (entity_list.empty() ? "" : ", ") + e;
    json reply;
    try {
      reply = client_.complete(render_template(
          prompts_.rank, {{"score", std::to_string(structure_rank(a.defects))},
                          {"structure_info", widths},
                          {"topic", std::string(topic)},
                          {"entities", entity_list},
                          {"html_code", detail::table_fragment(html)}}));
    } catch (const Error& e) {
      throw RankerError(e.what());
    }
    std::vector<int> out;
    for (const char* key : {"topic_rank", "semantic_rank"}) {
      if (!reply.contains(key) || !reply[key].is_number_integer()) {
        throw RankerError(std::string("ranking reply missing integer ") + key);
      }
      const int v = reply[key].get<int>();
      if (v < 1 || v > 5) throw RankerError(std::string(key) + " out of range");
      out.push_back(v);
    }
    return out;
  }

  ChatClient client_;
  PromptSet prompts_;
};

inline RankReport rank_table(std::string_view html, std::string_view topic,
                             const RankerProvider& ranker) {
  RankReport r;
  r.structure_rank = structure_rank(html);
  try {
    r.topic_rank = std::clamp(ranker.rank_topic(html, topic, extract_entities(topic)), 1, 5);
    r.semantic_rank = std::clamp(ranker.rank_semantics(html, topic), 1, 5);
  } catch (const RankerError&) {
    throw;
  } catch (const std::exception& e) {
    throw RankerError(e.what());
  }
  r.overall = std::min({r.structure_rank, r.topic_rank, r.semantic_rank});
  return r;
}

// Accepts a filled table when its overall rank reaches the threshold.
class FillingChecker {
 public:
  explicit FillingChecker(std::shared_ptr<const RankerProvider> ranker, int threshold = 3)
      : ranker_(std::move(ranker)), threshold_(threshold) {}

  RankReport rank(std::string_view html, std::string_view topic) const {
    return rank_table(html, topic, *ranker_);
  }
  bool accepts(const RankReport& r) const { return r.overall >= threshold_; }
  int threshold() const { return threshold_; }

 private:
  std::shared_ptr<const RankerProvider> ranker_;
  int threshold_;
};

}  // namespace tablenet
