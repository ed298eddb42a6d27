#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "tablenet/checker.hpp"
#include "tablenet/correlation.hpp"
#include "tablenet/html.hpp"
#include "tablenet/record.hpp"
#include "tablenet/rng.hpp"

namespace tablenet {

enum class PerturbationKind { structure, topic, semantics };

NLOHMANN_JSON_SERIALIZE_ENUM(PerturbationKind, {{PerturbationKind::structure, "structure"},
                                                {PerturbationKind::topic, "topic"},
                                                {PerturbationKind::semantics, "semantics"}})

inline int max_severity(PerturbationKind k) { return k == PerturbationKind::topic ? 1 : 3; }

struct Perturbation {
  PerturbationKind kind = PerturbationKind::structure;
  int max_level = 3;  // severities are drawn from [0, max_level]; 0 disables
};

namespace detail {

struct Edit {
  std::size_t at;
  std::size_t erase;
  std::string insert;
};

inline std::string apply_edits(std::string s, std::vector<Edit> edits) {
  std::sort(edits.begin(), edits.end(), [](const Edit& a, const Edit& b) { return a.at > b.at; });
  for (const auto& e : edits) s.replace(e.at, e.erase, e.insert);
  return s;
}

// Level 1 drops the last </tr>; level 2 also removes one single-row cell;
// level 3 also gives the last cell an out-of-range rowspan.
inline std::string corrupt_structure(const std::string& html_text, int level) {
  if (level <= 0) return html_text;
  const auto tokens = html::tokenize(html_text);
  std::vector<Edit> edits;
  std::optional<std::size_t> last_tr_end;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i].kind == html::TokenKind::end_tag && tokens[i].name == "tr") last_tr_end = i;
  }
  if (last_tr_end) edits.push_back({tokens[*last_tr_end].offset, tokens[*last_tr_end].length, ""});
  const auto is_cell = [](const html::Token& t) { return t.name == "td" || t.name == "th"; };
  if (level >= 2) {
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      const auto& t = tokens[i];
      if (t.kind != html::TokenKind::start_tag || !is_cell(t) || t.attribute("rowspan")) continue;
      std::size_t j = i + 1;
      while (j < tokens.size() && !(tokens[j].kind == html::TokenKind::end_tag && is_cell(tokens[j]))) ++j;
      if (j == tokens.size()) break;
      edits.push_back({t.offset, tokens[j].offset + tokens[j].length - t.offset, ""});
      break;
    }
  }
  if (level >= 3) {
    for (std::size_t i = tokens.size(); i-- > 0;) {
      const auto& t = tokens[i];
      if (t.kind == html::TokenKind::start_tag && is_cell(t)) {
        edits.push_back({t.offset + 3, 0, " rowspan=\"99\""});
        break;
      }
    }
  }
  return apply_edits(html_text, std::move(edits));
}

// Permutes the contents of a fraction level/3 of the body cells.
inline std::string corrupt_semantics(const std::string& html_text, int level, Rng& rng) {
  if (level <= 0) return html_text;
  const TableAnalysis a = analyze_table(html_text);
  if (!a.grid) return html_text;
  const auto& cells = a.grid->cells();
  std::vector<std::size_t> body;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (!cells[i].is_header) body.push_back(i);
  }
  rng.shuffle(body);
  const auto m = static_cast<std::size_t>(
      std::lround(static_cast<double>(body.size()) * std::min(level, 3) / 3.0));
  body.resize(std::min(m, body.size()));
  if (body.size() < 2) return html_text;
  // Rotating by one moves every chosen content to a different cell.
  std::vector<std::optional<std::string>> contents(cells.size());
  for (std::size_t k = 0; k < body.size(); ++k) {
    contents[body[k]] = cells[body[(k + 1) % body.size()]].content;
  }
  return rewrite_cells(html_text, contents);
}

inline int dimension_rank(const RankReport& r, PerturbationKind k) {
  switch (k) {
    case PerturbationKind::structure: return r.structure_rank;
    case PerturbationKind::topic: return r.topic_rank;
    case PerturbationKind::semantics: return r.semantic_rank;
  }
  return r.overall;
}

}  // namespace detail

struct RepetitionResult {
  std::optional<double> spearman, pearson, kendall;  // nullopt: degenerate
  bool degenerate = false;
  std::size_t corrupted = 0;
  double strictly_lowered_fraction = 0.0;  // among corrupted records
};

struct CoefficientStats {
  std::optional<double> mean;
  std::optional<double> half_std;
};

struct PerturbationReport {
  PerturbationKind kind;
  int max_level = 0;
  std::vector<RepetitionResult> repetitions;
  CoefficientStats spearman, pearson, kendall;
  double strictly_lowered_fraction = 0.0;
};

struct DisturbanceReport {
  std::size_t records = 0;
  std::vector<PerturbationReport> perturbations;
};

namespace detail {

inline CoefficientStats summarize(const std::vector<RepetitionResult>& reps,
                                  std::optional<double> RepetitionResult::*field) {
  std::vector<double> xs;
  for (const auto& r : reps) {
    if (r.*field) xs.push_back(*(r.*field));
  }
  CoefficientStats s;
  if (xs.empty()) return s;
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double var = 0;
  for (double x : xs) var += (x - mean) * (x - mean);
  s.mean = mean;
  s.half_std = xs.size() > 1 ? 0.5 * std::sqrt(var / (n - 1)) : 0.0;
  return s;
}

}  // namespace detail

// Corrupts records at random severities, re-ranks them and correlates the
// known severity order (5 - severity) with the checker's rank on the matching
// dimension. When both orders are constant and equal the agreement is 1.
inline DisturbanceReport disturbance_study(const std::vector<AnnotationRecord>& records,
                                           const std::vector<Perturbation>& perturbations,
                                           const RankerProvider& ranker, std::uint64_t seed,
                                           int repetitions = 3) {
  if (records.empty()) throw DegenerateInput("disturbance study needs at least one record");
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  DisturbanceReport report;
  report.records = records.size();
  std::vector<RankReport> baseline;
  for (const auto& r : records) baseline.push_back(rank_table(r.html, r.topic, ranker));

  for (const auto& p : perturbations) {
    const int top = std::clamp(p.max_level, 0, max_severity(p.kind));
    PerturbationReport pr{p.kind, top, {}, {}, {}, {}, 0.0};
    std::size_t lowered_total = 0, corrupted_total = 0;
    for (int rep = 0; rep < repetitions; ++rep) {
      Rng rng(mix_seed(seed, (static_cast<std::uint64_t>(p.kind) << 8) | static_cast<std::uint64_t>(rep)));
      std::vector<double> ground, observed;
      RepetitionResult rr;
      std::size_t lowered = 0;
      for (std::size_t i = 0; i < records.size(); ++i) {
        int level = top == 0 ? 0 : rng.uniform(0, top);
        std::string html = records[i].html;
        std::string topic = records[i].topic;
        switch (p.kind) {
          case PerturbationKind::structure:
            html = detail::corrupt_structure(html, level);
            break;
          case PerturbationKind::topic: {
            std::vector<std::size_t> others;
            for (std::size_t k = 0; k < records.size(); ++k) {
              if (records[k].topic != topic) others.push_back(k);
            }
            if (level > 0 && others.empty()) level = 0;
            if (level > 0) topic = records[rng.pick(others)].topic;
            break;
          }
          case PerturbationKind::semantics:
            html = detail::corrupt_semantics(html, level, rng);
            break;
        }
        const int rank = detail::dimension_rank(rank_table(html, topic, ranker), p.kind);
        ground.push_back(5.0 - level);
        observed.push_back(rank);
        if (level > 0) {
          ++rr.corrupted;
          if (rank < detail::dimension_rank(baseline[i], p.kind)) ++lowered;
        }
      }
      const bool flat_g = std::adjacent_find(ground.begin(), ground.end(), std::not_equal_to<>()) == ground.end();
      const bool flat_o = std::adjacent_find(observed.begin(), observed.end(), std::not_equal_to<>()) == observed.end();
      if (flat_g || flat_o || ground.size() < 2) {
        if (ground == observed) {
          rr.spearman = rr.pearson = rr.kendall = 1.0;
        } else {
          rr.degenerate = true;
        }
      } else {
        rr.spearman = spearman(ground, observed);
        rr.pearson = pearson(ground, observed);
        rr.kendall = kendall_tau(ground, observed);
      }
      rr.strictly_lowered_fraction =
          rr.corrupted ? static_cast<double>(lowered) / static_cast<double>(rr.corrupted) : 0.0;
      lowered_total += lowered;
      corrupted_total += rr.corrupted;
      pr.repetitions.push_back(rr);
    }
    pr.spearman = detail::summarize(pr.repetitions, &RepetitionResult::spearman);
    pr.pearson = detail::summarize(pr.repetitions, &RepetitionResult::pearson);
    pr.kendall = detail::summarize(pr.repetitions, &RepetitionResult::kendall);
    pr.strictly_lowered_fraction =
        corrupted_total ? static_cast<double>(lowered_total) / static_cast<double>(corrupted_total) : 0.0;
    report.perturbations.push_back(std::move(pr));
  }
  return report;
}

inline json to_json(const DisturbanceReport& r) {
  const auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  const auto stats = [&](const CoefficientStats& s) {
    return json{{"mean", opt(s.mean)}, {"half_std", opt(s.half_std)}};
  };
  json items = json::array();
  for (const auto& p : r.perturbations) {
    json reps = json::array();
    for (const auto& rr : p.repetitions) {
      reps.push_back({{"spearman", opt(rr.spearman)},
                      {"pearson", opt(rr.pearson)},
                      {"kendall", opt(rr.kendall)},
                      {"degenerate", rr.degenerate},
                      {"corrupted", rr.corrupted},
                      {"strictly_lowered_fraction", rr.strictly_lowered_fraction}});
    }
    items.push_back({{"perturbation", p.kind},
                     {"max_level", p.max_level},
                     {"spearman", stats(p.spearman)},
                     {"pearson", stats(p.pearson)},
                     {"kendall", stats(p.kendall)},
                     {"strictly_lowered_fraction", p.strictly_lowered_fraction},
                     {"repetitions", std::move(reps)}});
  }
  return {{"records", r.records}, {"perturbations", std::move(items)}};
}

}  // namespace tablenet
