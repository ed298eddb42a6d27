#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tablenet/error.hpp"
#include "tablenet/manifest.hpp"
#include "tablenet/record.hpp"
#include "tablenet/rng.hpp"

namespace tablenet {

using EmbeddingVector = std::vector<double>;

// Max-pooled then mean-pooled columns of a patches x dim row-major matrix.
inline EmbeddingVector pool_embedding(std::span<const double> patches, std::size_t n_patches,
                                      std::size_t dim) {
  if (n_patches == 0 || dim == 0) throw DegenerateInput("empty patch matrix");
  if (patches.size() != n_patches * dim) throw DegenerateInput("patch matrix size mismatch");
  EmbeddingVector out(2 * dim, 0.0);
  for (std::size_t d = 0; d < dim; ++d) out[d] = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < n_patches; ++p) {
    for (std::size_t d = 0; d < dim; ++d) {
      const double v = patches[p * dim + d];
      if (!std::isfinite(v)) throw DegenerateInput("non-finite patch entry");
      out[d] = std::max(out[d], v);
      out[dim + d] += v;
    }
  }
  for (std::size_t d = 0; d < dim; ++d) out[dim + d] /= static_cast<double>(n_patches);
  return out;
}

inline EmbeddingVector pool_embedding(const std::vector<std::vector<double>>& patches) {
  if (patches.empty() || patches.front().empty()) throw DegenerateInput("empty patch matrix");
  const std::size_t dim = patches.front().size();
  std::vector<double> flat;
  flat.reserve(patches.size() * dim);
  for (const auto& row : patches) {
    if (row.size() != dim) throw DegenerateInput("ragged patch matrix");
    flat.insert(flat.end(), row.begin(), row.end());
  }
  return pool_embedding(flat, patches.size(), dim);
}

// Unstandardized structural descriptor of one record.
inline EmbeddingVector raw_structural_features(const AnnotationRecord& r) {
  std::size_t rows = 0, cols = 0, spans = 0, span_area = 0;
  std::vector<double> lengths;
  for (const Cell& c : r.cells) {
    rows = std::max(rows, c.row_start + c.rowspan);
    cols = std::max(cols, c.col_start + c.colspan);
    if (c.rowspan > 1 || c.colspan > 1) {
      ++spans;
      span_area += c.rowspan * c.colspan;
    }
    lengths.push_back(static_cast<double>(c.content.size()));
  }
  EmbeddingVector f;
  f.push_back(static_cast<double>(rows));
  f.push_back(static_cast<double>(cols));
  f.push_back(static_cast<double>(spans));
  f.push_back(rows * cols > 0 ? static_cast<double>(span_area) / static_cast<double>(rows * cols) : 0.0);
  for (HeaderLayout h : kHeaderLayouts) f.push_back(r.labels.header_layout == h ? 1.0 : 0.0);
  for (LineStyle s : kLineStyles) f.push_back(r.labels.line_style == s ? 1.0 : 0.0);
  f.push_back(r.labels.is_colored ? 1.0 : 0.0);
  double mean = 0, var = 0, mx = 0;
  if (!lengths.empty()) {
    mean = std::accumulate(lengths.begin(), lengths.end(), 0.0) / static_cast<double>(lengths.size());
    for (double l : lengths) {
      var += (l - mean) * (l - mean);
      mx = std::max(mx, l);
    }
    var /= static_cast<double>(lengths.size());
  }
  f.push_back(mean);
  f.push_back(std::sqrt(var));
  f.push_back(mx);
  return f;
}

inline constexpr std::size_t kStructuralFeatureCount = 4 + 3 + 5 + 1 + 3;

// Zero mean, unit variance per dimension; constant dimensions become 0.
inline std::vector<EmbeddingVector> standardize(std::vector<EmbeddingVector> pool) {
  if (pool.empty()) return pool;
  const std::size_t dim = pool.front().size();
  const double n = static_cast<double>(pool.size());
  for (std::size_t d = 0; d < dim; ++d) {
    double mean = 0;
    for (const auto& v : pool) mean += v[d];
    mean /= n;
    double var = 0;
    for (const auto& v : pool) var += (v[d] - mean) * (v[d] - mean);
    const double sd = std::sqrt(var / n);
    for (auto& v : pool) v[d] = sd > 0 ? (v[d] - mean) / sd : 0.0;
  }
  return pool;
}

inline std::vector<EmbeddingVector> structural_features(const std::vector<AnnotationRecord>& pool) {
  std::vector<EmbeddingVector> raw;
  raw.reserve(pool.size());
  for (const auto& r : pool) raw.push_back(raw_structural_features(r));
  return standardize(std::move(raw));
}

// Binary embedding file: "TNEMBV01", uint64 rows, uint64 cols, rows*cols
// float64 values, all little-endian.
inline constexpr char kEmbeddingMagic[8] = {'T', 'N', 'E', 'M', 'B', 'V', '0', '1'};

inline void write_embeddings(const std::vector<EmbeddingVector>& vs, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw PathError(path.string());
  const std::uint64_t rows = vs.size();
  const std::uint64_t cols = vs.empty() ? 0 : vs.front().size();
  out.write(kEmbeddingMagic, 8);
  out.write(reinterpret_cast<const char*>(&rows), 8);
  out.write(reinterpret_cast<const char*>(&cols), 8);
  for (const auto& v : vs) {
    if (v.size() != cols) throw DegenerateInput("embedding rows differ in length");
    out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(cols * 8));
  }
}

inline std::vector<EmbeddingVector> read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PathError(path.string());
  char magic[8];
  std::uint64_t rows = 0, cols = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&rows), 8);
  in.read(reinterpret_cast<char*>(&cols), 8);
  if (!in || std::memcmp(magic, kEmbeddingMagic, 8) != 0) {
    throw ConfigError(path.string() + " is not a TNEMBV01 embedding file");
  }
  std::vector<EmbeddingVector> out(rows, EmbeddingVector(cols));
  for (auto& v : out) {
    in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(cols * 8));
  }
  if (!in) throw ConfigError(path.string() + " is truncated");
  for (const auto& v : out) {
    for (double x : v) {
      if (!std::isfinite(x)) throw DegenerateInput(path.string() + " has non-finite entries");
    }
  }
  return out;
}

enum class Distance { euclidean, cosine };

inline double distance(std::span<const double> a, std::span<const double> b, Distance kind) {
  if (kind == Distance::euclidean) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
  }
  double dot = 0, na = 0, nb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0 || nb == 0) return (na == 0 && nb == 0) ? 0.0 : 1.0;
  return std::max(0.0, 1.0 - dot / std::sqrt(na * nb));
}

struct SelectionProblem {
  std::vector<EmbeddingVector> points;
  std::vector<std::size_t> initial;  // s0
  std::size_t budget = 0;
  Distance metric = Distance::euclidean;
};

// Greedy k-center: repeatedly takes the point farthest from its nearest
// selected center. Empty s0 starts from the point nearest the centroid. Ties
// go to the lowest index. Returns only the new picks, in selection order.
inline std::vector<std::size_t> k_center_greedy(const SelectionProblem& p) {
  const std::size_t n = p.points.size();
  std::vector<bool> chosen(n, false);
  for (std::size_t i : p.initial) {
    if (i >= n) throw ConfigError("initial index " + std::to_string(i) + " outside the pool");
    chosen[i] = true;
  }
  const std::size_t taken = static_cast<std::size_t>(std::count(chosen.begin(), chosen.end(), true));
  if (p.budget > n - taken) {
    throw ConfigError("budget " + std::to_string(p.budget) + " exceeds the " +
                      std::to_string(n - taken) + " unselected points");
  }
  std::vector<std::size_t> picks;
  if (p.budget == 0) return picks;

  const auto d = [&](std::size_t a, std::size_t b) {
    return distance(p.points[a], p.points[b], p.metric);
  };
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  const auto add_center = [&](std::size_t c) {
    chosen[c] = true;
    for (std::size_t i = 0; i < n; ++i) {
      if (!chosen[i]) nearest[i] = std::min(nearest[i], d(i, c));
    }
  };
  if (taken == 0) {
    const std::size_t dim = p.points.front().size();
    EmbeddingVector centroid(dim, 0.0);
    for (const auto& v : p.points) {
      for (std::size_t k = 0; k < dim; ++k) centroid[k] += v[k];
    }
    for (double& c : centroid) c /= static_cast<double>(n);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      const double di = distance(p.points[i], centroid, p.metric);
      if (di < best_d) {
        best_d = di;
        best = i;
      }
    }
    picks.push_back(best);
    add_center(best);
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      if (!chosen[i]) continue;
      for (std::size_t j = 0; j < n; ++j) {
        if (!chosen[j]) nearest[j] = std::min(nearest[j], d(j, i));
      }
    }
  }
  while (picks.size() < p.budget) {
    std::size_t best = n;
    double best_d = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (!chosen[i] && nearest[i] > best_d) {
        best_d = nearest[i];
        best = i;
      }
    }
    picks.push_back(best);
    add_center(best);
  }
  return picks;
}

// Largest distance from any point to its nearest center.
inline double covering_radius(const std::vector<EmbeddingVector>& points,
                              std::span<const std::size_t> centers, Distance metric = Distance::euclidean) {
  if (centers.empty()) return std::numeric_limits<double>::infinity();
  double radius = 0;
  for (const auto& x : points) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c : centers) best = std::min(best, distance(x, points[c], metric));
    radius = std::max(radius, best);
  }
  return radius;
}

enum class Strategy { coreset, random, ppl, hard_example };

inline Strategy strategy_from_string(const std::string& s) {
  if (s == "coreset") return Strategy::coreset;
  if (s == "random") return Strategy::random;
  if (s == "ppl") return Strategy::ppl;
  if (s == "hard" || s == "hard_example") return Strategy::hard_example;
  throw ConfigError("unknown strategy '" + s + "'");
}

// Baselines over `candidates` (pool indices). Random is a seeded uniform draw
// without replacement; ppl and hard_example take the highest scores first.
inline std::vector<std::size_t> baseline_select(Strategy strategy,
                                                std::vector<std::size_t> candidates,
                                                const std::optional<std::vector<double>>& scores,
                                                std::size_t budget, std::uint64_t seed) {
  budget = std::min(budget, candidates.size());
  if (strategy == Strategy::coreset) throw ConfigError("coreset is not a baseline strategy");
  if (strategy == Strategy::random) {
    Rng rng(seed);
    rng.shuffle(candidates);
    candidates.resize(budget);
    return candidates;
  }
  if (!scores) throw ConfigError("strategy needs a per-sample score vector");
  for (std::size_t c : candidates) {
    if (c >= scores->size()) throw ConfigError("score vector shorter than the pool");
  }
  std::stable_sort(candidates.begin(), candidates.end(),
                   [&](std::size_t a, std::size_t b) { return (*scores)[a] > (*scores)[b]; });
  candidates.resize(budget);
  return candidates;
}

inline std::vector<std::size_t> baseline_select(Strategy strategy, std::size_t pool_size,
                                                const std::optional<std::vector<double>>& scores,
                                                std::size_t budget, std::uint64_t seed) {
  std::vector<std::size_t> all(pool_size);
  std::iota(all.begin(), all.end(), 0);
  return baseline_select(strategy, std::move(all), scores, budget, seed);
}

// ---------------------------------------------------------------------------
// Loop harness

struct LabeledSample {
  std::size_t id;
  std::string label;
};

struct TrainedModel {
  virtual ~TrainedModel() = default;
};

class TrainerProvider {
 public:
  virtual ~TrainerProvider() = default;
  virtual std::shared_ptr<const TrainedModel> train(const std::vector<LabeledSample>& labeled) const = 0;
  virtual double evaluate(const TrainedModel& model) const = 0;
};

// 1-nearest-neighbour classifier over pool embeddings; the score is accuracy
// on a fixed test set. Ties go to the lowest labeled id.
class NearestNeighborTrainer : public TrainerProvider {
 public:
  struct Model : TrainedModel {
    std::vector<LabeledSample> samples;
  };

  NearestNeighborTrainer(std::vector<EmbeddingVector> train_points,
                         std::vector<EmbeddingVector> test_points,
                         std::vector<std::string> test_labels, Distance metric = Distance::euclidean)
      : train_(std::move(train_points)),
        test_(std::move(test_points)),
        test_labels_(std::move(test_labels)),
        metric_(metric) {}

  std::shared_ptr<const TrainedModel> train(const std::vector<LabeledSample>& labeled) const override {
    auto m = std::make_shared<Model>();
    m->samples = labeled;
    std::sort(m->samples.begin(), m->samples.end(),
              [](const LabeledSample& a, const LabeledSample& b) { return a.id < b.id; });
    return m;
  }

  double evaluate(const TrainedModel& model) const override {
    const auto& m = dynamic_cast<const Model&>(model);
    if (test_.empty() || m.samples.empty()) return 0.0;
    std::size_t correct = 0;
    for (std::size_t t = 0; t < test_.size(); ++t) {
      double best = std::numeric_limits<double>::infinity();
      const std::string* label = nullptr;
      for (const auto& s : m.samples) {
        const double d = distance(test_[t], train_[s.id], metric_);
        if (d < best) {
          best = d;
          label = &s.label;
        }
      }
      correct += label && *label == test_labels_[t];
    }
    return static_cast<double>(correct) / static_cast<double>(test_.size());
  }

 private:
  std::vector<EmbeddingVector> train_;
  std::vector<EmbeddingVector> test_;
  std::vector<std::string> test_labels_;
  Distance metric_;
};

inline std::string label_triple(const Labels& l) {
  return std::string(l.is_simple ? "simple" : "complex") + "|" + std::string(to_string(l.line_style)) +
         "|" + std::string(to_string(l.header_layout));
}

struct ActiveLearningState {
  std::vector<std::size_t> unlabeled;
  std::vector<LabeledSample> labeled;
  std::size_t budget = 0;
};

struct CurvePoint {
  std::size_t round = 0;
  std::size_t labeled_count = 0;
  double score = 0.0;
};

struct LoopResult {
  std::shared_ptr<const TrainedModel> model;
  std::vector<LabeledSample> labeled;
  std::vector<CurvePoint> curve;
  std::optional<std::string> error;  // set when the annotator failed
};

struct QueryContext {
  const std::vector<EmbeddingVector>* points = nullptr;  // needed by coreset
  std::optional<std::vector<double>> scores;             // needed by ppl / hard_example
  Distance metric = Distance::euclidean;
  std::uint64_t seed = 0;
};

using Annotator = std::function<std::string(std::size_t)>;

inline std::vector<std::size_t> query(Strategy strategy, const ActiveLearningState& s,
                                      std::size_t n, const QueryContext& ctx, std::size_t round) {
  if (strategy != Strategy::coreset) {
    return baseline_select(strategy, s.unlabeled, ctx.scores, n, mix_seed(ctx.seed, round));
  }
  if (!ctx.points) throw ConfigError("coreset needs pool embeddings");
  // Points outside U and L (held-out) are neither centers nor candidates.
  std::vector<std::size_t> members = s.unlabeled;
  for (const auto& l : s.labeled) members.push_back(l.id);
  std::sort(members.begin(), members.end());
  SelectionProblem p;
  p.metric = ctx.metric;
  p.budget = n;
  for (std::size_t k = 0; k < members.size(); ++k) p.points.push_back((*ctx.points)[members[k]]);
  for (const auto& l : s.labeled) {
    p.initial.push_back(static_cast<std::size_t>(
        std::lower_bound(members.begin(), members.end(), l.id) - members.begin()));
  }
  std::vector<std::size_t> picks = k_center_greedy(p);
  for (auto& i : picks) i = members[i];
  return picks;
}

// Query/annotate/train rounds until the labeling budget is spent or U is
// exhausted. Each round records (round, |L|, score).
inline LoopResult run_al_loop(ActiveLearningState state, Strategy strategy, std::size_t step_size,
                              const TrainerProvider& trainer, const Annotator& annotate,
                              const QueryContext& ctx) {
  if (step_size == 0) throw ConfigError("step_size must be >= 1");
  LoopResult out;
  out.model = trainer.train(state.labeled);
  out.curve.push_back({0, state.labeled.size(), trainer.evaluate(*out.model)});
  std::size_t spent = 0;
  for (std::size_t round = 1; spent < state.budget && !state.unlabeled.empty(); ++round) {
    const std::size_t n = std::min({step_size, state.budget - spent, state.unlabeled.size()});
    const auto picks = query(strategy, state, n, ctx, round);
    for (std::size_t id : picks) {
      std::string label;
      try {
        label = annotate(id);
      } catch (const std::exception& e) {
        out.error = "annotator failed on sample " + std::to_string(id) + ": " + e.what();
        out.labeled = state.labeled;
        return out;
      }
      state.unlabeled.erase(std::find(state.unlabeled.begin(), state.unlabeled.end(), id));
      state.labeled.push_back({id, std::move(label)});
      ++spent;
    }
    out.model = trainer.train(state.labeled);
    out.curve.push_back({round, state.labeled.size(), trainer.evaluate(*out.model)});
  }
  out.labeled = state.labeled;
  return out;
}

}  // namespace tablenet
