#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "tablenet/error.hpp"

namespace tablenet {

namespace detail {

inline void check_pair(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size()) {
    throw DegenerateInput("length mismatch: " + std::to_string(xs.size()) + " vs " +
                          std::to_string(ys.size()));
  }
  if (xs.size() < 2) throw DegenerateInput("need at least two observations");
}

// 1-based ranks with ties sharing their average rank.
inline std::vector<double> average_ranks(std::span<const double> xs) {
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });
  std::vector<double> ranks(xs.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && xs[order[j + 1]] == xs[order[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

}  // namespace detail

inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  detail::check_pair(xs, ys);
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx;
    const double dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw DegenerateInput("zero variance");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline double spearman(std::span<const double> xs, std::span<const double> ys) {
  detail::check_pair(xs, ys);
  const auto rx = detail::average_ranks(xs);
  const auto ry = detail::average_ranks(ys);
  return pearson(rx, ry);
}

// Tau-b: (C - D) / sqrt((n0 - n1)(n0 - n2)), with n1, n2 the tied pairs in
// each variable. Quadratic; inputs here are small rank lists.
inline double kendall_tau(std::span<const double> xs, std::span<const double> ys) {
  detail::check_pair(xs, ys);
  long long concordant = 0, discordant = 0, tied_x = 0, tied_y = 0;
  const std::size_t n = xs.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = xs[i] - xs[j];
      const double dy = ys[i] - ys[j];
      if (dx == 0.0) ++tied_x;
      if (dy == 0.0) ++tied_y;
      if (dx == 0.0 || dy == 0.0) continue;
      ((dx > 0) == (dy > 0) ? concordant : discordant)++;
    }
  }
  const long long pairs = static_cast<long long>(n * (n - 1) / 2);
  const double denom = std::sqrt(static_cast<double>(pairs - tied_x) *
                                 static_cast<double>(pairs - tied_y));
  if (denom == 0.0) throw DegenerateInput("zero variance");
  return std::clamp(static_cast<double>(concordant - discordant) / denom, -1.0, 1.0);
}

struct CorrelationSummary {
  double spearman = 0;
  double pearson = 0;
  double kendall = 0;
};

inline CorrelationSummary correlate(std::span<const double> xs, std::span<const double> ys) {
  return {spearman(xs, ys), pearson(xs, ys), kendall_tau(xs, ys)};
}

}  // namespace tablenet
