#pragma once

// Independent reference implementations used as test oracles. None of these
// share code with the library beyond its plain data types.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "tablenet/tablenet.hpp"

namespace oracle {

// Paints every anchor's rectangle onto a counter grid. The schema tiles the
// rectangle iff every counter ends at exactly 1 and the covered area equals
// rows * cols.
struct Tiling {
  bool exact = false;
  std::size_t area = 0;
  std::vector<std::vector<int>> owner;  // anchor ordinal per position, -1 if none
};

inline Tiling tile(const tablenet::TableSchema& s) {
  Tiling t;
  std::vector<std::vector<int>> hits(s.n_rows, std::vector<int>(s.n_cols, 0));
  t.owner.assign(s.n_rows, std::vector<int>(s.n_cols, -1));
  int ordinal = 0;
  bool ok = true;
  for (std::size_t r = 0; r < s.n_rows; ++r) {
    for (std::size_t c = 0; c < s.n_cols; ++c) {
      const int rs = s.row_spans(r, c), cs = s.col_spans(r, c);
      if (rs == 0 && cs == 0) continue;
      if (rs <= 0 || cs <= 0) {
        ok = false;
        continue;
      }
      t.area += static_cast<std::size_t>(rs * cs);
      for (std::size_t dr = 0; dr < static_cast<std::size_t>(rs); ++dr) {
        for (std::size_t dc = 0; dc < static_cast<std::size_t>(cs); ++dc) {
          if (r + dr >= s.n_rows || c + dc >= s.n_cols) {
            ok = false;
            continue;
          }
          ++hits[r + dr][c + dc];
          t.owner[r + dr][c + dc] = ordinal;
        }
      }
      ++ordinal;
    }
  }
  for (const auto& row : hits) {
    for (int h : row) ok = ok && h == 1;
  }
  t.exact = ok && t.area == s.n_rows * s.n_cols;
  return t;
}

// Occupancy of a grid rebuilt from its cell list alone.
inline std::vector<std::vector<int>> occupancy(const tablenet::TableGrid& g) {
  std::vector<std::vector<int>> occ(g.rows(), std::vector<int>(g.cols(), -1));
  for (std::size_t i = 0; i < g.cells().size(); ++i) {
    const auto& c = g.cells()[i];
    for (std::size_t r = c.row_start; r < c.row_start + c.rowspan; ++r) {
      for (std::size_t k = c.col_start; k < c.col_start + c.colspan; ++k) occ[r][k] = static_cast<int>(i);
    }
  }
  return occ;
}

// ---------------------------------------------------------------------------
// Tree edit distance by exhaustive search over edit mappings. A mapping is a
// partial matching that preserves ancestry and left-to-right order; its cost
// is substitutions on matched pairs plus deletions and insertions of the rest.

struct TreeIndex {
  std::vector<std::size_t> parent;     // SIZE_MAX for the root
  std::vector<std::size_t> pre;        // preorder rank per node
  std::vector<std::size_t> last_desc;  // largest preorder rank in the subtree
};

inline TreeIndex index_tree(const tablenet::TableTree& t) {
  TreeIndex ix;
  const std::size_t n = t.size();
  ix.parent.assign(n, SIZE_MAX);
  ix.pre.assign(n, 0);
  ix.last_desc.assign(n, 0);
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t c : t.children[v]) ix.parent[c] = v;
  }
  std::size_t counter = 0;
  std::function<void(std::size_t)> walk = [&](std::size_t v) {
    ix.pre[v] = counter++;
    for (std::size_t c : t.children[v]) walk(c);
    ix.last_desc[v] = counter - 1;
  };
  if (n) walk(0);
  return ix;
}

inline bool is_ancestor(const TreeIndex& ix, std::size_t a, std::size_t d) {
  return a != d && ix.pre[a] < ix.pre[d] && ix.pre[d] <= ix.last_desc[a];
}

inline bool left_of(const TreeIndex& ix, std::size_t a, std::size_t b) {
  return ix.pre[a] < ix.pre[b] && !is_ancestor(ix, a, b);
}

inline double exhaustive_ted(const tablenet::TableTree& a, const tablenet::TableTree& b,
                             const tablenet::EditCosts& costs = {}) {
  const TreeIndex ia = index_tree(a), ib = index_tree(b);
  const std::size_t n = a.size(), m = b.size();
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  std::vector<bool> used(m, false);
  double best = std::numeric_limits<double>::infinity();

  const auto compatible = [&](std::size_t i, std::size_t j) {
    for (const auto& [pi, pj] : pairs) {
      if (is_ancestor(ia, pi, i) != is_ancestor(ib, pj, j)) return false;
      if (is_ancestor(ia, i, pi) != is_ancestor(ib, j, pj)) return false;
      if (left_of(ia, pi, i) != left_of(ib, pj, j)) return false;
      if (left_of(ia, i, pi) != left_of(ib, j, pj)) return false;
    }
    return true;
  };

  // cost so far counts matched substitutions plus deleted a-nodes.
  std::function<void(std::size_t, double)> search = [&](std::size_t i, double cost) {
    if (cost >= best) return;
    if (i == n) {
      const double total = cost + costs.insert * static_cast<double>(m - pairs.size());
      best = std::min(best, total);
      return;
    }
    for (std::size_t j = 0; j < m; ++j) {
      if (used[j] || !compatible(i, j)) continue;
      used[j] = true;
      pairs.emplace_back(i, j);
      search(i + 1, cost + costs.substitute(a.labels[i], b.labels[j]));
      pairs.pop_back();
      used[j] = false;
    }
    search(i + 1, cost + costs.remove);
  };
  search(0, 0.0);
  return best;
}

// Random ordered tree with `n` nodes: each new node picks a uniform parent
// among existing nodes and is appended as its last child, then the tree is
// relabelled into preorder.
inline tablenet::TableTree random_tree(std::mt19937_64& gen, std::size_t n,
                                       const std::vector<std::string>& tags) {
  std::vector<std::vector<std::size_t>> kids(n);
  std::vector<std::string> lab(n);
  std::uniform_int_distribution<std::size_t> pick_tag(0, tags.size() - 1);
  for (std::size_t v = 0; v < n; ++v) {
    lab[v] = tags[pick_tag(gen)];
    if (v > 0) kids[std::uniform_int_distribution<std::size_t>(0, v - 1)(gen)].push_back(v);
  }
  tablenet::TableTree t;
  std::function<void(std::size_t, std::optional<std::size_t>)> emit = [&](std::size_t v,
                                                                          std::optional<std::size_t> parent) {
    const std::size_t id = t.add({lab[v], 1, 1, {}}, parent);
    for (std::size_t c : kids[v]) emit(c, id);
  };
  if (n) emit(0, std::nullopt);
  return t;
}

// ---------------------------------------------------------------------------
// Correlation references.

inline double kendall_tau_b_pairs(const std::vector<double>& x, const std::vector<double>& y) {
  long concordant = 0, discordant = 0, tie_x = 0, tie_y = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    for (std::size_t j = i + 1; j < x.size(); ++j) {
      const double dx = x[i] - x[j], dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        ++tie_x;
      } else if (dy == 0) {
        ++tie_y;
      } else if ((dx > 0) == (dy > 0)) {
        ++concordant;
      } else {
        ++discordant;
      }
    }
  }
  const double n1 = static_cast<double>(concordant + discordant + tie_x);
  const double n2 = static_cast<double>(concordant + discordant + tie_y);
  return static_cast<double>(concordant - discordant) / std::sqrt(n1 * n2);
}

// Rank by counting: rank(v) = #less + (#equal + 1) / 2.
inline std::vector<double> counting_ranks(const std::vector<double>& x) {
  std::vector<double> r(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double less = 0, equal = 0;
    for (double v : x) {
      less += v < x[i];
      equal += v == x[i];
    }
    r[i] = less + (equal + 1) / 2.0;
  }
  return r;
}

inline double pearson_textbook(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    syy += y[i] * y[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / std::sqrt((n * sxx - sx * sx) * (n * syy - sy * sy));
}

// ---------------------------------------------------------------------------
// k-center: optimal covering radius by enumerating every center subset of
// size |s0| + b that contains s0.

inline double euclid(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

inline double radius(const std::vector<std::vector<double>>& pts, const std::vector<std::size_t>& centers) {
  double worst = 0;
  for (const auto& p : pts) {
    double near = std::numeric_limits<double>::infinity();
    for (std::size_t c : centers) near = std::min(near, euclid(p, pts[c]));
    worst = std::max(worst, near);
  }
  return worst;
}

inline double optimal_radius(const std::vector<std::vector<double>>& pts, const std::vector<std::size_t>& s0,
                             std::size_t b) {
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (std::find(s0.begin(), s0.end(), i) == s0.end()) free.push_back(i);
  }
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> mask(free.size(), false);
  std::fill(mask.begin(), mask.begin() + static_cast<std::ptrdiff_t>(b), true);
  do {
    std::vector<std::size_t> centers = s0;
    for (std::size_t k = 0; k < free.size(); ++k) {
      if (mask[k]) centers.push_back(free[k]);
    }
    best = std::min(best, radius(pts, centers));
  } while (std::prev_permutation(mask.begin(), mask.end()));
  return best;
}

// ---------------------------------------------------------------------------
// Table fixtures.

inline tablenet::TableGrid unit_grid(std::size_t rows, std::size_t cols, bool header_row = true) {
  std::vector<tablenet::Cell> cells;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      cells.push_back({r, c, 1, 1, header_row && r == 0, "r" + std::to_string(r) + "c" + std::to_string(c)});
    }
  }
  return tablenet::TableGrid::build(rows, cols, std::move(cells));
}

inline std::string doc(const std::string& table) { return "<html><body>" + table + "</body></html>"; }

// Hand-built broken tables, `per_kind` of each defect kind, sizes varying
// with the ordinal. Each entry names the kind it must be reported as.
struct BrokenTable {
  tablenet::DefectKind kind;
  std::string html;
};

inline std::string plain_rows(std::size_t rows, std::size_t cols) {
  std::string out;
  for (std::size_t r = 0; r < rows; ++r) {
    out += "<tr>";
    for (std::size_t c = 0; c < cols; ++c) out += "<td>" + std::to_string(r * cols + c) + "</td>";
    out += "</tr>";
  }
  return out;
}

inline std::vector<BrokenTable> broken_tables(std::size_t per_kind) {
  using tablenet::DefectKind;
  std::vector<BrokenTable> out;
  for (std::size_t k = 0; k < per_kind; ++k) {
    const std::size_t rows = 2 + k % 4, cols = 2 + k % 3;
    const std::string body = plain_rows(rows, cols);
    // One extra cell in the last row.
    out.push_back({DefectKind::ragged_rows,
                   "<table>" + body + plain_rows(1, cols + 1) + "</table>"});
    // A colspan running into a cell held by a rowspan from above.
    out.push_back({DefectKind::overlapping_spans, "<table><tr><td>a</td><td rowspan=\"2\">b</td>" +
                                                      std::string(k % 2 ? "<td>x</td><td>y</td>" : "") +
                                                      "</tr><tr><td colspan=\"2\">c</td>" +
                                                      std::string(k % 2 ? "<td>z</td>" : "") + "</tr>" +
                                                      "</table>"});
    out.push_back({DefectKind::span_out_of_bounds, "<table>" + body + "<tr><td rowspan=\"" +
                                                       std::to_string(2 + k) + "\">x</td>" +
                                                       plain_rows(1, cols - 1).substr(4) + "</table>"});
    const char* alien[] = {"div", "span", "p", "img", "script"};
    out.push_back({DefectKind::disallowed_tag, "<table>" + body.substr(0, body.size() - 10) + "<" +
                                                   alien[k % 5] + ">q</" + alien[k % 5] + ">" +
                                                   body.substr(body.size() - 10) + "</table>"});
    out.push_back({DefectKind::empty_structure, k % 2 ? "<table></table>" : "<table><tr></tr></table>"});
    out.push_back({DefectKind::missing_table, k % 2 ? "<p>" + std::to_string(k) + "</p>" : "<div>no table</div>"});
  }
  return out;
}

}  // namespace oracle
