#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "tablenet/checker.hpp"
#include "tablenet/record.hpp"
#include "tablenet/table.hpp"

namespace tablenet {

enum class TedsMode { full, structure_only };

struct NodeLabel {
  std::string tag;
  std::size_t rowspan = 1;
  std::size_t colspan = 1;
  std::string text;

  friend bool operator==(const NodeLabel&, const NodeLabel&) = default;
};

// Ordered rooted tree stored in preorder; node 0 is the root.
struct TableTree {
  std::vector<NodeLabel> labels;
  std::vector<std::vector<std::size_t>> children;

  std::size_t size() const { return labels.size(); }

  std::size_t add(NodeLabel label, std::optional<std::size_t> parent = std::nullopt) {
    labels.push_back(std::move(label));
    children.emplace_back();
    const std::size_t id = labels.size() - 1;
    if (parent) children[*parent].push_back(id);
    return id;
  }
};

class InvalidTableError : public Error {
 public:
  explicit InvalidTableError(ValidationReport report)
      : Error("InvalidTableError", describe(report)), report_(std::move(report)) {}
  const ValidationReport& report() const noexcept { return report_; }

 private:
  static std::string describe(const ValidationReport& r) {
    std::string out = "invalid table";
    for (const auto& d : r.defects) {
      out += "; " + std::string(to_string(d.kind)) + " at " + d.location;
    }
    return out;
  }
  ValidationReport report_;
};

struct TreeOptions {
  bool merge_th_td = false;  // label header and body cells alike
};

inline TableTree tree_from_grid(const TableGrid& g, TedsMode mode, TreeOptions opt = {}) {
  TableTree t;
  const std::size_t root = t.add({"table", 1, 1, {}});
  std::size_t next = 0;
  for (std::size_t r = 0; r < g.rows(); ++r) {
    const std::size_t tr = t.add({"tr", 1, 1, {}}, root);
    while (next < g.cells().size() && g.cells()[next].row_start == r) {
      const Cell& c = g.cells()[next++];
      const std::string tag = (c.is_header && !opt.merge_th_td) ? "th" : "td";
      t.add({tag, c.rowspan, c.colspan, mode == TedsMode::full ? c.content : std::string{}}, tr);
    }
  }
  return t;
}

// thead/tbody are flattened: rows hang directly off the table node.
inline TableTree tree_from_html(std::string_view html, TedsMode mode, TreeOptions opt = {}) {
  TableAnalysis a = analyze_table(html);
  if (!a.valid()) throw InvalidTableError(ValidationReport{false, std::move(a.defects)});
  return tree_from_grid(*a.grid, mode, opt);
}

namespace detail {

inline std::vector<char32_t> code_points(std::string_view s) {
  std::vector<char32_t> out;
  for (std::size_t i = 0; i < s.size();) {
    const auto b = static_cast<unsigned char>(s[i]);
    std::size_t n = utf8_length(b);
    if (i + n > s.size()) n = 1;
    char32_t cp = n == 1 ? b : (b & (0xff >> (n + 1)));
    for (std::size_t k = 1; k < n; ++k) cp = (cp << 6) | (static_cast<unsigned char>(s[i + k]) & 0x3f);
    out.push_back(cp);
    i += n;
  }
  return out;
}

}  // namespace detail

// Levenshtein distance over code points divided by the longer length.
inline double normalized_edit_distance(std::string_view a, std::string_view b) {
  const auto x = detail::code_points(a);
  const auto y = detail::code_points(b);
  if (x.empty() && y.empty()) return 0.0;
  std::vector<std::size_t> prev(y.size() + 1), cur(y.size() + 1);
  for (std::size_t j = 0; j <= y.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= x.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= y.size(); ++j) {
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x[i - 1] != y[j - 1])});
    }
    std::swap(prev, cur);
  }
  return static_cast<double>(prev[y.size()]) / static_cast<double>(std::max(x.size(), y.size()));
}

struct EditCosts {
  double insert = 1.0;
  double remove = 1.0;

  double substitute(const NodeLabel& a, const NodeLabel& b) const {
    if (a.tag != b.tag || a.rowspan != b.rowspan || a.colspan != b.colspan) return 1.0;
    return normalized_edit_distance(a.text, b.text);
  }
};

// Ordered tree edit distance by the keyroots dynamic program.
inline double tree_edit_distance(const TableTree& a, const TableTree& b, const EditCosts& costs = {}) {
  struct Post {
    std::vector<std::size_t> node;      // postorder position -> preorder id
    std::vector<std::size_t> leftmost;  // postorder position -> leftmost leaf (postorder)
    std::vector<std::size_t> keyroots;
  };
  const auto index = [](const TableTree& t) {
    Post p;
    const std::size_t n = t.size();
    p.node.reserve(n);
    p.leftmost.assign(n, 0);
    if (n == 0) return p;
    std::vector<std::size_t> post_of(n);
    // iterative postorder
    std::vector<std::pair<std::size_t, std::size_t>> stack{{0, 0}};
    while (!stack.empty()) {
      auto& [v, k] = stack.back();
      if (k < t.children[v].size()) {
        const std::size_t child = t.children[v][k++];
        stack.emplace_back(child, 0);
      } else {
        post_of[v] = p.node.size();
        p.node.push_back(v);
        stack.pop_back();
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t v = p.node[i];
      while (!t.children[v].empty()) v = t.children[v].front();
      p.leftmost[i] = post_of[v];
    }
    std::map<std::size_t, std::size_t> highest;  // leftmost leaf -> highest node with it
    for (std::size_t i = 0; i < n; ++i) highest[p.leftmost[i]] = i;
    for (const auto& [leaf, node] : highest) p.keyroots.push_back(node);
    std::sort(p.keyroots.begin(), p.keyroots.end());
    return p;
  };
  const Post pa = index(a);
  const Post pb = index(b);
  const std::size_t n = a.size();
  const std::size_t m = b.size();
  if (n == 0) return static_cast<double>(m) * costs.insert;
  if (m == 0) return static_cast<double>(n) * costs.remove;

  std::vector<double> td(n * m, 0.0);
  std::vector<double> fd((n + 1) * (m + 1), 0.0);
  const auto FD = [&](std::size_t i, std::size_t j) -> double& { return fd[i * (m + 1) + j]; };

  for (std::size_t ki : pa.keyroots) {
    for (std::size_t kj : pb.keyroots) {
      const std::size_t li = pa.leftmost[ki];
      const std::size_t lj = pb.leftmost[kj];
      // forest positions are offset by one: index x maps to node li + x - 1
      const std::size_t rows = ki - li + 2;
      const std::size_t cols = kj - lj + 2;
      FD(0, 0) = 0.0;
      for (std::size_t x = 1; x < rows; ++x) FD(x, 0) = FD(x - 1, 0) + costs.remove;
      for (std::size_t y = 1; y < cols; ++y) FD(0, y) = FD(0, y - 1) + costs.insert;
      for (std::size_t x = 1; x < rows; ++x) {
        const std::size_t i = li + x - 1;
        for (std::size_t y = 1; y < cols; ++y) {
          const std::size_t j = lj + y - 1;
          const double del = FD(x - 1, y) + costs.remove;
          const double ins = FD(x, y - 1) + costs.insert;
          if (pa.leftmost[i] == li && pb.leftmost[j] == lj) {
            const double sub = FD(x - 1, y - 1) +
                               costs.substitute(a.labels[pa.node[i]], b.labels[pb.node[j]]);
            FD(x, y) = std::min({del, ins, sub});
            td[i * m + j] = FD(x, y);
          } else {
            const std::size_t px = pa.leftmost[i] - li;  // forest before subtree i
            const std::size_t py = pb.leftmost[j] - lj;
            FD(x, y) = std::min({del, ins, FD(px, py) + td[i * m + j]});
          }
        }
      }
    }
  }
  return td[(n - 1) * m + (m - 1)];
}

inline double teds(const TableTree& a, const TableTree& b, const EditCosts& costs = {}) {
  const double denom = static_cast<double>(std::max(a.size(), b.size()));
  if (denom == 0) return 1.0;
  return std::clamp(1.0 - tree_edit_distance(a, b, costs) / denom, 0.0, 1.0);
}

inline double teds(std::string_view html_a, std::string_view html_b, TedsMode mode,
                   TreeOptions opt = {}) {
  return teds(tree_from_html(html_a, mode, opt), tree_from_html(html_b, mode, opt));
}

class AlignmentError : public Error {
 public:
  AlignmentError(std::vector<std::string> pred_only, std::vector<std::string> gold_only)
      : Error("AlignmentError", describe(pred_only, gold_only)),
        pred_only_(std::move(pred_only)),
        gold_only_(std::move(gold_only)) {}
  const std::vector<std::string>& pred_only() const { return pred_only_; }
  const std::vector<std::string>& gold_only() const { return gold_only_; }

 private:
  static std::string describe(const std::vector<std::string>& p, const std::vector<std::string>& g) {
    std::string out = "manifests do not align by id";
    if (!p.empty()) out += "; only in predictions: " + join(p);
    if (!g.empty()) out += "; only in gold: " + join(g);
    return out;
  }
  static std::string join(const std::vector<std::string>& ids) {
    std::string s;
    for (const auto& id : ids) s += (s.empty() ? "" : ", ") + id;
    return s;
  }
  std::vector<std::string> pred_only_, gold_only_;
};

struct SubsetMean {
  double mean = 0.0;
  std::size_t count = 0;
};

struct TedsRecordScore {
  std::string id;
  double score = 0.0;
  bool invalid = false;
};

struct TedsReport {
  TedsMode mode = TedsMode::full;
  std::size_t count = 0;
  std::size_t invalid = 0;
  double overall = 0.0;
  // label name -> {label value true, label value false}
  std::map<std::string, std::pair<SubsetMean, SubsetMean>> subsets;
  std::vector<TedsRecordScore> records;
};

inline json to_json(const TedsReport& r) {
  json subsets = json::object();
  for (const auto& [name, pair] : r.subsets) {
    subsets[name] = {{"true", {{"mean", pair.first.mean}, {"count", pair.first.count}}},
                     {"false", {{"mean", pair.second.mean}, {"count", pair.second.count}}}};
  }
  json per = json::array();
  for (const auto& s : r.records) per.push_back({{"id", s.id}, {"teds", s.score}, {"invalid", s.invalid}});
  return {{"mode", r.mode == TedsMode::full ? "full" : "structure"},
          {"count", r.count},
          {"invalid", r.invalid},
          {"overall", r.overall},
          {"subsets", std::move(subsets)},
          {"records", std::move(per)}};
}

// Scores each prediction against the gold record with the same id. Invalid
// predictions score 0 and are counted. Subsets split by the gold labels.
inline TedsReport batch_teds(const std::vector<AnnotationRecord>& pred,
                             const std::vector<AnnotationRecord>& gold, TedsMode mode,
                             TreeOptions opt = {}) {
  std::map<std::string, const AnnotationRecord*> by_id;
  for (const auto& p : pred) by_id[p.id] = &p;
  std::vector<std::string> gold_only, pred_only;
  std::set<std::string> gold_ids;
  for (const auto& g : gold) {
    gold_ids.insert(g.id);
    if (!by_id.count(g.id)) gold_only.push_back(g.id);
  }
  for (const auto& p : pred) {
    if (!gold_ids.count(p.id)) pred_only.push_back(p.id);
  }
  if (!gold_only.empty() || !pred_only.empty()) throw AlignmentError(pred_only, gold_only);

  TedsReport report;
  report.mode = mode;
  const std::array<std::pair<const char*, bool Labels::*>, 3> labels = {
      {{"is_simple", &Labels::is_simple}, {"is_colored", &Labels::is_colored}, {"is_lined", &Labels::is_lined}}};
  std::map<std::string, std::pair<double, double>> sums;
  double total = 0.0;
  for (const auto& g : gold) {
    TedsRecordScore s{g.id, 0.0, false};
    try {
      const TableTree gt = tree_from_html(g.html, mode, opt);
      try {
        s.score = teds(tree_from_html(by_id.at(g.id)->html, mode, opt), gt);
      } catch (const InvalidTableError&) {
        s.invalid = true;
        ++report.invalid;
      }
    } catch (const InvalidTableError& e) {
      throw ConfigError("gold record " + g.id + " is invalid: " + e.what());
    }
    total += s.score;
    for (const auto& [name, member] : labels) {
      auto& [t, f] = report.subsets[name];
      auto& [st, sf] = sums[name];
      if (g.labels.*member) {
        st += s.score;
        ++t.count;
      } else {
        sf += s.score;
        ++f.count;
      }
    }
    report.records.push_back(std::move(s));
  }
  report.count = gold.size();
  report.overall = gold.empty() ? 0.0 : total / static_cast<double>(gold.size());
  for (auto& [name, pair] : report.subsets) {
    const auto& [st, sf] = sums[name];
    if (pair.first.count) pair.first.mean = st / static_cast<double>(pair.first.count);
    if (pair.second.count) pair.second.mean = sf / static_cast<double>(pair.second.count);
  }
  return report;
}

}  // namespace tablenet
