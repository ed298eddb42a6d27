#include <gtest/gtest.h>

#include "support.hpp"

using namespace tablenet;

namespace {

TableTree chain(const std::vector<std::string>& tags) {
  TableTree t;
  std::optional<std::size_t> parent;
  for (const auto& tag : tags) parent = t.add({tag, 1, 1, {}}, parent);
  return t;
}

std::string filled_table(const std::vector<std::string>& row0, const std::vector<std::string>& row1) {
  std::string html = "<table><tr>";
  for (const auto& v : row0) html += "<th>" + v + "</th>";
  html += "</tr><tr>";
  for (const auto& v : row1) html += "<td>" + v + "</td>";
  return html + "</tr></table>";
}

}  // namespace

TEST(TreeFromHtml, OneCellTableHasThreeNodes) {
  const TableTree t = tree_from_html("<table><tr><td>x</td></tr></table>", TedsMode::full);
  ASSERT_EQ(t.size(), 3u);
  EXPECT_EQ(t.labels[0].tag, "table");
  EXPECT_EQ(t.labels[1].tag, "tr");
  EXPECT_EQ(t.labels[2].tag, "td");
  EXPECT_EQ(t.labels[2].text, "x");
}

TEST(TreeFromHtml, StructureOnlyDropsTextButKeepsShape) {
  const std::string html = filled_table({"a", "b"}, {"1", "2"});
  const TableTree full = tree_from_html(html, TedsMode::full);
  const TableTree bare = tree_from_html(html, TedsMode::structure_only);
  EXPECT_EQ(full.children, bare.children);
  EXPECT_EQ(full.labels[2].text, "a");
  EXPECT_EQ(bare.labels[2].text, "");
}

TEST(TreeFromHtml, SectionWrappersAreFlattened) {
  const TableTree plain = tree_from_html("<table><tr><td>a</td></tr><tr><td>b</td></tr></table>", TedsMode::full);
  const TableTree wrapped =
      tree_from_html("<table><tbody><tr><td>a</td></tr><tr><td>b</td></tr></tbody></table>", TedsMode::full);
  EXPECT_EQ(plain.labels, wrapped.labels);
  EXPECT_EQ(plain.children, wrapped.children);
}

TEST(TreeFromHtml, InvalidTableCarriesTheReport) {
  try {
    tree_from_html("<table><tr><td>a</td></tr><tr><td>b</td><td>c</td></tr></table>", TedsMode::full);
    FAIL();
  } catch (const InvalidTableError& e) {
    ASSERT_FALSE(e.report().defects.empty());
    EXPECT_EQ(e.report().defects.front().kind, DefectKind::ragged_rows);
  }
}

TEST(NormalizedEditDistance, CountsCodePoints) {
  EXPECT_DOUBLE_EQ(normalized_edit_distance("kitten", "sitting"), 3.0 / 7.0);
  EXPECT_DOUBLE_EQ(normalized_edit_distance("", ""), 0.0);
  EXPECT_DOUBLE_EQ(normalized_edit_distance("中国", "中文"), 0.5);
}

TEST(TreeEditDistance, IdenticalTreesAreAtZero) {
  std::mt19937_64 gen(1);
  const TableTree t = oracle::random_tree(gen, 8, {"a", "b"});
  EXPECT_EQ(tree_edit_distance(t, t), 0.0);
}

TEST(TreeEditDistance, SingleRelabelCostsOne) {
  EXPECT_EQ(tree_edit_distance(chain({"td"}), chain({"th"})), 1.0);
}

TEST(TreeEditDistance, KnownSmallCases) {
  // Deleting the middle of a chain keeps the ends connected.
  EXPECT_EQ(tree_edit_distance(chain({"a", "b", "c"}), chain({"a", "c"})), 1.0);
  TableTree fan;
  const auto r = fan.add({"a", 1, 1, {}});
  fan.add({"b", 1, 1, {}}, r);
  fan.add({"c", 1, 1, {}}, r);
  // a(b c) vs a(b(c)): c must move, which costs a delete plus an insert.
  EXPECT_EQ(tree_edit_distance(fan, chain({"a", "b", "c"})), 2.0);
  EXPECT_EQ(oracle::exhaustive_ted(fan, chain({"a", "b", "c"})), 2.0);
}

TEST(TreeEditDistance, MatchesExhaustiveMappingSearch) {
  std::mt19937_64 gen(20240601);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + gen() % 6, m = 1 + gen() % 6;
    const TableTree a = oracle::random_tree(gen, n, {"x", "y", "z"});
    const TableTree b = oracle::random_tree(gen, m, {"x", "y", "z"});
    ASSERT_EQ(tree_edit_distance(a, b), oracle::exhaustive_ted(a, b)) << "trial " << trial;
  }
}

TEST(TreeEditDistance, FractionalSubstitutionsMatchTheOracle) {
  std::mt19937_64 gen(77);
  const std::vector<std::string> words = {"ab", "abc", "b", "bca", ""};
  for (int trial = 0; trial < 100; ++trial) {
    TableTree a = oracle::random_tree(gen, 1 + gen() % 5, {"td", "th"});
    TableTree b = oracle::random_tree(gen, 1 + gen() % 5, {"td", "th"});
    for (auto& l : a.labels) l.text = words[gen() % words.size()];
    for (auto& l : b.labels) l.text = words[gen() % words.size()];
    EXPECT_NEAR(tree_edit_distance(a, b), oracle::exhaustive_ted(a, b), 1e-12) << "trial " << trial;
  }
}

TEST(Teds, SelfSimilarityIsOne) {
  const std::string html = filled_table({"a", "b"}, {"1", "2"});
  EXPECT_EQ(teds(html, html, TedsMode::full), 1.0);
  EXPECT_EQ(teds(html, html, TedsMode::structure_only), 1.0);
}

TEST(Teds, OneReplacedTextCostsOneOverN) {
  const std::string gold = filled_table({"a", "b"}, {"hello", "2"});
  const std::string pred = filled_table({"a", "b"}, {"zzzzz", "2"});
  const auto tg = tree_from_html(gold, TedsMode::full);
  const double n = static_cast<double>(tg.size());
  EXPECT_DOUBLE_EQ(teds(pred, gold, TedsMode::full), 1.0 - 1.0 / n);
  EXPECT_DOUBLE_EQ(oracle::exhaustive_ted(tree_from_html(pred, TedsMode::full), tg), 1.0);
  EXPECT_EQ(teds(pred, gold, TedsMode::structure_only), 1.0);
}

TEST(Teds, SymmetricAndBounded) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 200; ++trial) {
    const TableTree a = oracle::random_tree(gen, 1 + gen() % 10, {"td", "th", "tr"});
    const TableTree b = oracle::random_tree(gen, 1 + gen() % 10, {"td", "th", "tr"});
    const double ab = teds(a, b), ba = teds(b, a);
    EXPECT_NEAR(ab, ba, 1e-12);
    EXPECT_GE(ab, 0.0);
    EXPECT_LE(ab, 1.0);
  }
}

TEST(Teds, DeletingMoreLeavesScoresLower) {
  std::mt19937_64 gen(9);
  for (int trial = 0; trial < 50; ++trial) {
    const TableTree base = oracle::random_tree(gen, 10, {"td", "th"});
    std::vector<std::size_t> leaves;
    for (std::size_t v = 0; v < base.size(); ++v) {
      if (base.children[v].empty() && v != 0) leaves.push_back(v);
    }
    double previous = 1.0;
    for (std::size_t k = 1; k <= leaves.size() && k < base.size(); ++k) {
      // Rebuild without the first k leaves.
      std::set<std::size_t> dropped(leaves.begin(), leaves.begin() + static_cast<std::ptrdiff_t>(k));
      TableTree pruned;
      std::function<void(std::size_t, std::optional<std::size_t>)> copy = [&](std::size_t v,
                                                                              std::optional<std::size_t> p) {
        const std::size_t id = pruned.add(base.labels[v], p);
        for (std::size_t c : base.children[v]) {
          if (!dropped.count(c)) copy(c, id);
        }
      };
      copy(0, std::nullopt);
      const double score = teds(base, pruned);
      EXPECT_LT(score, previous) << "trial " << trial << " k " << k;
      previous = score;
    }
  }
}

TEST(Teds, StructureOnlyIgnoresInfill) {
  GenerationRequest req;
  const TemplateProvider provider(3);
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    Rng rng(seed);
    const TableSchema s = sample_schema(req, seed % 2 == 0, rng);
    const std::string skeleton = grid_to_html(grid_from_schema(s), s.style);
    const std::string headed = provider.fill_headers(skeleton, "Mobile data plans", req.domain, req.language);
    const std::string filled = provider.fill_bodies(headed, "Mobile data plans", req.domain, req.language, 1).front();
    EXPECT_EQ(teds(filled, skeleton, TedsMode::structure_only), 1.0);
    EXPECT_LT(teds(filled, skeleton, TedsMode::full), 1.0);
  }
}

TEST(BatchTeds, IdenticalManifestsScoreOne) {
  std::vector<AnnotationRecord> gold;
  for (int i = 0; i < 4; ++i) {
    gold.push_back(make_record("g" + std::to_string(i), oracle::unit_grid(2, 2 + i), StyleSpec{}, "t", Language::en));
  }
  const TedsReport r = batch_teds(gold, gold, TedsMode::full);
  EXPECT_EQ(r.overall, 1.0);
  EXPECT_EQ(r.invalid, 0u);
  for (const auto& [name, pair] : r.subsets) {
    if (pair.first.count) { EXPECT_EQ(pair.first.mean, 1.0) << name; }
    if (pair.second.count) { EXPECT_EQ(pair.second.mean, 1.0) << name; }
  }
}

TEST(BatchTeds, InvalidPredictionsScoreZero) {
  std::vector<AnnotationRecord> gold, pred;
  for (int i = 0; i < 4; ++i) {
    gold.push_back(make_record("g" + std::to_string(i), oracle::unit_grid(2, 3), StyleSpec{}, "t", Language::en));
    pred.push_back(gold.back());
  }
  pred[1].html = "<table><tr><td>a</td></tr><tr><td>b</td><td>c</td></tr></table>";
  pred[3].html = "<p>none</p>";
  const TedsReport r = batch_teds(pred, gold, TedsMode::full);
  EXPECT_EQ(r.invalid, 2u);
  EXPECT_DOUBLE_EQ(r.overall, 0.5 * 1.0);
}

TEST(BatchTeds, OrphansRaiseAlignmentError) {
  std::vector<AnnotationRecord> gold = {make_record("a", oracle::unit_grid(2, 2), StyleSpec{}, "", Language::en)};
  std::vector<AnnotationRecord> pred = {make_record("b", oracle::unit_grid(2, 2), StyleSpec{}, "", Language::en)};
  try {
    batch_teds(pred, gold, TedsMode::full);
    FAIL();
  } catch (const AlignmentError& e) {
    EXPECT_NE(std::string(e.what()).find("a"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("b"), std::string::npos);
  }
}
