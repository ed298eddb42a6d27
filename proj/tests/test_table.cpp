#include <gtest/gtest.h>

#include "support.hpp"

using namespace tablenet;

namespace {

TableSchema random_schema(std::uint64_t seed, bool simple) {
  GenerationRequest req;
  Rng rng(seed);
  TableSchema s = sample_schema(req, simple, rng);
  s.style = style_from_combo({simple, (seed & 1) != 0, (seed & 2) != 0}, rng);
  return s;
}

}  // namespace

TEST(GridFromSchema, UnitSchemaGivesUnitCells) {
  const TableGrid g = grid_from_schema(TableSchema::unit(2, 2));
  ASSERT_EQ(g.cells().size(), 4u);
  for (const auto& c : g.cells()) EXPECT_FALSE(c.is_spanning());
}

TEST(GridFromSchema, FullHeightSpanInColumnZero) {
  TableSchema s = TableSchema::unit(3, 3, HeaderLayout::horizontal);
  s.row_spans(0, 0) = 3;
  s.row_spans(1, 0) = 0;
  s.row_spans(2, 0) = 0;
  s.col_spans(1, 0) = 0;
  s.col_spans(2, 0) = 0;
  const oracle::Tiling t = oracle::tile(s);
  ASSERT_TRUE(t.exact);
  const TableGrid g = grid_from_schema(s);
  const auto occ = oracle::occupancy(g);
  for (std::size_t r = 0; r < 3; ++r) {
    EXPECT_EQ(occ[r][0], occ[0][0]);
    for (std::size_t c = 0; c < 3; ++c) {
      // Same partition as the oracle's painting, up to cell numbering.
      for (std::size_t r2 = 0; r2 < 3; ++r2) {
        for (std::size_t c2 = 0; c2 < 3; ++c2) {
          EXPECT_EQ(occ[r][c] == occ[r2][c2], t.owner[r][c] == t.owner[r2][c2]);
        }
      }
    }
  }
  EXPECT_EQ(g.at(2, 0).rowspan, 3u);
}

TEST(GridFromSchema, OverlapIsRejectedAtTheConflictingAnchor) {
  TableSchema s = TableSchema::unit(2, 2);
  s.row_spans(0, 0) = 2;
  s.row_spans(1, 0) = 1;
  try {
    grid_from_schema(s);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    // Scan order meets anchor (0,0) first; it names the anchor it absorbs.
    EXPECT_EQ(e.row(), 0u);
    EXPECT_EQ(e.col(), 0u);
    EXPECT_NE(std::string(e.what()).find("(1,0)"), std::string::npos) << e.what();
  }
}

TEST(GridFromSchema, SpanPastTheEdgeIsRejected) {
  TableSchema s = TableSchema::unit(2, 2);
  s.col_spans(0, 1) = 2;
  EXPECT_THROW(grid_from_schema(s), SchemaError);
}

TEST(GridFromSchema, RandomSchemasTileExactly) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const TableSchema s = random_schema(seed, seed % 2 == 0);
    const oracle::Tiling t = oracle::tile(s);
    ASSERT_TRUE(t.exact) << "seed " << seed;
    const TableGrid g = grid_from_schema(s);
    std::size_t area = 0;
    for (const auto& c : g.cells()) area += c.rowspan * c.colspan;
    EXPECT_EQ(area, s.n_rows * s.n_cols);
    // is_simple iff every anchor entry is 1.
    bool all_unit = true;
    for (std::size_t r = 0; r < s.n_rows; ++r) {
      for (std::size_t c = 0; c < s.n_cols; ++c) {
        const int rs = s.row_spans(r, c), cs = s.col_spans(r, c);
        if (rs || cs) all_unit = all_unit && rs == 1 && cs == 1;
      }
    }
    EXPECT_EQ(derive_labels(g, s.style).is_simple, all_unit);
  }
}

TEST(GridToHtml, SingleEmptyCell) {
  const TableGrid g = TableGrid::build(1, 1, {{0, 0, 1, 1, false, ""}});
  const std::string html = grid_to_html(g, StyleSpec{});
  EXPECT_NE(html.find("<table><tr><td></td></tr></table>"), std::string::npos) << html;
  EXPECT_NE(html.find("<html"), std::string::npos);
}

TEST(GridToHtml, ColspanHeaderAppearsOnce) {
  const TableGrid g = TableGrid::build(2, 2, {{0, 0, 1, 2, true, "H"}, {1, 0, 1, 1, false, "a"}, {1, 1, 1, 1, false, "b"}});
  const std::string html = grid_to_html(g, StyleSpec{});
  std::size_t hits = 0;
  for (std::size_t at = html.find("colspan=\"2\""); at != std::string::npos; at = html.find("colspan=\"2\"", at + 1)) ++hits;
  EXPECT_EQ(hits, 1u);
  EXPECT_NE(html.find("<th colspan=\"2\">H</th>"), std::string::npos);
}

TEST(GridToHtml, RoundTripOnRandomSchemas) {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const TableSchema s = random_schema(seed * 7 + 1, seed % 3 == 0);
    TableGrid g = grid_from_schema(s);
    std::vector<std::string> contents;
    for (std::size_t i = 0; i < g.cells().size(); ++i) contents.push_back("v<" + std::to_string(i) + "> & \"q\"");
    g = g.with_contents(contents);
    const std::string html = grid_to_html(g, s.style);
    const TableAnalysis a = analyze_table(html);
    ASSERT_TRUE(a.valid()) << html;
    EXPECT_TRUE(a.grid->same_structure(g, true)) << "seed " << seed;
    EXPECT_EQ(a.grid->cells(), g.cells());
  }
}

TEST(HtmlToGrid, WellFormedTwoByThree) {
  const TableGrid g = html_to_grid("<table><tr><td>1</td><td>2</td><td>3</td></tr><tr><td>4</td><td>5</td><td>6</td></tr></table>");
  EXPECT_EQ(g.rows(), 2u);
  EXPECT_EQ(g.cols(), 3u);
}

TEST(HtmlToGrid, RaggedRows) {
  try {
    html_to_grid("<table><tr><td>1</td><td>2</td><td>3</td></tr><tr><td>4</td><td>5</td></tr></table>");
    FAIL();
  } catch (const TableParseError& e) {
    EXPECT_EQ(e.defect_kind(), DefectKind::ragged_rows);
  }
}

TEST(HtmlToGrid, RowspanInLastRowIsOutOfBounds) {
  try {
    html_to_grid("<table><tr><td>1</td><td>2</td></tr><tr><td rowspan=\"2\">3</td><td>4</td></tr></table>");
    FAIL();
  } catch (const TableParseError& e) {
    EXPECT_EQ(e.defect_kind(), DefectKind::span_out_of_bounds);
  }
}

TEST(HtmlToGrid, MissingTable) {
  try {
    html_to_grid("<p>no table here</p>");
    FAIL();
  } catch (const TableParseError& e) {
    EXPECT_EQ(e.defect_kind(), DefectKind::missing_table);
  }
}

TEST(HtmlToGrid, EntitiesAndWrappersAreHandled) {
  const TableGrid g = html_to_grid(
      "<table><thead><tr><th>A &amp; B</th></tr></thead><tbody><tr><td>x&lt;y</td></tr></tbody></table>");
  EXPECT_EQ(g.at(0, 0).content, "A & B");
  EXPECT_TRUE(g.at(0, 0).is_header);
  EXPECT_EQ(g.at(1, 0).content, "x<y");
}

TEST(Labels, SpanningCellMakesTableComplex) {
  const TableGrid g = TableGrid::build(2, 2, {{0, 0, 1, 2, true, ""}, {1, 0, 1, 1, false, ""}, {1, 1, 1, 1, false, ""}});
  EXPECT_FALSE(derive_labels(g, StyleSpec{}).is_simple);
}

TEST(Labels, PartialLinesAreNotLined) {
  StyleSpec s;
  s.line_style = LineStyle::horizontally_lineless;
  EXPECT_FALSE(derive_labels(oracle::unit_grid(2, 2), s).is_lined);
  s.line_style = LineStyle::fully_lined;
  EXPECT_TRUE(derive_labels(oracle::unit_grid(2, 2), s).is_lined);
}

TEST(Labels, DefaultStyleIsUncolored) {
  EXPECT_FALSE(derive_labels(oracle::unit_grid(2, 2), StyleSpec{}).is_colored);
  StyleSpec s;
  s.font_color = "#ff0000";
  EXPECT_TRUE(derive_labels(oracle::unit_grid(2, 2), s).is_colored);
}

TEST(Labels, CheckedAgainstSpanMatrices) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const TableSchema s = random_schema(seed + 5000, false);
    const TableGrid g = grid_from_schema(s);
    const auto [rs, cs] = span_matrices(g);
    EXPECT_EQ(rs, s.row_spans);
    EXPECT_EQ(cs, s.col_spans);
  }
}

TEST(StructureTokens, ReparseToTheSameGrid) {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const TableSchema s = random_schema(seed + 9000, seed % 2 == 0);
    const TableGrid g = grid_from_schema(s);
    std::string joined;
    for (const auto& t : structure_tokens(g)) joined += t;
    EXPECT_TRUE(html_to_grid(joined).same_structure(g, false)) << joined;
  }
}

TEST(RewriteCells, ReplacesOnlySelectedCells) {
  const std::string html = grid_to_html(oracle::unit_grid(2, 2), StyleSpec{});
  std::vector<std::optional<std::string>> contents(4);
  contents[3] = "new & improved";
  const TableGrid g = html_to_grid(rewrite_cells(html, contents));
  EXPECT_EQ(g.at(1, 1).content, "new & improved");
  EXPECT_EQ(g.at(0, 0).content, "r0c0");
}
