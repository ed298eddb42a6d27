#include <gtest/gtest.h>

#include "support.hpp"

using namespace tablenet;

namespace {

Transform row_op(TransformOp op, std::vector<std::size_t> ix, TransformAxis axis = TransformAxis::row) {
  Transform t;
  t.op = op;
  t.axis = axis;
  t.indices = std::move(ix);
  if (op == TransformOp::alter) t.payload = "#fff2cc";
  return t;
}

// 3x3 with a colspan-2 cell at (0,1).
TableGrid wide_top() {
  return TableGrid::build(3, 3, {{0, 0, 1, 1, true, "a"},
                                 {0, 1, 1, 2, true, "bc"},
                                 {1, 0, 1, 1, false, "d"},
                                 {1, 1, 1, 1, false, "e"},
                                 {1, 2, 1, 1, false, "f"},
                                 {2, 0, 1, 1, false, "g"},
                                 {2, 1, 1, 1, false, "h"},
                                 {2, 2, 1, 1, false, "i"}});
}

// A single cell covering the whole table.
TableGrid merged_block(std::size_t rows, std::size_t cols) {
  return TableGrid::build(rows, cols, {{0, 0, rows, cols, false, ""}});
}

}  // namespace

TEST(SpanRegions, UnitGridHasNoFlags) {
  const auto m = span_regions(oracle::unit_grid(3, 3));
  EXPECT_EQ(std::count(m.row_crossed.begin(), m.row_crossed.end(), true), 0);
  EXPECT_EQ(std::count(m.col_crossed.begin(), m.col_crossed.end(), true), 0);
  EXPECT_TRUE(m.merged.empty());
}

TEST(SpanRegions, TallCellFlagsTheRowsItCrosses) {
  const TableGrid g = TableGrid::build(3, 2, {{0, 0, 3, 1, true, ""}, {0, 1, 1, 1, false, ""}, {1, 1, 1, 1, false, ""}, {2, 1, 1, 1, false, ""}});
  const auto m = span_regions(g);
  EXPECT_EQ(m.row_crossed, (std::vector<bool>{false, true, true}));
  ASSERT_EQ(m.merged.size(), 1u);
  EXPECT_EQ(m.merged[0], (Rect{0, 0, 3, 1}));
}

TEST(SpanRegions, WideCellFlagsTheColumnsItCrosses) {
  EXPECT_EQ(span_regions(wide_top()).col_crossed, (std::vector<bool>{false, false, true}));
}

TEST(ApplyTransform, SwapTwiceRestores) {
  const TableGrid g = oracle::unit_grid(4, 3);
  const auto once = apply_transform(g, row_op(TransformOp::swap, {1, 2}));
  EXPECT_EQ(once.at(1, 0).content, "r2c0");
  EXPECT_TRUE(apply_transform(once, row_op(TransformOp::swap, {1, 2})).same_structure(g, true));
  const auto cols = apply_transform(g, row_op(TransformOp::swap, {0, 2}, TransformAxis::column));
  EXPECT_TRUE(apply_transform(cols, row_op(TransformOp::swap, {0, 2}, TransformAxis::column)).same_structure(g, true));
}

TEST(ApplyTransform, CopyRowDuplicatesContent) {
  const TableGrid g = oracle::unit_grid(3, 3);
  const TableGrid out = apply_transform(g, row_op(TransformOp::copy, {1}));
  ASSERT_EQ(out.rows(), 4u);
  for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(out.at(1, c).content, out.at(2, c).content);
}

TEST(ApplyTransform, CopyStretchesSpansAcrossTheCopy) {
  const TableGrid g = TableGrid::build(2, 2, {{0, 0, 2, 1, true, "x"}, {0, 1, 1, 1, false, "a"}, {1, 1, 1, 1, false, "b"}});
  const TableGrid out = apply_transform(g, row_op(TransformOp::copy, {0}));
  EXPECT_EQ(out.rows(), 3u);
  EXPECT_EQ(out.at(0, 0).rowspan, 3u);
  EXPECT_EQ(out.at(1, 1).content, "a");
}

TEST(ApplyTransform, CopyOfAllSpanningRowIsRejected) {
  try {
    apply_transform(merged_block(2, 2), row_op(TransformOp::copy, {0}));
    FAIL();
  } catch (const CopyStretchesOnly& e) {
    EXPECT_EQ(e.blocking(), (Rect{0, 0, 2, 2}));
  }
}

TEST(ApplyTransform, DeleteThroughColspanInteriorIsRejected) {
  try {
    apply_transform(wide_top(), row_op(TransformOp::del, {2}, TransformAxis::column));
    FAIL();
  } catch (const DeleteBreaksSpan& e) {
    EXPECT_EQ(e.blocking(), (Rect{0, 1, 1, 2}));
  }
}

TEST(ApplyTransform, SwapIntoASpanIsRejected) {
  try {
    apply_transform(wide_top(), row_op(TransformOp::swap, {0, 1}, TransformAxis::column));
    FAIL();
  } catch (const SwapIntersectsSpan& e) {
    EXPECT_EQ(e.blocking(), (Rect{0, 1, 1, 2}));
  }
  // Row swaps are unaffected by a horizontal span.
  EXPECT_NO_THROW(apply_transform(wide_top(), row_op(TransformOp::swap, {0, 2})));
}

TEST(ApplyTransform, BlockOperations) {
  const TableGrid g = TableGrid::build(4, 2, {{0, 0, 1, 2, true, "h"},
                                              {1, 0, 2, 1, false, "tall"},
                                              {1, 1, 1, 1, false, "a"},
                                              {2, 1, 1, 1, false, "b"},
                                              {3, 0, 1, 1, false, "c"},
                                              {3, 1, 1, 1, false, "d"}});
  Transform copy{TransformOp::copy, TransformAxis::block, {1, 3}, "", TransformAxis::row};
  const TableGrid copied = apply_transform(g, copy);
  EXPECT_EQ(copied.rows(), 6u);
  EXPECT_EQ(copied.at(3, 0).content, "tall");
  EXPECT_EQ(copied.at(3, 0).rowspan, 2u);
  Transform straddle{TransformOp::del, TransformAxis::block, {2, 4}, "", TransformAxis::row};
  EXPECT_THROW(apply_transform(g, straddle), BlockStraddlesSpan);
  Transform swap{TransformOp::swap, TransformAxis::block, {0, 1, 1, 3}, "", TransformAxis::row};
  const TableGrid swapped = apply_transform(g, swap);
  EXPECT_EQ(swapped.at(0, 0).content, "tall");
  EXPECT_EQ(swapped.at(2, 0).content, "h");
}

TEST(ApplyTransform, AlterKeepsStructureTokens) {
  const TableGrid g = wide_top();
  const TableGrid out = apply_transform(g, row_op(TransformOp::alter, {1, 2}));
  EXPECT_EQ(structure_tokens(out), structure_tokens(g));
  EXPECT_EQ(out.row_fills()[1], "#fff2cc");
  EXPECT_TRUE(derive_labels(out, StyleSpec{}).is_colored);
  EXPECT_THROW(apply_transform(g, row_op(TransformOp::alter, {0}, TransformAxis::column)), OutOfBounds);
}

TEST(ApplyTransform, OutOfBoundsOperandsNameTheGrid) {
  const TableGrid g = oracle::unit_grid(2, 2);
  try {
    apply_transform(g, row_op(TransformOp::del, {5}));
    FAIL();
  } catch (const OutOfBounds& e) {
    EXPECT_EQ(e.blocking(), (Rect{0, 0, 2, 2}));
  }
  EXPECT_THROW(apply_transform(oracle::unit_grid(1, 3), row_op(TransformOp::del, {0})), OutOfBounds);
}

TEST(ApplyTransform, TransformJsonRoundTrip) {
  Transform t{TransformOp::swap, TransformAxis::block, {0, 1, 2, 4}, "", TransformAxis::column};
  EXPECT_EQ(json(t).get<Transform>(), t);
  EXPECT_EQ(json(t)["op"], "swap");
  EXPECT_EQ(json(row_op(TransformOp::del, {1}))["op"], "delete");
}

TEST(ApplyTransform, RandomTransformsStayValid) {
  GenerationRequest req;
  std::mt19937_64 gen(123);
  std::size_t accepted = 0, rejected = 0;
  for (int trial = 0; trial < 500; ++trial) {
    Rng rng(static_cast<std::uint64_t>(trial));
    const TableSchema s = sample_schema(req, trial % 4 == 0, rng);
    const TableGrid g = grid_from_schema(s);
    const TransformOp op = static_cast<TransformOp>(gen() % 3);
    const bool columns = gen() % 2;
    const std::size_t n = columns ? g.cols() : g.rows();
    Transform t;
    t.op = op;
    t.axis = columns ? TransformAxis::column : TransformAxis::row;
    if (op == TransformOp::swap) {
      const std::size_t i = gen() % n;
      std::size_t j = gen() % n;
      if (j == i) j = (i + 1) % n;
      t.indices = {i, j};
    } else {
      t.indices = {gen() % n};
    }
    if (op == TransformOp::del && n == 1) continue;
    try {
      const TableGrid out = apply_transform(g, t);
      ++accepted;
      EXPECT_TRUE(validate_table(grid_to_html(out, s.style)).valid);
      const long delta = static_cast<long>(columns ? out.cols() : out.rows()) - static_cast<long>(n);
      EXPECT_EQ(delta, op == TransformOp::copy ? 1 : op == TransformOp::del ? -1 : 0);
    } catch (const TransformError& e) {
      ++rejected;
      const auto& merged = span_regions(g).merged;
      EXPECT_NE(std::find(merged.begin(), merged.end(), e.blocking()), merged.end()) << e.what();
    }
  }
  EXPECT_GT(accepted, 0u);
  EXPECT_GT(rejected, 0u);
}

namespace {

std::string skeleton_for(std::uint64_t seed, bool simple) {
  GenerationRequest req;
  Rng rng(seed);
  const TableSchema s = sample_schema(req, simple, rng);
  return grid_to_html(grid_from_schema(s), s.style);
}

}  // namespace

TEST(VariantFanout, NineValidVariantsWithProvenance) {
  const TemplateProvider provider(2);
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng rng(seed);
    FanoutOptions opt;
    opt.parent_id = "p" + std::to_string(seed);
    opt.topic = "Fiber broadband tariffs";
    const auto out = variant_fanout(skeleton_for(seed, seed % 2 == 0), provider, rng, opt);
    ASSERT_EQ(out.size(), 9u);
    for (std::size_t k = 0; k < out.size(); ++k) {
      EXPECT_EQ(out[k].id, opt.parent_id + "-v" + std::to_string(k));
      EXPECT_TRUE(validate_table(out[k].html).valid);
      ASSERT_TRUE(out[k].provenance);
      EXPECT_EQ(out[k].provenance->parent_id, opt.parent_id);
      EXPECT_EQ(out[k].provenance->transform.is_null(), k < 5);
    }
    EXPECT_EQ(out[8].provenance->transform["op"], "alter");
  }
}

TEST(VariantFanout, FullyMergedTableFallsBackToAlter) {
  const TemplateProvider provider(4);
  Rng rng(1);
  const std::string html = grid_to_html(merged_block(2, 2), StyleSpec{});
  const auto out = variant_fanout(html, provider, rng);
  ASSERT_EQ(out.size(), 9u);
  for (std::size_t k = 5; k < 9; ++k) EXPECT_EQ(out[k].provenance->transform["op"], "alter") << k;
}

TEST(VariantFanout, UntransformedVariantsDifferInContentOnly) {
  const TemplateProvider provider(6);
  Rng rng(3);
  const std::string skeleton = skeleton_for(17, false);
  const auto out = variant_fanout(skeleton, provider, rng);
  std::set<std::string> distinct;
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(out[k].structure_tokens, out[0].structure_tokens);
    distinct.insert(out[k].html);
  }
  EXPECT_EQ(distinct.size(), 5u);
}
