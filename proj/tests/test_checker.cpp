#include <gtest/gtest.h>

#include "support.hpp"

using namespace tablenet;

namespace {

class FixedRanker : public RankerProvider {
 public:
  FixedRanker(int topic, int semantics) : topic_(topic), semantics_(semantics) {}
  int rank_topic(std::string_view, std::string_view, const std::vector<std::string>&) const override { return topic_; }
  int rank_semantics(std::string_view, std::string_view) const override { return semantics_; }

 private:
  int topic_, semantics_;
};

bool has_kind(const ValidationReport& r, DefectKind k) {
  return std::any_of(r.defects.begin(), r.defects.end(), [&](const Defect& d) { return d.kind == k; });
}

}  // namespace

TEST(ValidateTable, CleanTable) {
  const auto r = validate_table("<table><tr><th>a</th><th>b</th></tr><tr><td>1</td><td>2</td></tr></table>");
  EXPECT_TRUE(r.valid);
  EXPECT_TRUE(r.defects.empty());
  EXPECT_EQ(to_json(r)["valid"], true);
}

TEST(ValidateTable, EveryBrokenTableIsCaughtWithItsKind) {
  for (const auto& b : oracle::broken_tables(10)) {
    const auto r = validate_table(b.html);
    EXPECT_FALSE(r.valid) << b.html;
    EXPECT_TRUE(has_kind(r, b.kind)) << to_string(b.kind) << ": " << b.html;
    EXPECT_LT(structure_rank(r.defects), 5) << b.html;
  }
}

TEST(ValidateTable, CollectsSeveralDefects) {
  const auto r = validate_table("<table><tr><td rowspan=\"5\">a</td><div></div></tr><tr><td>b</td><td>c</td></tr></table>");
  EXPECT_TRUE(has_kind(r, DefectKind::span_out_of_bounds));
  EXPECT_TRUE(has_kind(r, DefectKind::disallowed_tag));
  EXPECT_GE(r.defects.size(), 2u);
}

TEST(ValidateTable, GeneratedTablesAreClean) {
  GenerationRequest req;
  req.count = 200;
  req.seed = 21;
  const TemplateProvider provider(req.seed);
  const auto result = generate_batch(req, provider, FillingChecker(std::make_shared<SurrogateRanker>()));
  for (const auto& rec : result.records) EXPECT_TRUE(validate_table(rec.html).valid) << rec.id;
}

TEST(StructureRank, PenaltyTable) {
  EXPECT_EQ(structure_rank(std::vector<Defect>{}), 5);
  EXPECT_EQ(structure_rank(std::vector<Defect>{{DefectKind::disallowed_tag, "", ""}}), 4);
  EXPECT_EQ(structure_rank(std::vector<Defect>{{DefectKind::ragged_rows, "", ""}}), 3);
  // Repeats of one kind count once.
  EXPECT_EQ(structure_rank(std::vector<Defect>{{DefectKind::ragged_rows, "", ""}, {DefectKind::ragged_rows, "", ""}}), 3);
  EXPECT_EQ(structure_rank(std::vector<Defect>{{DefectKind::ragged_rows, "", ""}, {DefectKind::overlapping_spans, "", ""}}), 1);
  EXPECT_EQ(structure_rank(std::vector<Defect>{{DefectKind::missing_table, "", ""}}), 1);
  EXPECT_EQ(structure_rank(std::vector<Defect>{{DefectKind::empty_structure, "", ""}}), 1);
}

TEST(StructureRank, MoreDefectKindsNeverRaiseTheRank) {
  const std::vector<DefectKind> kinds = {DefectKind::ragged_rows, DefectKind::overlapping_spans,
                                         DefectKind::span_out_of_bounds, DefectKind::disallowed_tag,
                                         DefectKind::empty_structure, DefectKind::missing_table};
  for (unsigned mask = 0; mask < 64; ++mask) {
    std::vector<Defect> base;
    for (std::size_t k = 0; k < kinds.size(); ++k) {
      if (mask & (1u << k)) base.push_back({kinds[k], "", ""});
    }
    for (DefectKind extra : kinds) {
      auto more = base;
      more.push_back({extra, "", ""});
      EXPECT_LE(structure_rank(more), structure_rank(base));
    }
  }
}

TEST(ExtractEntities, DropsStopwordsAndSplitsCjk) {
  EXPECT_EQ(extract_entities("Analysis of 5G Spectrum in Europe"), (std::vector<std::string>{"5g", "spectrum", "europe"}));
  EXPECT_EQ(extract_entities("中国移动"), (std::vector<std::string>{"中国", "国移", "移动"}));
  EXPECT_EQ(extract_entities("港"), (std::vector<std::string>{"港"}));
}

TEST(RankTable, OverallIsTheMinimum) {
  const std::string clean = "<table><tr><th>a</th></tr><tr><td>1</td></tr></table>";
  const RankReport r = rank_table(clean, "t", FixedRanker(4, 2));
  EXPECT_EQ(r.structure_rank, 5);
  EXPECT_EQ(r.topic_rank, 4);
  EXPECT_EQ(r.semantic_rank, 2);
  EXPECT_EQ(r.overall, 2);
  EXPECT_EQ(rank_table(clean, "t", FixedRanker(9, -3)).semantic_rank, 1);
  EXPECT_EQ(rank_table(clean, "t", FixedRanker(9, 9)).topic_rank, 5);
  EXPECT_EQ(json(r)["overall"], 2);
}

TEST(RankTable, RankerFailuresAreWrapped) {
  class Throwing : public RankerProvider {
    int rank_topic(std::string_view, std::string_view, const std::vector<std::string>&) const override {
      throw std::runtime_error("boom");
    }
    int rank_semantics(std::string_view, std::string_view) const override { return 5; }
  };
  EXPECT_THROW(rank_table("<table><tr><td>a</td></tr></table>", "t", Throwing()), RankerError);
}

TEST(FillingChecker, ThresholdGatesAcceptance) {
  const FillingChecker strict(std::make_shared<FixedRanker>(3, 3), 4);
  const FillingChecker lenient(std::make_shared<FixedRanker>(3, 3), 3);
  const std::string html = "<table><tr><td>a</td></tr></table>";
  EXPECT_FALSE(strict.accepts(strict.rank(html, "t")));
  EXPECT_TRUE(lenient.accepts(lenient.rank(html, "t")));
}

TEST(SurrogateRanker, TopicOverlap) {
  const SurrogateRanker r;
  const std::string html = "<table><tr><th>Fiber rollout</th><th>Europe</th></tr><tr><td>1</td><td>2</td></tr></table>";
  EXPECT_EQ(r.rank_topic(html, "", extract_entities("Fiber rollout in Europe")), 5);
  EXPECT_EQ(r.rank_topic(html, "", extract_entities("Satellite launches")), 1);
  EXPECT_EQ(r.rank_topic(html, "", {}), 5);
  EXPECT_EQ(r.rank_topic("<p>x</p>", "", {"x"}), 1);
}

TEST(SurrogateRanker, BlankAndMixedTypeCellsLowerSemantics) {
  const SurrogateRanker r;
  const std::string good = "<table><tr><th>a</th><th>b</th></tr><tr><td>x</td><td>1</td></tr><tr><td>y</td><td>2</td></tr></table>";
  const std::string mixed = "<table><tr><th>a</th><th>b</th></tr><tr><td>x</td><td>1</td></tr><tr><td>3</td><td>z</td></tr></table>";
  const std::string blank = "<table><tr><th>a</th><th>b</th></tr><tr><td></td><td></td></tr><tr><td></td><td></td></tr></table>";
  EXPECT_EQ(r.rank_semantics(good, ""), 5);
  EXPECT_LT(r.rank_semantics(mixed, ""), 5);
  EXPECT_LT(r.rank_semantics(blank, ""), r.rank_semantics(mixed, ""));
}

TEST(SurrogateRanker, TemplateFillsScoreWellOnTopic) {
  GenerationRequest req;
  req.count = 64;
  req.seed = 4;
  const TemplateProvider provider(req.seed);
  const auto result = generate_batch(req, provider, FillingChecker(std::make_shared<SurrogateRanker>()));
  const SurrogateRanker ranker;
  for (const auto& rec : result.records) {
    EXPECT_GE(rank_table(rec.html, rec.topic, ranker).topic_rank, 4) << rec.topic;
  }
}
