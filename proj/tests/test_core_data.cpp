#include <gtest/gtest.h>

#include <sstream>

#include "support.hpp"
#include "vrec/vrec.hpp"

namespace vrec {
namespace {

std::string rows_for(const std::string& user, int n, std::int64_t start = 1400000000, std::int64_t step = 3600) {
  std::ostringstream os;
  for (int k = 0; k < n; ++k) os << user << ",i" << k << ",c" << (k % 3) << ',' << start + k * step << '\n';
  return os.str();
}

TEST(LoadInteractions, MapsFieldsDirectly) {
  const Dataset ds = dataset_from_text("u1,i9,c2,1400000000\n");
  ASSERT_EQ(ds.interactions.size(), 1u);
  const Interaction& x = ds.interactions[0];
  EXPECT_EQ(ds.users.name(x.user), "u1");
  EXPECT_EQ(ds.catalog.items.name(x.item), "i9");
  EXPECT_EQ(ds.catalog.categories.name(x.category), "c2");
  EXPECT_EQ(x.timestamp, 1400000000);
}

TEST(LoadInteractions, EmptyStreamGivesEmptyList) { EXPECT_TRUE(dataset_from_text("").interactions.empty()); }

TEST(LoadInteractions, ThreeFieldsIsAParseErrorNamingTheLine) {
  try {
    dataset_from_text("u1,i1,c1,5\nu1,i2,c1\n");
    FAIL() << "expected a parse error";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadInteractions, RejectsBadTimestampsAndEmptyFields) {
  EXPECT_THROW(dataset_from_text("u1,i1,c1,abc\n"), ParseError);
  EXPECT_THROW(dataset_from_text("u1,i1,c1,-5\n"), ParseError);
  EXPECT_THROW(dataset_from_text("u1,,c1,5\n"), ParseError);
}

TEST(LoadInteractions, InconsistentItemCategoryIsACatalogError) {
  EXPECT_THROW(dataset_from_text("u1,i1,c1,5\nu2,i1,c2,6\n"), CatalogError);
}

TEST(LoadInteractions, SkipsBlankAndCommentLines) {
  EXPECT_EQ(dataset_from_text("# header\n\nu1,i1,c1,5\n").interactions.size(), 1u);
}

TEST(FilterUsers, BoundaryCounts) {
  const Dataset ds = dataset_from_text(rows_for("four", 4) + rows_for("five", 5) + rows_for("hundred", 100) +
                                       rows_for("many", 101));
  std::map<std::string, int> kept;
  for (const auto& x : filter_users(ds.interactions)) ++kept[ds.users.name(x.user)];
  EXPECT_EQ(kept.count("four"), 0u);
  EXPECT_EQ(kept["five"], 5);
  EXPECT_EQ(kept["hundred"], 100);
  EXPECT_EQ(kept.count("many"), 0u);
}

TEST(InputContext, MondayInJanuaryIs12) {
  EXPECT_EQ(input_context_of(1325462400), 12);  // 2012-01-02, a Monday
}

TEST(InputContext, SundayInJanuaryIs0) {
  EXPECT_EQ(input_context_of(1325376000), 0);  // 2012-01-01, a Sunday
}

TEST(InputContext, IgnoresYear) {
  // 2012-01-02 and 2017-01-02 are both Mondays in January
  EXPECT_EQ(input_context_of(1325462400 + 3600 * 13), input_context_of(1483315200));
}

TEST(InputContext, UsesUtcDayBoundaries) {
  EXPECT_EQ(input_context_of(1325462399), 0);  // last second of Sunday
  EXPECT_EQ(input_context_of(1325462400), 12);
}

TEST(TransitionContext, ExampleBins) {
  EXPECT_EQ(transition_context_of(36 * 3600, false), 1);
  EXPECT_EQ(transition_context_of(0, false), 0);
  EXPECT_EQ(transition_context_of(5 * kSecondsPerDay, false), 3);
  EXPECT_EQ(transition_context_of(123, true), kSequenceStartBin);
}

TEST(TransitionContext, EdgesAreRightClosed) {
  EXPECT_EQ(transition_context_of(kSecondsPerDay, false), 0);
  EXPECT_EQ(transition_context_of(kSecondsPerDay + 1, false), 1);
  EXPECT_EQ(transition_context_of(365 * kSecondsPerDay, false), 8);
  EXPECT_EQ(transition_context_of(365 * kSecondsPerDay + 1, false), 9);
}

TEST(TransitionContext, NegativeIntervalThrows) { EXPECT_THROW(transition_context_of(-1, false), InvalidArgument); }

TEST(BuildSequences, SortsOutOfOrderRows) {
  const Dataset ds = dataset_from_text("u,i1,c1,300\nu,i2,c1,100\nu,i3,c2,200\n");
  const auto seqs = build_sequences(ds.interactions);
  ASSERT_EQ(seqs.size(), 1u);
  ASSERT_EQ(seqs[0].size(), 3u);
  EXPECT_EQ(seqs[0].steps[0].timestamp, 100);
  EXPECT_EQ(seqs[0].steps[1].timestamp, 200);
  EXPECT_EQ(seqs[0].steps[2].timestamp, 300);
}

TEST(BuildSequences, SingleInteractionHasStartBin) {
  const auto seqs = build_sequences(dataset_from_text("u,i1,c1,300\n").interactions);
  ASSERT_EQ(seqs.size(), 1u);
  EXPECT_EQ(seqs[0].steps[0].transition_context, kSequenceStartBin);
}

TEST(BuildSequences, FiveDaysApartGivesBin3) {
  const auto seqs = build_sequences(dataset_from_text("u,i1,c1,1000\nu,i2,c1,433000\n").interactions);
  EXPECT_EQ(seqs[0].steps[1].transition_context, 3);
}

TEST(ChronologicalSplit, TenInteractionsGiveEightAndTwo) {
  const Dataset ds = dataset_from_text(rows_for("u", 10));
  const DatasetSplit s = chronological_split(ds.interactions, ds.catalog.num_items());
  ASSERT_EQ(s.train.size(), 8u);
  ASSERT_EQ(s.test.size(), 2u);
  std::int64_t latest_train = 0;
  for (const auto& x : s.train) latest_train = std::max(latest_train, x.timestamp);
  for (const auto& x : s.test) EXPECT_GT(x.timestamp, latest_train);
}

TEST(ChronologicalSplit, ColdThreshold) {
  // item "four" has 4 train records, "five" has 5; test rows do not count
  std::string text;
  for (int u = 0; u < 5; ++u) {
    const std::string user = "u" + std::to_string(u);
    const std::int64_t t = 1000 * u;
    text += user + ",five,c," + std::to_string(t + 1) + "\n";
    if (u < 4) text += user + ",four,c," + std::to_string(t + 2) + "\n";
    text += user + ",x1,c," + std::to_string(t + 3) + "\n";
    text += user + ",x2,c," + std::to_string(t + 4) + "\n";
    text += user + ",later,c," + std::to_string(100000 + t) + "\n";
  }
  const Dataset ds = dataset_from_text(text);
  const DatasetSplit s = chronological_split(ds.interactions, ds.catalog.num_items(), 0.75);
  EXPECT_TRUE(s.cold(*ds.catalog.items.find("four")));
  EXPECT_FALSE(s.cold(*ds.catalog.items.find("five")));
  EXPECT_TRUE(s.cold(*ds.catalog.items.find("later")));
}

TEST(ChronologicalSplit, RejectsBadFraction) {
  EXPECT_THROW(chronological_split({}, 0, 0.0), InvalidArgument);
  EXPECT_THROW(chronological_split({}, 0, 1.5), InvalidArgument);
}

TEST(FeatureFile, RoundTripAndAlignment) {
  FeatureMatrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  std::stringstream buf;
  write_vfsr(buf, m);
  EXPECT_EQ(read_vfsr(buf), m);

  const Dataset ds = dataset_from_text("u,b,c,1\nu,a,c,2\n");
  const FeatureStore fs = align_features(ds.catalog, {"a", "b", "unused"}, FeatureMatrix(FeatureMatrix::Identity(3, 3)));
  EXPECT_EQ(fs.rows(*ds.catalog.items.find("a"), 0), 1.0f);
  EXPECT_EQ(fs.rows(*ds.catalog.items.find("b"), 1), 1.0f);
}

TEST(FeatureFile, MissingItemIsAnError) {
  const Dataset ds = dataset_from_text("u,a,c,1\nu,b,c,2\n");
  EXPECT_THROW(align_features(ds.catalog, {"a"}, FeatureMatrix(FeatureMatrix::Ones(1, 2))), Error);
}

TEST(FeatureFile, BadMagicIsAnError) {
  std::stringstream buf("XXXX0000");
  EXPECT_THROW(read_vfsr(buf), Error);
}

}  // namespace
}  // namespace vrec
