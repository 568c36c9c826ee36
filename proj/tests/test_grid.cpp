#include <gtest/gtest.h>

#include "covfam/errors.hpp"
#include "covfam/grid.hpp"
#include "fixtures.hpp"

namespace covfam {
namespace {

TEST(LabelMap, GridLabelsToIntegers) {
  const auto grid = testing::random_grid(4, 3, 6, 2, 1);
  for (Index i = 0; i < 4; ++i) {
    for (Index j = 0; j < 3; ++j) {
      const auto t = grid->label_map().to_params(grid->theta(i), grid->w(j));
      EXPECT_NEAR(t[0], static_cast<double>(i), 1e-12);
      EXPECT_NEAR(t[1], static_cast<double>(j), 1e-12);
    }
  }
  const auto mid = grid->label_map().to_params(0.5 * (grid->theta(1) + grid->theta(2)), grid->w(0));
  EXPECT_NEAR(mid[0], 1.5, 1e-12);
}

TEST(LabelMap, WindRange) {
  const auto m = LabelMap::from_ranges(0.0, 22.5, 4, 4.0, 13.0, 3);
  const auto lo = m.to_params(0.0, 4.0);
  const auto hi = m.to_params(22.5, 13.0);
  EXPECT_NEAR(lo[0], 0.0, 1e-15);
  EXPECT_NEAR(lo[1], 0.0, 1e-15);
  EXPECT_NEAR(hi[0], 4.0, 1e-12);
  EXPECT_NEAR(hi[1], 3.0, 1e-12);
}

TEST(LabelMap, InverseRoundTrip) {
  const auto m = LabelMap::from_ranges(-1.0, 3.0, 4, 2.0, 5.0, 2);
  const auto labels = m.to_labels(1.25, 0.75);
  const auto back = m.to_params(labels[0], labels[1]);
  EXPECT_NEAR(back[0], 1.25, 1e-14);
  EXPECT_NEAR(back[1], 0.75, 1e-14);
}

TEST(AnchorGrid, LocateUsesLowerLeftAndClamps) {
  const auto grid = testing::random_grid(5, 4, 6, 2, 1);
  EXPECT_EQ(grid->locate(0.2, 0.7), (PatchIndex{0, 0}));
  EXPECT_EQ(grid->locate(1.0, 2.0), (PatchIndex{1, 2}));
  EXPECT_EQ(grid->locate(4.0, 3.0), (PatchIndex{3, 2}));
  EXPECT_EQ(grid->locate(-0.5, 7.0), (PatchIndex{0, 2}));
  EXPECT_TRUE(grid->in_domain(4.0, 0.0));
  EXPECT_FALSE(grid->in_domain(4.1, 0.0));
}

TEST(AnchorGrid, OneParameterShape) {
  const auto grid = testing::random_grid(3, 1, 6, 2, 1);
  EXPECT_TRUE(grid->one_parameter());
  EXPECT_EQ(grid->patches1(), 2);
  EXPECT_EQ(grid->patches2(), 0);
}

TEST(AnchorGrid, Validation) {
  std::vector<FactorPoint> anchors;
  for (int k = 0; k < 4; ++k) anchors.emplace_back(oracle::gaussian(5, 2, k));
  EXPECT_THROW(AnchorGrid(2, 2, anchors, {0.0, 0.0}, {0.0, 1.0}), Error);  // not increasing
  EXPECT_THROW(AnchorGrid(2, 3, anchors, {0.0, 1.0}, {0.0, 1.0, 2.0}), Error);  // count
  EXPECT_THROW(AnchorGrid(1, 4, anchors, {0.0}, {0.0, 1.0, 2.0, 3.0}), Error);  // one node along t1
  std::vector<FactorPoint> mixed = anchors;
  mixed[3] = FactorPoint(oracle::gaussian(5, 3, 9));
  EXPECT_THROW(AnchorGrid(2, 2, mixed, {0.0, 1.0}, {0.0, 1.0}), Error);
  std::vector<FactorPoint> six = anchors;
  six.emplace_back(oracle::gaussian(5, 2, 10));
  six.emplace_back(oracle::gaussian(5, 2, 11));
  EXPECT_THROW(AnchorGrid(3, 2, six, {0.0, 1.0, 3.0}, {0.0, 1.0}), Error);  // uneven spacing
}

}  // namespace
}  // namespace covfam
