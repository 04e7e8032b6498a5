#include <algorithm>
#include <numbers>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "spatialrel/relations.hpp"
#include "support/oracles.hpp"

namespace spatialrel {
namespace {

using R = SpatialRelation;
using C = RelationCategory;

bool contains(const std::vector<R>& v, R r) { return std::find(v.begin(), v.end(), r) != v.end(); }

// Sector by the published angle intervals, for pairs away from the diagonals.
R sector_by_angle(const NormalizedBox& s, const NormalizedBox& o) {
  const double t = center_angle(s, o);
  const double q = std::numbers::pi / 4;
  if (t >= -q && t < q) return R::RightOf;
  if (t >= -3 * q && t < -q) return R::Above;
  if (t >= q && t < 3 * q) return R::Below;
  return R::LeftOf;
}

TEST(Relations, TwentyThreeInThreeCategories) {
  EXPECT_EQ(relations_in(C::ObjectPosition).size(), 9u);
  EXPECT_EQ(relations_in(C::SizeComparison).size(), 6u);
  EXPECT_EQ(relations_in(C::TwoObjectPositional).size(), 8u);
  std::set<std::string_view> names;
  for (auto c : {C::ObjectPosition, C::SizeComparison, C::TwoObjectPositional}) {
    for (auto r : relations_in(c)) {
      EXPECT_EQ(category_of(r), c);
      EXPECT_EQ(relation_from_string(to_string(r)), r);
      names.insert(to_string(r));
    }
  }
  EXPECT_EQ(names.size(), kRelationCount);
  EXPECT_EQ(arity(C::ObjectPosition), 1);
  EXPECT_EQ(arity(C::SizeComparison), 2);
  EXPECT_EQ(arity(C::TwoObjectPositional), 2);
  EXPECT_FALSE(relation_from_string("close to"));
}

TEST(PositionInImage, Examples) {
  EXPECT_EQ(position_in_image({0.1, 0.1, 0.4, 0.4}), R::TopLeft);
  EXPECT_EQ(position_in_image({0.1, 0.2, 0.45, 0.9}), R::Left);
  EXPECT_EQ(position_in_image({0.3, 0.3, 0.7, 0.7}), R::Center);
}

TEST(PositionInImage, QuadrantsBeforeHalves) {
  EXPECT_EQ(position_in_image({0.6, 0.6, 0.9, 0.9}), R::BottomRight);
  EXPECT_EQ(position_in_image({0.6, 0.1, 0.9, 0.4}), R::TopRight);
  EXPECT_EQ(position_in_image({0.1, 0.6, 0.4, 0.9}), R::BottomLeft);
  EXPECT_EQ(position_in_image({0.1, 0.1, 0.9, 0.4}), R::Top);
  EXPECT_EQ(position_in_image({0.1, 0.6, 0.9, 0.9}), R::Bottom);
  EXPECT_EQ(position_in_image({0.6, 0.1, 0.9, 0.9}), R::Right);
  // Exactly the top-left quadrant is also inside the top and left halves.
  EXPECT_EQ(position_in_image({0.0, 0.0, 0.5, 0.5}), R::TopLeft);
  EXPECT_EQ(position_in_image({0.0, 0.0, 1.0, 1.0}), R::Center);
}

TEST(PositionInImage, TotalAndSingleValued) {
  std::mt19937_64 gen(1);
  for (int i = 0; i < 10000; ++i) {
    const auto b = i % 2 ? testing::random_box(gen) : testing::random_lattice_box(gen, 4);
    EXPECT_EQ(true_relations(C::ObjectPosition, b, std::nullopt).size(), 1u);
    EXPECT_EQ(false_relations(C::ObjectPosition, b, std::nullopt).size(), 8u);
  }
}

TEST(Holds, DirectionalExamples) {
  const NormalizedBox object{0.1, 0.4, 0.3, 0.6};
  const NormalizedBox subject{0.7, 0.4, 0.9, 0.6};  // theta = 0
  EXPECT_TRUE(holds(R::RightOf, subject, object));
  EXPECT_FALSE(holds(R::LeftOf, subject, object));
  EXPECT_TRUE(holds(R::LeftOf, object, subject));
  EXPECT_TRUE(holds(R::Above, NormalizedBox{0.4, 0.0, 0.6, 0.2}, NormalizedBox{0.4, 0.6, 0.6, 0.8}));
  EXPECT_TRUE(holds(R::Below, NormalizedBox{0.4, 0.6, 0.6, 0.8}, NormalizedBox{0.4, 0.0, 0.6, 0.2}));
}

TEST(Holds, SectorBoundariesAreHalfOpen) {
  // Dyadic coordinates keep the diagonal offsets exact.
  const NormalizedBox origin{0.375, 0.375, 0.625, 0.625};
  auto at = [](double cx, double cy) { return NormalizedBox{cx - 0.125, cy - 0.125, cx + 0.125, cy + 0.125}; };
  EXPECT_EQ(direction_sector(at(0.75, 0.25), origin), R::RightOf);  // -pi/4
  EXPECT_EQ(direction_sector(at(0.75, 0.75), origin), R::Below);    // pi/4
  EXPECT_EQ(direction_sector(at(0.25, 0.75), origin), R::LeftOf);   // 3pi/4
  EXPECT_EQ(direction_sector(at(0.25, 0.25), origin), R::Above);    // -3pi/4
}

TEST(Holds, InsideAndSurrounding) {
  const NormalizedBox a{0.2, 0.2, 0.4, 0.4};
  const NormalizedBox b{0.1, 0.1, 0.8, 0.8};
  EXPECT_TRUE(holds(R::Inside, a, b));
  EXPECT_TRUE(holds(R::Surrounding, b, a));
  EXPECT_FALSE(holds(R::Inside, b, a));
}

TEST(Holds, SizeTiesYieldNeither) {
  const NormalizedBox a{0.0, 0.0, 0.5, 0.5};
  const NormalizedBox b{0.5, 0.5, 1.0, 1.0};
  EXPECT_FALSE(holds(R::Wider, a, b));
  EXPECT_FALSE(holds(R::Narrower, a, b));
  EXPECT_TRUE(true_relations(C::SizeComparison, a, b).empty());
}

TEST(Holds, ArityMismatchThrows) {
  const NormalizedBox a{0.0, 0.0, 0.5, 0.5};
  EXPECT_THROW(holds(R::Wider, a), ArityError);
  EXPECT_THROW(holds(R::TopLeft, a, a), ArityError);
}

TEST(Holds, CoincidentCentersThrowForSectorsOnly) {
  const NormalizedBox a{0.2, 0.2, 0.8, 0.8};
  const NormalizedBox b{0.4, 0.4, 0.6, 0.6};
  EXPECT_THROW(holds(R::LeftOf, a, b), DegenerateAngleError);
  EXPECT_TRUE(holds(R::Surrounding, a, b));
  EXPECT_TRUE(holds(R::Larger, a, b));
}

TEST(TrueRelations, DisjointSubjectLeft) {
  const NormalizedBox a{0.0, 0.4, 0.2, 0.6};
  const NormalizedBox b{0.6, 0.4, 0.9, 0.6};
  // Expected set from evaluating each positional predicate by hand:
  // centers (0.1, 0.5) vs (0.75, 0.5) -> theta = pi -> left of; IoU 0 -> separated.
  const auto t = true_relations(C::TwoObjectPositional, a, b);
  EXPECT_EQ(t, (std::vector<R>{R::LeftOf, R::Separated}));
}

TEST(FalseRelations, Examples) {
  const auto f = false_relations(C::ObjectPosition, NormalizedBox{0.1, 0.1, 0.4, 0.4}, std::nullopt);
  EXPECT_EQ(f.size(), 8u);
  EXPECT_FALSE(contains(f, R::TopLeft));

  const NormalizedBox a{0.2, 0.2, 0.4, 0.4};
  const NormalizedBox b{0.1, 0.1, 0.8, 0.8};
  const auto fp = false_relations(C::TwoObjectPositional, a, b);
  EXPECT_TRUE(contains(fp, R::Separated));
  EXPECT_FALSE(contains(fp, R::Inside));
  EXPECT_FALSE(contains(fp, R::Overlapping));

  const NormalizedBox big{0.0, 0.0, 0.9, 0.9};
  const NormalizedBox small{0.1, 0.1, 0.3, 0.2};
  EXPECT_EQ(false_relations(C::SizeComparison, big, small), (std::vector<R>{R::Narrower, R::Shorter, R::Smaller}));
}

TEST(Properties, SectorPartitionAndAngleAgreement) {
  std::mt19937_64 gen(21);
  int checked_against_angle = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto a = testing::random_box(gen);
    const auto b = testing::random_box(gen);
    int count = 0;
    for (auto r : {R::LeftOf, R::RightOf, R::Above, R::Below}) count += holds(r, a, b);
    EXPECT_EQ(count, 1);
    const double t = center_angle(a, b);
    const double q = std::numbers::pi / 4;
    bool near_diagonal = false;
    for (double edge : {-3 * q, -q, q, 3 * q, 4 * q, -4 * q}) near_diagonal |= std::abs(t - edge) < 1e-9;
    if (!near_diagonal) {
      EXPECT_EQ(direction_sector(a, b), sector_by_angle(a, b));
      ++checked_against_angle;
    }
  }
  EXPECT_GT(checked_against_angle, 9900);
}

TEST(Properties, Dualities) {
  std::mt19937_64 gen(33);
  for (int i = 0; i < 10000; ++i) {
    const bool lattice = i % 2 == 0;
    const auto a = lattice ? testing::random_lattice_box(gen, 6) : testing::random_box(gen);
    const auto b = lattice ? testing::random_lattice_box(gen, 6) : testing::random_box(gen);
    if (a.center_x() != b.center_x() || a.center_y() != b.center_y()) {
      EXPECT_EQ(holds(R::LeftOf, a, b), holds(R::RightOf, b, a));
      EXPECT_EQ(holds(R::Above, a, b), holds(R::Below, b, a));
    }
    EXPECT_EQ(holds(R::Wider, a, b), holds(R::Narrower, b, a));
    EXPECT_EQ(holds(R::Taller, a, b), holds(R::Shorter, b, a));
    EXPECT_EQ(holds(R::Larger, a, b), holds(R::Smaller, b, a));
    EXPECT_EQ(holds(R::Inside, a, b), holds(R::Surrounding, b, a));
    EXPECT_NE(holds(R::Overlapping, a, b), holds(R::Separated, a, b));
    if (holds(R::Inside, a, b)) {
      EXPECT_TRUE(holds(R::Overlapping, a, b));
    }
  }
}

}  // namespace
}  // namespace spatialrel
