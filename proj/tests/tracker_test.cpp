#include "trackseg/tracker.hpp"

#include <gtest/gtest.h>

#include <random>

#include "test_support.hpp"

namespace trackseg {
namespace {

using testing::enum_iou;
using testing::fg_set;
using testing::filled;
using testing::rect_set;

GrayMap map_of(const BinaryMask& m, float on = 1.0f) {
  GrayMap g(m.width(), m.height());
  for (std::size_t i = 0; i < m.size(); ++i) g[i] = m[i] ? on : 0.0f;
  return g;
}

Detection det(std::int32_t cls, double score, BBox box) { return {cls, "", score, box}; }

TEST(InitTrackTest, NoDetectionsFallsBackToAnnotationBox) {
  const auto gt = filled(32, 32, 4, 5, 10, 12);
  const auto s = init_track({}, gt, 1, TrackerConfig{});
  EXPECT_TRUE(s.uncategorized());
  EXPECT_EQ(s.prev_box, BBox(4, 5, 10, 12));
  EXPECT_EQ(s.object_id, 1);
}

TEST(InitTrackTest, ExactBoxIsRemembered) {
  const auto gt = filled(32, 32, 4, 5, 10, 12);
  const std::vector<Detection> dets{det(9, 0.2, BBox(4, 5, 10, 12))};
  const auto s = init_track(dets, gt, 1, TrackerConfig{});
  EXPECT_EQ(s.class_set, std::set<std::int32_t>{9});
  EXPECT_EQ(s.prev_box, BBox(4, 5, 10, 12));
}

TEST(InitTrackTest, OverlappingDetectionBeatsHigherScoringOne) {
  const auto gt = filled(64, 64, 10, 10, 30, 30);
  const std::vector<Detection> dets{det(3, 0.9, BBox(12, 11, 31, 32)), det(7, 0.99, BBox(40, 40, 60, 60))};
  // oracle: enumerate both overlaps
  const double a = enum_iou(fg_set(gt), rect_set(12, 11, 31, 32));
  const double b = enum_iou(fg_set(gt), rect_set(40, 40, 60, 60));
  ASSERT_DOUBLE_EQ(a, 342.0 / 457.0);
  ASSERT_EQ(b, 0.0);
  const auto s = init_track(dets, gt, 2, TrackerConfig{});
  EXPECT_EQ(s.class_set, std::set<std::int32_t>{3});
  EXPECT_EQ(s.prev_box, BBox(12, 11, 31, 32));
}

TEST(InitTrackTest, WeakOverlapBelowMinimumIsUncategorized) {
  const auto gt = filled(64, 64, 10, 10, 30, 30);
  const std::vector<Detection> dets{det(3, 0.9, BBox(25, 25, 50, 50))};
  TrackerConfig cfg;
  cfg.iou_first_frame_min = 0.3;
  const auto s = init_track(dets, gt, 1, cfg);
  EXPECT_TRUE(s.uncategorized());
  EXPECT_EQ(s.prev_box, BBox(10, 10, 30, 30));
}

TEST(InitTrackTest, EmptyAnnotationIsAnError) {
  EXPECT_THROW(init_track({}, BinaryMask(8, 8), 1, TrackerConfig{}), InvalidArgument);
}

TEST(SelectBoxTest, NothingToSelectCoasts) {
  TrackState s{1, {3}, BBox(4, 4, 8, 8), 0};
  const auto r = select_box(s, {}, GrayMap(16, 16, 0.0f), TrackerConfig{});
  EXPECT_EQ(r.kind, SelectionKind::coasted);
  EXPECT_EQ(r.box, BBox(4, 4, 8, 8));
  EXPECT_EQ(r.state.coast_count, 1u);
  EXPECT_FALSE(r.lost);
}

TEST(SelectBoxTest, MatchingDetectionIsSelected) {
  TrackState s{1, {3}, BBox(4, 4, 8, 8), 2};
  const std::vector<Detection> dets{det(3, 0.5, BBox(4, 4, 8, 8))};
  const auto r = select_box(s, dets, map_of(filled(16, 16, 4, 4, 8, 8)), TrackerConfig{});
  EXPECT_EQ(r.kind, SelectionKind::detected);
  EXPECT_EQ(r.box, BBox(4, 4, 8, 8));
  EXPECT_EQ(r.state.coast_count, 0u);
}

TEST(SelectBoxTest, TemporalGateRejectsBrighterDistractor) {
  TrackState s{1, {3}, BBox(10, 10, 30, 30), 0};
  const std::vector<Detection> dets{det(3, 0.5, BBox(12, 12, 32, 32)), det(3, 0.5, BBox(60, 10, 80, 30))};
  const auto appearance = map_of(filled(96, 48, 60, 10, 80, 30));
  const auto fg = fg_set(filled(96, 48, 60, 10, 80, 30));
  // oracle numbers: d2 fits the map perfectly but has no overlap with prev_box
  ASSERT_EQ(enum_iou(rect_set(60, 10, 80, 30), rect_set(10, 10, 30, 30)), 0.0);
  ASSERT_EQ(enum_iou(fg, rect_set(60, 10, 80, 30)), 1.0);
  ASSERT_GE(enum_iou(rect_set(12, 12, 32, 32), rect_set(10, 10, 30, 30)), 0.3);

  TrackerConfig cfg;
  cfg.iou_temporal = 0.3;
  const auto gated = select_box(s, dets, appearance, cfg);
  EXPECT_EQ(gated.kind, SelectionKind::detected);
  EXPECT_EQ(gated.box, BBox(12, 12, 32, 32));

  cfg.temporal_gate = false;
  const auto ungated = select_box(s, dets, appearance, cfg);
  EXPECT_EQ(ungated.box, BBox(60, 10, 80, 30));
}

TEST(SelectBoxTest, OtherClassesAreDiscarded) {
  TrackState s{1, {3}, BBox(4, 4, 8, 8), 0};
  const std::vector<Detection> dets{det(5, 0.99, BBox(4, 4, 8, 8))};
  // map is empty so the fallback also fails
  const auto r = select_box(s, dets, GrayMap(16, 16, 0.0f), TrackerConfig{});
  EXPECT_EQ(r.kind, SelectionKind::coasted);
}

TEST(SelectBoxTest, TiesBreakOnScoreThenOrder) {
  TrackState s{1, {3}, BBox(4, 4, 8, 8), 0};
  const auto appearance = map_of(filled(16, 16, 4, 4, 8, 8));
  // two boxes with identical map overlap, mirrored around the object
  const std::vector<Detection> by_score{det(3, 0.4, BBox(3, 4, 8, 8)), det(3, 0.6, BBox(4, 4, 9, 8))};
  EXPECT_EQ(select_box(s, by_score, appearance, TrackerConfig{}).box, BBox(4, 4, 9, 8));
  const std::vector<Detection> by_order{det(3, 0.6, BBox(3, 4, 8, 8)), det(3, 0.6, BBox(4, 4, 9, 8))};
  EXPECT_EQ(select_box(s, by_order, appearance, TrackerConfig{}).box, BBox(3, 4, 8, 8));
}

TEST(SelectBoxTest, UncategorizedFollowsComponentsTouchingPreviousBox) {
  TrackState s{1, {}, BBox(4, 4, 8, 8), 0};
  // the object moved right and grew; a far blob must not be picked up
  const auto m = mask_union(filled(32, 32, 6, 5, 12, 9), filled(32, 32, 20, 20, 24, 24));
  const std::vector<Detection> dets{det(3, 0.9, BBox(20, 20, 24, 24))};
  const auto r = select_box(s, dets, map_of(m), TrackerConfig{});
  EXPECT_EQ(r.kind, SelectionKind::appearance_tracked);
  EXPECT_EQ(r.box, BBox(6, 5, 12, 9));
}

TEST(SelectBoxTest, RememberedClassMissingFallsBackToComponents) {
  TrackState s{1, {3}, BBox(4, 4, 8, 8), 0};
  const auto r = select_box(s, {}, map_of(filled(32, 32, 5, 5, 9, 9)), TrackerConfig{});
  EXPECT_EQ(r.kind, SelectionKind::appearance_tracked);
  EXPECT_EQ(r.box, BBox(5, 5, 9, 9));
  EXPECT_EQ(r.state.class_set, std::set<std::int32_t>{3});
}

TEST(SelectBoxTest, LostAfterMaxCoast) {
  TrackerConfig cfg;
  cfg.max_coast = 2;
  TrackState s{1, {3}, BBox(4, 4, 8, 8), 0};
  const GrayMap empty(16, 16, 0.0f);
  bool lost[4];
  for (bool& l : lost) {
    const auto r = select_box(s, {}, empty, cfg);
    s = r.state;
    l = r.lost;
  }
  EXPECT_FALSE(lost[0]);
  EXPECT_FALSE(lost[1]);
  EXPECT_TRUE(lost[2]);
  EXPECT_TRUE(lost[3]);
}

// Random sequences: class memory, temporal gate and determinism.
TEST(SelectBoxTest, InvariantsOnRandomSequences) {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> ndet(0, 5), cls(1, 4);
  std::uniform_real_distribution<double> score(0.0, 1.0);
  for (int seq = 0; seq < 100; ++seq) {
    const auto gt = filled(24, 24, 5, 5, 12, 12);
    std::vector<Detection> first;
    for (int k = ndet(rng); k-- > 0;) first.push_back(det(cls(rng), score(rng), testing::random_box(rng, 24, 24)));
    TrackerConfig cfg;
    const auto init = init_track(first, gt, 1, cfg);
    auto s = init;
    auto s2 = init;
    for (int t = 0; t < 10; ++t) {
      std::vector<Detection> dets;
      for (int k = ndet(rng); k-- > 0;) dets.push_back(det(cls(rng), score(rng), testing::random_box(rng, 24, 24)));
      const auto map = testing::random_map(rng, 24, 24);
      const auto prev = s.prev_box;
      const auto r = select_box(s, dets, map, cfg);
      const auto again = select_box(s2, dets, map, cfg);
      EXPECT_EQ(r.state, again.state);
      EXPECT_EQ(r.box, again.box);
      EXPECT_EQ(r.state.class_set, init.class_set);
      if (r.kind == SelectionKind::detected) {
        EXPECT_GE(iou(r.box, prev), cfg.iou_temporal);
        bool from_class = false;
        for (const auto& d : dets) from_class |= d.box == r.box && init.class_set.contains(d.class_id);
        EXPECT_TRUE(from_class);
      }
      s = r.state;
      s2 = again.state;
    }
  }
}

}  // namespace
}  // namespace trackseg
