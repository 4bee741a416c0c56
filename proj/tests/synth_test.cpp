#include "trackseg/synth.hpp"

#include <gtest/gtest.h>

#include "trackseg/evalkit.hpp"
#include "trackseg/oracle.hpp"

namespace trackseg {
namespace {

double j_mean_of(const synth::SyntheticSequence& seq, PipelineMode mode) {
  const auto r = process_video(seq.input, mode, {}, {});
  const std::vector<VideoMasks> pred{{"v", r.masks}}, gt{{"v", seq.ground_truth}};
  return evaluate(pred, gt).j_mean;
}

TEST(SplitMix64Test, ReferenceStream) {
  // published reference values for seed 0 / seed 1234567
  synth::SplitMix64 zero(0);
  EXPECT_EQ(zero.next(), 0xE220A8397B1DCDAFull);
  EXPECT_EQ(zero.next(), 0x6E789E6AA1B965F4ull);
  synth::SplitMix64 r(1234567);
  EXPECT_EQ(r.next(), 6457827717110365317ull);
  EXPECT_EQ(r.next(), 3203168211198807973ull);
}

TEST(SplitMix64Test, DerivedDistributionsStayInRange) {
  synth::SplitMix64 r(5);
  double mean = 0.0;
  for (int i = 0; i < 20000; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const auto k = r.uniform_int(-2, 2);
    ASSERT_GE(k, -2);
    ASSERT_LE(k, 2);
    mean += r.gaussian();
  }
  EXPECT_NEAR(mean / 20000.0, 0.0, 0.05);
}

TEST(GenerateTest, NoiselessClosedLoopIsPerfectInEveryMode) {
  synth::SuiteParams p;
  p.distractors = 0;
  p.jitter = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto seq = synth::generate(synth::random_config(seed, p));
    for (std::size_t t = 0; t < seq.ground_truth.size(); ++t) {
      const auto& map = seq.input.maps.at(1)[t];
      for (std::size_t i = 0; i < map.size(); ++i) EXPECT_EQ(map[i], seq.ground_truth[t][i] == 1 ? 1.0f : 0.0f);
    }
    for (auto mode : kAllModes) EXPECT_EQ(j_mean_of(seq, mode), 1.0) << to_string(mode);
  }
}

TEST(GenerateTest, SameSeedSameSequence) {
  synth::SuiteParams p;
  p.distractors = 2;
  p.noise_sigma = 0.1;
  const auto cfg = synth::random_config(77, p);
  const auto a = synth::generate(cfg), b = synth::generate(cfg);
  EXPECT_EQ(a.input, b.input);
  EXPECT_EQ(a.ground_truth, b.ground_truth);
  auto other = cfg;
  other.seed = 78;
  EXPECT_NE(synth::generate(other).input, a.input);
}

TEST(GenerateTest, DisjointDistractorHurtsAppearanceButNotFull) {
  synth::SuiteParams p;
  p.distractors = 1;
  const auto seq = synth::generate(synth::random_config(1, p));
  EXPECT_LT(j_mean_of(seq, PipelineMode::appearance), 1.0);
  EXPECT_EQ(j_mean_of(seq, PipelineMode::full), 1.0);
}

TEST(GenerateTest, DistractorsShareClassAndIntensity) {
  synth::SuiteParams p;
  p.distractors = 2;
  const auto cfg = synth::random_config(3, p);
  const auto seq = synth::generate(cfg);
  for (const auto& frame : seq.input.detections) {
    EXPECT_EQ(frame.size(), 3u);
    for (const auto& d : frame) EXPECT_EQ(d.class_id, cfg.objects[0].class_id);
  }
  for (const auto& d : cfg.objects[0].distractors) {
    const auto b = d.box_at(0);
    EXPECT_EQ(seq.input.maps.at(1)[0](static_cast<std::size_t>(b.x_min() + b.width() / 2),
                                      static_cast<std::size_t>(b.y_min() + b.height() / 2)),
              cfg.intensity);
    EXPECT_GE(static_cast<double>(b.area()), cfg.objects[0].shape.box_at(0).area() / 3.0);
  }
}

TEST(GenerateTest, ObjectLeavingFrameIsRejected) {
  synth::SynthConfig cfg;
  cfg.frame_count = 10;
  cfg.objects.push_back({{synth::Shape::rectangle, 50, 10, 10, 10, 1, 0}, 1, {}});
  EXPECT_THROW(synth::generate(cfg), InvalidArgument);
  cfg.objects[0].shape.vx = 0;
  EXPECT_NO_THROW(synth::generate(cfg));
  cfg.width = 12;
  EXPECT_THROW(synth::generate(cfg), InvalidArgument);
}

TEST(GenerateTest, EllipseRasterIsSymmetric) {
  synth::MovingShape e{synth::Shape::ellipse, 0, 0, 9, 6, 0, 0};
  int n = 0;
  for (int y = 0; y < 6; ++y) {
    for (int x = 0; x < 9; ++x) {
      EXPECT_EQ(e.covers(0, x, y), e.covers(0, 8 - x, y));
      EXPECT_EQ(e.covers(0, x, y), e.covers(0, x, 5 - y));
      n += e.covers(0, x, y);
    }
  }
  EXPECT_GT(n, 30);
  EXPECT_LT(n, 54);
}

TEST(GenerateTest, MissesAndFalsePositivesFollowRates) {
  synth::SuiteParams p;
  p.frame_count = 16;
  auto cfg = synth::random_config(9, p);
  cfg.detector.miss_rate = 1.0;
  cfg.detector.false_positive_rate = 1.0;
  const auto seq = synth::generate(cfg);
  for (const auto& frame : seq.input.detections) {
    ASSERT_EQ(frame.size(), 1u);
    EXPECT_GE(frame[0].class_id, 1000);
  }
}

TEST(OracleTest, AgreesWithPipelineOnNoisySequences) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    synth::SuiteParams p;
    p.width = 32;
    p.height = 28;
    p.frame_count = 6;
    p.distractors = seed % 4;
    p.noise_sigma = 0.25;
    auto cfg = synth::random_config(seed, p);
    cfg.detector.miss_rate = 0.3;
    cfg.detector.false_positive_rate = 0.3;
    const auto seq = synth::generate(cfg);
    for (auto mode : kAllModes) {
      EXPECT_EQ(process_video(seq.input, mode, {}, {}), oracle::oracle_pipeline(seq.input, mode, {}, {}));
    }
  }
}

}  // namespace
}  // namespace trackseg
