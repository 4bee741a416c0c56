#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "trackseg/error.hpp"
#include "trackseg/geometry.hpp"
#include "trackseg/grid.hpp"
#include "trackseg/pipeline.hpp"
#include "trackseg/tracker.hpp"

namespace trackseg::synth {

// SplitMix64 (Steele, Lea, Flood 2014). Fixed constants, 64-bit state, so a
// seed yields the same stream on every platform and in every implementation
// that follows the same recipe:
//   state += 0x9E3779B97F4A7C15
//   z = (state ^ (state >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   return z ^ (z >> 31)
// uniform()      = (next() >> 11) * 2^-53                  in [0, 1)
// uniform_int()  = lo + next() % (hi - lo + 1)
// gaussian()     = Box-Muller on (1 - uniform(), uniform()), cosine branch
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  std::uint64_t next() noexcept {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) noexcept {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(next() % span);
  }

  double gaussian() noexcept {
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

 private:
  std::uint64_t state_;
};

enum class Shape { rectangle, ellipse };

// A shape translating at constant integer velocity. (x, y) is the top-left
// corner of its bounding box on frame 0.
struct MovingShape {
  Shape shape = Shape::rectangle;
  std::int64_t x = 0, y = 0;
  std::int64_t width = 8, height = 8;
  std::int64_t vx = 0, vy = 0;

  BBox box_at(std::size_t frame) const {
    const auto t = static_cast<std::int64_t>(frame);
    return BBox(x + vx * t, y + vy * t, x + vx * t + width, y + vy * t + height);
  }

  bool covers(std::size_t frame, std::int64_t px, std::int64_t py) const {
    const auto t = static_cast<std::int64_t>(frame);
    const auto x0 = x + vx * t, y0 = y + vy * t;
    if (px < x0 || px >= x0 + width || py < y0 || py >= y0 + height) return false;
    if (shape == Shape::rectangle) return true;
    // pixel centre inside the inscribed ellipse, in doubled integer coordinates
    const auto dx = 2 * (px - x0) + 1 - width;
    const auto dy = 2 * (py - y0) + 1 - height;
    return dx * dx * height * height + dy * dy * width * width <= width * width * height * height;
  }
};

// One annotated object plus the look-alike instances that show up in its
// appearance map.
struct ObjectSpec {
  MovingShape shape;
  std::int32_t class_id = 1;
  std::vector<MovingShape> distractors;
};

struct DetectorSpec {
  std::int64_t jitter = 2;          // max per-coordinate box perturbation
  double miss_rate = 0.0;           // per object (and distractor) per frame
  double false_positive_rate = 0.0; // chance of one extra random box per frame
  bool distractors_share_class = true;
};

struct SynthConfig {
  std::uint64_t seed = 1;
  std::size_t frame_count = 8;
  std::size_t width = 64, height = 64;
  std::vector<ObjectSpec> objects;
  float intensity = 1.0f;      // map value on object and distractor pixels
  double noise_sigma = 0.0;    // additive Gaussian on the maps, clipped to [0, 1]
  DetectorSpec detector;
};

struct SyntheticSequence {
  VideoInput input;
  std::vector<IndexedMask> ground_truth;  // per frame
};

// Map values are stored at 8-bit precision so that sequences survive a PNG
// round trip unchanged.
inline float quantize8(double v) {
  const auto k = static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
  return static_cast<float>(k) / 255.0f;
}

inline void validate(const SynthConfig& cfg) {
  if (cfg.width < 16 || cfg.height < 16) throw InvalidArgument("synth: dimensions must be >= 16x16");
  if (cfg.frame_count == 0) throw InvalidArgument("synth: frame_count must be positive");
  if (cfg.objects.empty() || cfg.objects.size() > 255) {
    throw InvalidArgument("synth: need between 1 and 255 objects");
  }
  if (!(cfg.intensity >= 0.9f && cfg.intensity <= 1.0f)) {
    throw InvalidArgument("synth: intensity must lie in [0.9, 1]");
  }
  if (!(cfg.noise_sigma >= 0.0)) throw InvalidArgument("synth: noise_sigma must be >= 0");
  if (cfg.detector.jitter < 0) throw InvalidArgument("synth: jitter must be >= 0");
  auto check = [&](const MovingShape& s, const std::string& what) {
    if (s.width <= 0 || s.height <= 0) throw InvalidArgument("synth: " + what + " has empty size");
    for (std::size_t t = 0; t < cfg.frame_count; ++t) {
      const auto x0 = s.x + s.vx * static_cast<std::int64_t>(t);
      const auto y0 = s.y + s.vy * static_cast<std::int64_t>(t);
      if (x0 < 0 || y0 < 0 || x0 + s.width > static_cast<std::int64_t>(cfg.width) ||
          y0 + s.height > static_cast<std::int64_t>(cfg.height)) {
        throw InvalidArgument("synth: " + what + " leaves the frame at frame " + std::to_string(t));
      }
    }
  };
  for (std::size_t k = 0; k < cfg.objects.size(); ++k) {
    check(cfg.objects[k].shape, "object " + std::to_string(k + 1));
    for (std::size_t d = 0; d < cfg.objects[k].distractors.size(); ++d) {
      check(cfg.objects[k].distractors[d],
            "distractor " + std::to_string(d) + " of object " + std::to_string(k + 1));
    }
  }
}

namespace detail {

inline void render(Grid<float>& map, const MovingShape& s, std::size_t frame, float value) {
  const auto box = s.box_at(frame);
  for (auto y = box.y_min(); y < box.y_max(); ++y) {
    for (auto x = box.x_min(); x < box.x_max(); ++x) {
      if (s.covers(frame, x, y)) map(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = value;
    }
  }
}

inline BBox jittered(SplitMix64& rng, const BBox& b, std::int64_t jitter, std::size_t w,
                     std::size_t h) {
  const auto x0 = b.x_min() + rng.uniform_int(-jitter, jitter);
  const auto y0 = b.y_min() + rng.uniform_int(-jitter, jitter);
  const auto x1 = b.x_max() + rng.uniform_int(-jitter, jitter);
  const auto y1 = b.y_max() + rng.uniform_int(-jitter, jitter);
  return clip_to_image(x0, y0, x1, y1, w, h).value_or(b);
}

}  // namespace detail

// Renders a sequence. Distractors appear in their object's map at the same
// intensity as the object itself and, by default, are detected with the
// object's class. Everything is a pure function of cfg.
inline SyntheticSequence generate(const SynthConfig& cfg) {
  validate(cfg);
  SplitMix64 rng(cfg.seed);
  const auto w = cfg.width, h = cfg.height;
  const auto& det = cfg.detector;

  SyntheticSequence seq;
  seq.input.name = "synth-" + std::to_string(cfg.seed);
  for (std::size_t t = 0; t < cfg.frame_count; ++t) {
    IndexedMask gt(w, h);
    // lower ids are drawn last so they win where objects overlap
    for (std::size_t k = cfg.objects.size(); k-- > 0;) {
      const auto& s = cfg.objects[k].shape;
      const auto box = s.box_at(t);
      for (auto y = box.y_min(); y < box.y_max(); ++y) {
        for (auto x = box.x_min(); x < box.x_max(); ++x) {
          if (s.covers(t, x, y)) gt(static_cast<std::size_t>(x), static_cast<std::size_t>(y)) = static_cast<ObjectId>(k + 1);
        }
      }
    }

    std::vector<Detection> dets;
    auto propose = [&](const MovingShape& s, std::int32_t class_id) {
      if (det.miss_rate > 0.0 && rng.uniform() < det.miss_rate) return;
      const auto box = detail::jittered(rng, s.box_at(t), det.jitter, w, h);
      const double score = quantize8(0.5 + 0.5 * rng.uniform());
      dets.push_back({class_id, "class_" + std::to_string(class_id), score, box});
    };
    for (const auto& obj : cfg.objects) {
      propose(obj.shape, obj.class_id);
      for (const auto& d : obj.distractors) {
        propose(d, det.distractors_share_class ? obj.class_id : obj.class_id + 100);
      }
    }
    if (det.false_positive_rate > 0.0 && rng.uniform() < det.false_positive_rate) {
      const auto bw = rng.uniform_int(2, static_cast<std::int64_t>(w) / 4);
      const auto bh = rng.uniform_int(2, static_cast<std::int64_t>(h) / 4);
      const auto x0 = rng.uniform_int(0, static_cast<std::int64_t>(w) - bw);
      const auto y0 = rng.uniform_int(0, static_cast<std::int64_t>(h) - bh);
      const auto cls = static_cast<std::int32_t>(1000 + rng.uniform_int(0, 9));
      dets.push_back({cls, "class_" + std::to_string(cls), quantize8(rng.uniform()),
                      BBox(x0, y0, x0 + bw, y0 + bh)});
    }
    // Fisher-Yates so that input order carries no information
    for (std::size_t i = dets.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(dets[i - 1], dets[j]);
    }
    seq.input.detections.push_back(std::move(dets));

    for (std::size_t k = 0; k < cfg.objects.size(); ++k) {
      GrayMap map(w, h, 0.0f);
      detail::render(map, cfg.objects[k].shape, t, cfg.intensity);
      for (const auto& d : cfg.objects[k].distractors) detail::render(map, d, t, cfg.intensity);
      for (auto& v : map) {
        const double noisy = cfg.noise_sigma > 0.0 ? v + cfg.noise_sigma * rng.gaussian() : v;
        v = quantize8(noisy);
      }
      seq.input.maps[static_cast<ObjectId>(k + 1)].push_back(std::move(map));
    }
    seq.ground_truth.push_back(std::move(gt));
  }
  seq.input.annotation = seq.ground_truth.front();
  return seq;
}

struct SuiteParams {
  std::size_t frame_count = 8;
  std::size_t width = 64, height = 64;
  std::size_t distractors = 1;
  double noise_sigma = 0.0;
  std::int64_t jitter = 2;
};

namespace detail {

inline bool tracks_apart(const MovingShape& a, const MovingShape& b, std::size_t frames,
                         std::int64_t margin) {
  for (std::size_t t = 0; t < frames; ++t) {
    const auto ba = a.box_at(t), bb = b.box_at(t);
    const bool separated = ba.x_max() + margin <= bb.x_min() || bb.x_max() + margin <= ba.x_min() ||
                           ba.y_max() + margin <= bb.y_min() || bb.y_max() + margin <= ba.y_min();
    if (!separated) return false;
  }
  return true;
}

inline MovingShape random_track(SplitMix64& rng, const SuiteParams& p, std::int64_t w, std::int64_t h) {
  MovingShape s;
  s.shape = rng.uniform() < 0.5 ? Shape::rectangle : Shape::ellipse;
  s.width = w;
  s.height = h;
  s.vx = rng.uniform_int(-1, 1);
  s.vy = rng.uniform_int(-1, 1);
  const auto travel = static_cast<std::int64_t>(p.frame_count) - 1;
  const auto lo_x = s.vx < 0 ? -s.vx * travel : 0;
  const auto hi_x = static_cast<std::int64_t>(p.width) - w - (s.vx > 0 ? s.vx * travel : 0);
  const auto lo_y = s.vy < 0 ? -s.vy * travel : 0;
  const auto hi_y = static_cast<std::int64_t>(p.height) - h - (s.vy > 0 ? s.vy * travel : 0);
  if (hi_x < lo_x || hi_y < lo_y) {
    s.vx = s.vy = 0;
    s.x = rng.uniform_int(0, static_cast<std::int64_t>(p.width) - w);
    s.y = rng.uniform_int(0, static_cast<std::int64_t>(p.height) - h);
  } else {
    s.x = rng.uniform_int(lo_x, hi_x);
    s.y = rng.uniform_int(lo_y, hi_y);
  }
  return s;
}

}  // namespace detail

// Builds a single-object config whose distractors have the object's size and
// class and whose tracks stay clear of the object's track by more than the
// detector jitter, so box-based filters can always separate them.
inline SynthConfig random_config(std::uint64_t seed, const SuiteParams& p) {
  SplitMix64 rng(seed ^ 0xD1B54A32D192ED03ull);
  const auto min_side = static_cast<std::int64_t>(std::min(p.width, p.height));
  const std::int64_t margin = p.jitter + 2;
  for (int attempt = 0; attempt < 200; ++attempt) {
    const auto ow = rng.uniform_int(std::max<std::int64_t>(3, min_side / 6), std::max<std::int64_t>(3, min_side / 4));
    const auto oh = rng.uniform_int(std::max<std::int64_t>(3, min_side / 6), std::max<std::int64_t>(3, min_side / 4));
    ObjectSpec obj{detail::random_track(rng, p, ow, oh), 1, {}};
    std::vector<MovingShape> placed{obj.shape};
    bool ok = true;
    for (std::size_t d = 0; d < p.distractors && ok; ++d) {
      ok = false;
      for (int tries = 0; tries < 50 && !ok; ++tries) {
        auto cand = detail::random_track(rng, p, ow, oh);
        cand.shape = obj.shape.shape;
        ok = std::all_of(placed.begin(), placed.end(), [&](const MovingShape& other) {
          return detail::tracks_apart(cand, other, p.frame_count, margin);
        });
        if (ok) {
          placed.push_back(cand);
          obj.distractors.push_back(cand);
        }
      }
    }
    if (!ok) continue;
    SynthConfig cfg;
    cfg.seed = seed;
    cfg.frame_count = p.frame_count;
    cfg.width = p.width;
    cfg.height = p.height;
    cfg.noise_sigma = p.noise_sigma;
    cfg.detector.jitter = p.jitter;
    cfg.objects.push_back(std::move(obj));
    return cfg;
  }
  throw InvalidArgument("synth: cannot place " + std::to_string(p.distractors) +
                        " separated distractors in a " + std::to_string(p.width) + "x" +
                        std::to_string(p.height) + " frame");
}

}  // namespace trackseg::synth
