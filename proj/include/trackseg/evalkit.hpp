#pragma once

#include <cstdio>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "trackseg/error.hpp"
#include "trackseg/geometry.hpp"
#include "trackseg/grid.hpp"
#include "trackseg/pipeline.hpp"

namespace trackseg {

// Region similarity |pred & gt| / |pred | gt|; two empty masks score 1.
inline Ratio jaccard_ratio(const BinaryMask& pred, const BinaryMask& gt) {
  require_same_shape(pred, gt, "jaccard");
  std::uint64_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const bool p = pred[i] != 0, g = gt[i] != 0;
    inter += p && g;
    uni += p || g;
  }
  if (uni == 0) return Ratio{1, 1};
  return Ratio{inter, uni};
}

inline double jaccard(const BinaryMask& pred, const BinaryMask& gt) {
  return jaccard_ratio(pred, gt).value();
}

// Indexed masks of one video, frame 0 first.
struct VideoMasks {
  std::string name;
  std::vector<IndexedMask> frames;
};

struct EvalOptions {
  bool exclude_last = false;
};

struct FrameScore {
  std::size_t frame = 0;
  double j = 0.0;
};

struct ObjectEval {
  ObjectId object_id = 0;
  std::vector<FrameScore> frames;
  double mean = 0.0;
};

struct VideoEval {
  std::string name;
  std::vector<ObjectEval> objects;
  double mean = 0.0;
};

struct EvalReport {
  std::vector<VideoEval> videos;
  double j_mean = 0.0;  // mean over all objects of the per-object means
  bool exclude_last = false;
};

namespace detail {

inline double mean_of(std::span<const double> xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

}  // namespace detail

// J per object per frame against the ground truth. Objects are the ids of
// ground-truth frame 0; frame 0 itself is never scored because it is the
// given annotation. Objects with no scored frame do not enter any mean.
inline EvalReport evaluate(std::span<const VideoMasks> predictions,
                           std::span<const VideoMasks> ground_truth, const EvalOptions& opts = {}) {
  std::map<std::string, const VideoMasks*> by_name;
  for (const auto& p : predictions) by_name[p.name] = &p;

  EvalReport report;
  report.exclude_last = opts.exclude_last;
  std::vector<double> object_means;
  for (const auto& gt : ground_truth) {
    const auto it = by_name.find(gt.name);
    if (it == by_name.end()) throw InvalidArgument("no prediction for video '" + gt.name + "'");
    const VideoMasks& pred = *it->second;
    if (gt.frames.empty()) throw InvalidArgument("ground truth of '" + gt.name + "' has no frames");

    std::size_t last = gt.frames.size();
    if (opts.exclude_last && last > 1) --last;

    std::vector<std::size_t> missing;
    for (std::size_t t = 1; t < last; ++t) {
      if (t >= pred.frames.size() || pred.frames[t].empty()) missing.push_back(t);
    }
    if (!missing.empty()) {
      std::ostringstream os;
      os << "video '" << gt.name << "': prediction missing frames";
      for (auto t : missing) os << ' ' << t;
      throw InvalidArgument(os.str());
    }

    VideoEval video{gt.name, {}, 0.0};
    std::vector<double> video_means;
    for (auto id : object_ids(gt.frames[0])) {
      ObjectEval obj{id, {}, 0.0};
      std::vector<double> js;
      for (std::size_t t = 1; t < last; ++t) {
        const double j = jaccard(object_mask(pred.frames[t], id), object_mask(gt.frames[t], id));
        obj.frames.push_back({t, j});
        js.push_back(j);
      }
      if (js.empty()) continue;
      obj.mean = detail::mean_of(js);
      video_means.push_back(obj.mean);
      object_means.push_back(obj.mean);
      video.objects.push_back(std::move(obj));
    }
    if (video_means.empty()) continue;
    video.mean = detail::mean_of(video_means);
    report.videos.push_back(std::move(video));
  }
  if (object_means.empty()) throw InvalidArgument("evaluate: no frames to score");
  report.j_mean = detail::mean_of(object_means);
  return report;
}

inline std::string format_report(const EvalReport& report, bool per_frame = false) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-24s %6s %8s %8s\n", "video", "object", "frames", "J_mean");
  os << buf;
  for (const auto& v : report.videos) {
    for (const auto& o : v.objects) {
      std::snprintf(buf, sizeof buf, "%-24s %6d %8zu %8.4f\n", v.name.c_str(),
                    static_cast<int>(o.object_id), o.frames.size(), o.mean);
      os << buf;
      if (per_frame) {
        for (const auto& f : o.frames) {
          std::snprintf(buf, sizeof buf, "%-24s %6s %8zu %8.4f\n", "", "", f.frame, f.j);
          os << buf;
        }
      }
    }
  }
  std::snprintf(buf, sizeof buf, "J_mean = %.4f\n", report.j_mean);
  os << buf;
  return os.str();
}

}  // namespace trackseg
