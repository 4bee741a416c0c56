// trackseg: command-line front end.
//
//   trackseg run   --video DIR --out DIR --mode MODE [thresholds...]
//   trackseg run   --manifest FILE --out DIR
//   trackseg eval  --pred DIR --gt DIR [--per-frame] [--exclude-last]
//   trackseg synth --seed N --frames N --size WxH --distractors N --noise F --out DIR

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <unistd.h>

#include "CLI11.hpp"
#include "trackseg/trackseg.hpp"

namespace fs = std::filesystem;
using namespace trackseg;

namespace {

std::mutex g_log_mutex;

void log_line(const std::string& line) {
  std::lock_guard lock(g_log_mutex);
  std::cerr << line << '\n';
}

// Output goes to a sibling staging directory that is renamed into place on
// success and removed on failure.
class StagedOutput {
 public:
  explicit StagedOutput(fs::path target) : target_(std::move(target)) {
    staging_ = target_;
    staging_ += ".partial-" + std::to_string(::getpid());
    fs::remove_all(staging_);
    fs::create_directories(staging_);
  }
  StagedOutput(const StagedOutput&) = delete;
  StagedOutput& operator=(const StagedOutput&) = delete;
  ~StagedOutput() {
    if (!committed_) {
      std::error_code ec;
      fs::remove_all(staging_, ec);
    }
  }

  const fs::path& path() const { return staging_; }

  void commit() {
    fs::remove_all(target_);
    if (target_.has_parent_path()) fs::create_directories(target_.parent_path());
    fs::rename(staging_, target_);
    committed_ = true;
  }

 private:
  fs::path target_;
  fs::path staging_;
  bool committed_ = false;
};

struct RunOptions {
  std::string video;
  std::string out;
  std::string manifest;
  std::string mode = "full";
  double t_bin = 0.5;
  double t_high = 0.8;
  double t_low = 0.4;
  double iou_temporal = 0.3;
  double iou_first = 0.3;
  int connectivity = 8;
  int max_coast = -1;
  bool no_clip_low_to_box = false;
  bool exclude_last = false;
  unsigned jobs = 0;
};

void run_one(const fs::path& video_dir, const fs::path& out_dir, PipelineMode mode,
             const TrackerConfig& tc, const HysteresisConfig& hc, bool exclude_last) {
  const auto input = io::load_video(video_dir, log_line);
  const auto result = process_video(input, mode, tc, hc);
  io::save_result(out_dir, result, fs::absolute(video_dir).string());
  if (exclude_last) {
    auto manifest = io::read_json(out_dir / "manifest.json");
    manifest["eval"] = {{"exclude_last", true}};
    io::write_json(out_dir / "manifest.json", manifest);
  }
  std::size_t coasted = 0, lost = 0;
  for (const auto& frame : result.records) {
    for (const auto& rec : frame) {
      coasted += rec.kind == SelectionKind::coasted;
      lost += rec.lost;
    }
  }
  std::ostringstream os;
  os << input.name << ": " << input.frame_count() << " frames, " << result.class_sets.size()
     << " tracked objects, " << coasted << " coasted, " << lost << " lost";
  log_line(os.str());
}

int cmd_run(const RunOptions& o) {
  PipelineMode mode;
  TrackerConfig tc;
  HysteresisConfig hc;
  fs::path video;
  if (!o.manifest.empty()) {
    const auto spec = io::run_spec_from_manifest(o.manifest);
    video = spec.video_path;
    mode = spec.mode;
    tc = spec.tracker;
    hc = spec.hysteresis;
  } else {
    if (o.video.empty()) throw InvalidArgument("run: --video or --manifest is required");
    video = o.video;
    mode = pipeline_mode_from_string(o.mode);
    tc.t_bin = o.t_bin;
    tc.iou_temporal = o.iou_temporal;
    tc.iou_first_frame_min = o.iou_first;
    tc.connectivity = connectivity_from_int(o.connectivity);
    if (o.max_coast >= 0) tc.max_coast = static_cast<std::uint32_t>(o.max_coast);
    hc.t_high = o.t_high;
    hc.t_low = o.t_low;
    hc.connectivity = tc.connectivity;
    hc.clip_low_to_box = !o.no_clip_low_to_box;
  }
  validate(tc);
  validate(hc);

  StagedOutput out(o.out);
  if (io::is_video_dir(video)) {
    run_one(video, out.path(), mode, tc, hc, o.exclude_last);
    out.commit();
    return 0;
  }

  std::vector<fs::path> videos;
  if (fs::is_directory(video)) {
    for (const auto& e : fs::directory_iterator(video)) {
      if (e.is_directory() && io::is_video_dir(e.path())) videos.push_back(e.path());
    }
  }
  if (videos.empty()) throw FormatError(video.string() + ": neither a video nor a directory of videos");
  std::sort(videos.begin(), videos.end());

  const unsigned jobs = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::vector<std::string> errors;
  auto worker = [&] {
    for (auto i = next++; i < videos.size(); i = next++) {
      try {
        run_one(videos[i], out.path() / videos[i].filename(), mode, tc, hc, o.exclude_last);
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mutex);
        errors.push_back(e.what());
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned j = 0; j < std::min<std::size_t>(jobs, videos.size()); ++j) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (!errors.empty()) {
    for (std::size_t i = 1; i < errors.size(); ++i) log_line("trackseg: error: " + errors[i]);
    throw Error(errors.front());
  }
  out.commit();
  return 0;
}

bool has_frames(const fs::path& dir) { return fs::is_regular_file(dir / "00000.png"); }

fs::path gt_frames_dir(const fs::path& dir) {
  if (has_frames(dir)) return dir;
  if (has_frames(dir / "gt")) return dir / "gt";
  throw FormatError(dir.string() + ": no ground-truth frames (expected 00000.png or gt/00000.png)");
}

bool manifest_wants_exclude_last(const fs::path& pred_dir) {
  const auto path = pred_dir / "manifest.json";
  if (!fs::is_regular_file(path)) return false;
  const auto m = io::read_json(path);
  return m.contains("eval") && m["eval"].value("exclude_last", false);
}

int cmd_eval(const std::string& pred, const std::string& gt, bool per_frame, bool exclude_last,
             const std::string& summary) {
  std::vector<VideoMasks> preds, gts;
  bool hinted = false;
  if (has_frames(pred)) {
    const std::string name = fs::path(pred).filename().string();
    preds.push_back(io::load_mask_dir(pred, name));
    gts.push_back(io::load_mask_dir(gt_frames_dir(gt), name));
    hinted = manifest_wants_exclude_last(pred);
  } else {
    std::vector<fs::path> dirs;
    for (const auto& e : fs::directory_iterator(pred)) {
      if (e.is_directory() && has_frames(e.path())) dirs.push_back(e.path());
    }
    if (dirs.empty()) throw FormatError(pred + ": no predicted frames found");
    std::sort(dirs.begin(), dirs.end());
    for (const auto& d : dirs) {
      const auto name = d.filename().string();
      preds.push_back(io::load_mask_dir(d, name));
      gts.push_back(io::load_mask_dir(gt_frames_dir(fs::path(gt) / name), name));
      hinted = hinted || manifest_wants_exclude_last(d);
    }
  }
  const auto report = evaluate(preds, gts, EvalOptions{exclude_last || hinted});
  std::cout << format_report(report, per_frame);
  const fs::path summary_path = summary.empty() ? fs::path(pred) / "eval_summary.json" : fs::path(summary);
  io::write_json(summary_path, io::report_to_json(report));
  return 0;
}

struct SynthOptions {
  std::uint64_t seed = 1;
  std::size_t frames = 8;
  std::string size = "64x64";
  std::size_t distractors = 1;
  double noise = 0.0;
  std::int64_t jitter = 2;
  double miss_rate = 0.0;
  double fp_rate = 0.0;
  std::string out;
};

int cmd_synth(const SynthOptions& o) {
  synth::SuiteParams p;
  if (std::sscanf(o.size.c_str(), "%zux%zu", &p.width, &p.height) != 2) {
    throw InvalidArgument("synth: --size must look like WxH, got '" + o.size + "'");
  }
  p.frame_count = o.frames;
  p.distractors = o.distractors;
  p.noise_sigma = o.noise;
  p.jitter = o.jitter;
  if (p.width < 16 || p.height < 16) throw InvalidArgument("synth: size must be at least 16x16");
  auto cfg = synth::random_config(o.seed, p);
  cfg.detector.miss_rate = o.miss_rate;
  cfg.detector.false_positive_rate = o.fp_rate;
  const auto seq = synth::generate(cfg);
  StagedOutput out(o.out);
  io::save_video(out.path(), seq.input, &seq.ground_truth);
  out.commit();
  std::cerr << seq.input.name << ": wrote " << seq.ground_truth.size() << " frames to " << o.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Video object segmentation from appearance maps and tracked detections"};
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "segment a video (or a directory of videos)");
  run_cmd->add_option("--video", run.video, "video directory or batch directory");
  run_cmd->add_option("--manifest", run.manifest, "redo the run recorded in this manifest.json");
  run_cmd->add_option("--out", run.out, "output directory")->required();
  run_cmd->add_option("--mode", run.mode, "appearance|clip|clip_temporal|conncomp|full")
      ->check(CLI::IsMember({"appearance", "clip", "clip_temporal", "conncomp", "full"}));
  run_cmd->add_option("--t-bin", run.t_bin, "map binarization threshold")->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--t-high", run.t_high, "strong threshold")->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--t-low", run.t_low, "weak threshold")->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--iou-temporal", run.iou_temporal, "min IoU with the previous box")
      ->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--iou-first", run.iou_first, "min annotation overlap on frame 0")
      ->check(CLI::Range(0.0, 1.0));
  run_cmd->add_option("--connectivity", run.connectivity, "4 or 8")->check(CLI::IsMember({4, 8}));
  run_cmd->add_option("--max-coast", run.max_coast, "frames before a coasting track is flagged lost");
  run_cmd->add_flag("--no-clip-low-to-box", run.no_clip_low_to_box,
                    "let weak components extend outside the selected box");
  run_cmd->add_flag("--exclude-last", run.exclude_last, "ask eval to skip the last frame");
  run_cmd->add_option("--jobs", run.jobs, "parallel videos in batch mode (default: all cores)");

  std::string pred, gt, summary;
  bool per_frame = false, exclude_last = false;
  auto* eval_cmd = app.add_subcommand("eval", "score predicted masks against ground truth");
  eval_cmd->add_option("--pred", pred, "prediction directory (or batch of them)")->required();
  eval_cmd->add_option("--gt", gt, "ground-truth directory (or batch of them)")->required();
  eval_cmd->add_flag("--per-frame", per_frame, "print per-frame scores");
  eval_cmd->add_flag("--exclude-last", exclude_last, "do not score the last frame");
  eval_cmd->add_option("--summary", summary, "summary JSON path (default: PRED/eval_summary.json)");

  SynthOptions syn;
  auto* synth_cmd = app.add_subcommand("synth", "write a synthetic video with ground truth");
  synth_cmd->add_option("--seed", syn.seed, "random seed");
  synth_cmd->add_option("--frames", syn.frames, "frame count")->check(CLI::PositiveNumber);
  synth_cmd->add_option("--size", syn.size, "WxH, at least 16x16");
  synth_cmd->add_option("--distractors", syn.distractors, "look-alike instances");
  synth_cmd->add_option("--noise", syn.noise, "Gaussian noise sigma on the maps")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--jitter", syn.jitter, "detector box jitter in pixels")->check(CLI::NonNegativeNumber);
  synth_cmd->add_option("--miss-rate", syn.miss_rate, "detector miss probability")->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--fp-rate", syn.fp_rate, "false positive probability per frame")
      ->check(CLI::Range(0.0, 1.0));
  synth_cmd->add_option("--out", syn.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run);
    if (eval_cmd->parsed()) return cmd_eval(pred, gt, per_frame, exclude_last, summary);
    if (synth_cmd->parsed()) return cmd_synth(syn);
  } catch (const std::exception& e) {
    std::cerr << "trackseg: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
