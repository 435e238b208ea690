#include "app.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <optional>

#include "nucleitrace/config.hpp"
#include "nucleitrace/diagnostics.hpp"
#include "nucleitrace/eval.hpp"
#include "nucleitrace/overlay.hpp"
#include "nucleitrace/pipeline.hpp"
#include "nucleitrace/synth.hpp"
#include "nucleitrace/tiff_io.hpp"
#include "nucleitrace/track_table.hpp"

namespace nucleitrace::cli {

namespace fs = std::filesystem;

namespace {

constexpr const char* kDetectionsFile = "detections.txt";
constexpr const char* kObjectsFile = "objects.txt";
constexpr const char* kTrackFile = "res_track.txt";

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string command;
  std::string preset;
  std::string config;
  std::optional<std::uint64_t> seed;
  int threads = 1;
  std::string in;
  std::string out;
  std::string truth;
  std::string masks;
  std::string seeds;
  double r_match = 3.0;
};

// Files written by a command; removed again unless the command succeeds.
class Outputs {
 public:
  ~Outputs() {
    if (committed_) return;
    std::error_code ec;
    for (auto it = written_.rbegin(); it != written_.rend(); ++it) fs::remove(*it, ec);
  }
  fs::path add(const fs::path& p) {
    written_.push_back(p);
    return p;
  }
  void commit() { committed_ = true; }

 private:
  std::vector<fs::path> written_;
  bool committed_ = false;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

const std::string& require(const std::string& value, const char* flag) {
  if (value.empty()) throw UsageError(std::string(flag) + " is required for this command");
  return value;
}

PipelineConfig pipeline_config(const Options& o) {
  if (!o.preset.empty() && !o.config.empty()) throw UsageError("--preset and --config are mutually exclusive");
  PipelineConfig c;
  if (!o.config.empty()) {
    c = load_config(o.config);
  } else if (!o.preset.empty()) {
    try {
      c = load_preset(o.preset);
    } catch (const ParameterError& e) {
      throw UsageError(e.what());
    }
  } else {
    throw UsageError("one of --preset or --config is required");
  }
  if (!o.seeds.empty()) c.selected_seeds = o.seeds;
  return c;
}

std::vector<Image> load_frames(const Options& o, const PipelineConfig& c) {
  std::vector<Image> frames = read_sequence(require(o.in, "--in"));
  prepare_frames(frames, c);
  return frames;
}

std::vector<Point> load_seeds(const PipelineConfig& c) {
  if (c.selected_seeds.empty()) return {};
  return parse_points(read_text_file(c.selected_seeds), c.selected_seeds);
}

std::size_t count(const FrameDetections& f) {
  std::size_t n = 0;
  for (const auto& v : f) n += v.size();
  return n;
}

void say(std::ostream& err, const std::string& stage, const std::string& what, const Stopwatch& w) {
  char buf[32];
  std::snprintf(buf, sizeof buf, " (%.2f s)", w.seconds());
  err << stage << ": " << what << buf << '\n';
}

// --- stages -------------------------------------------------------------------

DetectionTable stage_detect(const std::vector<Image>& frames, const PipelineConfig& c, int threads, std::ostream& err) {
  Stopwatch w;
  DetectionTable table{c.mode == Mode::k2D ? 2 : 3, detect_sequence(frames, c, threads)};
  say(err, "detect", std::to_string(count(table.frames)) + " detections in " + std::to_string(frames.size()) + " frames",
      w);
  return table;
}

std::pair<ObjectTable, std::vector<TrackRecord>> stage_track(const std::vector<Image>& frames,
                                                             const DetectionTable& dets, const PipelineConfig& c,
                                                             int threads, std::ostream& err) {
  Stopwatch w;
  if (dets.ndim != (c.mode == Mode::k2D ? 2 : 3)) throw DataError("detections do not match the configured mode");
  const TrackingOutput tr = track_sequence(frames, dets.frames, c, load_seeds(c), threads);
  std::size_t divisions = 0;
  for (const auto& [id, t] : tr.graph.tracks()) divisions += tr.graph.children(id).size() >= 2;
  say(err, "track", std::to_string(tr.graph.size()) + " tracks, " + std::to_string(divisions) + " divisions", w);
  return {object_table(tr.graph, tr.cutoffs, dets.ndim), track_records(tr.graph)};
}

std::vector<LabelImage> stage_segment(const std::vector<Image>& frames, const ObjectTable& objects,
                                      const PipelineConfig& c, int threads, std::ostream& err) {
  Stopwatch w;
  if (objects.ndim != (c.mode == Mode::k2D ? 2 : 3)) throw DataError("objects do not match the configured mode");
  std::vector<LabelImage> masks = segment_sequence(frames, objects, c, threads);
  say(err, "segment", std::to_string(masks.size()) + " masks", w);
  return masks;
}

void write_masks_tracked(Outputs& outputs, const fs::path& dir, const std::vector<LabelImage>& masks) {
  for (std::size_t t = 0; t < masks.size(); ++t) {
    write_label_tiff(outputs.add(dir / frame_file_name("mask", int(t))), masks[t]);
  }
}

// --- commands -----------------------------------------------------------------

int cmd_run(const Options& o, std::ostream& err) {
  const PipelineConfig c = pipeline_config(o);
  const std::vector<Image> frames = load_frames(o, c);
  const fs::path out = require(o.out, "--out");
  fs::create_directories(out);
  Outputs outputs;
  const DetectionTable dets = stage_detect(frames, c, o.threads, err);
  write_text_file(outputs.add(out / kDetectionsFile), format_detections(dets));
  const auto [objects, records] = stage_track(frames, dets, c, o.threads, err);
  write_text_file(outputs.add(out / kObjectsFile), format_objects(objects));
  write_track_table(outputs.add(out / kTrackFile), records);
  write_masks_tracked(outputs, out, stage_segment(frames, objects, c, o.threads, err));
  outputs.commit();
  return kOk;
}

int cmd_detect(const Options& o, std::ostream& err) {
  const PipelineConfig c = pipeline_config(o);
  const std::vector<Image> frames = load_frames(o, c);
  const fs::path out = require(o.out, "--out");
  fs::create_directories(out);
  Outputs outputs;
  write_text_file(outputs.add(out / kDetectionsFile), format_detections(stage_detect(frames, c, o.threads, err)));
  outputs.commit();
  return kOk;
}

int cmd_track(const Options& o, std::ostream& err) {
  const PipelineConfig c = pipeline_config(o);
  const fs::path out = require(o.out, "--out");
  const fs::path det_path = out / kDetectionsFile;
  const DetectionTable dets = parse_detections(read_text_file(det_path), det_path.string());
  std::vector<Image> frames;
  if (c.flow_enabled && c.mode == Mode::k2D) {
    if (o.in.empty()) throw UsageError("--in (raw frames) is required when flow propagation is enabled");
    frames = load_frames(o, c);
    if (frames.size() != dets.frames.size()) {
      throw DataError(det_path.string() + " covers " + std::to_string(dets.frames.size()) + " frames, " + o.in +
                      " has " + std::to_string(frames.size()));
    }
  }
  Outputs outputs;
  const auto [objects, records] = stage_track(frames, dets, c, o.threads, err);
  write_text_file(outputs.add(out / kObjectsFile), format_objects(objects));
  write_track_table(outputs.add(out / kTrackFile), records);
  outputs.commit();
  return kOk;
}

int cmd_segment(const Options& o, std::ostream& err) {
  const PipelineConfig c = pipeline_config(o);
  const std::vector<Image> frames = load_frames(o, c);
  const fs::path out = require(o.out, "--out");
  const fs::path obj_path = out / kObjectsFile;
  const ObjectTable objects = parse_objects(read_text_file(obj_path), obj_path.string());
  Outputs outputs;
  write_masks_tracked(outputs, out, stage_segment(frames, objects, c, o.threads, err));
  outputs.commit();
  return kOk;
}

int cmd_synth(const Options& o, std::ostream& err) {
  if (!o.preset.empty() && !o.config.empty()) throw UsageError("--preset and --config are mutually exclusive");
  SynthSpec spec;
  if (!o.config.empty()) {
    spec = parse_synth_spec(read_text_file(o.config), o.config);
  } else if (!o.preset.empty()) {
    try {
      spec = synth_preset(o.preset);
    } catch (const ParameterError& e) {
      throw UsageError(e.what());
    }
  }
  if (o.seed) spec.seed = *o.seed;
  const fs::path out = require(o.out, "--out");
  Stopwatch w;
  const SynthSequence seq = synthesize(spec);
  Outputs outputs;
  fs::create_directories(out / "gt");
  for (std::size_t t = 0; t < seq.raw.size(); ++t) {
    write_tiff16(outputs.add(out / frame_file_name("t", int(t))), seq.raw[t]);
    write_label_tiff(outputs.add(out / "gt" / frame_file_name("mask", int(t))), seq.masks[t]);
  }
  write_track_table(outputs.add(out / "gt" / kTrackFile), seq.tracks);
  outputs.commit();
  say(err, "synth", std::to_string(seq.raw.size()) + " frames, " + std::to_string(seq.tracks.size()) + " tracks", w);
  return kOk;
}

EvalSequence load_result_dir(const fs::path& dir) {
  return sequence_from_masks(read_masks(dir), read_track_table(dir / kTrackFile));
}

int cmd_eval(const Options& o, std::ostream& out) {
  if (!(o.r_match > 0.0)) throw UsageError("--r-match must be > 0");
  const EvalSequence result = load_result_dir(require(o.in, "--in"));
  const EvalSequence truth = load_result_dir(require(o.truth, "--truth"));
  out << format_report(evaluate(result, truth, o.r_match));
  return kOk;
}

int cmd_overlay(const Options& o, std::ostream& err) {
  const std::vector<Image> raw = read_sequence(require(o.in, "--in"));
  const std::vector<LabelImage> masks = read_masks(require(o.masks, "--masks"));
  if (raw.size() != masks.size()) {
    throw DataError(o.in + " has " + std::to_string(raw.size()) + " frames, " + o.masks + " has " +
                    std::to_string(masks.size()));
  }
  const fs::path out = require(o.out, "--out");
  fs::create_directories(out);
  Stopwatch w;
  Outputs outputs;
  for (std::size_t t = 0; t < raw.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "overlay%03zu.png", t);
    write_png(outputs.add(out / name), render_overlay(raw[t], masks[t]));
  }
  outputs.commit();
  say(err, "overlay", std::to_string(raw.size()) + " images", w);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nucleus detection, tracking and segmentation for fluorescence time-lapse data", "nucleitrace"};
  app.require_subcommand(1);
  Options o;

  const auto common = [&](CLI::App* sub) {
    sub->add_option("--preset", o.preset, "Built-in parameter set");
    sub->add_option("--config", o.config, "INI configuration file");
    sub->add_option("--seed", o.seed, "Random seed");
    sub->add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1, 1024));
    sub->add_option("--in", o.in, "Input directory");
    sub->add_option("--out", o.out, "Output directory");
  };
  struct Command {
    const char* name;
    const char* help;
  };
  for (const Command& c : {Command{"run", "Detect, track and segment a sequence"},
                           Command{"detect", "Detect nuclei; writes detections.txt"},
                           Command{"track", "Track detections.txt; writes objects.txt and res_track.txt"},
                           Command{"segment", "Segment objects.txt; writes maskNNN.tif"},
                           Command{"synth", "Generate a synthetic sequence with ground truth"},
                           Command{"eval", "Compare a result directory with ground truth"},
                           Command{"overlay", "Render PNG overlays of masks on raw frames"}}) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    common(sub);
    const std::string name = c.name;
    if (name == "run" || name == "track") sub->add_option("--seeds", o.seeds, "Frame-0 seeds of the tracks to keep");
    if (name == "eval") {
      sub->add_option("--truth", o.truth, "Ground-truth directory");
      sub->add_option("--r-match", o.r_match, "Centroid matching radius");
    }
    if (name == "overlay") sub->add_option("--masks", o.masks, "Mask directory");
    sub->callback([&o, name] { o.command = name; });
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "usage: nucleitrace <run|detect|track|segment|synth|eval|overlay> "
        << "[--preset NAME] [--config FILE] [--seed N] [--threads N] [--in DIR] [--out DIR]\n";
    return kUsage;
  }

  const WarningHandler previous = set_warning_handler([&err](std::string_view m) { err << "warning: " << m << '\n'; });
  int code = kOk;
  try {
    if (o.command == "run") code = cmd_run(o, err);
    else if (o.command == "detect") code = cmd_detect(o, err);
    else if (o.command == "track") code = cmd_track(o, err);
    else if (o.command == "segment") code = cmd_segment(o, err);
    else if (o.command == "synth") code = cmd_synth(o, err);
    else if (o.command == "eval") code = cmd_eval(o, out);
    else if (o.command == "overlay") code = cmd_overlay(o, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    code = kUsage;
  } catch (const InvariantError& e) {
    err << "invariant violation: " << e.what() << '\n';
    code = kInvariantViolation;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    code = kDataError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    code = kDataError;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    code = kInvariantViolation;
  }
  set_warning_handler(previous);
  return code;
}

}  // namespace nucleitrace::cli
