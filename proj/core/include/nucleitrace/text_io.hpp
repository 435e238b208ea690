#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nucleitrace/track.hpp"

namespace nucleitrace {

namespace fs = std::filesystem;

/// Per-frame detections as written between the detect and track stages.
///
///   # detections frames=<N> ndim=<2|3>
///   <frame> <x> <y> [<z>] <score> <scale>
///
/// Numbers use the shortest text that reads back to the same double.
struct DetectionTable {
  int ndim = 2;
  FrameDetections frames;
};

std::string format_detections(const DetectionTable& table);
DetectionTable parse_detections(std::string_view text, const std::string& source = "detections");

/// Tracked objects and per-frame cutoffs as written between the track and
/// segment stages.
///
///   # objects frames=<N> ndim=<2|3>
///   cutoff <frame> <distance>
///   object <frame> <track id> <x> <y> [<z>]
struct ObjectTable {
  int ndim = 2;
  std::vector<double> cutoffs;                    // one per frame
  std::vector<std::vector<TrackedObject>> frames;  // by frame, ascending id
};

ObjectTable object_table(const TrackGraph& graph, std::vector<double> cutoffs, int ndim);
std::string format_objects(const ObjectTable& table);
ObjectTable parse_objects(std::string_view text, const std::string& source = "objects");

/// Coordinates `x y [z]`, one point per line; `#` starts a comment.
std::vector<Point> parse_points(std::string_view text, const std::string& source = "points");

std::string read_text_file(const fs::path& path);
/// Writes through a temporary file and renames it into place.
void write_text_file(const fs::path& path, std::string_view text);

}  // namespace nucleitrace
