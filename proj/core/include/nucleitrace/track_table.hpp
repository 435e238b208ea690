#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nucleitrace/track.hpp"

namespace nucleitrace {

/// One line `L B E P` of a track table.
struct TrackRecord {
  Label label = 0;
  int begin = 0;
  int end = 0;
  Label parent = 0;

  bool operator==(const TrackRecord&) const = default;
};

/// Records in ascending label order. Validates the graph first.
std::vector<TrackRecord> track_records(const TrackGraph& graph);

/// Throws InvariantError unless labels are positive and unique, B <= E, and
/// every parent exists and ends at B - 1.
void validate_track_records(std::span<const TrackRecord> records);

/// Space-separated, ascending label, one LF-terminated line per track.
std::string format_track_table(std::span<const TrackRecord> records);
std::vector<TrackRecord> parse_track_table(std::string_view text, const std::string& source = "track table");

void write_track_table(const std::filesystem::path& path, const TrackGraph& graph);
void write_track_table(const std::filesystem::path& path, std::span<const TrackRecord> records);
std::vector<TrackRecord> read_track_table(const std::filesystem::path& path);

}  // namespace nucleitrace
