#include "nucleitrace/track_table.hpp"

#include <map>

#include "nucleitrace/text_io.hpp"
#include "text_util.hpp"

namespace nucleitrace {

std::vector<TrackRecord> track_records(const TrackGraph& graph) {
  graph.validate();
  std::vector<TrackRecord> out;
  out.reserve(graph.size());
  for (const auto& [id, t] : graph.tracks()) out.push_back({id, t.start_frame, t.end_frame, t.parent});
  return out;
}

void validate_track_records(std::span<const TrackRecord> records) {
  std::map<Label, const TrackRecord*> by_label;
  for (const TrackRecord& r : records) {
    const std::string who = "track " + std::to_string(r.label);
    if (r.label == 0) throw InvariantError("track label 0 is reserved for background");
    if (r.begin < 0 || r.begin > r.end) throw InvariantError(who + ": begin/end out of order");
    if (!by_label.emplace(r.label, &r).second) throw InvariantError(who + " is listed twice");
  }
  for (const TrackRecord& r : records) {
    if (r.parent == 0) continue;
    const std::string who = "track " + std::to_string(r.label);
    const auto it = by_label.find(r.parent);
    if (it == by_label.end()) throw InvariantError(who + ": parent " + std::to_string(r.parent) + " does not exist");
    if (it->second->end != r.begin - 1) {
      throw InvariantError(who + ": parent " + std::to_string(r.parent) + " ends at frame " +
                           std::to_string(it->second->end) + ", not " + std::to_string(r.begin - 1));
    }
  }
}

std::string format_track_table(std::span<const TrackRecord> records) {
  validate_track_records(records);
  std::map<Label, TrackRecord> sorted;
  for (const TrackRecord& r : records) sorted.emplace(r.label, r);
  std::string out;
  for (const auto& [label, r] : sorted) {
    text::append_number(out, static_cast<long long>(r.label));
    out += ' ';
    text::append_number(out, static_cast<long long>(r.begin));
    out += ' ';
    text::append_number(out, static_cast<long long>(r.end));
    out += ' ';
    text::append_number(out, static_cast<long long>(r.parent));
    out += '\n';
  }
  return out;
}

std::vector<TrackRecord> parse_track_table(std::string_view text, const std::string& source) {
  text::LineReader reader(text, source);
  std::vector<TrackRecord> out;
  text::Line line;
  while (reader.next(line)) {
    if (line.fields.size() != 4) reader.fail(line, "expected 'L B E P'");
    const auto label = reader.number<long long>(line, 0);
    const auto parent = reader.number<long long>(line, 3);
    if (label < 0 || label > 0xFFFFFFFFLL || parent < 0 || parent > 0xFFFFFFFFLL) reader.fail(line, "label out of range");
    out.push_back({static_cast<Label>(label), reader.number<int>(line, 1), reader.number<int>(line, 2),
                   static_cast<Label>(parent)});
  }
  try {
    validate_track_records(out);
  } catch (const InvariantError& e) {
    throw DataError(source + ": " + e.what());
  }
  return out;
}

void write_track_table(const std::filesystem::path& path, const TrackGraph& graph) {
  write_text_file(path, format_track_table(track_records(graph)));
}

void write_track_table(const std::filesystem::path& path, std::span<const TrackRecord> records) {
  write_text_file(path, format_track_table(records));
}

std::vector<TrackRecord> read_track_table(const std::filesystem::path& path) {
  return parse_track_table(read_text_file(path), path.string());
}

}  // namespace nucleitrace
