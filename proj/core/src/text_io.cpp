#include "nucleitrace/text_io.hpp"

#include <fstream>
#include <sstream>

#include "text_util.hpp"

namespace nucleitrace {

namespace {

// Parses "# <kind> frames=<N> ndim=<D>".
std::pair<int, int> parse_header(text::LineReader& reader, const std::string& kind) {
  text::Line line;
  if (!reader.next(line, true)) throw DataError(kind + " file is empty (header missing)");
  const auto& f = line.fields;
  if (f.size() != 4 || f[0] != "#" || f[1] != kind || !f[2].starts_with("frames=") || !f[3].starts_with("ndim=")) {
    reader.fail(line, "expected header '# " + kind + " frames=N ndim=D'");
  }
  text::Line value = line;
  value.fields = {f[2].substr(7), f[3].substr(5)};
  const int frames = reader.number<int>(value, 0);
  const int ndim = reader.number<int>(value, 1);
  if (frames < 0) reader.fail(line, "negative frame count");
  if (ndim != 2 && ndim != 3) reader.fail(line, "ndim must be 2 or 3");
  return {frames, ndim};
}

void append_header(std::string& out, const std::string& kind, std::size_t frames, int ndim) {
  out += "# " + kind + " frames=" + std::to_string(frames) + " ndim=" + std::to_string(ndim) + "\n";
}

void append_point(std::string& out, const Point& p, int ndim) {
  for (int a = 0; a < ndim; ++a) {
    out += ' ';
    text::append_number(out, p[std::size_t(a)]);
  }
}

Point read_point(const text::LineReader& reader, const text::Line& line, std::size_t first, int ndim) {
  Point p{0, 0, 0};
  for (int a = 0; a < ndim; ++a) p[std::size_t(a)] = reader.number<double>(line, first + std::size_t(a));
  return p;
}

int read_frame(const text::LineReader& reader, const text::Line& line, std::size_t field, std::size_t frames) {
  const int t = reader.number<int>(line, field);
  if (t < 0 || std::size_t(t) >= frames) reader.fail(line, "frame " + std::to_string(t) + " out of range");
  return t;
}

}  // namespace

std::string format_detections(const DetectionTable& table) {
  std::string out;
  append_header(out, "detections", table.frames.size(), table.ndim);
  for (std::size_t t = 0; t < table.frames.size(); ++t) {
    for (const Detection& d : table.frames[t]) {
      text::append_number(out, static_cast<long long>(t));
      append_point(out, d.centroid, table.ndim);
      out += ' ';
      text::append_number(out, d.score);
      out += ' ';
      text::append_number(out, d.scale);
      out += '\n';
    }
  }
  return out;
}

DetectionTable parse_detections(std::string_view text, const std::string& source) {
  text::LineReader reader(text, source);
  DetectionTable table;
  const auto [frames, ndim] = parse_header(reader, "detections");
  table.ndim = ndim;
  table.frames.resize(std::size_t(frames));
  const std::size_t fields = std::size_t(ndim) + 3;
  text::Line line;
  while (reader.next(line)) {
    if (line.fields.size() != fields) {
      reader.fail(line, "expected " + std::to_string(fields) + " fields (frame, " + std::to_string(ndim) +
                            " coordinates, score, scale)");
    }
    Detection d;
    d.frame = read_frame(reader, line, 0, table.frames.size());
    d.centroid = read_point(reader, line, 1, ndim);
    d.score = reader.number<double>(line, std::size_t(ndim) + 1);
    d.scale = reader.number<double>(line, std::size_t(ndim) + 2);
    table.frames[std::size_t(d.frame)].push_back(d);
  }
  return table;
}

ObjectTable object_table(const TrackGraph& graph, std::vector<double> cutoffs, int ndim) {
  ObjectTable table;
  table.ndim = ndim;
  table.frames.resize(cutoffs.size());
  for (std::size_t t = 0; t < cutoffs.size(); ++t) {
    table.frames[t] = graph.objects_at(int(t));
    for (TrackedObject& o : table.frames[t]) o.members.clear();
  }
  table.cutoffs = std::move(cutoffs);
  return table;
}

std::string format_objects(const ObjectTable& table) {
  if (table.cutoffs.size() != table.frames.size()) throw ParameterError("object table needs one cutoff per frame");
  std::string out;
  append_header(out, "objects", table.frames.size(), table.ndim);
  for (std::size_t t = 0; t < table.cutoffs.size(); ++t) {
    out += "cutoff ";
    text::append_number(out, static_cast<long long>(t));
    out += ' ';
    text::append_number(out, table.cutoffs[t]);
    out += '\n';
  }
  for (std::size_t t = 0; t < table.frames.size(); ++t) {
    for (const TrackedObject& o : table.frames[t]) {
      out += "object ";
      text::append_number(out, static_cast<long long>(t));
      out += ' ';
      text::append_number(out, static_cast<long long>(o.track_id));
      append_point(out, o.centroid, table.ndim);
      out += '\n';
    }
  }
  return out;
}

ObjectTable parse_objects(std::string_view text, const std::string& source) {
  text::LineReader reader(text, source);
  ObjectTable table;
  const auto [frames, ndim] = parse_header(reader, "objects");
  table.ndim = ndim;
  table.frames.resize(std::size_t(frames));
  std::vector<bool> have_cutoff(std::size_t(frames), false);
  table.cutoffs.assign(std::size_t(frames), 0.0);
  text::Line line;
  while (reader.next(line)) {
    const std::string_view kind = line.fields[0];
    if (kind == "cutoff") {
      if (line.fields.size() != 3) reader.fail(line, "expected 'cutoff <frame> <distance>'");
      const int t = read_frame(reader, line, 1, table.frames.size());
      if (have_cutoff[std::size_t(t)]) reader.fail(line, "second cutoff for frame " + std::to_string(t));
      have_cutoff[std::size_t(t)] = true;
      table.cutoffs[std::size_t(t)] = reader.number<double>(line, 2);
    } else if (kind == "object") {
      if (line.fields.size() != std::size_t(ndim) + 3) reader.fail(line, "expected 'object <frame> <id> <coordinates>'");
      TrackedObject o;
      o.frame = read_frame(reader, line, 1, table.frames.size());
      const auto id = reader.number<long long>(line, 2);
      if (id <= 0 || id > 0xFFFFFFFFLL) reader.fail(line, "track id out of range");
      o.track_id = static_cast<Label>(id);
      o.centroid = read_point(reader, line, 3, ndim);
      auto& list = table.frames[std::size_t(o.frame)];
      if (!list.empty() && list.back().track_id >= o.track_id) reader.fail(line, "track ids must ascend within a frame");
      list.push_back(o);
    } else {
      reader.fail(line, "unknown record '" + std::string(kind) + "'");
    }
  }
  for (std::size_t t = 0; t < have_cutoff.size(); ++t) {
    if (!have_cutoff[t]) throw DataError(source + ": no cutoff for frame " + std::to_string(t));
  }
  return table;
}

std::vector<Point> parse_points(std::string_view text, const std::string& source) {
  text::LineReader reader(text, source);
  std::vector<Point> out;
  text::Line line;
  while (reader.next(line)) {
    if (line.fields.size() != 2 && line.fields.size() != 3) reader.fail(line, "expected 'x y [z]'");
    out.push_back(read_point(reader, line, 0, int(line.fields.size())));
  }
  return out;
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_text_file(const fs::path& path, std::string_view text) {
  fs::path tmp = path;
  tmp += ".part";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    out.write(text.data(), std::streamsize(text.size()));
    if (!out) throw DataError("cannot write " + path.string());
  }
  fs::rename(tmp, path);
}

}  // namespace nucleitrace
