#include "nucleitrace/synth.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "text_util.hpp"

namespace nucleitrace {

void SynthSpec::validate() const {
  if (dims.empty()) throw ParameterError("synth: dims are required");
  if (frames < 1) throw ParameterError("synth: frames must be >= 1");
  if (n_cells < 0) throw ParameterError("synth: n_cells must be >= 0");
  if (!(radius_min > 0.0 && radius_min <= radius_max)) throw ParameterError("synth: need 0 < radius_min <= radius_max");
  for (int a = 0; a < dims.ndim(); ++a) {
    if (2.0 * (radius_max + 1.0) >= double(dims[a])) throw ParameterError("synth: radius_max does not fit in dims");
  }
  if (!(gap >= 0.0)) throw ParameterError("synth: gap must be >= 0");
  if (!(step_sigma >= 0.0) || !(max_step >= 0.0)) throw ParameterError("synth: step sizes must be >= 0");
  if (!(division_offset >= 0.0)) throw ParameterError("synth: division_offset must be >= 0");
  if (!(flicker >= 0.0 && flicker <= 1.0)) throw ParameterError("synth: flicker must lie in [0, 1]");
  if (!(noise >= 0.0) || !(edge > 0.0)) throw ParameterError("synth: need noise >= 0 and edge > 0");
  if (!(background >= 0.0 && amplitude >= 0.0 && background + amplitude <= 65535.0)) {
    throw ParameterError("synth: intensities must fit in 16 bits");
  }
  for (const Division& d : divisions) {
    if (d.frame < 1 || d.frame >= frames) throw ParameterError("synth: division frame out of range");
    if (d.cell == 0) throw ParameterError("synth: division cell labels start at 1");
  }
}

namespace {

struct Cell {
  Label id;
  Point center;
  double radius;
};

class Generator {
 public:
  explicit Generator(const SynthSpec& spec) : spec_(spec), rng_(spec.seed), noise_rng_(spec.seed ^ 0x9e3779b97f4a7c15ULL) {}

  SynthSequence run() {
    SynthSequence out;
    place_initial();
    Label next_id = Label(spec_.n_cells) + 1;
    std::map<Label, TrackRecord> records;
    for (const Cell& c : cells_) records[c.id] = {c.id, 0, 0, 0};

    for (int t = 0; t < spec_.frames; ++t) {
      std::vector<Label> born;
      if (t > 0) {
        for (const SynthSpec::Division& d : spec_.divisions) {
          if (d.frame == t) divide(d, next_id, records, born);
        }
        move(born);
      }
      std::sort(cells_.begin(), cells_.end(), [](const Cell& a, const Cell& b) { return a.id < b.id; });
      std::vector<SynthCell> frame;
      std::bernoulli_distribution flicker(spec_.flicker);
      for (const Cell& c : cells_) {
        records[c.id].end = t;
        frame.push_back({c.id, c.center, c.radius, !flicker(rng_)});
      }
      out.raw.push_back(render_raw(frame));
      out.masks.push_back(render_truth(spec_.dims, frame));
      out.cells.push_back(std::move(frame));
    }
    for (const auto& [id, r] : records) out.tracks.push_back(r);
    return out;
  }

 private:
  int ndim() const { return spec_.dims.ndim(); }

  bool in_bounds(const Point& p, double r) const {
    for (int a = 0; a < ndim(); ++a) {
      const double v = p[std::size_t(a)];
      if (v < r + 1.0 || v > double(spec_.dims[a]) - 2.0 - r) return false;
    }
    return true;
  }

  Point clamp_in(Point p, double r) const {
    for (int a = 0; a < ndim(); ++a) {
      p[std::size_t(a)] = std::clamp(p[std::size_t(a)], r + 1.0, double(spec_.dims[a]) - 2.0 - r);
    }
    return p;
  }

  double required(const Cell& a, const Cell& b) const { return a.radius + b.radius + spec_.gap; }

  void place_initial() {
    std::uniform_real_distribution<double> radius(spec_.radius_min, spec_.radius_max);
    for (int i = 0; i < spec_.n_cells; ++i) {
      Cell c{Label(i + 1), {0, 0, 0}, radius(rng_)};
      bool placed = false;
      for (int attempt = 0; attempt < 20000 && !placed; ++attempt) {
        for (int a = 0; a < ndim(); ++a) {
          std::uniform_real_distribution<double> u(c.radius + 1.0, double(spec_.dims[a]) - 2.0 - c.radius);
          c.center[std::size_t(a)] = u(rng_);
        }
        placed = std::all_of(cells_.begin(), cells_.end(),
                             [&](const Cell& o) { return distance(c.center, o.center) >= required(c, o); });
      }
      if (!placed) {
        throw ParameterError("synth: cannot place " + std::to_string(spec_.n_cells) + " non-overlapping nuclei in " +
                             spec_.dims.str());
      }
      cells_.push_back(c);
    }
  }

  void divide(const SynthSpec::Division& d, Label& next_id, std::map<Label, TrackRecord>& records,
              std::vector<Label>& born) {
    const auto it = std::find_if(cells_.begin(), cells_.end(), [&](const Cell& c) { return c.id == d.cell; });
    if (it == cells_.end()) {
      throw ParameterError("synth: cell " + std::to_string(d.cell) + " is not alive before frame " +
                           std::to_string(d.frame));
    }
    const Cell mother = *it;
    cells_.erase(it);
    Point u{0, 0, 0};
    std::normal_distribution<double> n(0.0, 1.0);
    double len = 0.0;
    while (len < 1e-6) {
      for (int a = 0; a < ndim(); ++a) u[std::size_t(a)] = n(rng_);
      len = std::sqrt(squared_distance(u, {0, 0, 0}));
    }
    const double r = std::max(spec_.radius_min, 0.85 * mother.radius);
    const double off = spec_.division_offset > 0.0 ? spec_.division_offset : mother.radius;
    for (int side : {-1, 1}) {
      Point p = mother.center;
      for (int a = 0; a < ndim(); ++a) p[std::size_t(a)] += side * off * u[std::size_t(a)] / len;
      const Label id = next_id++;
      cells_.push_back({id, clamp_in(p, r), r});
      records[id] = {id, d.frame, d.frame, mother.id};
      born.push_back(id);
    }
  }

  // A step may not bring two nuclei closer than their required spacing,
  // unless they were already closer and the step does not shrink the gap.
  bool step_allowed(std::size_t i, const Point& p) const {
    if (!in_bounds(p, cells_[i].radius)) return false;
    for (std::size_t j = 0; j < cells_.size(); ++j) {
      if (j == i) continue;
      const double d = distance(p, cells_[j].center);
      if (d < required(cells_[i], cells_[j]) && d < distance(cells_[i].center, cells_[j].center)) return false;
    }
    return true;
  }

  void move(const std::vector<Label>& born) {
    std::normal_distribution<double> step(0.0, spec_.step_sigma);
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      if (std::find(born.begin(), born.end(), cells_[i].id) != born.end()) continue;
      for (int attempt = 0; attempt < 20; ++attempt) {
        Point delta{0, 0, 0};
        for (int a = 0; a < ndim(); ++a) {
          delta[std::size_t(a)] =
              spec_.motion == SynthSpec::Motion::kDrift ? spec_.drift[std::size_t(a)] : step(rng_);
        }
        const double len = std::sqrt(squared_distance(delta, {0, 0, 0}));
        if (spec_.max_step > 0.0 && len > spec_.max_step) {
          for (double& v : delta) v *= spec_.max_step / len;
        }
        Point p = cells_[i].center;
        for (int a = 0; a < 3; ++a) p[std::size_t(a)] += delta[std::size_t(a)];
        if (step_allowed(i, p)) {
          cells_[i].center = p;
          break;
        }
        if (spec_.motion == SynthSpec::Motion::kDrift) break;
      }
    }
  }

  Image render_raw(const std::vector<SynthCell>& frame) {
    Image profile(spec_.dims);
    const double reach = 4.0 * spec_.edge + 1.0;
    const double k = 1.0 / (std::sqrt(2.0) * spec_.edge);
    for (const SynthCell& c : frame) {
      if (!c.visible) continue;
      for_box(c.center, c.radius + reach, [&](Index x, Index y, Index z) {
        const double d = distance(c.center, {double(x), double(y), double(z)});
        float& v = profile.at(x, y, z);
        v = std::max(v, static_cast<float>(0.5 * std::erfc((d - c.radius) * k)));
      });
    }
    std::normal_distribution<double> noise(0.0, spec_.noise > 0.0 ? spec_.noise : 1.0);
    Image raw(spec_.dims);
    for (Index i = 0; i < raw.size(); ++i) {
      double v = spec_.background + spec_.amplitude * profile[i];
      if (spec_.noise > 0.0) v += noise(noise_rng_);
      raw[i] = static_cast<float>(std::nearbyint(std::clamp(v, 0.0, 65535.0)));
    }
    return raw;
  }

  template <typename F>
  void for_box(const Point& c, double r, F&& f) const { box(spec_.dims, c, r, f); }

 public:
  template <typename F>
  static void box(const Dims& dims, const Point& c, double r, F&& f) {
    std::array<Index, 3> lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < dims.ndim(); ++a) {
      lo[std::size_t(a)] = std::max<Index>(0, Index(std::floor(c[std::size_t(a)] - r)));
      hi[std::size_t(a)] = std::min<Index>(dims[a] - 1, Index(std::ceil(c[std::size_t(a)] + r)));
    }
    for (Index z = lo[2]; z <= hi[2]; ++z)
      for (Index y = lo[1]; y <= hi[1]; ++y)
        for (Index x = lo[0]; x <= hi[0]; ++x) f(x, y, z);
  }

 private:
  const SynthSpec& spec_;
  std::mt19937_64 rng_;
  std::mt19937_64 noise_rng_;
  std::vector<Cell> cells_;
};

}  // namespace

SynthSequence synthesize(const SynthSpec& spec) {
  spec.validate();
  for (const SynthSpec::Division& d : spec.divisions) {
    const auto n = std::count_if(spec.divisions.begin(), spec.divisions.end(),
                                 [&](const SynthSpec::Division& e) { return e.cell == d.cell; });
    if (n > 1) throw ParameterError("synth: cell " + std::to_string(d.cell) + " divides twice");
  }
  return Generator(spec).run();
}

LabelImage render_truth(const Dims& dims, const std::vector<SynthCell>& cells) {
  LabelImage out(dims);
  std::vector<double> owner_d(static_cast<std::size_t>(out.size()), 0.0);
  for (const SynthCell& c : cells) {
    Generator::box(dims, c.center, c.radius, [&](Index x, Index y, Index z) {
      const double d = distance(c.center, {double(x), double(y), double(z)});
      if (d > c.radius) return;
      const Index i = dims.index(x, y, z);
      Label& l = out[i];
      double& best = owner_d[std::size_t(i)];
      if (l == 0 || d < best || (d == best && c.id < l)) {
        l = c.id;
        best = d;
      }
    });
  }
  return out;
}

std::vector<std::string> synth_preset_names() { return {"synth-2d", "synth-3d", "synth-tracking"}; }

SynthSpec synth_preset(const std::string& name) {
  SynthSpec s;
  if (name == "synth-2d") {
    s.noise = 20.0;
    return s;
  }
  if (name == "synth-3d") {
    s.dims = Dims(64, 64, 32);
    s.n_cells = 10;
    s.noise = 20.0;
    return s;
  }
  if (name == "synth-tracking") {
    s.dims = Dims(96, 96);
    s.frames = 20;
    s.n_cells = 10;
    s.radius_min = 5.0;
    s.radius_max = 6.0;
    s.gap = 8.0;
    s.step_sigma = 1.0;
    s.max_step = 0.2 * (2.0 * s.radius_min + s.gap);
    s.divisions = {{6, 2}, {13, 7}};
    s.division_offset = 6.0;
    return s;
  }
  std::string list;
  for (const std::string& n : synth_preset_names()) list += (list.empty() ? "" : ", ") + n;
  throw ParameterError("unknown synth preset '" + name + "' (available: " + list + ")");
}

namespace {

struct SynthParseError {
  std::string what;
};

template <typename T>
T number(const std::string& s) {
  T v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw SynthParseError{"bad number '" + s + "'"};
  return v;
}

std::vector<std::string> words(const std::string& s, char sep = ' ') {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    const auto a = cur.find_first_not_of(" \t"), b = cur.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(cur.substr(a, b - a + 1));
  }
  return out;
}

std::string num(double v) {
  std::string s;
  text::append_number(s, v);
  return s;
}

}  // namespace

SynthSpec parse_synth_spec(std::string_view text, const std::string& source) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw DataError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [section, entries] : tree) {
    if (section != "synth") throw DataError(source + ": unknown section [" + section + "]");
  }
  const auto sec = tree.get_child_optional("synth");
  SynthSpec s;
  if (!sec) return s;
  if (const auto p = sec->get_optional<std::string>("preset")) s = synth_preset(*p);

  for (const auto& [key, node] : *sec) {
    const std::string v = node.data();
    try {
      if (key == "preset") {
        continue;
      } else if (key == "dims") {
        const auto w = words(v);
        if (w.size() != 2 && w.size() != 3) throw SynthParseError{"dims needs 2 or 3 extents"};
        std::vector<Index> e;
        for (const auto& x : w) e.push_back(number<Index>(x));
        s.dims = Dims::of(e);
      } else if (key == "frames") {
        s.frames = number<int>(v);
      } else if (key == "n_cells") {
        s.n_cells = number<int>(v);
      } else if (key == "radius_min") {
        s.radius_min = number<double>(v);
      } else if (key == "radius_max") {
        s.radius_max = number<double>(v);
      } else if (key == "gap") {
        s.gap = number<double>(v);
      } else if (key == "motion") {
        if (v != "brownian" && v != "drift") throw SynthParseError{"motion must be brownian or drift"};
        s.motion = v == "drift" ? SynthSpec::Motion::kDrift : SynthSpec::Motion::kBrownian;
      } else if (key == "step_sigma") {
        s.step_sigma = number<double>(v);
      } else if (key == "max_step") {
        s.max_step = number<double>(v);
      } else if (key == "drift") {
        const auto w = words(v);
        if (w.size() != 2 && w.size() != 3) throw SynthParseError{"drift needs 2 or 3 components"};
        s.drift = {0, 0, 0};
        for (std::size_t a = 0; a < w.size(); ++a) s.drift[a] = number<double>(w[a]);
      } else if (key == "divisions") {
        s.divisions.clear();
        for (const auto& item : words(v, ',')) {
          const auto colon = item.find(':');
          if (colon == std::string::npos) throw SynthParseError{"division '" + item + "' needs frame:cell"};
          s.divisions.push_back({number<int>(item.substr(0, colon)), number<Label>(item.substr(colon + 1))});
        }
      } else if (key == "division_offset") {
        s.division_offset = number<double>(v);
      } else if (key == "flicker") {
        s.flicker = number<double>(v);
      } else if (key == "background") {
        s.background = number<double>(v);
      } else if (key == "amplitude") {
        s.amplitude = number<double>(v);
      } else if (key == "noise") {
        s.noise = number<double>(v);
      } else if (key == "edge") {
        s.edge = number<double>(v);
      } else if (key == "seed") {
        s.seed = number<std::uint64_t>(v);
      } else {
        throw SynthParseError{"unknown key"};
      }
    } catch (const SynthParseError& e) {
      throw DataError(source + ": [synth] " + key + ": " + e.what);
    } catch (const ParameterError& e) {
      throw DataError(source + ": [synth] " + key + ": " + e.what());
    }
  }
  try {
    s.validate();
  } catch (const ParameterError& e) {
    throw DataError(source + ": " + e.what());
  }
  return s;
}

std::string format_synth_spec(const SynthSpec& s) {
  std::string dims = std::to_string(s.dims[0]) + " " + std::to_string(s.dims[1]);
  if (s.dims.ndim() == 3) dims += " " + std::to_string(s.dims[2]);
  std::string drift = num(s.drift[0]) + " " + num(s.drift[1]);
  if (s.dims.ndim() == 3) drift += " " + num(s.drift[2]);
  std::string divisions;
  for (const auto& d : s.divisions) {
    divisions += (divisions.empty() ? "" : ", ") + std::to_string(d.frame) + ":" + std::to_string(d.cell);
  }
  std::string out = "[synth]\n";
  out += "dims = " + dims + "\n";
  out += "frames = " + std::to_string(s.frames) + "\n";
  out += "n_cells = " + std::to_string(s.n_cells) + "\n";
  out += "radius_min = " + num(s.radius_min) + "\n";
  out += "radius_max = " + num(s.radius_max) + "\n";
  out += "gap = " + num(s.gap) + "\n";
  out += std::string("motion = ") + (s.motion == SynthSpec::Motion::kDrift ? "drift" : "brownian") + "\n";
  out += "step_sigma = " + num(s.step_sigma) + "\n";
  out += "max_step = " + num(s.max_step) + "\n";
  out += "drift = " + drift + "\n";
  out += "divisions = " + divisions + "\n";
  out += "division_offset = " + num(s.division_offset) + "\n";
  out += "flicker = " + num(s.flicker) + "\n";
  out += "background = " + num(s.background) + "\n";
  out += "amplitude = " + num(s.amplitude) + "\n";
  out += "noise = " + num(s.noise) + "\n";
  out += "edge = " + num(s.edge) + "\n";
  out += "seed = " + std::to_string(s.seed) + "\n";
  return out;
}

}  // namespace nucleitrace
