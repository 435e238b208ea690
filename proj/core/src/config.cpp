#include "nucleitrace/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <functional>
#include <sstream>

#include "nucleitrace/text_io.hpp"
#include "text_util.hpp"

namespace nucleitrace {

std::string to_string(Mode mode) { return mode == Mode::k2D ? "2d" : "3d"; }

double PipelineConfig::effective_fallback_cutoff() const {
  return fallback_cutoff > 0.0 ? fallback_cutoff : 2.0 * detect.scales.sigma_max;
}

void PipelineConfig::validate() const {
  const auto fail = [&](const std::string& what) { throw ParameterError(name + ": " + what); };
  for (double s : spacing) {
    if (!(s > 0.0)) fail("spacing must be > 0");
  }
  detect.scales.validate();
  for (const PreprocessStep& p : detect.preprocess) {
    if (!(p.value > 0.0)) fail(to_string(p.kind) + " needs a positive sigma or radius");
    if (p.kind != PreprocessStep::Kind::kGaussian && p.value != std::floor(p.value)) {
      fail(to_string(p.kind) + " radius must be an integer");
    }
    if (p.first_frame < 0 || (p.last_frame >= 0 && p.last_frame < p.first_frame)) {
      fail(to_string(p.kind) + " has an empty frame range");
    }
  }
  if (!(detect.threshold_k >= 0.0)) fail("threshold_k must be >= 0");
  if (!(detect.border_margin >= 0.0)) fail("border must be >= 0");
  if (!(detect.rescale_low >= 0.0 && detect.rescale_low < detect.rescale_high && detect.rescale_high <= 100.0)) {
    fail("rescale percentiles need 0 <= low < high <= 100");
  }
  if (detect.opening_radius < 0) fail("opening_radius must be >= 0");
  if (!(detect.binarize_threshold > 0.0 && detect.binarize_threshold < 1.0)) fail("binarize must lie in (0, 1)");
  if (!(detect.clump_h >= 0.0)) fail("clump_h must be >= 0");
  if (!(fallback_cutoff >= 0.0)) fail("fallback_cutoff must be >= 0");
  flow.validate();
  if (!(gap_cutoff_factor > 0.0)) fail("gap_cutoff_factor must be > 0");
  priors.validate();
  if (!(sigma_smooth > 0.0)) fail("sigma_smooth must be > 0");
  if (!(sobel_weight >= 0.0)) fail("sobel_weight must be >= 0");
  if (flow_enabled && mode != Mode::k2D) fail("optical flow propagation is 2D only");
  if (z_projection && mode != Mode::k3D) fail("z projection is 3D only");
}

namespace {

PipelineConfig base(const std::string& name, Mode mode, double sigma_min, double sigma_max) {
  PipelineConfig c;
  c.name = name;
  c.mode = mode;
  c.detect.scales = ScaleRange::integer_steps(sigma_min, sigma_max);
  c.detect.anisotropic = mode == Mode::k3D;
  c.flow_enabled = mode == Mode::k2D;
  return c;
}

PipelineConfig make_preset(const std::string& name) {
  using K = PreprocessStep::Kind;
  if (name == "Fluo-N2DH-GOWT1") {
    PipelineConfig c = base(name, Mode::k2D, 8, 12);
    c.detect.border_margin = 50;
    c.priors = {8, 40, 5000};
    return c;
  }
  if (name == "Fluo-N2DL-HeLa") {
    PipelineConfig c = base(name, Mode::k2D, 5, 5);
    c.detect.border_margin = 25;
    c.priors = {4, 20, 1200};
    return c;
  }
  if (name == "Fluo-N3DH-CE") {
    PipelineConfig c = base(name, Mode::k3D, 10, 18);
    c.detect.preprocess = {{K::kGaussian, 3, 0, -1}, {K::kMedian, 1, 0, 49}};
    c.priors = {5, 20, 40000};
    return c;
  }
  if (name == "Fluo-N3DL-TRIC") {
    PipelineConfig c = base(name, Mode::k3D, 4, 6);
    c.detect.preprocess = {{K::kGaussian, 3, 0, -1}};
    c.gap_closing = true;
    c.z_projection = true;
    c.priors = {2, 8, 2000};
    return c;
  }
  if (name == "Fluo-N3DL-DRO") {
    PipelineConfig c = base(name, Mode::k3D, 4, 4);
    c.detect.preprocess = {{K::kErode, 2, 0, -1}};
    c.gap_closing = true;
    c.priors = {2, 8, 2000};
    return c;
  }
  return {};
}

// --- value codecs ----------------------------------------------------------

std::string fmt(double v) {
  std::string s;
  text::append_number(s, v);
  return s;
}

std::string fmt(int v) { return std::to_string(v); }

std::string fmt(bool v) { return v ? "true" : "false"; }

struct ParseError {
  std::string what;
};

template <typename T>
T parse_number(const std::string& s) {
  T v{};
  const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw ParseError{"bad number '" + s + "'"};
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw ParseError{"bad boolean '" + s + "'"};
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    const auto a = cur.find_first_not_of(" \t"), b = cur.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(cur.substr(a, b - a + 1));
  }
  return out;
}

std::string fmt_spacing(const Spacing& s) { return fmt(s[0]) + " " + fmt(s[1]) + " " + fmt(s[2]); }

Spacing parse_spacing(const std::string& s) {
  const auto parts = split(s, ' ');
  if (parts.size() != 3) throw ParseError{"spacing needs three values"};
  return {parse_number<double>(parts[0]), parse_number<double>(parts[1]), parse_number<double>(parts[2])};
}

// kind:value[@first-last], comma separated; an empty last is open ended.
std::string fmt_preprocess(const std::vector<PreprocessStep>& steps) {
  std::string out;
  for (const PreprocessStep& p : steps) {
    if (!out.empty()) out += ", ";
    out += to_string(p.kind) + ":" + fmt(p.value);
    if (p.first_frame != 0 || p.last_frame >= 0) {
      out += "@" + std::to_string(p.first_frame) + "-" + (p.last_frame >= 0 ? std::to_string(p.last_frame) : "");
    }
  }
  return out;
}

std::vector<PreprocessStep> parse_preprocess(const std::string& s) {
  std::vector<PreprocessStep> out;
  if (s == "none") return out;
  for (const std::string& item : split(s, ',')) {
    PreprocessStep p;
    const auto colon = item.find(':');
    if (colon == std::string::npos) throw ParseError{"preprocess step '" + item + "' needs kind:value"};
    try {
      p.kind = preprocess_kind_from_string(item.substr(0, colon));
    } catch (const ParameterError& e) {
      throw ParseError{e.what()};
    }
    std::string rest = item.substr(colon + 1);
    const auto at = rest.find('@');
    if (at != std::string::npos) {
      const std::string range = rest.substr(at + 1);
      rest = rest.substr(0, at);
      const auto dash = range.find('-');
      if (dash == std::string::npos) throw ParseError{"frame range '" + range + "' needs first-last"};
      p.first_frame = parse_number<int>(range.substr(0, dash));
      const std::string last = range.substr(dash + 1);
      p.last_frame = last.empty() ? -1 : parse_number<int>(last);
    }
    p.value = parse_number<double>(rest);
    out.push_back(p);
  }
  return out;
}

// --- field registry ----------------------------------------------------------

struct Field {
  const char* section;
  const char* key;
  std::function<std::string(const PipelineConfig&)> get;
  std::function<void(PipelineConfig&, const std::string&)> set;
};

#define NT_DOUBLE(sec, key, member)                                    \
  Field {                                                              \
    sec, key, [](const PipelineConfig& c) { return fmt(c.member); },   \
        [](PipelineConfig& c, const std::string& v) { c.member = parse_number<double>(v); } \
  }
#define NT_INT(sec, key, member)                                       \
  Field {                                                              \
    sec, key, [](const PipelineConfig& c) { return fmt(c.member); },   \
        [](PipelineConfig& c, const std::string& v) { c.member = parse_number<int>(v); } \
  }
#define NT_BOOL(sec, key, member)                                      \
  Field {                                                              \
    sec, key, [](const PipelineConfig& c) { return fmt(c.member); },   \
        [](PipelineConfig& c, const std::string& v) { c.member = parse_bool(v); } \
  }

const std::vector<Field>& fields() {
  static const std::vector<Field> table{
      Field{"pipeline", "name", [](const PipelineConfig& c) { return c.name; },
            [](PipelineConfig& c, const std::string& v) { c.name = v; }},
      Field{"pipeline", "spacing", [](const PipelineConfig& c) { return fmt_spacing(c.spacing); },
            [](PipelineConfig& c, const std::string& v) { c.spacing = parse_spacing(v); }},
      NT_DOUBLE("detect", "sigma_min", detect.scales.sigma_min),
      NT_DOUBLE("detect", "sigma_max", detect.scales.sigma_max),
      NT_INT("detect", "sigma_steps", detect.scales.steps),
      Field{"detect", "preprocess",
            [](const PipelineConfig& c) {
              return c.detect.preprocess.empty() ? std::string("none") : fmt_preprocess(c.detect.preprocess);
            },
            [](PipelineConfig& c, const std::string& v) { c.detect.preprocess = parse_preprocess(v); }},
      NT_DOUBLE("detect", "threshold_k", detect.threshold_k),
      NT_DOUBLE("detect", "border", detect.border_margin),
      NT_BOOL("detect", "anisotropic", detect.anisotropic),
      NT_DOUBLE("detect", "rescale_low", detect.rescale_low),
      NT_DOUBLE("detect", "rescale_high", detect.rescale_high),
      NT_INT("detect", "opening_radius", detect.opening_radius),
      NT_DOUBLE("detect", "binarize", detect.binarize_threshold),
      NT_DOUBLE("detect", "clump_h", detect.clump_h),
      NT_DOUBLE("track", "fallback_cutoff", fallback_cutoff),
      NT_BOOL("track", "flow", flow_enabled),
      NT_BOOL("track", "gap_closing", gap_closing),
      NT_DOUBLE("track", "gap_cutoff_factor", gap_cutoff_factor),
      Field{"track", "selected_seeds", [](const PipelineConfig& c) { return c.selected_seeds; },
            [](PipelineConfig& c, const std::string& v) { c.selected_seeds = v; }},
      NT_INT("flow", "levels", flow.levels),
      NT_DOUBLE("flow", "pyr_scale", flow.pyr_scale),
      NT_INT("flow", "iterations", flow.iterations),
      NT_INT("flow", "winsize", flow.winsize),
      NT_INT("flow", "poly_n", flow.poly_n),
      NT_DOUBLE("flow", "poly_sigma", flow.poly_sigma),
      NT_DOUBLE("segment", "r_min", priors.r_min),
      NT_DOUBLE("segment", "r_max", priors.r_max),
      NT_DOUBLE("segment", "a_max", priors.a_max),
      NT_DOUBLE("segment", "sigma_smooth", sigma_smooth),
      NT_DOUBLE("segment", "sobel_weight", sobel_weight),
      NT_BOOL("segment", "z_projection", z_projection),
  };
  return table;
}

#undef NT_DOUBLE
#undef NT_INT
#undef NT_BOOL

const Field* find_field(const std::string& section, const std::string& key) {
  for (const Field& f : fields()) {
    if (section == f.section && key == f.key) return &f;
  }
  return nullptr;
}

}  // namespace

std::vector<std::string> preset_names() {
  return {"Fluo-N2DH-GOWT1", "Fluo-N2DL-HeLa", "Fluo-N3DH-CE", "Fluo-N3DL-TRIC", "Fluo-N3DL-DRO"};
}

PipelineConfig load_preset(const std::string& name) {
  for (const std::string& n : preset_names()) {
    if (n == name) {
      PipelineConfig c = make_preset(name);
      c.validate();
      return c;
    }
  }
  std::string list;
  for (const std::string& n : preset_names()) list += (list.empty() ? "" : ", ") + n;
  throw ParameterError("unknown preset '" + name + "' (available: " + list + ")");
}

PipelineConfig parse_config(std::string_view text, const std::string& source) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in{std::string(text)};
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw DataError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }

  PipelineConfig c;
  const auto& top = tree.get_child_optional("pipeline");
  const std::string preset = top ? top->get<std::string>("preset", "") : "";
  const std::string mode = top ? top->get<std::string>("mode", "") : "";
  if (!preset.empty()) {
    c = load_preset(preset);
    if (!mode.empty() && mode != to_string(c.mode)) {
      throw DataError(source + ": mode '" + mode + "' contradicts preset " + preset);
    }
  } else if (mode == "3d") {
    c.mode = Mode::k3D;
  } else if (!mode.empty() && mode != "2d") {
    throw DataError(source + ": mode must be 2d or 3d, got '" + mode + "'");
  }
  if (preset.empty()) c.flow_enabled = c.mode == Mode::k2D;

  bool sigma_set = false, steps_set = false;
  for (const auto& [section, entries] : tree) {
    if (entries.empty() && !entries.data().empty()) {
      throw DataError(source + ": key '" + section + "' outside of a section");
    }
    for (const auto& [key, value] : entries) {
      if (section == "pipeline" && (key == "preset" || key == "mode")) continue;
      const Field* f = find_field(section, key);
      if (!f) throw DataError(source + ": unknown key [" + section + "] " + key);
      sigma_set |= section == "detect" && (key == "sigma_min" || key == "sigma_max");
      steps_set |= section == "detect" && key == "sigma_steps";
      try {
        f->set(c, value.data());
      } catch (const ParseError& e) {
        throw DataError(source + ": [" + section + "] " + key + ": " + e.what);
      }
    }
  }
  // New sigma bounds without an explicit step count get integer steps.
  if (sigma_set && !steps_set) c.detect.scales.steps = int(std::floor(c.detect.scales.sigma_max - c.detect.scales.sigma_min)) + 1;
  try {
    c.validate();
  } catch (const ParameterError& e) {
    throw DataError(source + ": " + e.what());
  }
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text_file(path), path.string());
}

std::string format_config(const PipelineConfig& config) {
  std::string out = "[pipeline]\nmode = " + to_string(config.mode) + "\n";
  std::string section = "pipeline";
  for (const Field& f : fields()) {
    if (section != f.section) {
      section = f.section;
      out += "\n[" + section + "]\n";
    }
    out += std::string(f.key) + " = " + f.get(config) + "\n";
  }
  return out;
}

}  // namespace nucleitrace
