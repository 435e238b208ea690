#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "nucleitrace/detect.hpp"
#include "nucleitrace/flow.hpp"
#include "nucleitrace/segment.hpp"
#include "nucleitrace/track.hpp"

namespace nucleitrace {

enum class Mode { k2D, k3D };

std::string to_string(Mode mode);

/// Every per-dataset parameter of the pipeline.
struct PipelineConfig {
  std::string name = "custom";
  Mode mode = Mode::k2D;
  Spacing spacing{1.0, 1.0, 1.0};

  DetectParams detect;  // detect.border_margin is the crop border E

  double fallback_cutoff = 0.0;  // 0: twice the largest detection sigma

  bool flow_enabled = false;  // double-redundant seed propagation (2D)
  FlowParams flow;

  bool gap_closing = false;       // forward nearest-neighbor pass
  double gap_cutoff_factor = 2.0; // link bound in units of the frame cutoff
  std::string selected_seeds;     // optional `x y [z]` file of tracks to keep

  SizePriors priors;
  double sigma_smooth = 2.0;
  double sobel_weight = 1.0;
  bool z_projection = false;  // 3D only

  double effective_fallback_cutoff() const;

  /// Throws ParameterError on out-of-range values or a mode mismatch (flow
  /// needs 2D, z projection needs 3D).
  void validate() const;

  bool operator==(const PipelineConfig&) const = default;
};

/// Built-in presets, in a fixed order.
std::vector<std::string> preset_names();

/// Throws ParameterError listing the available names if `name` is unknown.
PipelineConfig load_preset(const std::string& name);

/// INI text with sections [pipeline], [detect], [track], [flow] and
/// [segment]. A `preset` key in [pipeline] selects the starting values;
/// otherwise the defaults of the given `mode` are used. Unknown sections or
/// keys are rejected.
PipelineConfig parse_config(std::string_view text, const std::string& source = "config");
PipelineConfig load_config(const std::filesystem::path& path);

/// Complete INI form of `config`; parse_config(format_config(c)) == c.
std::string format_config(const PipelineConfig& config);

}  // namespace nucleitrace
