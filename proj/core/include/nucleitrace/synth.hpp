#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nucleitrace/image.hpp"
#include "nucleitrace/track_table.hpp"

namespace nucleitrace {

/// Parameters of a synthetic fluorescence sequence.
///
/// Nuclei are discs (balls in 3D) with a Gaussian-blurred rim on a flat
/// background plus Gaussian noise. Centers start at random non-overlapping
/// positions and move by Brownian steps or a constant drift. A scheduled
/// division ends the mother track and starts two daughters on opposite sides
/// of its last position.
struct SynthSpec {
  struct Division {
    int frame = 0;   // first frame of the daughters
    Label cell = 0;  // track label of the dividing cell
    bool operator==(const Division&) const = default;
  };
  enum class Motion { kBrownian, kDrift };

  Dims dims{64, 64};
  int frames = 10;
  int n_cells = 15;
  double radius_min = 4.0;
  double radius_max = 6.0;
  double gap = 2.0;            // minimum free space between two nuclei
  Motion motion = Motion::kBrownian;
  double step_sigma = 1.0;     // Brownian step std per axis
  double max_step = 0.0;       // longer steps are shortened; 0 = no limit
  Point drift{0.0, 0.0, 0.0};  // per-frame displacement for kDrift
  std::vector<Division> divisions;
  double division_offset = 0.0;  // daughter distance from the mother; 0 = radius
  double flicker = 0.0;          // chance that a nucleus is not rendered in a frame
  double background = 100.0;
  double amplitude = 100.0;      // nucleus brightness above background
  double noise = 10.0;           // additive Gaussian noise std
  double edge = 0.7;             // rim blur std
  std::uint64_t seed = 1;

  void validate() const;
  bool operator==(const SynthSpec&) const = default;
};

/// One ground-truth nucleus in one frame.
struct SynthCell {
  Label id = 0;
  Point center{0, 0, 0};
  double radius = 0.0;
  bool visible = true;  // false when flickered out of the raw frame
};

struct SynthSequence {
  std::vector<Image> raw;
  std::vector<LabelImage> masks;
  std::vector<std::vector<SynthCell>> cells;  // per frame, ascending id
  std::vector<TrackRecord> tracks;
};

/// Fully determined by `spec` (including its seed).
SynthSequence synthesize(const SynthSpec& spec);

/// Renders the label image of discs: a voxel belongs to the nearest center
/// (then the lower id) among the discs covering it.
LabelImage render_truth(const Dims& dims, const std::vector<SynthCell>& cells);

/// Named generator settings: "synth-2d", "synth-3d", "synth-tracking".
std::vector<std::string> synth_preset_names();
SynthSpec synth_preset(const std::string& name);

/// INI text with one [synth] section; keys mirror the SynthSpec fields.
/// `dims` is "nx ny [nz]", `drift` is "dx dy [dz]", `divisions` is a comma
/// separated list of frame:cell pairs. An optional `preset` key selects the
/// starting values.
SynthSpec parse_synth_spec(std::string_view text, const std::string& source = "synth config");
std::string format_synth_spec(const SynthSpec& spec);

}  // namespace nucleitrace
