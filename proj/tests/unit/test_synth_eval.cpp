#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <random>
#include <set>

#include "nucleitrace/diagnostics.hpp"
#include "nucleitrace/eval.hpp"
#include "nucleitrace/overlay.hpp"
#include "nucleitrace/synth.hpp"

using namespace nucleitrace;

namespace {

EvalSequence truth_of(const SynthSequence& s) {
  EvalSequence e;
  for (const auto& frame : s.cells) {
    std::vector<EvalObject> objs;
    for (const SynthCell& c : frame) objs.push_back({c.id, c.center});
    e.frames.push_back(objs);
  }
  e.tracks = s.tracks;
  e.masks = s.masks;
  return e;
}

struct WarningCapture {
  WarningCapture() : previous(set_warning_handler([this](std::string_view m) { messages.emplace_back(m); })) {}
  ~WarningCapture() { set_warning_handler(previous); }
  std::vector<std::string> messages;
  WarningHandler previous;
};

}  // namespace

// --- generator -----------------------------------------------------------------------

TEST(Synth, SameSeedSameSequence) {
  SynthSpec spec;
  spec.seed = 42;
  const SynthSequence a = synthesize(spec), b = synthesize(spec);
  EXPECT_EQ(a.raw, b.raw);
  EXPECT_EQ(a.masks, b.masks);
  EXPECT_EQ(a.tracks, b.tracks);
  spec.seed = 43;
  EXPECT_NE(synthesize(spec).raw, a.raw);
}

TEST(Synth, NoCellsIsPureNoise) {
  SynthSpec spec;
  spec.n_cells = 0;
  const SynthSequence s = synthesize(spec);
  EXPECT_TRUE(s.tracks.empty());
  for (const LabelImage& m : s.masks) {
    for (Label l : m) EXPECT_EQ(l, 0u);
  }
  double sum = 0, sq = 0;
  const Image& f = s.raw[0];
  for (float v : f) {
    sum += v;
    sq += double(v) * v;
  }
  const double mean = sum / double(f.size()), sd = std::sqrt(sq / double(f.size()) - mean * mean);
  EXPECT_NEAR(mean, spec.background, 1.0);
  EXPECT_NEAR(sd, spec.noise, 1.0);
}

TEST(Synth, DivisionEntryProducesConsistentLineage) {
  SynthSpec spec;
  spec.n_cells = 4;
  spec.divisions = {{5, 1}};
  const SynthSequence s = synthesize(spec);
  ASSERT_EQ(s.tracks.size(), 6u);
  validate_track_records(s.tracks);
  EXPECT_EQ(s.tracks[0], (TrackRecord{1, 0, 4, 0}));
  EXPECT_EQ(s.tracks[4], (TrackRecord{5, 5, 9, 1}));
  EXPECT_EQ(s.tracks[5], (TrackRecord{6, 5, 9, 1}));
  for (int t = 0; t < spec.frames; ++t) {
    std::set<Label> present;
    for (const SynthCell& c : s.cells[std::size_t(t)]) present.insert(c.id);
    EXPECT_EQ(present.count(1), t < 5 ? 1u : 0u);
    EXPECT_EQ(present.count(5), t >= 5 ? 1u : 0u);
  }
}

TEST(Synth, MasksAreTheDiscsOfTheCells) {
  SynthSpec spec;
  spec.seed = 9;
  const SynthSequence s = synthesize(spec);
  for (std::size_t t = 0; t < s.masks.size(); ++t) {
    std::map<Label, const SynthCell*> by_id;
    for (const SynthCell& c : s.cells[t]) by_id[c.id] = &c;
    const LabelImage& m = s.masks[t];
    for (Index i = 0; i < m.size(); ++i) {
      const auto v = m.dims().coords(i);
      const Point p{double(v[0]), double(v[1]), 0.0};
      Label inside = 0;
      for (const SynthCell& c : s.cells[t]) {
        if (distance(p, c.center) <= c.radius) inside = c.id;  // cells do not overlap
      }
      EXPECT_EQ(m[i], inside);
    }
  }
}

TEST(Synth, CellsKeepTheirSpacingAndStepLimit) {
  SynthSpec spec = synth_preset("synth-tracking");
  const SynthSequence s = synthesize(spec);
  for (std::size_t t = 1; t < s.cells.size(); ++t) {
    for (const SynthCell& c : s.cells[t]) {
      for (const SynthCell& p : s.cells[t - 1]) {
        if (p.id == c.id) EXPECT_LE(distance(p.center, c.center), spec.max_step + 1e-9);
      }
    }
  }
}

TEST(Synth, FlickerHidesCellsFromTheRawFrameOnly) {
  SynthSpec spec;
  spec.flicker = 1.0;
  spec.noise = 0.0;
  const SynthSequence s = synthesize(spec);
  for (float v : s.raw[0]) EXPECT_EQ(v, float(spec.background));
  EXPECT_EQ(s.cells[0].size(), std::size_t(spec.n_cells));
}

TEST(Synth, SpecRoundTripsThroughText) {
  SynthSpec spec = synth_preset("synth-tracking");
  spec.seed = 77;
  spec.drift = {0.5, -0.25, 0};
  EXPECT_EQ(parse_synth_spec(format_synth_spec(spec)), spec);
  EXPECT_EQ(parse_synth_spec("[synth]\npreset = synth-3d\nseed = 3\n").dims, Dims(64, 64, 32));
  EXPECT_THROW(parse_synth_spec("[synth]\nflicker = 2\n"), DataError);
  EXPECT_THROW(parse_synth_spec("[synth]\ncolour = red\n"), DataError);
}

TEST(Synth, InvalidSpecsAreRejected) {
  SynthSpec spec;
  spec.radius_max = 40;
  EXPECT_THROW(synthesize(spec), ParameterError);
  spec = SynthSpec{};
  spec.divisions = {{3, 99}};
  EXPECT_THROW(synthesize(spec), ParameterError);
  spec = SynthSpec{};
  spec.n_cells = 200;
  EXPECT_THROW(synthesize(spec), ParameterError);
}

// --- evaluation ----------------------------------------------------------------------

TEST(Eval, TruthAgainstItselfIsPerfect) {
  for (unsigned seed : {1u, 2u, 3u}) {
    SynthSpec spec = synth_preset("synth-tracking");
    spec.seed = seed;
    const EvalSequence t = truth_of(synthesize(spec));
    const EvalReport r = evaluate(t, t, 3.0);
    EXPECT_EQ(r.precision, 1.0);
    EXPECT_EQ(r.recall, 1.0);
    EXPECT_EQ(r.link_accuracy, 1.0);
    EXPECT_EQ(r.division_recall, 1.0);
    EXPECT_EQ(r.mean_iou, 1.0);
    EXPECT_EQ(r.divisions, 2);
  }
}

TEST(Eval, EmptyResultHasZeroRecallAndWarns) {
  const EvalSequence t = truth_of(synthesize(SynthSpec{}));
  EvalSequence empty;
  empty.frames.resize(t.frames.size());
  WarningCapture w;
  const EvalReport r = evaluate(empty, t, 3.0);
  EXPECT_EQ(r.recall, 0.0);
  EXPECT_EQ(r.precision, 1.0);
  EXPECT_EQ(w.messages.size(), 1u);
}

TEST(Eval, DeletingTenPercentOfObjectsGivesRecallPointNine) {
  SynthSpec spec;
  spec.n_cells = 10;
  const EvalSequence t = truth_of(synthesize(spec));
  EvalSequence r = t;
  r.masks.clear();
  // Every tenth object in frame-major order: 10 of 100.
  long seen = 0, removed = 0;
  for (auto& frame : r.frames) {
    std::vector<EvalObject> kept;
    for (const EvalObject& o : frame) {
      if (seen++ % 10 == 0) {
        ++removed;
      } else {
        kept.push_back(o);
      }
    }
    frame = kept;
  }
  ASSERT_EQ(removed, 10);
  const EvalReport rep = evaluate(r, t, 3.0);
  EXPECT_EQ(rep.true_positives, 90);
  EXPECT_EQ(rep.false_negatives, 10);
  EXPECT_DOUBLE_EQ(rep.recall, 0.9);
  EXPECT_EQ(rep.precision, 1.0);
}

TEST(Eval, GreedyMatchingTakesTheNearestPairFirst) {
  EvalSequence truth, result;
  truth.frames = {{{1, {0, 0, 0}}, {2, {3, 0, 0}}}};
  truth.tracks = {{1, 0, 0, 0}, {2, 0, 0, 0}};
  result.frames = {{{7, {1.8, 0, 0}}}};
  result.tracks = {{7, 0, 0, 0}};
  const EvalReport r = evaluate(result, truth, 3.0);
  EXPECT_EQ(r.true_positives, 1);  // matched to truth 2 (1.2 away), not truth 1 (1.8 away)
  EXPECT_EQ(r.false_negatives, 1);
}

TEST(Eval, MissedDivisionIsCounted) {
  EvalSequence truth;
  truth.frames = {{{1, {10, 10, 0}}}, {{2, {5, 10, 0}}, {3, {15, 10, 0}}}};
  truth.tracks = {{1, 0, 0, 0}, {2, 1, 1, 1}, {3, 1, 1, 1}};
  EvalSequence result = truth;
  result.tracks = {{1, 0, 0, 0}, {2, 1, 1, 0}, {3, 1, 1, 0}};  // no parent links
  const EvalReport r = evaluate(result, truth, 2.0);
  EXPECT_EQ(r.divisions, 1);
  EXPECT_EQ(r.divisions_found, 0);
  EXPECT_EQ(r.links, 2);
  EXPECT_EQ(r.links_found, 0);
  EXPECT_EQ(evaluate(truth, truth, 2.0).division_recall, 1.0);
}

TEST(Eval, FrameCountMismatchIsAnError) {
  EvalSequence a, b;
  a.frames.resize(2);
  b.frames.resize(3);
  EXPECT_THROW(evaluate(a, b, 3.0), DataError);
}

TEST(Eval, CentroidsFromMasks) {
  LabelImage m(Dims(10, 10));
  m.at(2, 2) = 4;
  m.at(4, 2) = 4;
  const EvalSequence s = sequence_from_masks({m}, {{4, 0, 0, 0}});
  ASSERT_EQ(s.frames[0].size(), 1u);
  EXPECT_EQ(s.frames[0][0].centroid, (Point{3, 2, 0}));
}

TEST(Eval, ReportHasKeyValueLines) {
  const std::string s = format_report(EvalReport{});
  EXPECT_NE(s.find("precision=1.000000\n"), std::string::npos);
  EXPECT_NE(s.find("mean_iou=1.000000\n"), std::string::npos);
}

// --- overlay -------------------------------------------------------------------------

TEST(Overlay, EmptyMaskIsTheGrayFrame) {
  Image raw(Dims(16, 8));
  for (Index i = 0; i < raw.size(); ++i) raw[i] = float(i);
  const RgbImage img = render_overlay(raw, LabelImage(raw.dims()));
  for (Index y = 0; y < 8; ++y) {
    for (Index x = 0; x < 16; ++x) {
      const auto* p = img.pixel(x, y);
      const auto g = std::uint8_t(std::lround(255.0 * double(x + 16 * y) / 127.0));
      EXPECT_EQ(p[0], g);
      EXPECT_EQ(p[1], g);
      EXPECT_EQ(p[2], g);
    }
  }
}

TEST(Overlay, LabeledRegionIsTintedWithItsColor) {
  Image raw(Dims(40, 40), 0.0f);
  raw[0] = 1.0f;
  LabelImage labels(raw.dims());
  for (Index y = 5; y < 30; ++y)
    for (Index x = 5; x < 30; ++x) labels.at(x, y) = 3;
  const RgbImage img = render_overlay(raw, labels);
  const auto c = label_color(3);
  const auto* edge = img.pixel(5, 10);
  EXPECT_EQ(edge[0], c[0]);
  EXPECT_EQ(edge[1], c[1]);
  const auto* inside = img.pixel(8, 8);
  EXPECT_EQ(inside[0], c[0] / 2);
  const auto* outside = img.pixel(35, 35);
  EXPECT_EQ(outside[0], 0);
  // The id is drawn in white at the centroid.
  int white = 0;
  for (Index y = 14; y < 21; ++y)
    for (Index x = 14; x < 21; ++x) white += img.pixel(x, y)[0] == 255 && img.pixel(x, y)[1] == 255;
  EXPECT_GT(white, 5);
}

TEST(Overlay, ColorIsAFunctionOfTheIdOnly) {
  EXPECT_EQ(label_color(17), label_color(17));
  EXPECT_NE(label_color(17), label_color(18));
}

TEST(Overlay, DimsMismatchIsAnError) {
  EXPECT_THROW(render_overlay(Image(Dims(4, 4)), LabelImage(Dims(5, 4))), DataError);
}

TEST(Overlay, PngRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / ("nt_overlay_" + std::to_string(::getpid()) + ".png");
  RgbImage img{5, 3, std::vector<std::uint8_t>(45)};
  for (std::size_t i = 0; i < img.rgb.size(); ++i) img.rgb[i] = std::uint8_t(i * 5);
  write_png(path, img);
  EXPECT_EQ(read_png(path), img);
  std::filesystem::remove(path);
}
