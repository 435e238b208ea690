#include <gtest/gtest.h>
#include <tiffio.h>

#include <filesystem>
#include <random>

#include "nucleitrace/config.hpp"
#include "nucleitrace/text_io.hpp"
#include "nucleitrace/tiff_io.hpp"
#include "nucleitrace/track_table.hpp"

using namespace nucleitrace;
namespace fs = std::filesystem;

namespace {

class TempDir {
 public:
  TempDir() {
    static int counter = 0;
    path_ = fs::temp_directory_path() /
            ("nt_ctcio_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

Image random_u16(const Dims& dims, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_int_distribution<int> u(0, 65535);
  Image img(dims);
  for (float& v : img) v = float(u(rng));
  return img;
}

void write_u8_tiff(const fs::path& path, int w, int h, const std::vector<std::uint8_t>& data) {
  TIFF* t = TIFFOpen(path.c_str(), "w");
  ASSERT_NE(t, nullptr);
  TIFFSetField(t, TIFFTAG_IMAGEWIDTH, w);
  TIFFSetField(t, TIFFTAG_IMAGELENGTH, h);
  TIFFSetField(t, TIFFTAG_BITSPERSAMPLE, 8);
  TIFFSetField(t, TIFFTAG_SAMPLESPERPIXEL, 1);
  TIFFSetField(t, TIFFTAG_PHOTOMETRIC, PHOTOMETRIC_MINISBLACK);
  TIFFSetField(t, TIFFTAG_PLANARCONFIG, PLANARCONFIG_CONTIG);
  for (int y = 0; y < h; ++y) TIFFWriteScanline(t, const_cast<std::uint8_t*>(data.data()) + y * w, y, 0);
  TIFFClose(t);
}

std::string file_bytes(const fs::path& p) { return read_text_file(p); }

}  // namespace

// --- TIFF ------------------------------------------------------------------------

TEST(Tiff, MultiPage16BitRoundTripIsBitExact) {
  TempDir dir;
  const Image img = random_u16(Dims(64, 64, 10), 3);
  write_tiff16(dir.path() / "stack.tif", img);
  const Image back = read_tiff(dir.path() / "stack.tif");
  EXPECT_EQ(back.dims(), Dims(64, 64, 10));
  EXPECT_EQ(back, img);
}

TEST(Tiff, SinglePageIs2D) {
  TempDir dir;
  const Image img = random_u16(Dims(17, 9), 4);
  write_tiff16(dir.path() / "a.tif", img);
  const Image back = read_tiff(dir.path() / "a.tif");
  EXPECT_EQ(back.ndim(), 2);
  EXPECT_EQ(back, img);
}

TEST(Tiff, Reads8Bit) {
  TempDir dir;
  std::vector<std::uint8_t> px(12 * 5);
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = std::uint8_t(i * 4);
  write_u8_tiff(dir.path() / "u8.tif", 12, 5, px);
  const Image img = read_tiff(dir.path() / "u8.tif");
  ASSERT_EQ(img.dims(), Dims(12, 5));
  for (std::size_t i = 0; i < px.size(); ++i) EXPECT_EQ(img[Index(i)], float(px[i]));
}

TEST(Tiff, RejectsOutOfRangeIntensityWithoutLeavingAFile) {
  TempDir dir;
  Image img(Dims(4, 4), 70000.0f);
  EXPECT_THROW(write_tiff16(dir.path() / "x.tif", img), ParameterError);
  EXPECT_FALSE(fs::exists(dir.path() / "x.tif"));
}

TEST(Tiff, MissingFileIsADataError) { EXPECT_THROW(read_tiff("/nonexistent/none.tif"), DataError); }

TEST(Sequence, EmptyDirectoryFails) {
  TempDir dir;
  try {
    read_sequence(dir.path());
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("no frames"), std::string::npos);
  }
}

TEST(Sequence, FramesComeBackInIndexOrder) {
  TempDir dir;
  std::vector<Image> frames;
  for (int t = 0; t < 5; ++t) frames.push_back(Image(Dims(8, 6), float(t * 10)));
  write_sequence(dir.path(), frames);
  for (int t = 0; t < 5; ++t) EXPECT_TRUE(fs::exists(dir.path() / frame_file_name("t", t)));
  const auto back = read_sequence(dir.path());
  ASSERT_EQ(back.size(), 5u);
  for (int t = 0; t < 5; ++t) EXPECT_EQ(back[std::size_t(t)][0], float(t * 10));
}

TEST(Sequence, GapIsReported) {
  TempDir dir;
  write_tiff16(dir.path() / "t000.tif", Image(Dims(4, 4)));
  write_tiff16(dir.path() / "t001.tif", Image(Dims(4, 4)));
  write_tiff16(dir.path() / "t004.tif", Image(Dims(4, 4)));
  try {
    read_sequence(dir.path());
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("2..3"), std::string::npos) << e.what();
  }
}

TEST(Sequence, MismatchedFrameSizesFail) {
  TempDir dir;
  write_tiff16(dir.path() / "t000.tif", Image(Dims(4, 4)));
  write_tiff16(dir.path() / "t001.tif", Image(Dims(5, 4)));
  EXPECT_THROW(read_sequence(dir.path()), DataError);
}

TEST(Masks, EmptyFrameIsAllZero) {
  TempDir dir;
  write_masks(dir.path(), std::vector<LabelImage>{LabelImage(Dims(9, 7))});
  const auto back = read_masks(dir.path());
  ASSERT_EQ(back.size(), 1u);
  for (Label l : back[0]) EXPECT_EQ(l, 0u);
}

TEST(Masks, LabelValueIsStoredExactly) {
  TempDir dir;
  LabelImage m(Dims(10, 10));
  m.at(3, 4) = 7;
  m.at(4, 4) = 7;
  write_masks(dir.path(), std::vector<LabelImage>{m});
  EXPECT_EQ(read_masks(dir.path())[0], m);
  EXPECT_EQ(read_label_tiff(dir.path() / "mask000.tif").at(3, 4), 7u);
}

TEST(Masks, LabelAbove16BitsIsRejected) {
  TempDir dir;
  LabelImage m(Dims(4, 4));
  m[5] = 65536;
  EXPECT_THROW(write_label_tiff(dir.path() / "m.tif", m), DataError);
  EXPECT_FALSE(fs::exists(dir.path() / "m.tif"));
}

TEST(Masks, RandomRoundTrip) {
  TempDir dir;
  std::mt19937 rng(11);
  std::vector<LabelImage> masks;
  for (int t = 0; t < 6; ++t) {
    LabelImage m(t % 2 ? Dims(13, 11, 4) : Dims(13, 11, 4));
    std::uniform_int_distribution<Label> u(0, 65535);
    for (Label& l : m) l = u(rng);
    masks.push_back(m);
  }
  write_masks(dir.path(), masks);
  EXPECT_EQ(read_masks(dir.path()), masks);
}

// --- track table ---------------------------------------------------------------------

TEST(TrackTable, SingleTrackLine) {
  TrackGraph g;
  const Label id = g.add_track(0, {1, 1, 0}, {0});
  for (int t = 1; t <= 9; ++t) g.extend_forward(id, {1, 1, 0}, {0});
  EXPECT_EQ(format_track_table(track_records(g)), "1 0 9 0\n");
}

TEST(TrackTable, DivisionLines) {
  TrackGraph g;
  const Label p = g.add_track(0, {5, 5, 0}, {0});
  for (int t = 1; t <= 4; ++t) g.extend_forward(p, {5, 5, 0}, {0});
  const Label a = g.add_track(5, {3, 5, 0}, {0}, p);
  const Label b = g.add_track(5, {7, 5, 0}, {1}, p);
  for (int t = 6; t <= 9; ++t) {
    g.extend_forward(a, {3, 5, 0}, {0});
    g.extend_forward(b, {7, 5, 0}, {1});
  }
  EXPECT_EQ(format_track_table(track_records(g)), "1 0 4 0\n2 5 9 1\n3 5 9 1\n");
}

TEST(TrackTable, OutputIsSortedAndByteDeterministic) {
  const std::vector<TrackRecord> recs{{3, 5, 9, 1}, {1, 0, 4, 0}, {2, 5, 9, 1}};
  const std::string a = format_track_table(recs);
  EXPECT_EQ(a, "1 0 4 0\n2 5 9 1\n3 5 9 1\n");
  EXPECT_EQ(a, format_track_table(recs));
}

TEST(TrackTable, RandomGraphsRoundTrip) {
  TempDir dir;
  std::mt19937 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<TrackRecord> recs;
    Label next = 1;
    std::uniform_int_distribution<int> len(0, 6), coin(0, 3);
    for (int root = 0; root < 4; ++root) {
      std::vector<TrackRecord> open{{next++, coin(rng), 0, 0}};
      open.back().end = open.back().begin + len(rng);
      while (!open.empty()) {
        TrackRecord r = open.back();
        open.pop_back();
        recs.push_back(r);
        if (coin(rng) == 0 && r.end < 40) {
          for (int k = 0; k < 2; ++k) {
            TrackRecord c{next++, r.end + 1, 0, r.label};
            c.end = c.begin + len(rng);
            open.push_back(c);
          }
        }
      }
    }
    const fs::path p = dir.path() / "res_track.txt";
    write_track_table(p, recs);
    std::sort(recs.begin(), recs.end(), [](const auto& x, const auto& y) { return x.label < y.label; });
    EXPECT_EQ(read_track_table(p), recs);
  }
}

TEST(TrackTable, BrokenLineageIsRefused) {
  TempDir dir;
  const std::vector<TrackRecord> recs{{1, 0, 4, 0}, {2, 6, 9, 1}};
  EXPECT_THROW(write_track_table(dir.path() / "t.txt", recs), InvariantError);
  EXPECT_FALSE(fs::exists(dir.path() / "t.txt"));
  EXPECT_THROW(format_track_table(std::vector<TrackRecord>{{1, 5, 4, 0}}), InvariantError);
  EXPECT_THROW(format_track_table(std::vector<TrackRecord>{{2, 0, 4, 9}}), InvariantError);
}

TEST(TrackTable, ParseErrorNamesTheLine) {
  try {
    parse_track_table("1 0 4 0\n2 5 x 1\n", "tbl");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("tbl:2"), std::string::npos) << e.what();
  }
}

// --- presets and config -----------------------------------------------------------

struct PresetRow {
  const char* name;
  Mode mode;
  double sigma_min, sigma_max, border;
  double gauss, median, erode;  // 0 = absent
  int median_last;
  bool gap_closing, z_projection;
};

TEST(Presets, MatchTheTableOfConstants) {
  const PresetRow rows[] = {
      {"Fluo-N2DH-GOWT1", Mode::k2D, 8, 12, 50, 0, 0, 0, -1, false, false},
      {"Fluo-N2DL-HeLa", Mode::k2D, 5, 5, 25, 0, 0, 0, -1, false, false},
      {"Fluo-N3DH-CE", Mode::k3D, 10, 18, 0, 3, 1, 0, 49, false, false},
      {"Fluo-N3DL-TRIC", Mode::k3D, 4, 6, 0, 3, 0, 0, -1, true, true},
      {"Fluo-N3DL-DRO", Mode::k3D, 4, 4, 0, 0, 0, 2, -1, true, false},
  };
  for (const PresetRow& row : rows) {
    SCOPED_TRACE(row.name);
    const PipelineConfig c = load_preset(row.name);
    EXPECT_EQ(c.mode, row.mode);
    EXPECT_EQ(c.detect.scales.sigma_min, row.sigma_min);
    EXPECT_EQ(c.detect.scales.sigma_max, row.sigma_max);
    EXPECT_EQ(c.detect.border_margin, row.border);
    EXPECT_EQ(c.detect.threshold_k, 2.0);
    EXPECT_EQ(c.detect.rescale_low, 0.4);
    EXPECT_EQ(c.detect.rescale_high, 99.6);
    EXPECT_EQ(c.detect.opening_radius, 2);
    EXPECT_EQ(c.detect.binarize_threshold, 0.5);
    EXPECT_EQ(c.gap_closing, row.gap_closing);
    EXPECT_EQ(c.z_projection, row.z_projection);
    EXPECT_EQ(c.flow_enabled, row.mode == Mode::k2D);
    double gauss = 0, median = 0, erode = 0;
    int median_last = -1;
    for (const PreprocessStep& p : c.detect.preprocess) {
      if (p.kind == PreprocessStep::Kind::kGaussian) gauss = p.value;
      if (p.kind == PreprocessStep::Kind::kMedian) {
        median = p.value;
        median_last = p.last_frame;
        EXPECT_EQ(p.first_frame, 0);
      }
      if (p.kind == PreprocessStep::Kind::kErode) erode = p.value;
    }
    EXPECT_EQ(gauss, row.gauss);
    EXPECT_EQ(median, row.median);
    EXPECT_EQ(erode, row.erode);
    EXPECT_EQ(median_last, row.median_last);
  }
}

TEST(Presets, UnknownNameListsTheAvailableOnes) {
  try {
    load_preset("Fluo-N2DH-SIM+");
    FAIL();
  } catch (const ParameterError& e) {
    EXPECT_NE(std::string(e.what()).find("Fluo-N3DL-DRO"), std::string::npos);
  }
}

TEST(Config, FormatParseRoundTripForEveryPreset) {
  for (const std::string& name : preset_names()) {
    const PipelineConfig c = load_preset(name);
    EXPECT_EQ(parse_config(format_config(c)), c) << name;
  }
}

TEST(Config, PresetWithOverrides) {
  const PipelineConfig c = parse_config(
      "[pipeline]\npreset = Fluo-N3DL-TRIC\nspacing = 1 1 2.5\n[detect]\nsigma_max = 7\n[segment]\nr_min = 3\n");
  EXPECT_EQ(c.detect.scales.sigma_min, 4.0);
  EXPECT_EQ(c.detect.scales.sigma_max, 7.0);
  EXPECT_EQ(c.detect.scales.steps, 4);
  EXPECT_EQ(c.spacing[2], 2.5);
  EXPECT_EQ(c.priors.r_min, 3.0);
  EXPECT_TRUE(c.z_projection);
}

TEST(Config, PreprocessFrameRange) {
  const PipelineConfig c = parse_config("[pipeline]\nmode = 3d\n[detect]\npreprocess = median:1@0-49, gaussian:2.5@10-\n");
  ASSERT_EQ(c.detect.preprocess.size(), 2u);
  EXPECT_EQ(c.detect.preprocess[0], (PreprocessStep{PreprocessStep::Kind::kMedian, 1, 0, 49}));
  EXPECT_EQ(c.detect.preprocess[1], (PreprocessStep{PreprocessStep::Kind::kGaussian, 2.5, 10, -1}));
  EXPECT_FALSE(c.flow_enabled);
}

TEST(Config, RejectsUnknownKeysAndBadValues) {
  EXPECT_THROW(parse_config("[detect]\nsigma_mn = 3\n"), DataError);
  EXPECT_THROW(parse_config("[detect]\nsigma_min = three\n"), DataError);
  EXPECT_THROW(parse_config("[segment]\nr_min = 9\nr_max = 3\n"), DataError);
  EXPECT_THROW(parse_config("[pipeline]\nmode = 3d\n[track]\nflow = true\n"), DataError);
  EXPECT_THROW(parse_config("[pipeline]\nmode = 2d\n[segment]\nz_projection = true\n"), DataError);
  EXPECT_THROW(parse_config("[pipeline]\npreset = Fluo-N2DL-HeLa\nmode = 3d\n"), DataError);
  EXPECT_THROW(parse_config("[detect]\npreprocess = median:1.5\n"), DataError);
}

// --- intermediate text files -------------------------------------------------------

TEST(DetectionsFile, EmptyTableHasOnlyTheHeader) {
  DetectionTable t{2, FrameDetections(3)};
  EXPECT_EQ(format_detections(t), "# detections frames=3 ndim=2\n");
  EXPECT_EQ(parse_detections(format_detections(t)).frames.size(), 3u);
}

TEST(DetectionsFile, RoundTripIsExact) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> u(0, 100);
  for (int ndim : {2, 3}) {
    DetectionTable t{ndim, FrameDetections(4)};
    for (int f = 0; f < 4; ++f) {
      for (int k = 0; k < 5; ++k) {
        Detection d;
        d.frame = f;
        d.centroid = {u(rng), u(rng), ndim == 3 ? u(rng) : 0.0};
        d.score = u(rng) / 7.0;
        d.scale = 3.0;
        t.frames[std::size_t(f)].push_back(d);
      }
    }
    const DetectionTable back = parse_detections(format_detections(t));
    EXPECT_EQ(back.ndim, ndim);
    EXPECT_EQ(back.frames, t.frames);
    EXPECT_EQ(format_detections(back), format_detections(t));
  }
}

TEST(DetectionsFile, SchemaErrorsNameTheLine) {
  try {
    parse_detections("# detections frames=2 ndim=2\n0 1 2 3 4\n1 1 2 3\n", "det");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("det:3"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_detections("0 1 2 3 4\n"), DataError);
  EXPECT_THROW(parse_detections("# detections frames=1 ndim=2\n4 1 2 3 4\n"), DataError);
}

TEST(ObjectsFile, RoundTripIsExact) {
  ObjectTable t;
  t.ndim = 3;
  t.cutoffs = {4.25, 1.0 / 3.0};
  t.frames = {{{1, 0, {1.5, 2.25, 3.125}, {}}, {4, 0, {0.1, 0.2, 0.3}, {}}}, {{2, 1, {9, 8, 7}, {}}}};
  const ObjectTable back = parse_objects(format_objects(t));
  EXPECT_EQ(back.cutoffs, t.cutoffs);
  EXPECT_EQ(back.frames, t.frames);
  EXPECT_THROW(parse_objects("# objects frames=1 ndim=2\nobject 0 1 2 3\n"), DataError);  // no cutoff
}

TEST(PointsFile, ParsesTwoAndThreeComponents) {
  const auto pts = parse_points("# seeds\n1 2\n3 4 5\n\n");
  ASSERT_EQ(pts.size(), 2u);
  EXPECT_EQ(pts[0], (Point{1, 2, 0}));
  EXPECT_EQ(pts[1], (Point{3, 4, 5}));
  EXPECT_THROW(parse_points("1\n"), DataError);
}
