#include <benchmark/benchmark.h>

#include <random>

#include "nucleitrace/cluster.hpp"
#include "nucleitrace/detect.hpp"
#include "nucleitrace/filters.hpp"
#include "nucleitrace/flow.hpp"
#include "nucleitrace/segment.hpp"
#include "nucleitrace/synth.hpp"
#include "nucleitrace/watershed.hpp"

using namespace nucleitrace;

namespace {

Image noise_image(const Dims& dims, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 255.0f);
  Image img(dims);
  for (float& v : img) v = u(rng);
  return img;
}

const SynthSequence& sequence_2d() {
  static const SynthSequence seq = [] {
    SynthSpec s = synth_preset("synth-2d");
    s.dims = Dims(256, 256);
    s.n_cells = 60;
    s.frames = 2;
    return synthesize(s);
  }();
  return seq;
}

}  // namespace

static void BM_Gaussian(benchmark::State& state) {
  const Index n = state.range(0);
  const Image img = noise_image(Dims(n, n, n / 4), 1);
  for (auto _ : state) benchmark::DoNotOptimize(gaussian_filter(img, 2.0));
  state.SetItemsProcessed(state.iterations() * img.size());
}
BENCHMARK(BM_Gaussian)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

static void BM_Watershed(benchmark::State& state) {
  const Index n = state.range(0);
  const Image relief = noise_image(Dims(n, n), 2);
  LabelImage seeds(relief.dims());
  std::mt19937_64 rng(3);
  for (Label l = 1; l <= 32; ++l) seeds[static_cast<Index>(rng() % static_cast<std::uint64_t>(seeds.size()))] = l;
  for (auto _ : state) benchmark::DoNotOptimize(seeded_watershed(relief, seeds));
  state.SetItemsProcessed(state.iterations() * relief.size());
}
BENCHMARK(BM_Watershed)->Arg(128)->Arg(512)->Unit(benchmark::kMillisecond);

static void BM_WardCluster(benchmark::State& state) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 500.0);
  std::vector<Point> pts;
  for (int i = 0; i < state.range(0); ++i) pts.push_back({u(rng), u(rng), u(rng)});
  for (auto _ : state) benchmark::DoNotOptimize(ward_cluster(pts, 20.0));
}
BENCHMARK(BM_WardCluster)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

static void BM_Farneback(benchmark::State& state) {
  const SynthSequence& seq = sequence_2d();
  for (auto _ : state) benchmark::DoNotOptimize(farneback_flow(seq.raw[0], seq.raw[1]));
}
BENCHMARK(BM_Farneback)->Unit(benchmark::kMillisecond);

static void BM_DetectFrame2D(benchmark::State& state) {
  const SynthSequence& seq = sequence_2d();
  DetectParams p;
  p.scales = ScaleRange::integer_steps(3, 4);
  for (auto _ : state) benchmark::DoNotOptimize(detect_frame(seq.raw[0], p));
}
BENCHMARK(BM_DetectFrame2D)->Unit(benchmark::kMillisecond);

static void BM_Segment2D(benchmark::State& state) {
  const SynthSequence& seq = sequence_2d();
  std::vector<TrackedObject> objects;
  for (const SynthCell& c : seq.cells[0]) objects.push_back({c.id, 0, c.center, {}});
  for (auto _ : state) benchmark::DoNotOptimize(segment_2d(seq.raw[0], objects, SizePriors{3.0, 7.0, 400.0}));
}
BENCHMARK(BM_Segment2D)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
