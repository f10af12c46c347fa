#include <benchmark/benchmark.h>

#include "owc/channel_optics.hpp"
#include "owc/rng.hpp"
#include "owc/trackers.hpp"
#include "owc/vision_renderer.hpp"
#include "owc/wave_surface.hpp"

using namespace owc;

namespace {

SurfaceRealization default_sea() {
    const SpectrumParams p = SpectrumParams::from_environment(9.8, 10.0, 2.0e4, 3.3);
    return realize_surface(p, SpectralGrid::default_for(p), 42);
}

LinkGeometry oblique_link(const SurfaceRealization& sea) {
    LinkGeometry g;
    g.transmitter = {0.0, 0.0, -10.0};
    g.receiver = {4.0, -3.0, 45.0};
    g.tx_boresight = {0.0, 0.0, 1.0};
    g.rx_boresight = {0.0, 0.0, -1.0};
    g.t = 17.0;
    g.surface = &sea;
    return g;
}

void BM_SurfaceSample(benchmark::State& state) {
    const SurfaceRealization sea = default_sea();
    Rng rng(1);
    for (auto _ : state) {
        benchmark::DoNotOptimize(sea.sample(rng.uniform(-20, 20), rng.uniform(-20, 20), 3.0));
    }
}
BENCHMARK(BM_SurfaceSample);

void BM_SolveRefraction(benchmark::State& state) {
    const SurfaceRealization sea = default_sea();
    const LinkGeometry g = oblique_link(sea);
    const OpticalConstants c;
    for (auto _ : state) benchmark::DoNotOptimize(solve_refraction_point(g, c));
}
BENCHMARK(BM_SolveRefraction)->Unit(benchmark::kMillisecond);

void BM_RenderCrop(benchmark::State& state) {
    const SurfaceRealization sea = default_sea();
    LinkGeometry g = oblique_link(sea);
    const OpticalConstants c;
    const RefractionSolution s = solve_refraction_point(g, c);
    g.tx_boresight = normalize(s.point - g.transmitter);
    g.rx_boresight = normalize(s.point - g.receiver);
    const CameraModel cam = CameraModel::look(g.receiver, g.rx_boresight);
    RenderOptions o;
    o.window = PixelWindow{16, 16, 32, 32};
    for (auto _ : state) benchmark::DoNotOptimize(render(cam, g, c, o));
}
BENCHMARK(BM_RenderCrop)->Unit(benchmark::kMillisecond);

void BM_MeanShift(benchmark::State& state) {
    Grid g(32, 32);
    for (int r = 0; r < 32; ++r) {
        for (int c = 0; c < 32; ++c) g.at(r, c) = static_cast<float>(1.0 / (1.0 + (r - 14) * (r - 14) + (c - 18) * (c - 18)));
    }
    for (auto _ : state) benchmark::DoNotOptimize(meanshift_step(g, {10.0, 10.0, 6.0, 30, 0.05, 0}));
}
BENCHMARK(BM_MeanShift);

}  // namespace

BENCHMARK_MAIN();
