// OpenMP projector kernels vs the serial reference, plus one OS-EM iteration.
//
//   ./build/bench/bench_projector --benchmark_min_time=1

#include <benchmark/benchmark.h>
#include <omp.h>

#include <map>

#include "spectsim/phantom.hpp"
#include "spectsim/projector.hpp"
#include "spectsim/recon.hpp"
#include "spectsim/reference/serial_projector.hpp"

namespace {

using namespace spectsim;

struct Fixture {
  PhantomVolumes vols;
  GeometryConfig geom;
  ProjectionSet proj;
};

const Fixture& fixture(std::size_t n) {
  static std::map<std::size_t, Fixture> cache;
  auto it = cache.find(n);
  if (it == cache.end()) {
    Fixture f{generate_phantom(torso_spec({n, n, n / 2}, 512.0 / static_cast<double>(n))), {}, {}};
    f.geom = geometry_for(f.vols.activity, 60);
    f.proj = forward_project(f.vols.activity, f.vols.mu, f.geom, PsfModel{});
    it = cache.emplace(n, std::move(f)).first;
  }
  return it->second;
}

void BM_ForwardParallel(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward_project(f.vols.activity, f.vols.mu, f.geom, PsfModel{}));
  }
}

void BM_ForwardSerialReference(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::forward_project(f.vols.activity, f.vols.mu, f.geom, PsfModel{}));
  }
}

void BM_BackParallel(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  omp_set_num_threads(static_cast<int>(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(back_project(f.proj, f.vols.mu, f.geom, PsfModel{}));
  }
}

void BM_BackSerialReference(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(reference::back_project(f.proj, f.vols.mu, f.geom, PsfModel{}));
  }
}

void BM_OsemIteration(benchmark::State& state) {
  const auto& f = fixture(static_cast<std::size_t>(state.range(0)));
  omp_set_num_threads(static_cast<int>(state.range(1)));
  OsemConfig cfg;
  cfg.n_iterations = 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(osem(f.proj, f.vols.mu, f.geom, PsfModel{}, cfg));
  }
}

}  // namespace

BENCHMARK(BM_ForwardParallel)->Args({32, 1})->Args({32, 4})->Args({64, 1})->Args({64, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ForwardSerialReference)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BackParallel)->Args({32, 1})->Args({32, 4})->Args({64, 1})->Args({64, 4})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BackSerialReference)->Arg(32)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_OsemIteration)->Args({64, 1})->Args({64, 4})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
