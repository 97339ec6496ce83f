#include <benchmark/benchmark.h>

#include "kacbath/jump_simulator.hpp"
#include "kacbath/kinematics.hpp"
#include "kacbath/randomness.hpp"
#include "kacbath/spectral.hpp"

using namespace kacbath;

static void BM_PairCollide(benchmark::State& st) {
  RngStream rng(1, 0);
  Vec3 a{0.3, -0.2, 0.1}, b{-0.1, 0.4, 0.2};
  for (auto _ : st) {
    auto [x, y] = pair_collide(a, b, sample_unit_sphere(rng));
    a = x;
    b = y;
    benchmark::DoNotOptimize(a);
  }
}
BENCHMARK(BM_PairCollide);

static void BM_GillespieStep(benchmark::State& st) {
  const ModelParams p{2, static_cast<int>(st.range(0)), 1, 1, 1};
  RngStream rng(2, 0);
  JointState s = JointState::zeros(p.M, p.N);
  for (auto& v : s.v) v = sample_gamma_vec3(rng);
  for (auto& w : s.w) w = sample_gamma_vec3(rng);
  for (auto _ : st) benchmark::DoNotOptimize(step(s, p, SystemKind::RSystem, rng));
}
BENCHMARK(BM_GillespieStep)->Arg(8)->Arg(64);

static void BM_SubstitutionBlocks(benchmark::State& st) {
  const int d = static_cast<int>(st.range(0));
  const auto local = build_basis(6, d);
  const Eigen::MatrixXd O = collision_matrix({0.6, 0.0, 0.8});
  for (auto _ : st) benchmark::DoNotOptimize(substitution_blocks(O, *local));
}
BENCHMARK(BM_SubstitutionBlocks)->Arg(2)->Arg(4)->Unit(benchmark::kMicrosecond);

static void BM_GeneratorAssembly(benchmark::State& st) {
  const ModelParams p{1, static_cast<int>(st.range(0)), 1, 1, 1};
  pair_average_blocks(2);
  for (auto _ : st) benchmark::DoNotOptimize(assemble_generator(SystemKind::RSystem, p, 2));
}
BENCHMARK(BM_GeneratorAssembly)->Arg(2)->Arg(8)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
