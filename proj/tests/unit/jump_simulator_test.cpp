#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "kacbath/errors.hpp"
#include "kacbath/jump_simulator.hpp"

using namespace kacbath;

namespace {

JointState gamma_state(int M, int N, RngStream& rng) {
  JointState s = JointState::zeros(M, N);
  for (auto& v : s.v) v = sample_gamma_vec3(rng);
  for (auto& w : s.w) w = sample_gamma_vec3(rng);
  return s;
}

Observable linear_v11(int M, int N) {
  const auto b = build_basis(3 * (M + N), 1);
  std::vector<int> e(static_cast<size_t>(3 * (M + N)), 0);
  e[0] = 1;
  return hermite_observable("h1_v11", HermiteCoeffs::unit(b, e));
}

}  // namespace

TEST(EventRates, Bookkeeping) {
  const RateTable r = event_rates({2, 4, 1, 1, 1}, SystemKind::RSystem);
  EXPECT_DOUBLE_EQ(r.system, 1.0);
  EXPECT_DOUBLE_EQ(r.reservoir, 2.0);
  EXPECT_DOUBLE_EQ(r.interaction, 2.0);
  EXPECT_DOUBLE_EQ(r.thermostat, 0.0);
  EXPECT_DOUBLE_EQ(r.total, 5.0);

  const RateTable t = event_rates({2, 4, 1, 1, 1}, SystemKind::TSystem);
  EXPECT_DOUBLE_EQ(t.thermostat, 2.0);
  EXPECT_DOUBLE_EQ(t.interaction, 0.0);
  EXPECT_DOUBLE_EQ(t.total, 5.0);

  EXPECT_DOUBLE_EQ(event_rates({1, 3, 7.5, 1, 1}, SystemKind::RSystem).system, 0.0);
}

TEST(Step, ReservoirEventsConserveEverything) {
  const ModelParams p{2, 3, 1, 1, 1};
  RngStream rng(1, 0);
  JointState s = gamma_state(2, 3, rng);
  const double e0 = total_energy(s);
  const Vec3 m0 = total_momentum(s);
  int seen[3] = {0, 0, 0};
  for (int k = 0; k < 5000; ++k) {
    const StepResult r = step(s, p, SystemKind::RSystem, rng);
    ASSERT_GT(r.dt, 0.0);
    ASSERT_NE(r.event.category, EventCategory::Thermostat);
    ++seen[static_cast<int>(r.event.category)];
  }
  EXPECT_NEAR(total_energy(s), e0, 1e-10 * e0);
  EXPECT_LT(norm(total_momentum(s) - m0), 1e-10);
  for (int c : seen) EXPECT_GT(c, 0);
}

TEST(Step, ThermostatEventsOnlyTouchSystem) {
  const ModelParams p{1, 2, 1, 1, 1};
  RngStream rng(2, 0);
  JointState s = gamma_state(1, 2, rng);
  int thermo = 0;
  for (int k = 0; k < 2000; ++k) {
    const JointState before = s;
    const StepResult r = step(s, p, SystemKind::TSystem, rng);
    if (r.event.category == EventCategory::Thermostat) {
      ++thermo;
      EXPECT_EQ(s.w[0], before.w[0]);
      EXPECT_EQ(s.w[1], before.w[1]);
    }
  }
  EXPECT_GT(thermo, 0);
}

TEST(Step, MeanWaitingTime) {
  const ModelParams p{2, 4, 1, 1, 1};
  RngStream rng(3, 0);
  JointState s = gamma_state(2, 4, rng);
  double t = 0;
  const int n = 100000;
  for (int k = 0; k < n; ++k) t += step(s, p, SystemKind::RSystem, rng).dt;
  EXPECT_NEAR(t / n, 0.2, 0.02 * 0.2);
}

TEST(SimConfig, Validation) {
  SimConfig c;
  c.t_end = 1;
  c.record_times = {0, 0.5, 2};
  EXPECT_THROW(c.validate(), ConfigError);
  c.record_times = {0.5, 0.2};
  EXPECT_THROW(c.validate(), ConfigError);
  c.record_times = {0, 1};
  c.ensemble = 0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(RunEnsemble, GammaStationary) {
  const ModelParams p{1, 2, 1, 1, 1};
  SimConfig c;
  c.t_end = 2;
  c.record_times = {0, 0.5, 1, 2};
  c.ensemble = 20000;
  c.seed = 5;
  for (auto kind : {SystemKind::RSystem, SystemKind::TSystem}) {
    c.system_kind = kind;
    const Observable sys_energy{"sys_energy", [](const JointState& s) { return norm2(s.v[0]); }};
    const auto rec = run_ensemble(c, p, gamma_sampler(1, 2), {sys_energy});
    const double expect = 3.0 / (2.0 * std::numbers::pi);
    for (const auto& r : rec) {
      EXPECT_GE(r.std_error, 0.0);
      EXPECT_NEAR(r.mean, expect, 3.5 * r.std_error) << "t=" << r.time;
    }
  }
}

TEST(RunEnsemble, ThermostatLinearDecay) {
  const double mu = 1.0, eps = 0.1;
  const ModelParams p{1, 2, 1, 1, mu};
  const auto b = build_basis(3, 1);
  HermiteCoeffs h0 = HermiteCoeffs::constant(b);
  h0[{1, 0, 0}] = eps;
  SimConfig c;
  c.t_end = 3;
  c.record_times = {0, 1, 3};
  c.ensemble = 40000;
  c.seed = 9;
  c.system_kind = SystemKind::TSystem;
  const auto rec = run_ensemble(c, p, perturbed_sampler(h0, 2), {linear_v11(1, 2)});
  for (const auto& r : rec) EXPECT_NEAR(r.mean, eps * std::exp(-mu * r.time / 3.0), 3.5 * r.std_error) << "t=" << r.time;
}

TEST(RunEnsemble, MomentumConstantPerTrajectory) {
  const ModelParams p{2, 3, 1, 1, 1};
  SimConfig c;
  c.t_end = 1;
  c.record_times = {0, 0.5, 1};
  c.ensemble = 500;
  const auto rec = run_ensemble(c, p, gamma_sampler(2, 3), {momentum_observable(0)});
  ASSERT_EQ(rec.size(), 3u);
  EXPECT_NEAR(rec[1].mean, rec[0].mean, 1e-12);
  EXPECT_NEAR(rec[2].mean, rec[0].mean, 1e-12);
}

TEST(RunEnsemble, IndependentOfThreadCount) {
  const ModelParams p{1, 3, 1, 1, 1};
  SimConfig c;
  c.t_end = 1;
  c.record_times = {0, 0.3, 1};
  c.ensemble = 3000;
  c.chunk = 256;
  c.seed = 17;
  std::string out[2];
  for (int k = 0; k < 2; ++k) {
    c.threads = k == 0 ? 1 : 3;
    std::ostringstream s;
    write_moment_csv(s, run_ensemble(c, p, gamma_sampler(1, 3), {energy_observable(), linear_v11(1, 3)}));
    out[k] = s.str();
  }
  EXPECT_EQ(out[0], out[1]);
}

TEST(PerturbedSampler, RejectsBadInput) {
  const auto b = build_basis(3, 1);
  HermiteCoeffs h = HermiteCoeffs::constant(b, 2.0);
  EXPECT_THROW(perturbed_sampler(h, 2), ContractError);
  const auto b4 = build_basis(4, 1);
  EXPECT_THROW(perturbed_sampler(HermiteCoeffs::constant(b4), 2), ContractError);
}
