#include <cmath>

#include <gtest/gtest.h>

#include "kacbath/config.hpp"
#include "kacbath/errors.hpp"
#include "kacbath/evolution.hpp"
#include "kacbath/projector.hpp"
#include "kacbath/randomness.hpp"
#include "kacbath/studies.hpp"

using namespace kacbath;

namespace {

const ModelParams kBase{1, 2, 1, 1, 1};

HermiteCoeffs linear_h0(double eps, int d = 2) {
  H0Spec s;
  s.family = "linear";
  s.epsilon = eps;
  return build_h0(s, 1, d);
}

// Classical fourth-order Runge-Kutta on the dense generator.
Eigen::VectorXd rk4(const Eigen::MatrixXd& A, Eigen::VectorXd x, double t, int steps) {
  const double h = t / steps;
  for (int k = 0; k < steps; ++k) {
    const Eigen::VectorXd k1 = A * x;
    const Eigen::VectorXd k2 = A * (x + 0.5 * h * k1);
    const Eigen::VectorXd k3 = A * (x + 0.5 * h * k2);
    const Eigen::VectorXd k4 = A * (x + h * k3);
    x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return x;
}

}  // namespace

TEST(Evolve, ConstantIsSteady) {
  const OperatorMatrix G = assemble_generator(SystemKind::RSystem, kBase, 2);
  const auto out = evolve(G, HermiteCoeffs::constant(G.basis, 1.0), {0, 1, 10});
  for (const auto& c : out) {
    EXPECT_NEAR(c.constant_term(), 1.0, 1e-13);
    EXPECT_NEAR(c.distance_to_one(), 0.0, 1e-13);
  }
}

TEST(Evolve, ThermostatDegreeOneDecay) {
  const double mu = 0.6, eps = 0.2;
  const ModelParams p{1, 2, 1, 1, mu};
  const OperatorMatrix G = assemble_generator(SystemKind::TSystem, p, 1);
  HermiteCoeffs c0 = HermiteCoeffs::constant(G.basis);
  std::vector<int> e(9, 0);
  e[0] = 1;
  c0[e] = eps;
  const std::vector<double> ts{0, 0.5, 2, 7};
  const auto out = evolve(G, c0, ts);
  for (size_t k = 0; k < ts.size(); ++k) EXPECT_NEAR(out[k].at(e), eps * std::exp(-mu * ts[k] / 3.0), 1e-13);
}

TEST(Evolve, NormNonIncreasing) {
  const OperatorMatrix G = assemble_generator(SystemKind::RSystem, kBase, 2);
  HermiteCoeffs c0(G.basis);
  RngStream rng(4, 0);
  for (Eigen::Index i = 0; i < c0.values().size(); ++i) c0.values()(i) = rng.normal();
  const auto out = evolve(G, c0, geometric_grid(1e-2, 20, 30));
  for (size_t k = 1; k < out.size(); ++k) EXPECT_LE(out[k].norm(), out[k - 1].norm() + 1e-13);
}

TEST(Evolve, RejectsUnsortedTimes) {
  const OperatorMatrix G = assemble_generator(SystemKind::RSystem, kBase, 1);
  EXPECT_THROW(evolve(G, HermiteCoeffs::constant(G.basis), {1, 0.5}), ContractError);
}

TEST(DistanceCurve, ConstantGivesZero) {
  const auto b = build_basis(3, 2);
  const DistanceCurve c = distance_curve(kBase, HermiteCoeffs::constant(b), {0, 1, 5});
  for (double d : c.distance) EXPECT_EQ(d, 0.0);
}

TEST(DistanceCurve, StartsAtZeroAndStaysNonnegative) {
  const DistanceCurve c = distance_curve(kBase, linear_h0(0.1), geometric_grid(1e-3, 10, 20));
  EXPECT_EQ(c.distance.front(), 0.0);
  for (double d : c.distance) EXPECT_GE(d, 0.0);
}

// Golden values, reproduced by Runge-Kutta integration of both generators.
TEST(DistanceCurve, GoldenValues) {
  const std::vector<double> ts{0.5, 1, 2, 5};
  const std::vector<double> golden{0.010444979745254249, 0.018668581830155965, 0.030502750226002663,
                                   0.047635114987746599};
  const HermiteCoeffs h0 = linear_h0(0.1);
  const DistanceCurve c = distance_curve(kBase, h0, ts, 2);
  const OperatorMatrix GR = assemble_generator(SystemKind::RSystem, kBase, 2);
  const OperatorMatrix GT = assemble_generator(SystemKind::TSystem, kBase, 2);
  const Eigen::VectorXd x0 = embed(h0, GR.basis).values();
  for (size_t k = 0; k < ts.size(); ++k) {
    EXPECT_NEAR(c.distance[k], golden[k], 1e-14);
    const int steps = static_cast<int>(ts[k] * 2000);
    const double ode = (rk4(GR.dense(), x0, ts[k], steps) - rk4(GT.dense(), x0, ts[k], steps)).norm();
    EXPECT_NEAR(c.distance[k], ode, 1e-12);
  }
}

TEST(DistanceCurve, LimitBelowConstantTimesNorm) {
  for (const char* fam : {"linear", "shear", "energy"}) {
    H0Spec s;
    s.family = fam;
    s.epsilon = 0.1;
    const HermiteCoeffs h0 = build_h0(s, 1, 2);
    for (int N : {2, 4}) {
      const DistanceCurve c = distance_curve({1, N, 1, 1, 1}, h0, {}, 2);
      EXPECT_LE(long_time_limit(c), lemma1_constant(1, N).C * h0.distance_to_one()) << fam << " N=" << N;
      EXPECT_NEAR(long_time_limit(c), c.stationary_distance, 1e-6 * h0.distance_to_one());
    }
  }
}

TEST(DistanceCurve, ShortHorizonRejected) {
  const DistanceCurve c = distance_curve(kBase, linear_h0(0.1), {0, 1});
  EXPECT_THROW(long_time_limit(c), NumericalError);
}

TEST(DistanceCurve, ShearLimitHalvesWithReservoir) {
  const ScalingFamily sf = scaling_study(1, {4, 8, 16}, "shear");
  for (size_t k = 1; k < sf.limits.size(); ++k) {
    const double r = sf.limits[k] / sf.limits[k - 1];
    EXPECT_GE(r, 0.4);
    EXPECT_LE(r, 0.6);
  }
}

TEST(GeometricGrid, Shape) {
  const auto g = geometric_grid(1e-3, 10, 5);
  ASSERT_EQ(g.size(), 6u);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_DOUBLE_EQ(g[1], 1e-3);
  EXPECT_EQ(g.back(), 10.0);
  for (size_t k = 1; k < g.size(); ++k) EXPECT_GT(g[k], g[k - 1]);
  EXPECT_THROW(geometric_grid(0, 1, 5), ContractError);
}

TEST(PowerLaw, RecoversExponent) {
  const std::vector<double> x{2, 4, 8, 16};
  std::vector<double> y;
  for (double v : x) y.push_back(3.0 * std::pow(v, -0.75));
  EXPECT_NEAR(power_law_exponent(x, y), 0.75, 1e-13);
}
