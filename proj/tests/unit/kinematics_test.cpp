#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "kacbath/errors.hpp"
#include "kacbath/kinematics.hpp"
#include "kacbath/randomness.hpp"

using namespace kacbath;

namespace {

void expect_vec(const Vec3& a, const Vec3& b, double tol = 1e-15) {
  EXPECT_NEAR(a.x, b.x, tol);
  EXPECT_NEAR(a.y, b.y, tol);
  EXPECT_NEAR(a.z, b.z, tol);
}

}  // namespace

TEST(PairCollide, ParallelOmegaSwaps) {
  auto [a, b] = pair_collide({1, 0, 0}, {0, 0, 0}, {1, 0, 0});
  expect_vec(a, {0, 0, 0});
  expect_vec(b, {1, 0, 0});
}

TEST(PairCollide, OrthogonalOmegaLeavesPairUnchanged) {
  auto [a, b] = pair_collide({1, 0, 0}, {0, 0, 0}, {0, 0, 1});
  expect_vec(a, {1, 0, 0});
  expect_vec(b, {0, 0, 0});
}

TEST(PairCollide, WorkedExample) {
  auto [a, b] = pair_collide({1, 2, 0}, {0, 0, 0}, {0, 1, 0});
  expect_vec(a, {1, 0, 0});
  expect_vec(b, {0, 2, 0});
  EXPECT_DOUBLE_EQ(norm2(a) + norm2(b), 5.0);
  expect_vec(a + b, {1, 2, 0});
}

TEST(PairCollide, RejectsNonUnitOmega) {
  EXPECT_THROW(pair_collide({1, 0, 0}, {0, 0, 0}, {1, 1, 0}), ContractError);
  EXPECT_THROW(pair_collide({1, 0, 0}, {0, 0, 0}, {1.0 + 1e-9, 0, 0}), ContractError);
  EXPECT_NO_THROW(pair_collide({1, 0, 0}, {0, 0, 0}, {1.0 + 1e-13, 0, 0}));
}

TEST(ThermostatCollide, ZeroPairUnchanged) {
  auto [v, x] = thermostat_collide({0, 0, 0}, {0, 0, 0}, {0.6, 0.8, 0});
  expect_vec(v, {0, 0, 0});
  expect_vec(x, {0, 0, 0});
}

TEST(ThermostatCollide, HeadOnSwap) {
  auto [v, x] = thermostat_collide({1, 0, 0}, {-1, 0, 0}, {1, 0, 0});
  expect_vec(v, {-1, 0, 0});
  expect_vec(x, {1, 0, 0});
}

TEST(ThermostatCollide, DiagonalOmega) {
  const double s = 1.0 / std::sqrt(2.0);
  auto [v, x] = thermostat_collide({2, 0, 0}, {0, 1, 0}, {s, s, 0});
  expect_vec(v, {1.5, -0.5, 0}, 1e-15);
  expect_vec(x, {0.5, 1.5, 0}, 1e-15);
  EXPECT_NEAR(norm2(v) + norm2(x), 5.0, 1e-14);
}

TEST(Invariants, ZeroState) {
  const auto s = JointState::zeros(2, 3);
  EXPECT_EQ(total_energy(s), 0.0);
  expect_vec(total_momentum(s), {0, 0, 0}, 0.0);
}

TEST(Invariants, WorkedExample) {
  JointState s;
  s.v = {{1, 0, 0}};
  s.w = {{0, 2, 0}, {0, 0, -1}};
  EXPECT_DOUBLE_EQ(total_energy(s), 6.0);
  expect_vec(total_momentum(s), {1, 2, -1}, 0.0);
}

TEST(JointState, FlatLayoutRoundTrip) {
  JointState s;
  s.v = {{1, 2, 3}};
  s.w = {{4, 5, 6}, {7, 8, 9}};
  const auto f = s.flatten();
  ASSERT_EQ(f.size(), 9u);
  for (int k = 0; k < 9; ++k) EXPECT_EQ(f[static_cast<size_t>(k)], k + 1.0);
  const auto r = JointState::unflatten(f, 1, 2);
  EXPECT_EQ(r.v[0], s.v[0]);
  EXPECT_EQ(r.w[1], s.w[1]);
  EXPECT_EQ(s.flat(4), 5.0);
}

TEST(ModelParams, Validation) {
  EXPECT_NO_THROW((ModelParams{1, 2, 1, 1, 1}.validate()));
  EXPECT_THROW((ModelParams{0, 2, 1, 1, 1}.validate()), ContractError);
  EXPECT_THROW((ModelParams{1, 1, 1, 1, 1}.validate()), ContractError);
  EXPECT_THROW((ModelParams{1, 2, -1, 1, 1}.validate()), ContractError);
  EXPECT_THROW((ModelParams{1, 2, 1, 1, std::numeric_limits<double>::infinity()}.validate()), ContractError);
}

// Property: random collisions conserve pair energy and momentum and are
// involutions for a fixed Ω.
TEST(PairCollideProperty, ConservationAndInvolution) {
  RngStream rng(7, 0);
  for (int n = 0; n < 20000; ++n) {
    Vec3 a{rng.normal(), rng.normal(), rng.normal()};
    Vec3 b{rng.normal(), rng.normal(), rng.normal()};
    const Vec3 om = sample_unit_sphere(rng);
    auto [a1, b1] = pair_collide(a, b, om);
    const double e0 = norm2(a) + norm2(b);
    EXPECT_NEAR(norm2(a1) + norm2(b1), e0, 1e-12 * e0);
    const Vec3 p0 = a + b, p1 = a1 + b1;
    expect_vec(p1, p0, 1e-12 * (1.0 + norm(p0)));
    auto [a2, b2] = pair_collide(a1, b1, om);
    expect_vec(a2, a, 1e-12);
    expect_vec(b2, b, 1e-12);
  }
}
