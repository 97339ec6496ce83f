#include "kacbath/kinematics.hpp"

#include <string>

#include "kacbath/errors.hpp"

namespace kacbath {

void ModelParams::validate() const {
  if (M < 1) throw ContractError("ModelParams: M must be >= 1, got " + std::to_string(M));
  if (N < 2) throw ContractError("ModelParams: N must be >= 2, got " + std::to_string(N));
  for (double r : {lambda_S, lambda_R, mu}) {
    if (!std::isfinite(r) || r < 0.0) throw ContractError("ModelParams: rates must be finite and >= 0");
  }
}

JointState JointState::zeros(int M, int N) {
  return JointState{std::vector<Vec3>(static_cast<size_t>(M)), std::vector<Vec3>(static_cast<size_t>(N))};
}

double JointState::flat(int k) const {
  const int p = k / 3;
  return p < M() ? v[p][k % 3] : w[p - M()][k % 3];
}

double& JointState::flat(int k) {
  const int p = k / 3;
  return p < M() ? v[p][k % 3] : w[p - M()][k % 3];
}

std::vector<double> JointState::flatten() const {
  std::vector<double> z;
  z.reserve(3 * (v.size() + w.size()));
  for (const auto* part : {&v, &w}) {
    for (const Vec3& p : *part) {
      z.push_back(p.x);
      z.push_back(p.y);
      z.push_back(p.z);
    }
  }
  return z;
}

JointState JointState::unflatten(std::span<const double> z, int M, int N) {
  if (z.size() != static_cast<size_t>(3 * (M + N))) throw ContractError("JointState::unflatten: size mismatch");
  JointState s = zeros(M, N);
  for (int k = 0; k < 3 * (M + N); ++k) s.flat(k) = z[static_cast<size_t>(k)];
  return s;
}

std::pair<Vec3, Vec3> pair_collide(const Vec3& a, const Vec3& b, const Vec3& omega) {
  if (std::abs(norm(omega) - 1.0) > kUnitTolerance) {
    throw ContractError("pair_collide: omega is not a unit vector");
  }
  const double t = dot(a - b, omega);
  return {a - t * omega, b + t * omega};
}

std::pair<Vec3, Vec3> thermostat_collide(const Vec3& v, const Vec3& x, const Vec3& omega) {
  return pair_collide(v, x, omega);
}

double total_energy(const JointState& s) {
  double e = 0.0;
  for (const Vec3& p : s.v) e += norm2(p);
  for (const Vec3& p : s.w) e += norm2(p);
  return e;
}

Vec3 total_momentum(const JointState& s) {
  Vec3 p;
  for (const Vec3& q : s.v) p += q;
  for (const Vec3& q : s.w) p += q;
  return p;
}

}  // namespace kacbath
