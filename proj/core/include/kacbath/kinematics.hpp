#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

namespace kacbath {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr double operator[](int c) const { return c == 0 ? x : (c == 1 ? y : z); }
  constexpr double& operator[](int c) { return c == 0 ? x : (c == 1 ? y : z); }

  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr Vec3& operator-=(const Vec3& o) {
    x -= o.x;
    y -= o.y;
    z -= o.z;
    return *this;
  }
  friend constexpr Vec3 operator+(Vec3 a, const Vec3& b) { return a += b; }
  friend constexpr Vec3 operator-(Vec3 a, const Vec3& b) { return a -= b; }
  friend constexpr Vec3 operator*(double s, const Vec3& a) { return {s * a.x, s * a.y, s * a.z}; }
  friend constexpr bool operator==(const Vec3&, const Vec3&) = default;
};

constexpr double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
constexpr double norm2(const Vec3& a) { return dot(a, a); }
inline double norm(const Vec3& a) { return std::sqrt(norm2(a)); }

/// Which of the two coupled dynamics is meant: the M-particle system with a
/// finite N-particle reservoir, or with the infinite Maxwellian thermostat.
enum class SystemKind { RSystem, TSystem };

/// Sizes and collision rates of the model.
///
/// `lambda_S` is the rate at which a given system particle collides with the
/// rest of the system, `lambda_R` the same inside the reservoir, and `mu` the
/// rate at which a given system particle collides with the reservoir (or the
/// thermostat).
struct ModelParams {
  int M = 1;
  int N = 2;
  double lambda_S = 1.0;
  double lambda_R = 1.0;
  double mu = 1.0;

  /// Throws ContractError unless M >= 1, N >= 2 and all rates are finite and
  /// nonnegative.
  void validate() const;

  int particles() const { return M + N; }
  int joint_dim() const { return 3 * (M + N); }
};

/// Velocities of the system (v, M entries) and the reservoir (w, N entries).
struct JointState {
  std::vector<Vec3> v;
  std::vector<Vec3> w;

  static JointState zeros(int M, int N);

  int M() const { return static_cast<int>(v.size()); }
  int N() const { return static_cast<int>(w.size()); }

  /// Coordinate k of the flattened vector (v_1, ..., v_M, w_1, ..., w_N),
  /// components interleaved per particle.
  double flat(int k) const;
  double& flat(int k);
  std::vector<double> flatten() const;
  static JointState unflatten(std::span<const double> z, int M, int N);
};

/// The momentum/energy preserving collision of a pair with orientation
/// omega: a* = a - [(a-b).Ω]Ω, b* = b - [(b-a).Ω]Ω.
///
/// Throws ContractError if |omega| differs from 1 by more than 1e-12. The
/// direction is never renormalized.
std::pair<Vec3, Vec3> pair_collide(const Vec3& a, const Vec3& b, const Vec3& omega);

/// Collision of a system particle v with a thermostat particle x. Same
/// algebra as pair_collide; returns (v*, x*).
std::pair<Vec3, Vec3> thermostat_collide(const Vec3& v, const Vec3& x, const Vec3& omega);

double total_energy(const JointState& s);
Vec3 total_momentum(const JointState& s);

inline constexpr double kUnitTolerance = 1e-12;

}  // namespace kacbath
