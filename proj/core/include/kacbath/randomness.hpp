#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <optional>

#include <Eigen/Dense>

#include "kacbath/kinematics.hpp"

namespace kacbath {

struct MomentumFrame;

/// Counter-based random stream (Philox-4x32-10). The key is the seed and the
/// high half of the counter is the stream id, so (seed, stream_id) pairs
/// address disjoint, reproducible sequences without any shared state.
///
/// Satisfies UniformRandomBitGenerator.
class RngStream {
 public:
  using result_type = std::uint64_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  result_type operator()();
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  /// Standard normal (Marsaglia polar method, implemented here so draws do
  /// not depend on the standard library's distribution code).
  double normal();

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  int buffered_ = 0;
  std::optional<double> spare_normal_;
};

/// One Philox-4x32-10 block. Exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

/// Variance of each coordinate of the Γ(x) = exp(-π|x|²) Gaussian.
inline constexpr double kGammaVariance = 0.15915494309189533577;  // 1 / (2π)

/// A draw from Γ: independent centered normals of variance 1/(2π).
Vec3 sample_gamma_vec3(RngStream& rng);

/// Uniform point on the unit sphere.
Vec3 sample_unit_sphere(RngStream& rng);

/// An orthogonal transform of the flattened joint velocity space.
class Rotation {
 public:
  explicit Rotation(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {}

  const Eigen::MatrixXd& matrix() const { return matrix_; }
  int dim() const { return static_cast<int>(matrix_.rows()); }

  Eigen::VectorXd apply(const Eigen::VectorXd& z) const { return matrix_ * z; }
  JointState apply(const JointState& s) const;

 private:
  Eigen::MatrixXd matrix_;
};

/// Haar-distributed element of SO(n): QR of a Gaussian matrix with the sign
/// of R's diagonal folded into Q, then one column flipped if det = -1.
Eigen::MatrixXd sample_haar_special_orthogonal(int n, RngStream& rng);

/// Haar sample from the rotations of R^{3(M+N)} fixing the three total
/// momentum directions g1, g2, g3 of `frame`.
Rotation sample_momentum_preserving_rotation(const MomentumFrame& frame, RngStream& rng);

}  // namespace kacbath
