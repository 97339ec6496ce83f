#include "kacbath/randomness.hpp"

#include <cmath>

#include "kacbath/errors.hpp"
#include "kacbath/frame.hpp"

namespace kacbath {

namespace {

constexpr std::uint32_t kPhiloxM0 = 0xD2511F53u;
constexpr std::uint32_t kPhiloxM1 = 0xCD9E8D57u;
constexpr std::uint32_t kPhiloxW0 = 0x9E3779B9u;
constexpr std::uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  hi = static_cast<std::uint32_t>(p >> 32);
  lo = static_cast<std::uint32_t>(p);
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kPhiloxW0;
      key[1] += kPhiloxW1;
    }
    std::uint32_t hi0, lo0, hi1, lo1;
    mulhilo(kPhiloxM0, ctr[0], hi0, lo0);
    mulhilo(kPhiloxM1, ctr[2], hi1, lo1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) : seed_(seed), stream_id_(stream_id) {}

void RngStream::refill() {
  const auto out = philox4x32(
      {static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
       static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32)},
      {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
  ++block_;
  buffer_[0] = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
  buffer_[1] = (static_cast<std::uint64_t>(out[2]) << 32) | out[3];
  buffered_ = 2;
}

RngStream::result_type RngStream::operator()() {
  if (buffered_ == 0) refill();
  return buffer_[static_cast<size_t>(2 - buffered_--)];
}

double RngStream::uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

double RngStream::normal() {
  if (spare_normal_) {
    const double s = *spare_normal_;
    spare_normal_.reset();
    return s;
  }
  double u, v, s;
  do {
    u = 2.0 * uniform() - 1.0;
    v = 2.0 * uniform() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_normal_ = v * f;
  return u * f;
}

Vec3 sample_gamma_vec3(RngStream& rng) {
  static const double sd = std::sqrt(kGammaVariance);
  const double x = rng.normal();
  const double y = rng.normal();
  const double z = rng.normal();
  return {sd * x, sd * y, sd * z};
}

Vec3 sample_unit_sphere(RngStream& rng) {
  for (;;) {
    const double x = rng.normal();
    const double y = rng.normal();
    const double z = rng.normal();
    const double r = std::sqrt(x * x + y * y + z * z);
    if (r > 1e-8) return {x / r, y / r, z / r};
  }
}

JointState Rotation::apply(const JointState& s) const {
  if (3 * (s.M() + s.N()) != dim()) throw ContractError("Rotation::apply: dimension mismatch");
  return from_vector(matrix_ * to_vector(s), s.M(), s.N());
}

Eigen::MatrixXd sample_haar_special_orthogonal(int n, RngStream& rng) {
  if (n < 1) throw ContractError("sample_haar_special_orthogonal: n must be >= 1");
  Eigen::MatrixXd g(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd& r = qr.matrixQR();
  for (int j = 0; j < n; ++j) {
    if (r(j, j) < 0.0) q.col(j) = -q.col(j);
  }
  if (q.determinant() < 0.0) q.col(0) = -q.col(0);
  return q;
}

Rotation sample_momentum_preserving_rotation(const MomentumFrame& frame, RngStream& rng) {
  if (frame.P.rows() != frame.dim() || frame.P.cols() != frame.dim()) {
    throw ContractError("sample_momentum_preserving_rotation: frame dimension mismatch");
  }
  const Eigen::MatrixXd c = frame.complement();
  const Eigen::MatrixXd h = sample_haar_special_orthogonal(static_cast<int>(c.cols()), rng);
  return Rotation(frame.momentum_projector() + c * h * c.transpose());
}

}  // namespace kacbath
