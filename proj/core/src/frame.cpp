#include "kacbath/frame.hpp"

#include <cmath>
#include <vector>

#include "kacbath/errors.hpp"

namespace kacbath {

namespace {

// Momentum directions e_1..e_3 of R^{3K}: component c of every particle.
Eigen::MatrixXd momentum_directions(int K) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(3 * K, 3);
  const double s = 1.0 / std::sqrt(static_cast<double>(K));
  for (int p = 0; p < K; ++p) {
    for (int c = 0; c < 3; ++c) e(3 * p + c, c) = s;
  }
  return e;
}

// Gram-Schmidt completion of the orthonormal columns of `seed` to a basis
// of R^n using canonical vectors in index order. Returns only the new
// vectors.
Eigen::MatrixXd complete_basis(const Eigen::MatrixXd& seed) {
  const int n = static_cast<int>(seed.rows());
  const int want = n - static_cast<int>(seed.cols());
  std::vector<Eigen::VectorXd> accepted;
  for (int j = 0; j < seed.cols(); ++j) accepted.emplace_back(seed.col(j));

  Eigen::MatrixXd out(n, want);
  int found = 0;
  for (int k = 0; k < n && found < want; ++k) {
    Eigen::VectorXd r = Eigen::VectorXd::Unit(n, k);
    for (int pass = 0; pass < 2; ++pass) {
      for (const auto& q : accepted) r -= q.dot(r) * q;
    }
    const double nr = r.norm();
    if (nr < 1e-12) continue;
    r /= nr;
    accepted.push_back(r);
    out.col(found++) = r;
  }
  if (found != want) throw NumericalError("build_frame: Gram-Schmidt completion failed");
  return out;
}

}  // namespace

Eigen::MatrixXd MomentumFrame::complement() const {
  Eigen::MatrixXd c(dim(), dim() - 3);
  const int go = g_offset();
  c.leftCols(go) = P.leftCols(go);
  c.rightCols(dim() - 3 - go) = P.rightCols(dim() - 3 - go);
  return c;
}

Eigen::MatrixXd MomentumFrame::momentum_projector() const {
  const auto gs = P.middleCols(g_offset(), 3);
  return gs * gs.transpose();
}

MomentumFrame build_frame(int M, int N) {
  if (M < 1 || N < 2) throw ContractError("build_frame: need M >= 1 and N >= 2");
  const int D = 3 * (M + N);
  const double sm = std::sqrt(static_cast<double>(M));
  const double sn = std::sqrt(static_cast<double>(N));
  const double st = std::sqrt(static_cast<double>(M + N));

  const Eigen::MatrixXd e = momentum_directions(M);
  const Eigen::MatrixXd f = momentum_directions(N);

  MomentumFrame frame{M, N, Eigen::MatrixXd::Zero(D, D)};
  const Eigen::MatrixXd a = complete_basis(e);
  const Eigen::MatrixXd b = complete_basis(f);

  frame.P.block(0, 0, 3 * M, 3 * M - 3) = a;
  for (int i = 0; i < 3; ++i) {
    frame.P.block(0, frame.g_offset() + i, 3 * M, 1) = (sm / st) * e.col(i);
    frame.P.block(3 * M, frame.g_offset() + i, 3 * N, 1) = (sn / st) * f.col(i);
    frame.P.block(0, frame.l_offset() + i, 3 * M, 1) = (sn / st) * e.col(i);
    frame.P.block(3 * M, frame.l_offset() + i, 3 * N, 1) = -(sm / st) * f.col(i);
  }
  frame.P.block(3 * M, frame.b_offset(), 3 * N, 3 * N - 3) = b;
  return frame;
}

Eigen::VectorXd to_vector(const JointState& s) {
  const int D = 3 * (s.M() + s.N());
  Eigen::VectorXd z(D);
  for (int k = 0; k < D; ++k) z(k) = s.flat(k);
  return z;
}

JointState from_vector(const Eigen::VectorXd& z, int M, int N) {
  return JointState::unflatten(std::span<const double>(z.data(), static_cast<size_t>(z.size())), M, N);
}

}  // namespace kacbath
