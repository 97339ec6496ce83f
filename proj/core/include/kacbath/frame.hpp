#pragma once

#include <Eigen/Dense>

#include "kacbath/kinematics.hpp"

namespace kacbath {

/// Orthonormal basis of R^{3(M+N)} adapted to total momentum.
///
/// Columns of P, in order: a_1..a_{3M-3} (complement of the system momentum
/// directions, zero on the reservoir block), g_1..g_3 (total momentum
/// directions), l_1..l_3 (relative system/reservoir momentum), and
/// b_1..b_{3N-3} (complement of the reservoir momentum directions, zero on
/// the system block).
///
/// g_i = (√M e_i, √N f_i)/√(M+N) for all three i; the 1/√(M+N) factor is
/// used for g_3 as well so that it is a unit vector.
struct MomentumFrame {
  int M = 0;
  int N = 0;
  Eigen::MatrixXd P;

  int dim() const { return 3 * (M + N); }
  int g_offset() const { return 3 * M - 3; }
  int l_offset() const { return 3 * M; }
  int b_offset() const { return 3 * M + 3; }

  Eigen::VectorXd g(int i) const { return P.col(g_offset() + i); }
  Eigen::VectorXd l(int i) const { return P.col(l_offset() + i); }

  /// The D x (D-3) block of P orthogonal to g_1..g_3.
  Eigen::MatrixXd complement() const;
  /// Orthogonal projection onto span{g_1, g_2, g_3}.
  Eigen::MatrixXd momentum_projector() const;
};

/// Builds the frame; completion vectors come from Gram-Schmidt over the
/// canonical coordinate vectors in index order, rejecting candidates whose
/// residual norm is below 1e-12.
MomentumFrame build_frame(int M, int N);

/// Flattened (v, w) as an Eigen vector, matching JointState::flat ordering.
Eigen::VectorXd to_vector(const JointState& s);
JointState from_vector(const Eigen::VectorXd& z, int M, int N);

}  // namespace kacbath
