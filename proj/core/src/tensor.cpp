#include <array>
#include <cmath>
#include <sstream>

#include "kacbath/errors.hpp"
#include "kacbath/quadrature.hpp"
#include "kacbath/spectral.hpp"

namespace kacbath {

namespace {

int ipow3(int m) {
  int p = 1;
  for (int k = 0; k < m; ++k) p *= 3;
  return p;
}

// Digit k of a flat index (factor 0 is the most significant).
std::vector<int> digits(int flat, int m) {
  std::vector<int> d(static_cast<size_t>(m));
  for (int k = m - 1; k >= 0; --k) {
    d[static_cast<size_t>(k)] = flat % 3;
    flat /= 3;
  }
  return d;
}

Eigen::MatrixXd tensor_by_moments(int m) {
  const int n = ipow3(m);
  Eigen::MatrixXd out(n, n);
  std::vector<std::vector<int>> dig;
  for (int i = 0; i < n; ++i) dig.push_back(digits(i, m));
  for (int I = 0; I < n; ++I) {
    for (int J = 0; J < n; ++J) {
      const auto& a = dig[static_cast<size_t>(I)];
      const auto& b = dig[static_cast<size_t>(J)];
      // Expand Π_k (δ_{a_k b_k} - Ω_{a_k} Ω_{b_k}) over the subsets S taking
      // the Ω factor.
      double sum = 0.0;
      for (int S = 0; S < (1 << m); ++S) {
        bool alive = true;
        std::array<int, 3> cnt{0, 0, 0};
        for (int k = 0; k < m && alive; ++k) {
          const auto ku = static_cast<size_t>(k);
          if (S & (1 << k)) {
            ++cnt[static_cast<size_t>(a[ku])];
            ++cnt[static_cast<size_t>(b[ku])];
          } else if (a[ku] != b[ku]) {
            alive = false;
          }
        }
        if (!alive) continue;
        const double sign = (__builtin_popcount(static_cast<unsigned>(S)) % 2) ? -1.0 : 1.0;
        sum += sign * sphere_moment(cnt[0], cnt[1], cnt[2]);
      }
      out(I, J) = sum;
    }
  }
  return out;
}

Eigen::MatrixXd tensor_by_quadrature(int m) {
  const int n = ipow3(m);
  const auto rule = sphere_product_rule(m + 1);
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (size_t q = 0; q < rule.nodes.size(); ++q) {
    const Vec3& o = rule.nodes[q];
    const Eigen::Vector3d w(o.x, o.y, o.z);
    const Eigen::Matrix3d A = Eigen::Matrix3d::Identity() - w * w.transpose();
    Eigen::MatrixXd K = Eigen::MatrixXd::Ones(1, 1);
    for (int k = 0; k < m; ++k) {
      Eigen::MatrixXd next(K.rows() * 3, K.cols() * 3);
      for (Eigen::Index i = 0; i < K.rows(); ++i)
        for (Eigen::Index j = 0; j < K.cols(); ++j) next.block<3, 3>(3 * i, 3 * j) = K(i, j) * A;
      K = std::move(next);
    }
    out += rule.weights[q] * K;
  }
  return out;
}

}  // namespace

TensorOperator tensor_T(int m) {
  if (m < 0 || m > 6) throw ContractError("tensor_T: degree must be in [0, 6]");
  TensorOperator t{m, tensor_by_moments(m)};
  const double diff = (t.matrix - tensor_by_quadrature(m)).cwiseAbs().maxCoeff();
  if (diff > 1e-10) {
    std::ostringstream msg;
    msg << "tensor_T: moment and quadrature constructions disagree by " << diff;
    throw NumericalError(msg.str());
  }
  return t;
}

Eigen::MatrixXd symmetric_tensor_basis(int m) {
  if (m < 0 || m > 6) throw ContractError("symmetric_tensor_basis: degree must be in [0, 6]");
  const HermiteBasis basis(3, m);
  const int n = ipow3(m);
  const auto cols = static_cast<Eigen::Index>(basis.block_size(m));
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, cols);
  for (int I = 0; I < n; ++I) {
    std::vector<int> cnt(3, 0);
    for (int d : digits(I, m)) ++cnt[static_cast<size_t>(d)];
    const auto c = static_cast<Eigen::Index>(basis.index_of(cnt) - basis.block_begin(m));
    out(I, c) = 1.0;
  }
  for (Eigen::Index c = 0; c < cols; ++c) out.col(c).normalize();
  return out;
}

}  // namespace kacbath
