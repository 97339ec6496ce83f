#include <cmath>
#include <numbers>

#include <Eigen/Dense>

#include "kacbath/errors.hpp"
#include "kacbath/quadrature.hpp"

namespace kacbath {

namespace {

// Golub-Welsch for a symmetric Jacobi matrix with zero diagonal.
QuadratureRule1D golub_welsch(const Eigen::VectorXd& offdiag, double mass) {
  const int n = static_cast<int>(offdiag.size()) + 1;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    J(i, i + 1) = offdiag(i);
    J(i + 1, i) = offdiag(i);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  QuadratureRule1D rule;
  for (int i = 0; i < n; ++i) {
    rule.nodes.push_back(es.eigenvalues()(i));
    const double v0 = es.eigenvectors()(0, i);
    rule.weights.push_back(mass * v0 * v0);
  }
  // Symmetrize: the rules are symmetric about 0; this removes the
  // eigensolver's last-bit asymmetry.
  for (int i = 0; i < n / 2; ++i) {
    const int j = n - 1 - i;
    const double x = 0.5 * (rule.nodes[static_cast<size_t>(j)] - rule.nodes[static_cast<size_t>(i)]);
    const double w = 0.5 * (rule.weights[static_cast<size_t>(i)] + rule.weights[static_cast<size_t>(j)]);
    rule.nodes[static_cast<size_t>(i)] = -x;
    rule.nodes[static_cast<size_t>(j)] = x;
    rule.weights[static_cast<size_t>(i)] = w;
    rule.weights[static_cast<size_t>(j)] = w;
  }
  if (n % 2 == 1) rule.nodes[static_cast<size_t>(n / 2)] = 0.0;
  return rule;
}

}  // namespace

QuadratureRule1D gauss_legendre(int n) {
  if (n < 1) throw ContractError("gauss_legendre: n must be >= 1");
  if (n == 1) return {{0.0}, {2.0}};
  Eigen::VectorXd b(n - 1);
  for (int k = 1; k < n; ++k) b(k - 1) = k / std::sqrt(4.0 * k * k - 1.0);
  return golub_welsch(b, 2.0);
}

QuadratureRule1D gauss_hermite_gamma(int n) {
  if (n < 1) throw ContractError("gauss_hermite_gamma: n must be >= 1");
  if (n == 1) return {{0.0}, {1.0}};
  Eigen::VectorXd b(n - 1);
  for (int k = 1; k < n; ++k) b(k - 1) = std::sqrt(static_cast<double>(k));
  auto rule = golub_welsch(b, 1.0);
  const double s = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  for (double& x : rule.nodes) x *= s;
  return rule;
}

SphereRule sphere_product_rule(int n) {
  if (n < 1) throw ContractError("sphere_product_rule: n must be >= 1");
  const auto gl = gauss_legendre(n);
  const int nphi = 2 * n;
  SphereRule rule;
  rule.nodes.reserve(static_cast<size_t>(n * nphi));
  for (int i = 0; i < n; ++i) {
    const double ct = gl.nodes[static_cast<size_t>(i)];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    const double w = 0.5 * gl.weights[static_cast<size_t>(i)] / nphi;
    for (int j = 0; j < nphi; ++j) {
      const double phi = 2.0 * std::numbers::pi * (j + 0.5) / nphi;
      Vec3 om{st * std::cos(phi), st * std::sin(phi), ct};
      const double r = norm(om);
      rule.nodes.push_back((1.0 / r) * om);
      rule.weights.push_back(w);
    }
  }
  return rule;
}

double sphere_moment(int a, int b, int c) {
  if (a % 2 || b % 2 || c % 2) return 0.0;
  auto dfact = [](int n) {
    double f = 1.0;
    for (int k = n; k > 1; k -= 2) f *= k;
    return f;
  };
  return dfact(a - 1) * dfact(b - 1) * dfact(c - 1) / dfact(a + b + c + 1);
}

}  // namespace kacbath
