#pragma once

// Quadrature oracles for the tests. They share no code with the library:
// Hermite nodes come from Newton iteration on Boost's Hermite polynomials,
// sphere rules from Boost's fixed Gauss-Legendre tables.

#include <array>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/hermite.hpp>

namespace oracle {

struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

/// n-point rule for ∫ f(x) e^{-π x²} dx, weights summing to 1. Roots of the
/// physicists' Hermite polynomial are bracketed on a fine grid and bisected.
inline Rule gamma_rule(unsigned n) {
  Rule r;
  const double pi = std::numbers::pi;
  const double reach = std::sqrt(2.0 * n + 1.0) + 1.0;
  const double step = 1e-3;
  double a = -reach, fa = boost::math::hermite(n, a);
  for (double b = a + step; b <= reach; b += step) {
    const double fb = boost::math::hermite(n, b);
    if ((fa < 0) != (fb < 0)) {
      double lo = a, hi = b, flo = fa;
      for (int it = 0; it < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = boost::math::hermite(n, mid);
        if ((fm < 0) == (flo < 0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      const double y = 0.5 * (lo + hi);
      const double hm = boost::math::hermite(n - 1, y);
      // w = 2^{n-1} n! √π / (n² H_{n-1}²), divided by √π for unit mass.
      r.x.push_back(y / std::sqrt(pi));
      r.w.push_back(std::pow(2.0, n - 1.0) * std::tgamma(n + 1.0) / (double(n) * n * hm * hm));
    }
    a = b;
    fa = fb;
  }
  return r;
}

using Vec = std::array<double, 3>;

struct SphereRule {
  std::vector<Vec> x;
  std::vector<double> w;
};

/// Uniform average on the unit sphere, exact for polynomials of degree <= 19.
inline SphereRule sphere_rule() {
  using GL = boost::math::quadrature::gauss<double, 10>;
  SphereRule s;
  const auto& a = GL::abscissa();
  const auto& wt = GL::weights();
  std::vector<std::pair<double, double>> c;
  for (size_t i = 0; i < a.size(); ++i) {
    c.emplace_back(a[i], wt[i]);
    if (a[i] != 0.0) c.emplace_back(-a[i], wt[i]);
  }
  const int nphi = 20;
  for (auto [ct, wc] : c) {
    const double st = std::sqrt(1.0 - ct * ct);
    for (int j = 0; j < nphi; ++j) {
      const double phi = 2.0 * std::numbers::pi * j / nphi;
      s.x.push_back({st * std::cos(phi), st * std::sin(phi), ct});
      s.w.push_back(wc / 2.0 / nphi);
    }
  }
  return s;
}

inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

/// Pair collision written out from its definition: v* = v - (Ω·(v-w))Ω.
inline std::pair<Vec, Vec> collide(const Vec& v, const Vec& w, const Vec& om) {
  const double s = dot(om, Vec{v[0] - w[0], v[1] - w[1], v[2] - w[2]});
  Vec a = v, b = w;
  for (int c = 0; c < 3; ++c) {
    a[c] -= s * om[c];
    b[c] += s * om[c];
  }
  return {a, b};
}

/// Probabilists' Hermite He_n by recurrence.
inline double he(int n, double x) {
  double a = 1.0, b = x;
  if (n == 0) return a;
  for (int k = 1; k < n; ++k) {
    const double c = x * b - k * a;
    a = b;
    b = c;
  }
  return b;
}

/// Normalized Hermite function for the Γ weight.
inline double hhat(int n, double x) { return he(n, x * std::sqrt(2.0 * std::numbers::pi)) / std::sqrt(std::tgamma(n + 1.0)); }

struct VarianceSides {
  double lhs = 0.0;  // ||(1/N) Σ_j R^I_1j u - T u||²
  double rhs = 0.0;  // (1/N)(<u, Tu> - <Tu, Tu>)
};

/// Both sides of the variance identity for u = v_{1,1} (raw coordinate),
/// M = 1, by Gauss-Hermite over all 3(1+N) coordinates and a sphere rule
/// over Ω. The integrands are polynomials of degree <= 2 per coordinate, so
/// three nodes per coordinate are exact.
inline VarianceSides variance_identity_linear(int N) {
  const auto g = gamma_rule(3);
  const auto sph = sphere_rule();
  const size_t q = g.x.size();
  auto pair_avg = [&](const Vec& v, const Vec& w) {
    double s = 0;
    for (size_t k = 0; k < sph.x.size(); ++k) s += sph.w[k] * collide(v, w, sph.x[k]).first[0];
    return s;
  };
  auto t_avg = [&](const Vec& v) {
    double s = 0;
    for (size_t a = 0; a < q; ++a)
      for (size_t b = 0; b < q; ++b)
        for (size_t c = 0; c < q; ++c) s += g.w[a] * g.w[b] * g.w[c] * pair_avg(v, {g.x[a], g.x[b], g.x[c]});
    return s;
  };
  const int D = 3 * (1 + N);
  size_t total = 1;
  for (int k = 0; k < D; ++k) total *= q;
  VarianceSides out;
  double utu = 0, tutu = 0;
  std::vector<double> z(static_cast<size_t>(D));
  for (size_t flat = 0; flat < total; ++flat) {
    size_t r = flat;
    double w = 1;
    for (int k = 0; k < D; ++k) {
      z[static_cast<size_t>(k)] = g.x[r % q];
      w *= g.w[r % q];
      r /= q;
    }
    const Vec v{z[0], z[1], z[2]};
    const double tu = t_avg(v);
    double a = 0;
    for (int j = 0; j < N; ++j) {
      const size_t o = static_cast<size_t>(3 + 3 * j);
      a += pair_avg(v, {z[o], z[o + 1], z[o + 2]});
    }
    a = a / N - tu;
    out.lhs += w * a * a;
    utu += w * v[0] * tu;
    tutu += w * tu * tu;
  }
  out.rhs = (utu - tutu) / N;
  return out;
}

}  // namespace oracle
