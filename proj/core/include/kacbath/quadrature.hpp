#pragma once

#include <vector>

#include "kacbath/kinematics.hpp"

namespace kacbath {

struct QuadratureRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// n-point Gauss-Legendre on [-1, 1] (weights sum to 2), via Golub-Welsch.
QuadratureRule1D gauss_legendre(int n);

/// n-point Gauss-Hermite for the normalized weight exp(-πx²)dx (weights sum
/// to 1). Exact for polynomials of degree <= 2n-1.
QuadratureRule1D gauss_hermite_gamma(int n);

/// Product rule for the normalized measure on S²: Gauss-Legendre in cos θ
/// times 2n equispaced azimuths. Exact for polynomials in Ω of degree
/// <= 2n-1.
struct SphereRule {
  std::vector<Vec3> nodes;
  std::vector<double> weights;
};

SphereRule sphere_product_rule(int n);

/// E[Ω_x^a Ω_y^b Ω_z^c] under the normalized sphere measure:
/// (a-1)!!(b-1)!!(c-1)!! / (a+b+c+1)!! when all exponents are even, else 0.
double sphere_moment(int a, int b, int c);

}  // namespace kacbath
