#pragma once

#include <ostream>
#include <vector>

#include "kacbath/evolution.hpp"
#include "kacbath/spectral.hpp"

namespace kacbath {

/// λ = λ_S/2 + μ. ContractError on negative input.
double lambda_rate(double lambda_S, double mu);

/// l = √(sup over unit u of <u,Tu> - <Tu,Tu>) on the degree blocks <= d of
/// T (d < 0: all blocks). NumericalError if T - T² has an eigenvalue below
/// -1e-12.
double estimate_l(const OperatorMatrix& T, int d = -1);

struct BoundParams {
  double C = 0.0;
  double lambda = 0.0;
  double mu = 0.0;
  double k = 0.0;
  double l = 0.0;
  double b = 0.0;  // l / (k - μ/3)
  double h0_norm = 0.0;

  /// Fills b from l, k and μ. ContractError if |k - μ/3| < 1e-12: b is
  /// undefined there and the bump term becomes l·t·e^{-μt/3}.
  static BoundParams make(double C, double lambda, double mu, double k, double l, double h0_norm);

  /// ContractError unless C > 0, λ > 0, k > 0, l >= 0, h0_norm >= 0 and b
  /// has the sign of k - μ/3.
  void validate() const;
};

struct BoundPoint {
  double t = 0.0;
  double term1 = 0.0;  // C(1 - e^{-λMt}) ||h0 - 1||
  double term2 = 0.0;  // b (M/√N)(e^{-μt/3} - e^{-kt}) ||h0 - 1||
  double value = 0.0;  // term1 + term2
};

std::vector<BoundPoint> bound_curve(const BoundParams& bp, int M, int N, const std::vector<double>& times);

/// Columns t,distance,bound,bound_term1,bound_term2. The two inputs must
/// share their time grid.
void write_curve_csv(std::ostream& out, const DistanceCurve& curve, const std::vector<BoundPoint>& bound);

}  // namespace kacbath
