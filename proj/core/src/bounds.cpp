#include "kacbath/bounds.hpp"

#include <cmath>
#include <sstream>

#include "kacbath/csv.hpp"
#include "kacbath/errors.hpp"

namespace kacbath {

double lambda_rate(double lambda_S, double mu) {
  if (!(lambda_S >= 0.0) || !(mu >= 0.0)) throw ContractError("lambda_rate: rates must be nonnegative");
  return lambda_S / 2.0 + mu;
}

double estimate_l(const OperatorMatrix& T, int d) {
  if (d < 0 || d > T.max_degree()) d = T.max_degree();
  double top = 0.0;
  for (int m = 0; m <= d; ++m) {
    const auto& A = T.blocks[static_cast<size_t>(m)];
    if (A.size() == 0) continue;
    const Eigen::VectorXd ev = symmetric_eigenvalues(A - A * A);
    if (ev(0) < -1e-12) {
      std::ostringstream msg;
      msg << "estimate_l: T - T^2 has eigenvalue " << ev(0) << " in degree " << m;
      throw NumericalError(msg.str());
    }
    top = std::max(top, ev(ev.size() - 1));
  }
  return std::sqrt(top);
}

BoundParams BoundParams::make(double C, double lambda, double mu, double k, double l, double h0_norm) {
  const double gap = k - mu / 3.0;
  if (std::abs(gap) < 1e-12) {
    throw ContractError(
        "bound: k equals mu/3, so b = l/(k - mu/3) is undefined; use the limit form "
        "b*(exp(-mu t/3) - exp(-k t)) -> l*t*exp(-mu t/3)");
  }
  BoundParams bp{C, lambda, mu, k, l, l / gap, h0_norm};
  bp.validate();
  return bp;
}

void BoundParams::validate() const {
  if (!(C > 0.0)) throw ContractError("bound: C must be > 0");
  if (!(lambda > 0.0)) throw ContractError("bound: lambda must be > 0");
  if (!(k > 0.0)) throw ContractError("bound: k must be > 0");
  if (!(l >= 0.0) || !(h0_norm >= 0.0) || !(mu >= 0.0)) throw ContractError("bound: l, mu and ||h0 - 1|| must be >= 0");
  if (b * (k - mu / 3.0) < 0.0) throw ContractError("bound: b must have the sign of k - mu/3");
}

std::vector<BoundPoint> bound_curve(const BoundParams& bp, int M, int N, const std::vector<double>& times) {
  bp.validate();
  if (M < 1 || N < 1) throw ContractError("bound_curve: need M, N >= 1");
  const double bump = bp.b * M / std::sqrt(static_cast<double>(N));
  std::vector<BoundPoint> out;
  out.reserve(times.size());
  for (double t : times) {
    if (!(t >= 0.0)) throw ContractError("bound_curve: times must be >= 0");
    BoundPoint p;
    p.t = t;
    p.term1 = bp.C * -std::expm1(-bp.lambda * M * t) * bp.h0_norm;
    p.term2 = bump * (std::exp(-bp.mu * t / 3.0) - std::exp(-bp.k * t)) * bp.h0_norm;
    p.value = p.term1 + p.term2;
    out.push_back(p);
  }
  return out;
}

void write_curve_csv(std::ostream& out, const DistanceCurve& curve, const std::vector<BoundPoint>& bound) {
  if (curve.times.size() != bound.size()) throw ContractError("write_curve_csv: grids differ");
  CsvWriter csv(out, {"t", "distance", "bound", "bound_term1", "bound_term2"});
  for (size_t k = 0; k < bound.size(); ++k) {
    if (curve.times[k] != bound[k].t) throw ContractError("write_curve_csv: grids differ");
    csv.add(bound[k].t).add(curve.distance[k]).add(bound[k].value).add(bound[k].term1).add(bound[k].term2);
    csv.end_row();
  }
}

}  // namespace kacbath
