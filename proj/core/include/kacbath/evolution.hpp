#pragma once

#include <vector>

#include "kacbath/hermite.hpp"
#include "kacbath/kinematics.hpp"
#include "kacbath/spectral.hpp"

namespace kacbath {

/// c(t) = exp(G t) c0 at each of `times` (sorted, >= 0), from the
/// eigendecomposition of each symmetric degree block. With `cross_check`
/// every block carrying nonzero data is also integrated by an adaptive
/// Dormand-Prince scheme; NumericalError if the two differ by more than
/// 1e-9 relative to ||c0||.
std::vector<HermiteCoeffs> evolve(const OperatorMatrix& G, const HermiteCoeffs& c0, const std::vector<double>& times,
                                  bool cross_check = true);

struct DistanceCurve {
  std::vector<double> times;
  std::vector<double> distance;  // ||h_t - h~_t|| on the joint basis
  ModelParams params;
  int degree = 0;
  /// Smallest nonzero decay rate of either generator among the modes that
  /// h0 excites; long_time_limit uses it to check the horizon.
  double slowest_rate = 0.0;
  /// Distance between the stationary parts of the two evolutions, read from
  /// the kernel components.
  double stationary_distance = 0.0;
};

/// Evolves the same h0 (on the 3M system variables, <h0,1> = 1, embedded
/// with reservoir factor 1) under both generators on the joint basis of
/// degree d (d < 0: the degree of h0's basis).
DistanceCurve distance_curve(const ModelParams& p, const HermiteCoeffs& h0, const std::vector<double>& times, int d = -1,
                             bool cross_check = true);

/// Distance at the final time. ContractError if the curve is empty;
/// NumericalError if exp(-slowest_rate * t_end) > 1e-6 (horizon too short).
double long_time_limit(const DistanceCurve& curve);

/// 0 followed by n points geometrically spaced from t_min to t_end.
std::vector<double> geometric_grid(double t_min, double t_end, int n);

/// Time by which every excited mode has decayed to 1e-6 of its start.
double settling_time(const DistanceCurve& curve);

}  // namespace kacbath
