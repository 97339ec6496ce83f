#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kacbath/bounds.hpp"
#include "kacbath/config.hpp"
#include "kacbath/evolution.hpp"
#include "kacbath/projector.hpp"
#include "kacbath/spectral.hpp"

namespace kacbath {

// --- degree bound of T ---

struct Lemma3Row {
  int degree = 0;
  double hermite_top = 0.0;      // top eigenvalue of the degree block of T (one particle)
  double tensor_top = 0.0;       // top eigenvalue of tensor_T(degree) on all of (R^3)^{⊗m}
  double tensor_sym_top = 0.0;   // same, restricted to symmetric tensors
  double shared_max_diff = 0.0;  // max |sorted Hermite block eigs - sorted symmetric tensor eigs|
};

std::vector<Lemma3Row> lemma3_table(int max_degree);

// --- variance identity ---

struct Lemma2Row {
  std::string label;
  int M = 0;
  int N = 0;
  Lemma2Result result;
};

/// Random u with independent normal coefficients on all non-constant basis
/// functions of HermiteBasis(3M, degree), from stream (seed, index).
HermiteCoeffs random_polynomial(int M, int degree, std::uint64_t seed, std::uint64_t index);

std::vector<Lemma2Row> lemma2_study(int M, const std::vector<int>& Ns, int random_count, int degree, std::uint64_t seed);

// --- projector bound ---

struct TestFunction {
  std::string name;
  HermiteCoeffs h;
};

/// Five polynomial test functions on 3M variables, each 1 + ε p with
/// ||p|| = 1: linear ĥ1(v11), shear ĥ1(v11)ĥ1(v12), energy (centered system
/// energy), quadratic ĥ2(v11), cubic ĥ1(v11)ĥ2(v12).
std::vector<TestFunction> lemma1_test_functions(int M, double eps = 0.5);

/// ||R[u]|| for u on the 3M system variables, computed exactly on the
/// truncated joint basis through invariant_basis.
double exact_projected_norm(const HermiteCoeffs& u, int N);

struct Lemma1Row {
  std::string function;
  RatioEstimate estimate;
  double exact_ratio = 0.0;
  bool within_bound = false;   // ratio <= C + 3 stderr
  bool precise = false;        // stderr < rel_target * C
};

std::vector<Lemma1Row> lemma1_study(const std::vector<int>& Ms, const std::vector<int>& Ns, const RatioOptions& opt);

// --- spectral constants ---

struct GapResult {
  int M = 0;
  int N = 0;
  int degree = 0;
  double k_hat = 0.0;
  double l_hat = 0.0;
  int kernel_dim = 0;
  int invariant_dim = 0;
  double invariant_residual = 0.0;
};

GapResult estimate_gap(const ModelParams& p, int d);

// --- theorem ---

struct TheoremCase {
  ModelParams params;
  std::string family;
  int degree = 0;
  DistanceCurve curve;
  std::vector<BoundPoint> bound;
  BoundParams constants;
  double min_slack = 0.0;  // min over the grid of B(t) - distance(t)
  double limit = 0.0;
  double limit_bound = 0.0;  // C ||h0 - 1||
  double peak = 0.0;
  double peak_time = 0.0;
};

/// Distance curve and bound for one configuration. k and l come from the
/// spectral module unless overridden (negative: estimate). An empty grid means
/// an automatic geometric grid reaching the settling time.
TheoremCase theorem_case(const ModelParams& p, const std::string& family, const HermiteCoeffs& h0, int d,
                         std::vector<double> times = {}, double k_override = -1.0, double l_override = -1.0,
                         bool cross_check = true);

/// Least-squares slope p of log y = c - p log x.
double power_law_exponent(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingFamily {
  std::string family;
  std::vector<int> Ns;
  std::vector<double> limits;
  std::vector<double> peaks;
  double p = 0.0;  // limits ~ N^{-p}
  double q = 0.0;  // peaks ~ N^{-q}
};

/// Limits and peaks of the distance curve across reservoir sizes for one
/// initial perturbation, with their power-law exponents.
ScalingFamily scaling_study(int M, const std::vector<int>& Ns, const H0Spec& h0, int d = 2);
ScalingFamily scaling_study(int M, const std::vector<int>& Ns, const std::string& family, double eps = 0.1, int d = 2);

}  // namespace kacbath
