#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kacbath/hermite.hpp"
#include "kacbath/jump_simulator.hpp"
#include "kacbath/kinematics.hpp"

namespace kacbath {

/// Initial perturbation h0 = 1 + ε p(v) on the 3M system variables.
///
/// Families (ĥ_n are the normalized Hermite functions, v_{i,c} component c
/// of particle i, all 1-based in the names):
///   constant  p = 0
///   linear    p = ĥ1(v_{1,1})
///   shear     p = ĥ1(v_{1,1}) ĥ1(v_{1,2})
///   energy    p = Σ_{i,c} ĥ2(v_{i,c}) / √(3M)   (centered system energy, unit norm)
///   custom    p = Σ coeff ĥ_α(v) from `terms`
struct H0Spec {
  struct Term {
    std::vector<int> exponents;
    double coeff = 0.0;
  };
  std::string family = "linear";
  double epsilon = 0.1;
  std::vector<Term> terms;
};

/// Builds h0 on HermiteBasis(3M, d). ContractError if a term does not fit.
HermiteCoeffs build_h0(const H0Spec& spec, int M, int d);

/// Named families accepted by build_h0.
const std::vector<std::string>& h0_families();

struct ObservableSpec {
  std::string name;
  /// "energy", "momentum_x|y|z", or "hermite" with terms on the joint
  /// 3(M+N) variables.
  std::string kind = "hermite";
  std::vector<H0Spec::Term> terms;
};

/// Evaluator for one configured observable on the joint state. ContractError
/// if a term does not fit 3(M+N) variables.
Observable make_observable(const ObservableSpec& spec, int M, int N);

struct GridSpec {
  std::string kind = "geometric";  // "geometric" | "uniform" | "auto"
  double t_min = 1e-3;             // geometric only
  int points = 60;
};

struct RunConfig {
  ModelParams params;
  std::uint64_t seed = 1;
  int threads = 1;
  double t_end = 5.0;
  std::vector<double> record_times;  // empty: derived from `grid`
  GridSpec grid;
  std::int64_t ensemble = 10000;
  std::int64_t chunk = 1024;
  int degree = 2;
  SystemKind system_kind = SystemKind::RSystem;
  H0Spec h0;
  std::vector<ObservableSpec> observables;

  std::optional<double> k_override;
  std::optional<double> l_override;

  // verify-lemma1
  std::vector<int> lemma1_M{1, 2};
  std::vector<int> lemma1_N{2, 4, 8};
  std::int64_t lemma1_max_samples = 10'000'000;
  int lemma1_inner = 8;
  double lemma1_rel_target = 0.05;
  // verify-lemma2
  int lemma2_random = 20;
  int lemma2_degree = 3;
  // verify-lemma3
  int lemma3_max_degree = 6;
  // scaling studies
  std::vector<int> scaling_N{2, 4, 8, 16};

  /// The grid the distance/bound/simulate commands use: record_times if
  /// given, else built from `grid` over [0, t_end]. Empty for the "auto"
  /// grid, which lets distance_curve pick its own horizon.
  std::vector<double> time_grid() const;
};

/// Parses and validates a JSON configuration (see docs/config.schema.json).
/// Unknown keys, wrong types and out-of-range values raise ConfigError.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::filesystem::path& path);

}  // namespace kacbath
