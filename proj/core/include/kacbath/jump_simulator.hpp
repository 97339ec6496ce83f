#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "kacbath/hermite.hpp"
#include "kacbath/kinematics.hpp"
#include "kacbath/randomness.hpp"

namespace kacbath {

enum class EventCategory { SystemPair, ReservoirPair, Interaction, Thermostat };

/// One jump. For pairs inside a group i < j; for Interaction i is the system
/// and j the reservoir particle; for Thermostat j = -1. Indices are 0-based.
struct EventKind {
  EventCategory category = EventCategory::SystemPair;
  int i = 0;
  int j = 0;
};

/// Total jump rate of each category and their sum.
struct RateTable {
  double system = 0.0;
  double reservoir = 0.0;
  double interaction = 0.0;
  double thermostat = 0.0;
  double total = 0.0;
};

RateTable event_rates(const ModelParams& p, SystemKind kind);

struct StepResult {
  double dt = 0.0;
  EventKind event;
};

/// Draws the waiting time and applies one collision to `s` in place.
/// If the total rate is zero, dt is +inf and `s` is left unchanged.
StepResult step(JointState& s, const ModelParams& p, SystemKind kind, RngStream& rng);

struct SimConfig {
  double t_end = 1.0;
  std::vector<double> record_times;
  std::int64_t ensemble = 1000;
  std::uint64_t seed = 1;
  SystemKind system_kind = SystemKind::RSystem;
  int threads = 1;
  /// Members per work unit. Part of the reduction order, so results are
  /// identical for any thread count but may change with the chunk size.
  std::int64_t chunk = 1024;

  /// ConfigError unless ensemble >= 1, chunk >= 1 and record_times is
  /// sorted inside [0, t_end].
  void validate() const;
};

struct Observable {
  std::string name;
  std::function<double(const JointState&)> eval;
};

/// Observable for a function given by Hermite coefficients on the joint
/// 3(M+N)-variable basis.
Observable hermite_observable(std::string name, const HermiteCoeffs& f);
Observable energy_observable();
/// Component c of the total momentum.
Observable momentum_observable(int c);

/// Initial state plus its importance weight: the ensemble estimates
/// E[weight * φ(X_t)].
struct WeightedState {
  JointState state;
  double weight = 1.0;
};

using InitSampler = std::function<WeightedState(RngStream&)>;

/// Every velocity drawn from Γ, weight 1 (h0 = 1).
InitSampler gamma_sampler(int M, int N);

/// Initial density h0(v)Γ for h0 on the 3M system variables: draws from Γ
/// and weights by h0(v). ContractError if <h0, 1> != 1, and if a drawn
/// state has a negative weight (h0 is not a density there).
InitSampler perturbed_sampler(const HermiteCoeffs& h0, int N);

struct MomentRecord {
  double time = 0.0;
  std::string observable;
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t n_samples = 0;
};

/// Records, time-major then in observable order. Each member uses the
/// stream (seed, member index); the state recorded at time t is the state
/// after the last event at or before t.
std::vector<MomentRecord> run_ensemble(const SimConfig& cfg, const ModelParams& p, const InitSampler& init,
                                       const std::vector<Observable>& observables);

/// Columns time,observable,mean,std_error,n_samples.
void write_moment_csv(std::ostream& out, const std::vector<MomentRecord>& records);

}  // namespace kacbath
