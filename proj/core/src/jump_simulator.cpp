#include "kacbath/jump_simulator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <limits>

#include "kacbath/csv.hpp"
#include "kacbath/errors.hpp"
#include "parallel.hpp"

namespace kacbath {

RateTable event_rates(const ModelParams& p, SystemKind kind) {
  p.validate();
  RateTable r;
  r.system = p.M >= 2 ? p.lambda_S * p.M / 2.0 : 0.0;
  r.reservoir = p.lambda_R * p.N / 2.0;
  if (kind == SystemKind::RSystem) {
    r.interaction = p.mu * p.M;
  } else {
    r.thermostat = p.mu * p.M;
  }
  r.total = r.system + r.reservoir + r.interaction + r.thermostat;
  return r;
}

namespace {

int uniform_index(RngStream& rng, int n) {
  return std::min(n - 1, static_cast<int>(rng.uniform() * n));
}

std::pair<int, int> uniform_pair(RngStream& rng, int n) {
  const int a = uniform_index(rng, n);
  int b = uniform_index(rng, n - 1);
  if (b >= a) ++b;
  return {std::min(a, b), std::max(a, b)};
}

#ifndef NDEBUG
void check_conserved(double e0, double e1, const Vec3& p0, const Vec3& p1) {
  const double scale = std::max(1.0, std::abs(e0));
  assert(std::abs(e1 - e0) <= 1e-10 * scale);
  assert(norm(p1 - p0) <= 1e-10 * std::max(1.0, std::sqrt(scale)));
  (void)scale;
}
#endif

double waiting_time(const RateTable& r, RngStream& rng) {
  if (!(r.total > 0.0)) return std::numeric_limits<double>::infinity();
  return -std::log1p(-rng.uniform()) / r.total;
}

EventKind apply_event(JointState& s, const ModelParams& p, SystemKind kind, const RateTable& r, RngStream& rng) {
  const double pick = rng.uniform() * r.total;
  EventCategory cat;
  if (pick < r.system) {
    cat = EventCategory::SystemPair;
  } else if (pick < r.system + r.reservoir) {
    cat = EventCategory::ReservoirPair;
  } else if (kind == SystemKind::RSystem) {
    cat = EventCategory::Interaction;
  } else {
    cat = EventCategory::Thermostat;
  }
  // Guard against a zero-rate category selected by rounding at a boundary.
  if (cat == EventCategory::SystemPair && r.system == 0.0) cat = EventCategory::ReservoirPair;

  const Vec3 omega = sample_unit_sphere(rng);
  EventKind out;
  out.category = cat;
  switch (cat) {
    case EventCategory::SystemPair: {
      const auto [i, j] = uniform_pair(rng, p.M);
      out.i = i;
      out.j = j;
#ifndef NDEBUG
      const double e0 = total_energy(s);
      const Vec3 p0 = total_momentum(s);
#endif
      std::tie(s.v[static_cast<size_t>(i)], s.v[static_cast<size_t>(j)]) =
          pair_collide(s.v[static_cast<size_t>(i)], s.v[static_cast<size_t>(j)], omega);
#ifndef NDEBUG
      check_conserved(e0, total_energy(s), p0, total_momentum(s));
#endif
      break;
    }
    case EventCategory::ReservoirPair: {
      const auto [i, j] = uniform_pair(rng, p.N);
      out.i = i;
      out.j = j;
#ifndef NDEBUG
      const double e0 = total_energy(s);
      const Vec3 p0 = total_momentum(s);
#endif
      std::tie(s.w[static_cast<size_t>(i)], s.w[static_cast<size_t>(j)]) =
          pair_collide(s.w[static_cast<size_t>(i)], s.w[static_cast<size_t>(j)], omega);
#ifndef NDEBUG
      check_conserved(e0, total_energy(s), p0, total_momentum(s));
#endif
      break;
    }
    case EventCategory::Interaction: {
      const int i = uniform_index(rng, p.M);
      const int j = uniform_index(rng, p.N);
      out.i = i;
      out.j = j;
#ifndef NDEBUG
      const double e0 = total_energy(s);
      const Vec3 p0 = total_momentum(s);
#endif
      std::tie(s.v[static_cast<size_t>(i)], s.w[static_cast<size_t>(j)]) =
          pair_collide(s.v[static_cast<size_t>(i)], s.w[static_cast<size_t>(j)], omega);
#ifndef NDEBUG
      check_conserved(e0, total_energy(s), p0, total_momentum(s));
#endif
      break;
    }
    case EventCategory::Thermostat: {
      const int i = uniform_index(rng, p.M);
      out.i = i;
      out.j = -1;
      const Vec3 x = sample_gamma_vec3(rng);
      auto& v = s.v[static_cast<size_t>(i)];
#ifndef NDEBUG
      const double e0 = norm2(v) + norm2(x);
      const Vec3 p0 = v + x;
      const auto [vs, xs] = thermostat_collide(v, x, omega);
      check_conserved(e0, norm2(vs) + norm2(xs), p0, vs + xs);
#endif
      v = thermostat_collide(v, x, omega).first;
      break;
    }
  }
  return out;
}

}  // namespace

StepResult step(JointState& s, const ModelParams& p, SystemKind kind, RngStream& rng) {
  const RateTable r = event_rates(p, kind);
  StepResult out;
  out.dt = waiting_time(r, rng);
  if (std::isfinite(out.dt)) out.event = apply_event(s, p, kind, r, rng);
  return out;
}

void SimConfig::validate() const {
  if (ensemble < 1) throw ConfigError("ensemble must be >= 1");
  if (chunk < 1) throw ConfigError("chunk must be >= 1");
  if (!std::isfinite(t_end) || t_end < 0.0) throw ConfigError("t_end must be finite and >= 0");
  for (size_t k = 0; k < record_times.size(); ++k) {
    const double t = record_times[k];
    if (!(t >= 0.0 && t <= t_end)) throw ConfigError("record_times must lie in [0, t_end]");
    if (k > 0 && t < record_times[k - 1]) throw ConfigError("record_times must be sorted");
  }
}

Observable hermite_observable(std::string name, const HermiteCoeffs& f) {
  struct Term {
    double c;
    std::vector<std::pair<int, int>> support;
  };
  auto terms = std::make_shared<std::vector<Term>>();
  const auto& basis = *f.basis();
  for (size_t i = 0; i < basis.size(); ++i) {
    const double c = f.values()(static_cast<Eigen::Index>(i));
    if (c != 0.0) terms->push_back({c, basis.support(i)});
  }
  const int K = basis.num_vars();
  const int d = basis.max_degree();
  return {std::move(name), [terms, K, d](const JointState& s) {
            if (3 * (s.M() + s.N()) != K) throw ContractError("hermite_observable: state size does not match basis");
            std::vector<double> table(static_cast<size_t>(K * (d + 1)));
            for (int k = 0; k < K; ++k) hermite_functions(s.flat(k), d, &table[static_cast<size_t>(k * (d + 1))]);
            double sum = 0.0;
            for (const auto& t : *terms) {
              double p = t.c;
              for (const auto& [k, e] : t.support) p *= table[static_cast<size_t>(k * (d + 1) + e)];
              sum += p;
            }
            return sum;
          }};
}

Observable energy_observable() {
  return {"energy", [](const JointState& s) { return total_energy(s); }};
}

Observable momentum_observable(int c) {
  if (c < 0 || c > 2) throw ContractError("momentum_observable: component must be 0, 1 or 2");
  static const char* names[] = {"momentum_x", "momentum_y", "momentum_z"};
  return {names[c], [c](const JointState& s) { return total_momentum(s)[c]; }};
}

InitSampler gamma_sampler(int M, int N) {
  if (M < 1 || N < 1) throw ContractError("gamma_sampler: need M, N >= 1");
  return [M, N](RngStream& rng) {
    WeightedState ws{JointState::zeros(M, N), 1.0};
    for (auto& v : ws.state.v) v = sample_gamma_vec3(rng);
    for (auto& w : ws.state.w) w = sample_gamma_vec3(rng);
    return ws;
  };
}

InitSampler perturbed_sampler(const HermiteCoeffs& h0, int N) {
  const int K = h0.basis()->num_vars();
  if (K % 3 != 0 || K == 0) throw ContractError("perturbed_sampler: h0 must live on 3M variables");
  if (std::abs(h0.constant_term() - 1.0) > 1e-12) throw ContractError("perturbed_sampler: need <h0, 1> = 1");
  const int M = K / 3;
  auto base = gamma_sampler(M, N);
  return [base, h0, K](RngStream& rng) {
    WeightedState ws = base(rng);
    std::vector<double> v(static_cast<size_t>(K));
    for (int k = 0; k < K; ++k) v[static_cast<size_t>(k)] = ws.state.flat(k);
    ws.weight = h0.evaluate(v);
    if (ws.weight < 0.0) throw ContractError("perturbed_sampler: h0 is negative at a sampled state");
    return ws;
  };
}

std::vector<MomentRecord> run_ensemble(const SimConfig& cfg, const ModelParams& p, const InitSampler& init,
                                       const std::vector<Observable>& observables) {
  cfg.validate();
  p.validate();
  const size_t T = cfg.record_times.size();
  const size_t O = observables.size();
  const std::int64_t nchunks = (cfg.ensemble + cfg.chunk - 1) / cfg.chunk;
  const RateTable rates = event_rates(p, cfg.system_kind);

  struct Sums {
    std::vector<double> sum, sum2;
  };
  std::vector<Sums> chunks(static_cast<size_t>(nchunks));

  detail::parallel_for(0, nchunks, cfg.threads, [&](std::int64_t c) {
    Sums acc{std::vector<double>(T * O, 0.0), std::vector<double>(T * O, 0.0)};
    const std::int64_t first = c * cfg.chunk;
    const std::int64_t last = std::min(cfg.ensemble, first + cfg.chunk);
    for (std::int64_t m = first; m < last; ++m) {
      RngStream rng(cfg.seed, static_cast<std::uint64_t>(m));
      WeightedState ws = init(rng);
      if (ws.state.M() != p.M || ws.state.N() != p.N) throw ContractError("run_ensemble: sampler state size mismatch");
      auto record = [&](size_t k) {
        for (size_t o = 0; o < O; ++o) {
          const double y = ws.weight * observables[o].eval(ws.state);
          acc.sum[k * O + o] += y;
          acc.sum2[k * O + o] += y * y;
        }
      };
      double t = 0.0;
      size_t next = 0;
      while (next < T) {
        const double dt = waiting_time(rates, rng);
        while (next < T && cfg.record_times[next] < t + dt) record(next++);
        if (next == T) break;
        apply_event(ws.state, p, cfg.system_kind, rates, rng);
        t += dt;
      }
    }
    chunks[static_cast<size_t>(c)] = std::move(acc);
  });

  std::vector<double> sum(T * O, 0.0), sum2(T * O, 0.0);
  for (const auto& c : chunks) {
    for (size_t k = 0; k < T * O; ++k) {
      sum[k] += c.sum[k];
      sum2[k] += c.sum2[k];
    }
  }
  std::vector<MomentRecord> out;
  const double n = static_cast<double>(cfg.ensemble);
  for (size_t k = 0; k < T; ++k) {
    for (size_t o = 0; o < O; ++o) {
      MomentRecord r;
      r.time = cfg.record_times[k];
      r.observable = observables[o].name;
      r.n_samples = cfg.ensemble;
      r.mean = sum[k * O + o] / n;
      if (cfg.ensemble > 1) {
        const double var = std::max(0.0, (sum2[k * O + o] - n * r.mean * r.mean) / (n - 1.0));
        r.std_error = std::sqrt(var / n);
      }
      out.push_back(std::move(r));
    }
  }
  return out;
}

void write_moment_csv(std::ostream& out, const std::vector<MomentRecord>& records) {
  CsvWriter csv(out, {"time", "observable", "mean", "std_error", "n_samples"});
  for (const auto& r : records) {
    csv.add(r.time).add(std::string_view(r.observable)).add(r.mean).add(r.std_error).add(r.n_samples);
    csv.end_row();
  }
}

}  // namespace kacbath
