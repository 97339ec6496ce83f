#include "kacbath/studies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kacbath/config.hpp"
#include "kacbath/errors.hpp"

namespace kacbath {

std::vector<Lemma3Row> lemma3_table(int max_degree) {
  if (max_degree < 1 || max_degree > 6) throw ContractError("lemma3_table: max_degree must be in [1, 6]");
  const auto& T = thermostat_blocks(max_degree);
  std::vector<Lemma3Row> rows;
  for (int m = 1; m <= max_degree; ++m) {
    Lemma3Row r;
    r.degree = m;
    const Eigen::VectorXd herm = symmetric_eigenvalues(T[static_cast<size_t>(m)]);
    r.hermite_top = herm.maxCoeff();
    const TensorOperator t = tensor_T(m);
    r.tensor_top = symmetric_eigenvalues(t.matrix).maxCoeff();
    const Eigen::MatrixXd Q = symmetric_tensor_basis(m);
    const Eigen::VectorXd sym = symmetric_eigenvalues(Q.transpose() * t.matrix * Q);
    r.tensor_sym_top = sym.maxCoeff();
    if (sym.size() != herm.size()) throw NumericalError("lemma3_table: symmetric tensor and Hermite block sizes differ");
    r.shared_max_diff = (sym - herm).cwiseAbs().maxCoeff();
    rows.push_back(r);
  }
  return rows;
}

HermiteCoeffs random_polynomial(int M, int degree, std::uint64_t seed, std::uint64_t index) {
  RngStream rng(seed, index);
  HermiteCoeffs u(build_basis(3 * M, degree));
  for (Eigen::Index i = 1; i < u.values().size(); ++i) u.values()(i) = rng.normal();
  return u;
}

std::vector<Lemma2Row> lemma2_study(int M, const std::vector<int>& Ns, int random_count, int degree, std::uint64_t seed) {
  std::vector<Lemma2Row> rows;
  for (int N : Ns) {
    const ModelParams p{M, N, 1.0, 1.0, 1.0};
    const auto b1 = build_basis(3 * M, 1);
    std::vector<int> e(static_cast<size_t>(3 * M), 0);
    e[0] = 1;
    rows.push_back({"v11", M, N, verify_lemma2(HermiteCoeffs::unit(b1, e), p, 1)});
    rows.push_back({"constant", M, N, verify_lemma2(HermiteCoeffs::constant(b1), p, 1)});
    for (int k = 0; k < random_count; ++k) {
      const auto u = random_polynomial(M, degree, seed, static_cast<std::uint64_t>(k));
      rows.push_back({"random_" + std::to_string(k), M, N, verify_lemma2(u, p, degree)});
    }
  }
  return rows;
}

std::vector<TestFunction> lemma1_test_functions(int M, double eps) {
  if (M < 1) throw ContractError("lemma1_test_functions: M must be >= 1");
  const int K = 3 * M;
  auto unit = [K](std::initializer_list<std::pair<int, int>> nz) {
    H0Spec::Term t;
    t.exponents.assign(static_cast<size_t>(K), 0);
    for (auto [k, x] : nz) t.exponents[static_cast<size_t>(k)] = x;
    t.coeff = 1.0;
    return t;
  };
  std::vector<TestFunction> out;
  for (const char* fam : {"linear", "shear", "energy"}) {
    H0Spec s;
    s.family = fam;
    s.epsilon = eps;
    out.push_back({fam, build_h0(s, M, 3)});
  }
  H0Spec quad{"custom", eps, {unit({{0, 2}})}};
  out.push_back({"quadratic", build_h0(quad, M, 3)});
  H0Spec cubic{"custom", eps, {unit({{0, 1}, {1, 2}})}};
  out.push_back({"cubic", build_h0(cubic, M, 3)});
  return out;
}

double exact_projected_norm(const HermiteCoeffs& u, int N) {
  const int K = u.basis()->num_vars();
  if (K % 3 != 0) throw ContractError("exact_projected_norm: u must live on 3M variables");
  const int M = K / 3;
  const int d = u.basis()->max_degree();
  const auto U = invariant_basis(M, N, d);
  const auto joint = build_basis(3 * (M + N), d);
  const HermiteCoeffs uj = embed(u, joint, 0);
  double sq = 0.0;
  for (int m = 0; m <= d; ++m) {
    const auto b = static_cast<Eigen::Index>(joint->block_begin(m));
    const auto s = static_cast<Eigen::Index>(joint->block_size(m));
    sq += (U[static_cast<size_t>(m)].transpose() * uj.values().segment(b, s)).squaredNorm();
  }
  return std::sqrt(sq);
}

std::vector<Lemma1Row> lemma1_study(const std::vector<int>& Ms, const std::vector<int>& Ns, const RatioOptions& opt) {
  std::vector<Lemma1Row> rows;
  std::uint64_t case_index = 0;
  for (int M : Ms) {
    const auto fns = lemma1_test_functions(M);
    for (int N : Ns) {
      for (const auto& f : fns) {
        RatioOptions o = opt;
        o.seed = opt.seed * 1000003ULL + case_index++;
        Lemma1Row row;
        row.function = f.name;
        row.estimate = estimate_lemma1_ratio(f.h, M, N, o);
        HermiteCoeffs u = f.h;
        u.values()(0) -= 1.0;
        row.exact_ratio = exact_projected_norm(u, N) / u.norm();
        row.within_bound = row.estimate.ratio <= row.estimate.C + 3.0 * row.estimate.std_error;
        row.precise = row.estimate.std_error < opt.rel_target * row.estimate.C;
        rows.push_back(std::move(row));
      }
    }
  }
  return rows;
}

GapResult estimate_gap(const ModelParams& p, int d) {
  p.validate();
  if (d < 1) throw ContractError("estimate_gap: degree must be >= 1");
  GapResult g;
  g.M = p.M;
  g.N = p.N;
  g.degree = d;
  const OperatorMatrix G = assemble_generator(SystemKind::RSystem, p, d);
  const OperatorMatrix R = invariant_projector(p.M, p.N, d);
  g.k_hat = spectral_gap(G, R);
  g.l_hat = estimate_l(assemble_T(p.M, d));
  g.kernel_dim = kernel_dimension(G);
  double trace = 0.0;
  for (const auto& b : R.blocks) trace += b.trace();
  g.invariant_dim = static_cast<int>(std::lround(trace));
  g.invariant_residual = invariant_residual(G, R);
  return g;
}

TheoremCase theorem_case(const ModelParams& p, const std::string& family, const HermiteCoeffs& h0, int d,
                         std::vector<double> times, double k_override, double l_override, bool cross_check) {
  TheoremCase tc;
  tc.params = p;
  tc.family = family;
  tc.degree = d < 0 ? h0.basis()->max_degree() : d;
  tc.curve = distance_curve(p, h0, times, tc.degree, cross_check);

  double k = k_override;
  double l = l_override;
  if (k < 0.0 || l < 0.0) {
    const GapResult g = estimate_gap(p, std::max(tc.degree, 1));
    if (k < 0.0) k = g.k_hat;
    if (l < 0.0) l = g.l_hat;
  }
  const double C = lemma1_constant(p.M, p.N).C;
  tc.constants = BoundParams::make(C, lambda_rate(p.lambda_S, p.mu), p.mu, k, l, h0.distance_to_one());
  tc.bound = bound_curve(tc.constants, p.M, p.N, tc.curve.times);

  tc.min_slack = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < tc.bound.size(); ++i) {
    tc.min_slack = std::min(tc.min_slack, tc.bound[i].value - tc.curve.distance[i]);
    if (tc.curve.distance[i] > tc.peak) {
      tc.peak = tc.curve.distance[i];
      tc.peak_time = tc.curve.times[i];
    }
  }
  tc.limit_bound = C * h0.distance_to_one();
  const bool horizon_ok = !(tc.curve.slowest_rate > 0.0) ||
                          std::exp(-tc.curve.slowest_rate * tc.curve.times.back()) <= 1e-6;
  tc.limit = horizon_ok ? long_time_limit(tc.curve) : std::numeric_limits<double>::quiet_NaN();
  return tc;
}

double power_law_exponent(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ContractError("power_law_exponent: need two or more points");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw ContractError("power_law_exponent: values must be positive");
    const double a = std::log(x[i]), b = std::log(y[i]);
    sx += a;
    sy += b;
    sxx += a * a;
    sxy += a * b;
  }
  const double n = static_cast<double>(x.size());
  return -(n * sxy - sx * sy) / (n * sxx - sx * sx);
}

ScalingFamily scaling_study(int M, const std::vector<int>& Ns, const std::string& family, double eps, int d) {
  H0Spec spec;
  spec.family = family;
  spec.epsilon = eps;
  return scaling_study(M, Ns, spec, d);
}

ScalingFamily scaling_study(int M, const std::vector<int>& Ns, const H0Spec& spec, int d) {
  const HermiteCoeffs h0 = build_h0(spec, M, d);
  ScalingFamily sf;
  sf.family = spec.family;
  sf.Ns = Ns;
  for (int N : Ns) {
    const ModelParams p{M, N, 1.0, 1.0, 1.0};
    // The ODE cross-check is quadratic in the block size; keep it for the
    // small reservoirs where it is cheap.
    const DistanceCurve c = distance_curve(p, h0, {}, d, 3 * (M + N) <= 15);
    sf.limits.push_back(long_time_limit(c));
    sf.peaks.push_back(*std::max_element(c.distance.begin(), c.distance.end()));
  }
  std::vector<double> x(Ns.begin(), Ns.end());
  sf.p = power_law_exponent(x, sf.limits);
  sf.q = power_law_exponent(x, sf.peaks);
  return sf;
}

}  // namespace kacbath
