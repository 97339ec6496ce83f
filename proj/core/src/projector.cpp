#include "kacbath/projector.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/sinh_sinh.hpp>

#include "kacbath/csv.hpp"
#include "kacbath/errors.hpp"
#include "parallel.hpp"

namespace kacbath {

BoundConstant lemma1_constant(int M, int N) {
  if (M < 1) throw ContractError("lemma1_constant: M must be >= 1");
  if (3 * N - 5 <= 0) throw ContractError("lemma1_constant: need 3N - 5 > 0");
  const double r = static_cast<double>(M + N) / N;
  const double C = std::sqrt(3.0 * M / (3.0 * N - 5.0)) + std::sqrt(r * r * r - 1.0);
  return {M, N, C};
}

McEstimate apply_R_mc(const JointFunction& h, const MomentumFrame& frame, const JointState& s, std::int64_t n,
                      RngStream& rng) {
  if (n < 1) throw ContractError("apply_R_mc: need at least one sample");
  if (s.M() != frame.M || s.N() != frame.N) throw ContractError("apply_R_mc: state does not match frame");
  double sum = 0.0, sum2 = 0.0;
  for (std::int64_t k = 0; k < n; ++k) {
    const double y = h(sample_momentum_preserving_rotation(frame, rng).apply(s));
    sum += y;
    sum2 += y * y;
  }
  McEstimate e;
  e.samples = n;
  e.mean = sum / static_cast<double>(n);
  if (n > 1) {
    const double var = std::max(0.0, (sum2 - sum * e.mean) / static_cast<double>(n - 1));
    e.std_error = std::sqrt(var / static_cast<double>(n));
  }
  return e;
}

namespace {

struct ChunkSums {
  double sum = 0.0;
  double sum2 = 0.0;
  std::int64_t count = 0;
};

}  // namespace

RatioEstimate estimate_lemma1_ratio(const HermiteCoeffs& h, int M, int N, const RatioOptions& opt) {
  const BoundConstant bc = lemma1_constant(M, N);
  if (h.basis()->num_vars() != 3 * M) throw ContractError("estimate_lemma1_ratio: h must live on 3M variables");
  if (std::abs(h.constant_term() - 1.0) > 1e-12) throw ContractError("estimate_lemma1_ratio: need <h, 1> = 1");
  const double h_norm = h.distance_to_one();
  if (!(h_norm > 0.0)) throw ContractError("estimate_lemma1_ratio: need ||h - 1|| > 0");
  if (opt.inner < 2 || opt.chunk_outer < 2) throw ContractError("estimate_lemma1_ratio: inner and chunk sizes must be >= 2");

  const MomentumFrame frame = build_frame(M, N);
  const int D = frame.dim();
  const int V = 3 * M;
  const Eigen::MatrixXd Pg = frame.momentum_projector().topRows(V);
  const Eigen::MatrixXd Cv = frame.complement().topRows(V);
  const Eigen::MatrixXd Cfull = frame.complement();
  HermiteCoeffs u = h;
  u.values()(0) -= 1.0;

  const std::int64_t per_chunk = opt.chunk_outer * opt.inner;
  const std::int64_t max_chunks = std::max<std::int64_t>(1, opt.max_samples / per_chunk);
  const std::int64_t round = 4;
  const double sd = std::sqrt(kGammaVariance);

  auto run_chunk = [&](std::int64_t c) {
    RngStream rng(opt.seed, static_cast<std::uint64_t>(c));
    ChunkSums s;
    Eigen::VectorXd z(D), g(D - 3), zv(V);
    std::vector<double> a(static_cast<size_t>(opt.inner));
    for (std::int64_t o = 0; o < opt.chunk_outer; ++o) {
      for (int k = 0; k < D; ++k) z(k) = sd * rng.normal();
      const Eigen::VectorXd fixed = Pg * z;
      const double r = (Cfull.transpose() * z).norm();
      double sa = 0.0, sa2 = 0.0;
      for (int i = 0; i < opt.inner; ++i) {
        for (int k = 0; k < D - 3; ++k) g(k) = rng.normal();
        zv.noalias() = fixed + (r / g.norm()) * (Cv * g);
        const double y = u.evaluate(std::span<const double>(zv.data(), static_cast<size_t>(V)));
        sa += y;
        sa2 += y * y;
      }
      const double n = opt.inner;
      const double est = (sa * sa - sa2) / (n * (n - 1.0));
      s.sum += est;
      s.sum2 += est * est;
      ++s.count;
    }
    return s;
  };

  std::vector<ChunkSums> chunks;
  RatioEstimate out{M, N, bc.C, 0.0, std::numeric_limits<double>::infinity(), 0, h_norm};
  while (static_cast<std::int64_t>(chunks.size()) < max_chunks) {
    const auto first = static_cast<std::int64_t>(chunks.size());
    const std::int64_t last = std::min(max_chunks, first + round);
    chunks.resize(static_cast<size_t>(last));
    detail::parallel_for(first, last, opt.threads, [&](std::int64_t c) { chunks[static_cast<size_t>(c)] = run_chunk(c); });

    ChunkSums tot;
    for (const auto& c : chunks) {
      tot.sum += c.sum;
      tot.sum2 += c.sum2;
      tot.count += c.count;
    }
    const double n = static_cast<double>(tot.count);
    const double q = tot.sum / n;
    const double q_se = std::sqrt(std::max(0.0, (tot.sum2 / n - q * q) / (n - 1.0)));
    const double hn2 = h_norm * h_norm;
    if (q > 0.0) {
      out.ratio = std::sqrt(q / hn2);
      out.std_error = q_se / (2.0 * std::sqrt(q * hn2));
    } else {
      out.ratio = 0.0;
      out.std_error = std::sqrt(q_se / hn2);
    }
    out.samples = tot.count * opt.inner;
    if (out.std_error < opt.rel_target * bc.C) break;
  }
  return out;
}

void write_ratio_csv(std::ostream& out, const std::vector<RatioEstimate>& rows) {
  CsvWriter csv(out, {"M", "N", "C", "ratio", "stderr", "samples"});
  for (const auto& r : rows) {
    csv.add(r.M).add(r.N).add(r.C).add(r.ratio).add(r.std_error).add(r.samples);
    csv.end_row();
  }
}

GaussianIdentity verify_gaussian_identity(int M, int N) {
  if (M < 0 || N < 1) throw ContractError("verify_gaussian_identity: need M >= 0 and N >= 1");
  const double pi = std::numbers::pi;
  const double a = (2.0 * M + N) / N;
  const double c = 2.0 * std::sqrt(static_cast<double>(M) * (M + N)) / N;
  boost::math::quadrature::sinh_sinh<double> rule(12);
  double worst = 0.0;
  auto kernel = [&](double s, double V) {
    const double q = a * s * s + a * V * V - 2.0 * c * s * V;
    // Far tails (and inf - inf at the transformed endpoints) contribute 0.
    if (!(q < 1e4)) return 0.0;
    return std::exp(-pi * q);
  };
  auto inner = [&](double V) {
    double err = 0.0;
    const double val = rule.integrate([&](double s) { return kernel(s, V); }, 1e-14, &err);
    worst = std::max(worst, err);
    return val;
  };
  double err = 0.0;
  const double plane = rule.integrate(inner, 1e-14, &err);
  if (err > 1e-12 || worst > 1e-12) throw NumericalError("verify_gaussian_identity: quadrature did not converge");
  const double r = static_cast<double>(M + N) / N;
  const double one = r * plane;
  return {one * one * one, r * r * r};
}

std::vector<Eigen::MatrixXd> invariant_basis(int M, int N, int d) {
  if (M < 1 || N < 1 || d < 0) throw ContractError("invariant_basis: need M, N >= 1 and d >= 0");
  const int D = 3 * (M + N);
  const auto basis = build_basis(D, d);

  const double s = 1.0 / std::sqrt(static_cast<double>(M + N));
  std::array<Polynomial, 3> P{Polynomial(D), Polynomial(D), Polynomial(D)};
  Polynomial E(D);
  for (int p = 0; p < M + N; ++p) {
    for (int c = 0; c < 3; ++c) {
      P[static_cast<size_t>(c)] += s * Polynomial::variable(D, 3 * p + c);
      E += Polynomial::variable(D, 3 * p + c).pow(2);
    }
  }

  std::vector<Eigen::MatrixXd> out;
  for (int m = 0; m <= d; ++m) {
    const size_t b0 = basis->block_begin(m);
    const auto bs = static_cast<Eigen::Index>(basis->block_size(m));
    std::vector<Eigen::VectorXd> cols;
    for (int b = 0; 2 * b <= m; ++b) {
      const int rest = m - 2 * b;
      for (int a1 = rest; a1 >= 0; --a1) {
        for (int a2 = rest - a1; a2 >= 0; --a2) {
          const int a3 = rest - a1 - a2;
          const Polynomial q = P[0].pow(a1) * P[1].pow(a2) * P[2].pow(a3) * E.pow(b);
          Eigen::VectorXd x = Eigen::VectorXd::Zero(bs);
          for (const auto& [alpha, coeff] : q.terms()) {
            double f = 1.0;
            for (int e : alpha)
              for (int k = 2; k <= e; ++k) f *= k;
            x(static_cast<Eigen::Index>(basis->index_of(alpha) - b0)) += coeff * std::sqrt(f);
          }
          cols.push_back(std::move(x));
        }
      }
    }
    Eigen::MatrixXd A(bs, static_cast<Eigen::Index>(cols.size()));
    for (size_t j = 0; j < cols.size(); ++j) A.col(static_cast<Eigen::Index>(j)) = cols[j];
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    Eigen::Index rank = 0;
    while (rank < sv.size() && sv(rank) > 1e-10 * sv(0)) ++rank;
    out.push_back(svd.matrixU().leftCols(rank));
  }
  return out;
}

OperatorMatrix invariant_projector(int M, int N, int d) {
  const auto U = invariant_basis(M, N, d);
  OperatorMatrix R = OperatorMatrix::zero(build_basis(3 * (M + N), d), "R");
  for (size_t m = 0; m < U.size(); ++m) R.blocks[m] = U[m] * U[m].transpose();
  return R;
}

double invariant_residual(const OperatorMatrix& G, const OperatorMatrix& R) {
  double worst = 0.0;
  for (size_t m = 0; m < G.blocks.size(); ++m) {
    if (G.blocks[m].size() > 0) worst = std::max(worst, (G.blocks[m] * R.blocks[m]).cwiseAbs().maxCoeff());
  }
  return worst;
}

int kernel_dimension(const OperatorMatrix& G, double tol) {
  int count = 0;
  for (const auto& b : G.blocks) {
    if (b.size() == 0) continue;
    const Eigen::VectorXd ev = symmetric_eigenvalues(b);
    for (Eigen::Index i = 0; i < ev.size(); ++i) count += std::abs(ev(i)) <= tol ? 1 : 0;
  }
  return count;
}

}  // namespace kacbath
