#include "kacbath/evolution.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/numeric/odeint.hpp>

#include "kacbath/errors.hpp"

namespace kacbath {

namespace {

struct BlockEigen {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

std::vector<BlockEigen> decompose(const OperatorMatrix& G) {
  std::vector<BlockEigen> out;
  for (const auto& b : G.blocks) {
    if (b.size() == 0) {
      out.push_back({});
      continue;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (b + b.transpose()));
    if (es.info() != Eigen::Success) throw NumericalError("evolve: eigendecomposition failed");
    out.push_back({es.eigenvalues(), es.eigenvectors()});
  }
  return out;
}

void check_times(const std::vector<double>& times) {
  for (size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0.0) || !std::isfinite(times[k])) throw ContractError("evolve: times must be finite and >= 0");
    if (k > 0 && times[k] < times[k - 1]) throw ContractError("evolve: times must be sorted");
  }
}

std::vector<HermiteCoeffs> evolve_with(const OperatorMatrix& G, const std::vector<BlockEigen>& eig, const HermiteCoeffs& c0,
                                       const std::vector<double>& times) {
  const auto& basis = *G.basis;
  std::vector<HermiteCoeffs> out;
  out.reserve(times.size());
  std::vector<Eigen::VectorXd> modal;
  for (int m = 0; m <= G.max_degree(); ++m) {
    const auto b = static_cast<Eigen::Index>(basis.block_begin(m));
    const auto s = static_cast<Eigen::Index>(basis.block_size(m));
    modal.push_back(eig[static_cast<size_t>(m)].vectors.transpose() * c0.values().segment(b, s));
  }
  for (double t : times) {
    if (t == 0.0) {
      out.push_back(c0);
      continue;
    }
    HermiteCoeffs c(G.basis);
    for (int m = 0; m <= G.max_degree(); ++m) {
      const auto b = static_cast<Eigen::Index>(basis.block_begin(m));
      const auto s = static_cast<Eigen::Index>(basis.block_size(m));
      const auto& e = eig[static_cast<size_t>(m)];
      const Eigen::VectorXd scaled = (e.values * t).array().exp().matrix().cwiseProduct(modal[static_cast<size_t>(m)]);
      c.values().segment(b, s) = e.vectors * scaled;
    }
    out.push_back(std::move(c));
  }
  return out;
}

void ode_cross_check(const OperatorMatrix& G, const HermiteCoeffs& c0, const std::vector<double>& times,
                     const std::vector<HermiteCoeffs>& reference) {
  namespace odeint = boost::numeric::odeint;
  using State = std::vector<double>;
  const auto& basis = *G.basis;
  const double scale = std::max(c0.norm(), 1e-300);
  for (int m = 0; m <= G.max_degree(); ++m) {
    const auto b = static_cast<Eigen::Index>(basis.block_begin(m));
    const auto s = static_cast<Eigen::Index>(basis.block_size(m));
    const Eigen::VectorXd x0 = c0.values().segment(b, s);
    if (x0.cwiseAbs().maxCoeff() == 0.0) continue;
    const Eigen::MatrixXd& A = G.blocks[static_cast<size_t>(m)];

    auto rhs = [&A, s](const State& x, State& dxdt, double) {
      Eigen::Map<const Eigen::VectorXd> xv(x.data(), s);
      Eigen::Map<Eigen::VectorXd> dv(dxdt.data(), s);
      dv.noalias() = A * xv;
    };
    std::vector<double> grid;
    grid.push_back(0.0);
    for (double t : times) {
      if (t > grid.back()) grid.push_back(t);
    }
    std::vector<State> states;
    State x(x0.data(), x0.data() + s);
    if (grid.size() > 1) {
      odeint::integrate_times(odeint::make_dense_output(1e-13, 1e-12, odeint::runge_kutta_dopri5<State>()), rhs, x,
                              grid.begin(), grid.end(), 1e-3,
                              [&states](const State& st, double) { states.push_back(st); });
    } else {
      states.push_back(x);
    }
    size_t g = 0;
    for (size_t k = 0; k < times.size(); ++k) {
      while (g + 1 < grid.size() && grid[g] < times[k]) ++g;
      Eigen::Map<const Eigen::VectorXd> ode(states[g].data(), s);
      const double diff = (ode - reference[k].values().segment(b, s)).norm() / scale;
      if (diff > 1e-9) {
        std::ostringstream msg;
        msg << "evolve: matrix exponential and ODE integration disagree by " << diff << " (relative) at t = " << times[k]
            << ", degree " << m;
        throw NumericalError(msg.str());
      }
    }
  }
}

}  // namespace

std::vector<HermiteCoeffs> evolve(const OperatorMatrix& G, const HermiteCoeffs& c0, const std::vector<double>& times,
                                  bool cross_check) {
  if (c0.basis()->size() != G.dim() || c0.basis()->num_vars() != G.basis->num_vars()) {
    throw ContractError("evolve: coefficients are not on the operator's basis");
  }
  check_times(times);
  const auto eig = decompose(G);
  auto out = evolve_with(G, eig, c0, times);
  if (cross_check) ode_cross_check(G, c0, times, out);
  return out;
}

namespace {

struct ModeSummary {
  double slowest = 0.0;  // smallest nonzero |λ| with weight, 0 if none
  Eigen::VectorXd stationary;
};

ModeSummary summarize(const OperatorMatrix& G, const std::vector<BlockEigen>& eig, const HermiteCoeffs& c0) {
  const auto& basis = *G.basis;
  ModeSummary ms;
  ms.stationary = Eigen::VectorXd::Zero(c0.values().size());
  const double scale = std::max(c0.norm(), 1e-300);
  double slowest = std::numeric_limits<double>::infinity();
  for (int m = 0; m <= G.max_degree(); ++m) {
    const auto b = static_cast<Eigen::Index>(basis.block_begin(m));
    const auto s = static_cast<Eigen::Index>(basis.block_size(m));
    const auto& e = eig[static_cast<size_t>(m)];
    const Eigen::VectorXd modal = e.vectors.transpose() * c0.values().segment(b, s);
    for (Eigen::Index i = 0; i < s; ++i) {
      if (std::abs(modal(i)) <= 1e-14 * scale) continue;
      if (std::abs(e.values(i)) <= 1e-10) {
        ms.stationary.segment(b, s) += modal(i) * e.vectors.col(i);
      } else {
        slowest = std::min(slowest, -e.values(i));
      }
    }
  }
  ms.slowest = std::isfinite(slowest) ? slowest : 0.0;
  return ms;
}

}  // namespace

DistanceCurve distance_curve(const ModelParams& p, const HermiteCoeffs& h0, const std::vector<double>& times, int d,
                             bool cross_check) {
  p.validate();
  if (h0.basis()->num_vars() != 3 * p.M) throw ContractError("distance_curve: h0 must live on 3M variables");
  if (std::abs(h0.constant_term() - 1.0) > 1e-12) throw ContractError("distance_curve: need <h0, 1> = 1");
  if (d < 0) d = h0.basis()->max_degree();
  if (d < h0.basis()->max_degree()) {
    for (size_t i = 0; i < h0.basis()->size(); ++i) {
      if ((*h0.basis())[i].total_degree > d && h0.values()(static_cast<Eigen::Index>(i)) != 0.0) {
        throw ContractError("distance_curve: h0 has terms above the degree cap");
      }
    }
  }

  const OperatorMatrix GR = assemble_generator(SystemKind::RSystem, p, d);
  const OperatorMatrix GT = assemble_generator(SystemKind::TSystem, p, d);
  const HermiteCoeffs c0 = embed(h0, GR.basis, 0);
  const auto eR = decompose(GR);
  const auto eT = decompose(GT);
  const ModeSummary sR = summarize(GR, eR, c0);
  const ModeSummary sT = summarize(GT, eT, c0);

  DistanceCurve curve;
  curve.params = p;
  curve.degree = d;
  const double rates[] = {sR.slowest, sT.slowest};
  curve.slowest_rate = 0.0;
  for (double r : rates) {
    if (r > 0.0) curve.slowest_rate = curve.slowest_rate > 0.0 ? std::min(curve.slowest_rate, r) : r;
  }
  curve.stationary_distance = (sR.stationary - sT.stationary).norm();

  curve.times = times;
  if (curve.times.empty()) {
    const double horizon = curve.slowest_rate > 0.0 ? std::log(1e7) / curve.slowest_rate : 1.0;
    curve.times = geometric_grid(1e-3, horizon, 80);
  }
  check_times(curve.times);
  const auto hR = evolve_with(GR, eR, c0, curve.times);
  const auto hT = evolve_with(GT, eT, c0, curve.times);
  if (cross_check) {
    ode_cross_check(GR, c0, curve.times, hR);
    ode_cross_check(GT, c0, curve.times, hT);
  }
  for (size_t k = 0; k < curve.times.size(); ++k) curve.distance.push_back((hR[k].values() - hT[k].values()).norm());
  return curve;
}

double settling_time(const DistanceCurve& curve) {
  if (!(curve.slowest_rate > 0.0)) return 0.0;
  return std::log(1e6) / curve.slowest_rate;
}

double long_time_limit(const DistanceCurve& curve) {
  if (curve.times.empty()) throw ContractError("long_time_limit: empty curve");
  if (curve.slowest_rate > 0.0 && std::exp(-curve.slowest_rate * curve.times.back()) > 1e-6) {
    std::ostringstream msg;
    msg << "long_time_limit: horizon t = " << curve.times.back() << " too short, need at least "
        << settling_time(curve);
    throw NumericalError(msg.str());
  }
  return curve.distance.back();
}

std::vector<double> geometric_grid(double t_min, double t_end, int n) {
  if (!(t_min > 0.0) || !(t_end > t_min) || n < 2) throw ContractError("geometric_grid: need 0 < t_min < t_end, n >= 2");
  std::vector<double> g{0.0};
  const double r = std::log(t_end / t_min) / (n - 1);
  for (int k = 0; k < n; ++k) g.push_back(k == n - 1 ? t_end : t_min * std::exp(r * k));
  return g;
}

}  // namespace kacbath
