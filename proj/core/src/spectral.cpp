#include "kacbath/spectral.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

#include "kacbath/csv.hpp"
#include "kacbath/errors.hpp"
#include "kacbath/quadrature.hpp"

namespace kacbath {

// --- OperatorMatrix ---

OperatorMatrix OperatorMatrix::zero(BasisPtr basis, std::string name) {
  OperatorMatrix op{std::move(name), basis, {}};
  for (int m = 0; m <= basis->max_degree(); ++m) {
    const auto n = static_cast<Eigen::Index>(basis->block_size(m));
    op.blocks.push_back(Eigen::MatrixXd::Zero(n, n));
  }
  return op;
}

OperatorMatrix OperatorMatrix::identity(BasisPtr basis, std::string name) {
  OperatorMatrix op = zero(std::move(basis), std::move(name));
  for (auto& b : op.blocks) b.setIdentity();
  return op;
}

Eigen::VectorXd OperatorMatrix::apply(const Eigen::VectorXd& c) const {
  if (c.size() != static_cast<Eigen::Index>(dim())) throw ContractError("OperatorMatrix::apply: size mismatch");
  Eigen::VectorXd out(c.size());
  for (int m = 0; m <= max_degree(); ++m) {
    const auto b = static_cast<Eigen::Index>(basis->block_begin(m));
    const auto n = static_cast<Eigen::Index>(basis->block_size(m));
    out.segment(b, n).noalias() = blocks[static_cast<size_t>(m)] * c.segment(b, n);
  }
  return out;
}

HermiteCoeffs OperatorMatrix::apply(const HermiteCoeffs& h) const { return HermiteCoeffs(basis, apply(h.values())); }

namespace {
void check_same(const OperatorMatrix& a, const OperatorMatrix& b) {
  if (a.blocks.size() != b.blocks.size() || a.dim() != b.dim()) throw ContractError("OperatorMatrix: basis mismatch");
}
}  // namespace

OperatorMatrix& OperatorMatrix::operator+=(const OperatorMatrix& o) {
  check_same(*this, o);
  for (size_t m = 0; m < blocks.size(); ++m) blocks[m] += o.blocks[m];
  return *this;
}

OperatorMatrix& OperatorMatrix::operator-=(const OperatorMatrix& o) {
  check_same(*this, o);
  for (size_t m = 0; m < blocks.size(); ++m) blocks[m] -= o.blocks[m];
  return *this;
}

OperatorMatrix& OperatorMatrix::operator*=(double s) {
  for (auto& b : blocks) b *= s;
  return *this;
}

OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b) {
  check_same(a, b);
  OperatorMatrix out = a;
  out.name = a.name + "*" + b.name;
  for (size_t m = 0; m < a.blocks.size(); ++m) out.blocks[m] = a.blocks[m] * b.blocks[m];
  return out;
}

OperatorMatrix OperatorMatrix::transpose() const {
  OperatorMatrix out = *this;
  for (auto& b : out.blocks) b.transposeInPlace();
  return out;
}

double OperatorMatrix::asymmetry() const {
  double worst = 0.0;
  for (const auto& b : blocks) {
    if (b.size() > 0) worst = std::max(worst, (b - b.transpose()).cwiseAbs().maxCoeff());
  }
  return worst;
}

double OperatorMatrix::operator_norm() const {
  double worst = 0.0;
  for (const auto& b : blocks) {
    if (b.size() == 0) continue;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(b);
    worst = std::max(worst, svd.singularValues()(0));
  }
  return worst;
}

Eigen::MatrixXd OperatorMatrix::dense() const {
  const auto n = static_cast<Eigen::Index>(dim());
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int m = 0; m <= max_degree(); ++m) {
    const auto b = static_cast<Eigen::Index>(basis->block_begin(m));
    const auto s = static_cast<Eigen::Index>(basis->block_size(m));
    out.block(b, b, s, s) = blocks[static_cast<size_t>(m)];
  }
  return out;
}

void write_matrix_file(const std::filesystem::path& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_real(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

Eigen::MatrixXd read_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Eigen::Index rows = 0, cols = 0;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) throw IoError("bad matrix header in " + path.string());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j = 0; j < cols; ++j) {
      if (!(in >> m(i, j))) throw IoError("truncated matrix file " + path.string());
    }
  }
  return m;
}

// --- substitution matrices ---

namespace {

double sqrt_factorial_product(const std::vector<int>& e) {
  double f = 1.0;
  for (int x : e) {
    for (int k = 2; k <= x; ++k) f *= k;
  }
  return std::sqrt(f);
}

// Index bookkeeping for expanding (Oz)^β degree by degree.
struct ExpansionPlan {
  // raise[m][i * K + j] = index in block m+1 of (element i of block m) + e_j
  std::vector<std::vector<int>> raise;
  // for element i of block m >= 1: first variable with positive exponent
  // and the block-(m-1) index of the element with that exponent lowered.
  std::vector<std::vector<std::pair<int, int>>> parent;
  std::vector<double> sqrt_fact;  // per basis element

  explicit ExpansionPlan(const HermiteBasis& basis) {
    const int K = basis.num_vars();
    const int d = basis.max_degree();
    raise.resize(static_cast<size_t>(d));
    parent.resize(static_cast<size_t>(d) + 1);
    for (int m = 0; m < d; ++m) {
      const size_t b = basis.block_begin(m);
      const size_t s = basis.block_size(m);
      auto& r = raise[static_cast<size_t>(m)];
      r.resize(s * static_cast<size_t>(K));
      for (size_t i = 0; i < s; ++i) {
        auto e = basis[b + i].exponents;
        for (int j = 0; j < K; ++j) {
          ++e[static_cast<size_t>(j)];
          r[i * static_cast<size_t>(K) + static_cast<size_t>(j)] =
              static_cast<int>(basis.index_of(e) - basis.block_begin(m + 1));
          --e[static_cast<size_t>(j)];
        }
      }
    }
    for (int m = 1; m <= d; ++m) {
      const size_t b = basis.block_begin(m);
      for (size_t i = 0; i < basis.block_size(m); ++i) {
        auto e = basis[b + i].exponents;
        int k = 0;
        while (e[static_cast<size_t>(k)] == 0) ++k;
        --e[static_cast<size_t>(k)];
        parent[static_cast<size_t>(m)].emplace_back(k, static_cast<int>(basis.index_of(e) - basis.block_begin(m - 1)));
      }
    }
    for (size_t i = 0; i < basis.size(); ++i) sqrt_fact.push_back(sqrt_factorial_product(basis[i].exponents));
  }
};

// coeff[m](β, α) = coefficient of z^α in (Oz)^β, accumulated with weight w.
void accumulate_monomial_expansion(const Eigen::MatrixXd& O, const HermiteBasis& basis, const ExpansionPlan& plan,
                                   double weight, std::vector<Eigen::MatrixXd>& acc) {
  const int K = basis.num_vars();
  const int d = basis.max_degree();
  std::vector<Eigen::MatrixXd> cur(static_cast<size_t>(d) + 1);
  cur[0] = Eigen::MatrixXd::Ones(1, 1);
  for (int m = 1; m <= d; ++m) {
    const auto sm = static_cast<Eigen::Index>(basis.block_size(m));
    const auto sp = static_cast<Eigen::Index>(basis.block_size(m - 1));
    cur[static_cast<size_t>(m)] = Eigen::MatrixXd::Zero(sm, sm);
    const auto& raise = plan.raise[static_cast<size_t>(m - 1)];
    for (Eigen::Index beta = 0; beta < sm; ++beta) {
      const auto [k, par] = plan.parent[static_cast<size_t>(m)][static_cast<size_t>(beta)];
      for (Eigen::Index a = 0; a < sp; ++a) {
        const double c = cur[static_cast<size_t>(m - 1)](par, a);
        if (c == 0.0) continue;
        for (int j = 0; j < K; ++j) {
          const double o = O(k, j);
          if (o == 0.0) continue;
          cur[static_cast<size_t>(m)](beta, raise[static_cast<size_t>(a) * static_cast<size_t>(K) + static_cast<size_t>(j)]) +=
              c * o;
        }
      }
    }
  }
  for (int m = 0; m <= d; ++m) acc[static_cast<size_t>(m)] += weight * cur[static_cast<size_t>(m)];
}

std::vector<Eigen::MatrixXd> expansion_to_hermite(const std::vector<Eigen::MatrixXd>& coeff, const HermiteBasis& basis,
                                                  const ExpansionPlan& plan) {
  std::vector<Eigen::MatrixXd> blocks;
  for (int m = 0; m <= basis.max_degree(); ++m) {
    const auto b = basis.block_begin(m);
    const auto s = static_cast<Eigen::Index>(basis.block_size(m));
    Eigen::MatrixXd h(s, s);
    for (Eigen::Index a = 0; a < s; ++a) {
      for (Eigen::Index be = 0; be < s; ++be) {
        h(a, be) = coeff[static_cast<size_t>(m)](be, a) * plan.sqrt_fact[b + static_cast<size_t>(a)] /
                   plan.sqrt_fact[b + static_cast<size_t>(be)];
      }
    }
    blocks.push_back(std::move(h));
  }
  return blocks;
}

std::vector<Eigen::MatrixXd> zero_blocks(const HermiteBasis& basis) {
  std::vector<Eigen::MatrixXd> z;
  for (int m = 0; m <= basis.max_degree(); ++m) {
    const auto s = static_cast<Eigen::Index>(basis.block_size(m));
    z.push_back(Eigen::MatrixXd::Zero(s, s));
  }
  return z;
}

double max_block_diff(const std::vector<Eigen::MatrixXd>& a, const std::vector<Eigen::MatrixXd>& b) {
  double worst = 0.0;
  for (size_t m = 0; m < a.size(); ++m) {
    if (a[m].size() > 0) worst = std::max(worst, (a[m] - b[m]).cwiseAbs().maxCoeff());
  }
  return worst;
}

std::vector<Eigen::MatrixXd> pair_average_with_rule(int n, const HermiteBasis& basis, const ExpansionPlan& plan) {
  const auto rule = sphere_product_rule(n);
  auto acc = zero_blocks(basis);
  for (size_t q = 0; q < rule.nodes.size(); ++q) {
    accumulate_monomial_expansion(collision_matrix(rule.nodes[q]), basis, plan, rule.weights[q], acc);
  }
  return expansion_to_hermite(acc, basis, plan);
}

std::mutex g_cache_mutex;

}  // namespace

std::vector<Eigen::MatrixXd> substitution_blocks(const Eigen::MatrixXd& orthogonal, const HermiteBasis& local) {
  if (orthogonal.rows() != local.num_vars() || orthogonal.cols() != local.num_vars()) {
    throw ContractError("substitution_blocks: matrix size does not match basis");
  }
  const ExpansionPlan plan(local);
  auto acc = zero_blocks(local);
  accumulate_monomial_expansion(orthogonal, local, plan, 1.0, acc);
  return expansion_to_hermite(acc, local, plan);
}

Eigen::MatrixXd collision_matrix(const Vec3& omega) {
  if (std::abs(norm(omega) - 1.0) > kUnitTolerance) throw ContractError("collision_matrix: omega is not a unit vector");
  Eigen::Vector3d o(omega.x, omega.y, omega.z);
  const Eigen::Matrix3d oo = o * o.transpose();
  Eigen::MatrixXd c = Eigen::MatrixXd::Identity(6, 6);
  c.block<3, 3>(0, 0) -= oo;
  c.block<3, 3>(0, 3) += oo;
  c.block<3, 3>(3, 0) += oo;
  c.block<3, 3>(3, 3) -= oo;
  return c;
}

const std::vector<Eigen::MatrixXd>& pair_average_blocks(int d) {
  static std::map<int, std::vector<Eigen::MatrixXd>> cache;
  std::lock_guard lock(g_cache_mutex);
  if (auto it = cache.find(d); it != cache.end()) return it->second;

  const HermiteBasis basis(6, d);
  const ExpansionPlan plan(basis);
  // The block entries are polynomials of degree <= 2d in Ω, so n = d + 1
  // is already exact; the doubled rule certifies it.
  int n = d + 1;
  auto coarse = pair_average_with_rule(n, basis, plan);
  double diff = 0.0;
  for (int attempt = 0; attempt < 3; ++attempt) {
    n *= 2;
    auto fine = pair_average_with_rule(n, basis, plan);
    diff = max_block_diff(coarse, fine);
    coarse = std::move(fine);
    if (diff <= 1e-10) break;
  }
  if (diff > 1e-8) {
    std::ostringstream msg;
    msg << "pair_average_blocks: spherical quadrature did not stabilize (diff " << diff << ")";
    throw NumericalError(msg.str());
  }
  for (auto& b : coarse) {
    if (b.size() > 0 && (b - b.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
      throw NumericalError("pair_average_blocks: averaged collision operator is not symmetric");
    }
    b = 0.5 * (b + b.transpose()).eval();
  }
  return cache.emplace(d, std::move(coarse)).first->second;
}

Eigen::MatrixXd thermostat_matrix_by_quadrature(int d) {
  const HermiteBasis basis(3, d);
  const auto gh = gauss_hermite_gamma(d + 1);
  const auto sph = sphere_product_rule(d + 1);
  const size_t ng = gh.nodes.size();
  const auto nb = static_cast<Eigen::Index>(basis.size());
  const int stride = d + 1;

  std::vector<std::array<int, 3>> exps;
  for (size_t i = 0; i < basis.size(); ++i) {
    const auto& e = basis[i].exponents;
    exps.push_back({e[0], e[1], e[2]});
  }
  std::vector<double> h(static_cast<size_t>(3 * stride));
  auto eval_all = [&](const Vec3& p, double w, double* out) {
    hermite_functions(p.x, d, &h[0]);
    hermite_functions(p.y, d, &h[static_cast<size_t>(stride)]);
    hermite_functions(p.z, d, &h[static_cast<size_t>(2 * stride)]);
    for (size_t i = 0; i < exps.size(); ++i) {
      out[i] += w * h[static_cast<size_t>(exps[i][0])] * h[static_cast<size_t>(stride + exps[i][1])] *
                h[static_cast<size_t>(2 * stride + exps[i][2])];
    }
  };

  Eigen::MatrixXd result = Eigen::MatrixXd::Zero(nb, nb);
  Eigen::VectorXd tv(nb), hv(nb);
  for (size_t a = 0; a < ng; ++a)
    for (size_t b = 0; b < ng; ++b)
      for (size_t c = 0; c < ng; ++c) {
        const Vec3 v{gh.nodes[a], gh.nodes[b], gh.nodes[c]};
        const double wv = gh.weights[a] * gh.weights[b] * gh.weights[c];
        tv.setZero();
        for (size_t p = 0; p < ng; ++p)
          for (size_t q = 0; q < ng; ++q)
            for (size_t r = 0; r < ng; ++r) {
              const Vec3 x{gh.nodes[p], gh.nodes[q], gh.nodes[r]};
              const double wx = gh.weights[p] * gh.weights[q] * gh.weights[r];
              for (size_t s = 0; s < sph.nodes.size(); ++s) {
                const Vec3 vs = thermostat_collide(v, x, sph.nodes[s]).first;
                eval_all(vs, wx * sph.weights[s], tv.data());
              }
            }
        hv.setZero();
        eval_all(v, 1.0, hv.data());
        result.noalias() += wv * hv * tv.transpose();
      }
  return result;
}

const std::vector<Eigen::MatrixXd>& thermostat_blocks(int d, bool cross_check) {
  static std::map<int, std::vector<Eigen::MatrixXd>> cache;
  static std::map<int, bool> checked;
  const auto& pair = pair_average_blocks(d);

  std::unique_lock lock(g_cache_mutex);
  auto it = cache.find(d);
  if (it == cache.end()) {
    const HermiteBasis local3(3, d);
    const HermiteBasis local6(6, d);
    std::vector<Eigen::MatrixXd> blocks;
    for (int m = 0; m <= d; ++m) {
      const auto s = static_cast<Eigen::Index>(local3.block_size(m));
      Eigen::MatrixXd t(s, s);
      std::vector<int> ea(6, 0), eb(6, 0);
      for (Eigen::Index a = 0; a < s; ++a) {
        const auto& xa = local3[local3.block_begin(m) + static_cast<size_t>(a)].exponents;
        std::copy(xa.begin(), xa.end(), ea.begin());
        const auto ia = static_cast<Eigen::Index>(local6.index_of(ea) - local6.block_begin(m));
        for (Eigen::Index b = 0; b < s; ++b) {
          const auto& xb = local3[local3.block_begin(m) + static_cast<size_t>(b)].exponents;
          std::copy(xb.begin(), xb.end(), eb.begin());
          const auto ib = static_cast<Eigen::Index>(local6.index_of(eb) - local6.block_begin(m));
          t(a, b) = pair[static_cast<size_t>(m)](ia, ib);
        }
      }
      blocks.push_back(std::move(t));
    }
    it = cache.emplace(d, std::move(blocks)).first;
  }
  if (cross_check && !checked[d]) {
    lock.unlock();
    const Eigen::MatrixXd q = thermostat_matrix_by_quadrature(d);
    lock.lock();
    const HermiteBasis local3(3, d);
    double worst = 0.0;
    for (int m = 0; m <= d; ++m) {
      const auto b = static_cast<Eigen::Index>(local3.block_begin(m));
      const auto s = static_cast<Eigen::Index>(local3.block_size(m));
      worst = std::max(worst, (q.block(b, b, s, s) - it->second[static_cast<size_t>(m)]).cwiseAbs().maxCoeff());
    }
    if (worst > 1e-8) {
      std::ostringstream msg;
      msg << "thermostat_blocks: substitution and quadrature routes disagree by " << worst;
      throw NumericalError(msg.str());
    }
    checked[d] = true;
  }
  return it->second;
}

void add_lifted(OperatorMatrix& target, const std::vector<Eigen::MatrixXd>& local_blocks, const HermiteBasis& local,
                std::span<const int> vars, double scale) {
  const HermiteBasis& basis = *target.basis;
  if (static_cast<int>(vars.size()) != local.num_vars()) throw ContractError("add_lifted: variable map size mismatch");
  if (local.max_degree() < basis.max_degree()) throw ContractError("add_lifted: local degree cap too small");
  for (int v : vars) {
    if (v < 0 || v >= basis.num_vars()) throw ContractError("add_lifted: variable out of range");
  }
  std::vector<int> local_e(vars.size());
  std::vector<int> alpha;
  for (int m = 0; m <= basis.max_degree(); ++m) {
    const size_t b0 = basis.block_begin(m);
    auto& block = target.blocks[static_cast<size_t>(m)];
    for (size_t beta = 0; beta < basis.block_size(m); ++beta) {
      const auto& be = basis[b0 + beta].exponents;
      int k = 0;
      for (size_t q = 0; q < vars.size(); ++q) {
        local_e[q] = be[static_cast<size_t>(vars[q])];
        k += local_e[q];
      }
      const size_t lb0 = local.block_begin(k);
      const auto lbeta = static_cast<Eigen::Index>(local.index_of(local_e) - lb0);
      const auto& lblock = local_blocks[static_cast<size_t>(k)];
      alpha = be;
      for (size_t la = 0; la < local.block_size(k); ++la) {
        const double val = lblock(static_cast<Eigen::Index>(la), lbeta);
        if (val == 0.0) continue;
        const auto& ae = local[lb0 + la].exponents;
        for (size_t q = 0; q < vars.size(); ++q) alpha[static_cast<size_t>(vars[q])] = ae[q];
        const auto ia = static_cast<Eigen::Index>(basis.index_of(alpha) - b0);
        block(ia, static_cast<Eigen::Index>(beta)) += scale * val;
      }
    }
  }
}

namespace {

std::array<int, 3> particle_vars(int particle) { return {3 * particle, 3 * particle + 1, 3 * particle + 2}; }

std::array<int, 6> pair_vars(int a, int b) { return {3 * a, 3 * a + 1, 3 * a + 2, 3 * b, 3 * b + 1, 3 * b + 2}; }

const HermiteBasis& local_basis(int K, int d) {
  static std::map<std::pair<int, int>, std::unique_ptr<HermiteBasis>> cache;
  static std::mutex mu;
  std::lock_guard lock(mu);
  auto& slot = cache[{K, d}];
  if (!slot) slot = std::make_unique<HermiteBasis>(K, d);
  return *slot;
}

void add_thermostat(OperatorMatrix& target, int d, int particle, double scale) {
  const auto vars = particle_vars(particle);
  add_lifted(target, thermostat_blocks(d), local_basis(3, d), vars, scale);
}

void add_pair(OperatorMatrix& target, int d, int a, int b, double scale) {
  const auto vars = pair_vars(a, b);
  add_lifted(target, pair_average_blocks(d), local_basis(6, d), vars, scale);
}

BasisPtr joint_basis(const ModelParams& p, int d) { return build_basis(p.joint_dim(), d); }

}  // namespace

OperatorMatrix assemble_T(int M, int d, int particle) {
  if (particle < 0 || particle >= M) throw ContractError("assemble_T: particle index out of range");
  OperatorMatrix T = OperatorMatrix::zero(build_basis(3 * M, d), "T_" + std::to_string(particle + 1));
  add_thermostat(T, d, particle, 1.0);
  return T;
}

OperatorMatrix assemble_T_joint(const ModelParams& p, int d, int particle) {
  p.validate();
  if (particle < 0 || particle >= p.M) throw ContractError("assemble_T_joint: particle index out of range");
  OperatorMatrix T = OperatorMatrix::zero(joint_basis(p, d), "T_" + std::to_string(particle + 1));
  add_thermostat(T, d, particle, 1.0);
  return T;
}

OperatorMatrix assemble_pair_rotation(PairKind kind, int i, int j, const ModelParams& p, int d) {
  p.validate();
  int a = 0, b = 0;
  std::string name;
  switch (kind) {
    case PairKind::System:
      if (i < 0 || j <= i || j >= p.M) throw ContractError("assemble_pair_rotation: invalid system pair");
      a = i;
      b = j;
      name = "R^S";
      break;
    case PairKind::Reservoir:
      if (i < 0 || j <= i || j >= p.N) throw ContractError("assemble_pair_rotation: invalid reservoir pair");
      a = p.M + i;
      b = p.M + j;
      name = "R^R";
      break;
    case PairKind::Interaction:
      if (i < 0 || i >= p.M || j < 0 || j >= p.N) throw ContractError("assemble_pair_rotation: invalid interaction pair");
      a = i;
      b = p.M + j;
      name = "R^I";
      break;
  }
  OperatorMatrix R = OperatorMatrix::zero(joint_basis(p, d), name + "_" + std::to_string(i + 1) + std::to_string(j + 1));
  add_pair(R, d, a, b, 1.0);
  return R;
}

OperatorMatrix assemble_generator(SystemKind kind, const ModelParams& p, int d) {
  p.validate();
  OperatorMatrix G = OperatorMatrix::zero(joint_basis(p, d), kind == SystemKind::RSystem ? "L" : "Lbar");
  double loss = 0.0;
  if (p.M >= 2 && p.lambda_S > 0.0) {
    const double s = p.lambda_S / (p.M - 1);
    for (int i = 0; i < p.M; ++i)
      for (int j = i + 1; j < p.M; ++j) {
        add_pair(G, d, i, j, s);
        loss += s;
      }
  }
  if (p.lambda_R > 0.0) {
    const double s = p.lambda_R / (p.N - 1);
    for (int i = 0; i < p.N; ++i)
      for (int j = i + 1; j < p.N; ++j) {
        add_pair(G, d, p.M + i, p.M + j, s);
        loss += s;
      }
  }
  if (p.mu > 0.0) {
    if (kind == SystemKind::RSystem) {
      const double s = p.mu / p.N;
      for (int i = 0; i < p.M; ++i)
        for (int j = 0; j < p.N; ++j) {
          add_pair(G, d, i, p.M + j, s);
          loss += s;
        }
    } else {
      for (int i = 0; i < p.M; ++i) {
        add_thermostat(G, d, i, p.mu);
        loss += p.mu;
      }
    }
  }
  for (auto& b : G.blocks) b.diagonal().array() -= loss;
  return G;
}

Lemma2Result verify_lemma2(const HermiteCoeffs& u, const ModelParams& p, int d, int particle) {
  p.validate();
  if (u.basis()->num_vars() != 3 * p.M) throw ContractError("verify_lemma2: u must live on the 3M-variable basis");
  if (particle < 0 || particle >= p.M) throw ContractError("verify_lemma2: particle index out of range");
  const auto basis = joint_basis(p, d);
  const HermiteCoeffs uj = embed(u, basis, 0);

  OperatorMatrix avg = OperatorMatrix::zero(basis, "mean_j R^I");
  for (int j = 0; j < p.N; ++j) add_pair(avg, d, particle, p.M + j, 1.0 / p.N);
  OperatorMatrix first = OperatorMatrix::zero(basis, "R^I_i1");
  add_pair(first, d, particle, p.M, 1.0);
  OperatorMatrix T = OperatorMatrix::zero(basis, "T_i");
  add_thermostat(T, d, particle, 1.0);

  const Eigen::VectorXd& c = uj.values();
  const Eigen::VectorXd tu = T.apply(c);
  const Eigen::VectorXd au = avg.apply(c);
  const Eigen::VectorXd r1 = first.apply(c);

  Lemma2Result r;
  r.lhs = (au - tu).squaredNorm();
  r.rhs = (c.dot(tu) - tu.squaredNorm()) / p.N;
  r.rhs_second_moment = (r1.squaredNorm() - tu.squaredNorm()) / p.N;
  return r;
}

Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& a) {
  if (a.size() == 0) return {};
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (a + a.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double spectral_gap(const OperatorMatrix& G, const OperatorMatrix& invariant_projector) {
  check_same(G, invariant_projector);
  double top = -std::numeric_limits<double>::infinity();
  bool any = false;
  for (size_t m = 0; m < G.blocks.size(); ++m) {
    const auto& R = invariant_projector.blocks[m];
    if (R.size() == 0) continue;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (R + R.transpose()));
    std::vector<Eigen::Index> cols;
    for (Eigen::Index i = 0; i < R.rows(); ++i) {
      if (es.eigenvalues()(i) < 0.5) cols.push_back(i);
    }
    if (cols.empty()) continue;
    Eigen::MatrixXd Q(R.rows(), static_cast<Eigen::Index>(cols.size()));
    for (size_t c = 0; c < cols.size(); ++c) Q.col(static_cast<Eigen::Index>(c)) = es.eigenvectors().col(cols[c]);
    const Eigen::MatrixXd H = Q.transpose() * G.blocks[m] * Q;
    top = std::max(top, symmetric_eigenvalues(H).maxCoeff());
    any = true;
  }
  if (!any) throw ContractError("spectral_gap: orthogonal complement of the invariant functions is empty");
  const double k = -top;
  if (!(k > 0.0)) throw NumericalError("spectral_gap: estimated gap is not positive");
  return k;
}

}  // namespace kacbath
