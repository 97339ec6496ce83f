#include "kacbath/hermite.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "kacbath/errors.hpp"

namespace kacbath {

namespace {

const double kSqrt2Pi = std::sqrt(2.0 * std::numbers::pi);

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

void enumerate_degree(int num_vars, int m, int var, std::vector<int>& cur, std::vector<MultiIndex>& out) {
  if (var == num_vars - 1) {
    cur[static_cast<size_t>(var)] = m;
    out.push_back(MultiIndex{cur, 0});
    cur[static_cast<size_t>(var)] = 0;
    return;
  }
  for (int e = m; e >= 0; --e) {
    cur[static_cast<size_t>(var)] = e;
    enumerate_degree(num_vars, m - e, var + 1, cur, out);
  }
  cur[static_cast<size_t>(var)] = 0;
}

}  // namespace

size_t ExponentHash::operator()(const std::vector<int>& e) const noexcept {
  size_t h = 0xcbf29ce484222325ull;
  for (int x : e) {
    h ^= static_cast<size_t>(x) + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  }
  return h;
}

HermiteBasis::HermiteBasis(int num_vars, int max_degree) : num_vars_(num_vars), max_degree_(max_degree) {
  if (num_vars < 1) throw ContractError("HermiteBasis: num_vars must be >= 1");
  if (max_degree < 0) throw ContractError("HermiteBasis: max_degree must be >= 0");
  std::vector<int> cur(static_cast<size_t>(num_vars), 0);
  for (int m = 0; m <= max_degree; ++m) {
    block_begin_.push_back(elements_.size());
    const size_t first = elements_.size();
    enumerate_degree(num_vars, m, 0, cur, elements_);
    for (size_t i = first; i < elements_.size(); ++i) elements_[i].total_degree = m;
  }
  block_begin_.push_back(elements_.size());

  support_.resize(elements_.size());
  index_.reserve(elements_.size());
  for (size_t i = 0; i < elements_.size(); ++i) {
    const auto& e = elements_[i].exponents;
    for (int k = 0; k < num_vars; ++k) {
      if (e[static_cast<size_t>(k)] > 0) support_[i].emplace_back(k, e[static_cast<size_t>(k)]);
    }
    index_.emplace(e, i);
  }
}

std::optional<size_t> HermiteBasis::find(const std::vector<int>& exponents) const {
  auto it = index_.find(exponents);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

size_t HermiteBasis::index_of(const std::vector<int>& exponents) const {
  auto idx = find(exponents);
  if (!idx) throw ContractError("HermiteBasis: multi-index not in basis");
  return *idx;
}

std::vector<double> HermiteBasis::hermite_table(std::span<const double> z) const {
  if (z.size() != static_cast<size_t>(num_vars_)) throw ContractError("HermiteBasis: point has wrong dimension");
  const int stride = max_degree_ + 1;
  std::vector<double> table(static_cast<size_t>(num_vars_ * stride));
  for (int k = 0; k < num_vars_; ++k) hermite_functions(z[static_cast<size_t>(k)], max_degree_, &table[static_cast<size_t>(k * stride)]);
  return table;
}

Eigen::VectorXd HermiteBasis::evaluate_all(std::span<const double> z) const {
  const auto table = hermite_table(z);
  const int stride = max_degree_ + 1;
  Eigen::VectorXd out(static_cast<Eigen::Index>(size()));
  for (size_t i = 0; i < size(); ++i) {
    double p = 1.0;
    for (const auto& [k, e] : support_[i]) p *= table[static_cast<size_t>(k * stride + e)];
    out(static_cast<Eigen::Index>(i)) = p;
  }
  return out;
}

BasisPtr build_basis(int num_vars, int max_degree) { return std::make_shared<const HermiteBasis>(num_vars, max_degree); }

void hermite_functions(double x, int nmax, double* out) {
  const double y = kSqrt2Pi * x;
  out[0] = 1.0;
  if (nmax >= 1) out[1] = y;
  for (int n = 1; n < nmax; ++n) {
    out[n + 1] = (y * out[n] - std::sqrt(static_cast<double>(n)) * out[n - 1]) / std::sqrt(static_cast<double>(n + 1));
  }
}

double hermite_function(int n, double x) {
  std::vector<double> h(static_cast<size_t>(n) + 1);
  hermite_functions(x, n, h.data());
  return h[static_cast<size_t>(n)];
}

HermiteCoeffs::HermiteCoeffs(BasisPtr basis)
    : basis_(std::move(basis)), values_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(basis_->size()))) {}

HermiteCoeffs::HermiteCoeffs(BasisPtr basis, Eigen::VectorXd values) : basis_(std::move(basis)), values_(std::move(values)) {
  if (values_.size() != static_cast<Eigen::Index>(basis_->size())) throw ContractError("HermiteCoeffs: size mismatch");
}

HermiteCoeffs HermiteCoeffs::constant(BasisPtr basis, double c) {
  HermiteCoeffs h(std::move(basis));
  h.values_(0) = c;
  return h;
}

HermiteCoeffs HermiteCoeffs::unit(BasisPtr basis, const std::vector<int>& exponents, double c) {
  HermiteCoeffs h(std::move(basis));
  h[exponents] = c;
  return h;
}

double& HermiteCoeffs::operator[](const std::vector<int>& exponents) {
  return values_(static_cast<Eigen::Index>(basis_->index_of(exponents)));
}

double HermiteCoeffs::at(const std::vector<int>& exponents) const {
  return values_(static_cast<Eigen::Index>(basis_->index_of(exponents)));
}

double HermiteCoeffs::distance_to_one() const {
  Eigen::VectorXd d = values_;
  d(0) -= 1.0;
  return d.norm();
}

double HermiteCoeffs::evaluate(std::span<const double> z) const {
  const auto table = basis_->hermite_table(z);
  const int stride = basis_->max_degree() + 1;
  double sum = 0.0;
  for (size_t i = 0; i < basis_->size(); ++i) {
    const double c = values_(static_cast<Eigen::Index>(i));
    if (c == 0.0) continue;
    double p = c;
    for (const auto& [k, e] : basis_->support(i)) p *= table[static_cast<size_t>(k * stride + e)];
    sum += p;
  }
  return sum;
}

HermiteCoeffs& HermiteCoeffs::operator+=(const HermiteCoeffs& o) {
  if (o.basis_ != basis_ && o.basis_->size() != basis_->size()) throw ContractError("HermiteCoeffs: basis mismatch");
  values_ += o.values_;
  return *this;
}

HermiteCoeffs& HermiteCoeffs::operator-=(const HermiteCoeffs& o) {
  if (o.basis_ != basis_ && o.basis_->size() != basis_->size()) throw ContractError("HermiteCoeffs: basis mismatch");
  values_ -= o.values_;
  return *this;
}

HermiteCoeffs& HermiteCoeffs::operator*=(double s) {
  values_ *= s;
  return *this;
}

double inner(const HermiteCoeffs& a, const HermiteCoeffs& b) {
  if (a.values().size() != b.values().size()) throw ContractError("inner: basis mismatch");
  return a.values().dot(b.values());
}

HermiteCoeffs embed(const HermiteCoeffs& h, const BasisPtr& target, int offset) {
  const auto& src = *h.basis();
  if (offset < 0 || offset + src.num_vars() > target->num_vars()) throw ContractError("embed: variable range out of bounds");
  HermiteCoeffs out(target);
  std::vector<int> e(static_cast<size_t>(target->num_vars()), 0);
  for (size_t i = 0; i < src.size(); ++i) {
    const double c = h.values()(static_cast<Eigen::Index>(i));
    if (c == 0.0) continue;
    std::fill(e.begin(), e.end(), 0);
    for (int k = 0; k < src.num_vars(); ++k) e[static_cast<size_t>(offset + k)] = src[i].exponents[static_cast<size_t>(k)];
    auto idx = target->find(e);
    if (!idx) throw ContractError("embed: target degree cap too small");
    out.values()(static_cast<Eigen::Index>(*idx)) += c;
  }
  return out;
}

// --- Polynomial ---

Polynomial Polynomial::constant(int num_vars, double c) {
  Polynomial p(num_vars);
  p.add_term(std::vector<int>(static_cast<size_t>(num_vars), 0), c);
  return p;
}

Polynomial Polynomial::variable(int num_vars, int k) {
  std::vector<int> e(static_cast<size_t>(num_vars), 0);
  e[static_cast<size_t>(k)] = 1;
  return monomial(e);
}

Polynomial Polynomial::monomial(const std::vector<int>& exponents, double c) {
  Polynomial p(static_cast<int>(exponents.size()));
  p.add_term(exponents, c);
  return p;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& [e, c] : terms_) {
    int s = 0;
    for (int x : e) s += x;
    d = std::max(d, s);
  }
  return d;
}

Polynomial Polynomial::homogeneous_part(int m) const {
  Polynomial out(num_vars_);
  for (const auto& [e, c] : terms_) {
    int s = 0;
    for (int x : e) s += x;
    if (s == m) out.terms_.emplace(e, c);
  }
  return out;
}

void Polynomial::add_term(const std::vector<int>& exponents, double c) {
  if (exponents.size() != static_cast<size_t>(num_vars_)) throw ContractError("Polynomial: exponent length mismatch");
  if (c == 0.0) return;
  auto [it, inserted] = terms_.emplace(exponents, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0.0) terms_.erase(it);
  }
}

double Polynomial::evaluate(std::span<const double> z) const {
  double sum = 0.0;
  for (const auto& [e, c] : terms_) {
    double t = c;
    for (size_t k = 0; k < e.size(); ++k) {
      for (int r = 0; r < e[k]; ++r) t *= z[k];
    }
    sum += t;
  }
  return sum;
}

Polynomial& Polynomial::operator+=(const Polynomial& o) {
  for (const auto& [e, c] : o.terms_) add_term(e, c);
  return *this;
}

Polynomial& Polynomial::operator-=(const Polynomial& o) {
  for (const auto& [e, c] : o.terms_) add_term(e, -c);
  return *this;
}

Polynomial& Polynomial::operator*=(double s) {
  if (s == 0.0) {
    terms_.clear();
    return *this;
  }
  for (auto& [e, c] : terms_) c *= s;
  return *this;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  if (a.num_vars_ != b.num_vars_) throw ContractError("Polynomial: variable count mismatch");
  Polynomial out(a.num_vars_);
  std::vector<int> e(static_cast<size_t>(a.num_vars_));
  for (const auto& [ea, ca] : a.terms_) {
    for (const auto& [eb, cb] : b.terms_) {
      for (size_t k = 0; k < e.size(); ++k) e[k] = ea[k] + eb[k];
      out.add_term(e, ca * cb);
    }
  }
  return out;
}

Polynomial Polynomial::pow(int n) const {
  Polynomial out = constant(num_vars_, 1.0);
  for (int i = 0; i < n; ++i) out = out * *this;
  return out;
}

HermiteCoeffs to_hermite(const Polynomial& p, const BasisPtr& basis) {
  if (p.num_vars() != basis->num_vars()) throw ContractError("to_hermite: variable count mismatch");
  if (p.degree() > basis->max_degree()) throw ContractError("to_hermite: polynomial degree exceeds basis cap");

  // x^n = (2π)^{-n/2} Σ_j n! / (2^j j! (n-2j)!) √((n-2j)!) ĥ_{n-2j}(x)
  const int d = basis->max_degree();
  std::vector<std::vector<std::pair<int, double>>> power_expansion(static_cast<size_t>(d) + 1);
  for (int n = 0; n <= d; ++n) {
    const double scale = std::pow(2.0 * std::numbers::pi, -0.5 * n);
    for (int j = 0; 2 * j <= n; ++j) {
      const double c = factorial(n) / (std::pow(2.0, j) * factorial(j) * factorial(n - 2 * j)) * std::sqrt(factorial(n - 2 * j));
      power_expansion[static_cast<size_t>(n)].emplace_back(n - 2 * j, scale * c);
    }
  }

  HermiteCoeffs out(basis);
  const int K = basis->num_vars();
  std::vector<int> idx(static_cast<size_t>(K));
  for (const auto& [e, coeff] : p.terms()) {
    std::vector<int> vars;
    for (int k = 0; k < K; ++k) {
      if (e[static_cast<size_t>(k)] > 0) vars.push_back(k);
    }
    // Cartesian product over the per-variable expansions.
    std::vector<size_t> pos(vars.size(), 0);
    for (;;) {
      std::fill(idx.begin(), idx.end(), 0);
      double c = coeff;
      for (size_t q = 0; q < vars.size(); ++q) {
        const auto& [deg, w] = power_expansion[static_cast<size_t>(e[static_cast<size_t>(vars[q])])][pos[q]];
        idx[static_cast<size_t>(vars[q])] = deg;
        c *= w;
      }
      out.values()(static_cast<Eigen::Index>(basis->index_of(idx))) += c;
      size_t q = 0;
      for (; q < vars.size(); ++q) {
        if (++pos[q] < power_expansion[static_cast<size_t>(e[static_cast<size_t>(vars[q])])].size()) break;
        pos[q] = 0;
      }
      if (q == vars.size()) break;
    }
  }
  return out;
}

Polynomial to_polynomial(const HermiteCoeffs& h) {
  const auto& basis = *h.basis();
  const int d = basis.max_degree();
  // ĥ_n(x) = Σ_j (-1)^j n! / (2^j j! (n-2j)!) (2π)^{(n-2j)/2} x^{n-2j} / √(n!)
  std::vector<std::vector<std::pair<int, double>>> hermite_expansion(static_cast<size_t>(d) + 1);
  for (int n = 0; n <= d; ++n) {
    for (int j = 0; 2 * j <= n; ++j) {
      const double c = (j % 2 == 0 ? 1.0 : -1.0) * factorial(n) / (std::pow(2.0, j) * factorial(j) * factorial(n - 2 * j)) *
                       std::pow(2.0 * std::numbers::pi, 0.5 * (n - 2 * j)) / std::sqrt(factorial(n));
      hermite_expansion[static_cast<size_t>(n)].emplace_back(n - 2 * j, c);
    }
  }
  const int K = basis.num_vars();
  Polynomial out(K);
  std::vector<int> e(static_cast<size_t>(K));
  for (size_t i = 0; i < basis.size(); ++i) {
    const double coeff = h.values()(static_cast<Eigen::Index>(i));
    if (coeff == 0.0) continue;
    const auto& sup = basis.support(i);
    std::vector<size_t> pos(sup.size(), 0);
    for (;;) {
      std::fill(e.begin(), e.end(), 0);
      double c = coeff;
      for (size_t q = 0; q < sup.size(); ++q) {
        const auto& [deg, w] = hermite_expansion[static_cast<size_t>(sup[q].second)][pos[q]];
        e[static_cast<size_t>(sup[q].first)] = deg;
        c *= w;
      }
      out.add_term(e, c);
      size_t q = 0;
      for (; q < sup.size(); ++q) {
        if (++pos[q] < hermite_expansion[static_cast<size_t>(sup[q].second)].size()) break;
        pos[q] = 0;
      }
      if (q == sup.size()) break;
    }
  }
  return out;
}

}  // namespace kacbath
