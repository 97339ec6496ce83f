#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

namespace kacbath {

/// Exponents of a product of one-variable Hermite functions.
struct MultiIndex {
  std::vector<int> exponents;
  int total_degree = 0;
};

struct ExponentHash {
  size_t operator()(const std::vector<int>& e) const noexcept;
};

/// Orthonormal Hermite functions of the Γ-weighted L² space on R^K,
/// truncated at total degree d.
///
/// One variable: ĥ_n(x) = He_n(x√(2π)) / √(n!), where He_n are the
/// probabilists' Hermite polynomials; these are orthonormal under
/// exp(-πx²)dx. Multi-variable functions are products. Elements are ordered
/// by total degree, then lexicographically descending in the exponents, so
/// each degree occupies one contiguous block.
class HermiteBasis {
 public:
  HermiteBasis(int num_vars, int max_degree);

  int num_vars() const { return num_vars_; }
  int max_degree() const { return max_degree_; }
  size_t size() const { return elements_.size(); }

  const MultiIndex& operator[](size_t i) const { return elements_[i]; }
  const std::vector<MultiIndex>& elements() const { return elements_; }

  size_t block_begin(int m) const { return block_begin_[static_cast<size_t>(m)]; }
  size_t block_size(int m) const { return block_begin_[static_cast<size_t>(m) + 1] - block_begin_[static_cast<size_t>(m)]; }

  std::optional<size_t> find(const std::vector<int>& exponents) const;
  /// Throws ContractError if the exponents are not in the basis.
  size_t index_of(const std::vector<int>& exponents) const;

  /// Nonzero (variable, exponent) pairs of element i.
  const std::vector<std::pair<int, int>>& support(size_t i) const { return support_[i]; }

  /// Values ĥ_0..ĥ_d of every variable at z, laid out [var * (d+1) + n].
  std::vector<double> hermite_table(std::span<const double> z) const;

  /// Evaluates all basis functions at z.
  Eigen::VectorXd evaluate_all(std::span<const double> z) const;

 private:
  int num_vars_;
  int max_degree_;
  std::vector<MultiIndex> elements_;
  std::vector<std::vector<std::pair<int, int>>> support_;
  std::vector<size_t> block_begin_;
  std::unordered_map<std::vector<int>, size_t, ExponentHash> index_;
};

using BasisPtr = std::shared_ptr<const HermiteBasis>;

/// All multi-indices over `num_vars` variables with total degree <= d.
BasisPtr build_basis(int num_vars, int max_degree);

/// ĥ_n(x) for one variable.
double hermite_function(int n, double x);

/// Fills out[0..nmax] with ĥ_0(x)..ĥ_nmax(x).
void hermite_functions(double x, int nmax, double* out);

/// Coefficients of a function in an orthonormal Hermite basis. Because the
/// basis is orthonormal, the Γ-norm is the Euclidean norm of `values`.
class HermiteCoeffs {
 public:
  explicit HermiteCoeffs(BasisPtr basis);
  HermiteCoeffs(BasisPtr basis, Eigen::VectorXd values);

  static HermiteCoeffs constant(BasisPtr basis, double c = 1.0);
  static HermiteCoeffs unit(BasisPtr basis, const std::vector<int>& exponents, double c = 1.0);

  const BasisPtr& basis() const { return basis_; }
  const Eigen::VectorXd& values() const { return values_; }
  Eigen::VectorXd& values() { return values_; }

  double& operator[](const std::vector<int>& exponents);
  double at(const std::vector<int>& exponents) const;

  /// <h, 1>.
  double constant_term() const { return values_(0); }
  double norm() const { return values_.norm(); }
  /// ||h - 1||.
  double distance_to_one() const;

  double evaluate(std::span<const double> z) const;

  HermiteCoeffs& operator+=(const HermiteCoeffs& o);
  HermiteCoeffs& operator-=(const HermiteCoeffs& o);
  HermiteCoeffs& operator*=(double s);
  friend HermiteCoeffs operator+(HermiteCoeffs a, const HermiteCoeffs& b) { return a += b; }
  friend HermiteCoeffs operator-(HermiteCoeffs a, const HermiteCoeffs& b) { return a -= b; }
  friend HermiteCoeffs operator*(double s, HermiteCoeffs a) { return a *= s; }

 private:
  BasisPtr basis_;
  Eigen::VectorXd values_;
};

double inner(const HermiteCoeffs& a, const HermiteCoeffs& b);

/// Re-expresses h on a basis with more variables (and possibly a higher
/// degree cap). Source variable k maps to target variable offset + k.
HermiteCoeffs embed(const HermiteCoeffs& h, const BasisPtr& target, int offset = 0);

/// Sparse polynomial in monomials x^α.
class Polynomial {
 public:
  using Terms = std::map<std::vector<int>, double>;

  explicit Polynomial(int num_vars) : num_vars_(num_vars) {}

  static Polynomial constant(int num_vars, double c);
  static Polynomial variable(int num_vars, int k);
  static Polynomial monomial(const std::vector<int>& exponents, double c = 1.0);

  int num_vars() const { return num_vars_; }
  const Terms& terms() const { return terms_; }
  int degree() const;

  /// Terms of exactly total degree m.
  Polynomial homogeneous_part(int m) const;

  void add_term(const std::vector<int>& exponents, double c);
  double evaluate(std::span<const double> z) const;

  Polynomial& operator+=(const Polynomial& o);
  Polynomial& operator-=(const Polynomial& o);
  Polynomial& operator*=(double s);
  friend Polynomial operator+(Polynomial a, const Polynomial& b) { return a += b; }
  friend Polynomial operator-(Polynomial a, const Polynomial& b) { return a -= b; }
  friend Polynomial operator*(double s, Polynomial a) { return a *= s; }
  friend Polynomial operator*(const Polynomial& a, const Polynomial& b);

  Polynomial pow(int n) const;

 private:
  int num_vars_;
  Terms terms_;
};

/// Exact Hermite expansion of a polynomial. Throws ContractError if the
/// polynomial's degree exceeds the basis cap or the variable counts differ.
HermiteCoeffs to_hermite(const Polynomial& p, const BasisPtr& basis);

/// Monomial expansion of a Hermite coefficient vector.
Polynomial to_polynomial(const HermiteCoeffs& h);

}  // namespace kacbath
