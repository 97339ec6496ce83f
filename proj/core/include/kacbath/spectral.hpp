#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kacbath/hermite.hpp"
#include "kacbath/kinematics.hpp"

namespace kacbath {

/// A linear operator on a truncated Hermite space that maps each total
/// degree to itself, stored as one dense block per degree. Cross-degree
/// entries are zero by construction.
struct OperatorMatrix {
  std::string name;
  BasisPtr basis;
  std::vector<Eigen::MatrixXd> blocks;

  static OperatorMatrix zero(BasisPtr basis, std::string name);
  static OperatorMatrix identity(BasisPtr basis, std::string name);

  int max_degree() const { return static_cast<int>(blocks.size()) - 1; }
  size_t dim() const { return basis->size(); }

  Eigen::VectorXd apply(const Eigen::VectorXd& c) const;
  HermiteCoeffs apply(const HermiteCoeffs& h) const;

  OperatorMatrix& operator+=(const OperatorMatrix& o);
  OperatorMatrix& operator-=(const OperatorMatrix& o);
  OperatorMatrix& operator*=(double s);
  friend OperatorMatrix operator+(OperatorMatrix a, const OperatorMatrix& b) { return a += b; }
  friend OperatorMatrix operator-(OperatorMatrix a, const OperatorMatrix& b) { return a -= b; }
  friend OperatorMatrix operator*(double s, OperatorMatrix a) { return a *= s; }
  friend OperatorMatrix operator*(const OperatorMatrix& a, const OperatorMatrix& b);

  OperatorMatrix transpose() const;

  /// max |A - A^T| over all blocks.
  double asymmetry() const;
  /// Largest singular value over all blocks.
  double operator_norm() const;
  Eigen::MatrixXd dense() const;
};

/// Dense row-major file: first line "rows cols", then one row per line
/// with 17 significant digits.
void write_matrix_file(const std::filesystem::path& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_file(const std::filesystem::path& path);

/// Blocks of h ↦ h(O·) for an orthogonal O on a local basis: entry
/// (α, β) = ⟨ĥ_α, ĥ_β(O·)⟩ for |α| = |β|. Computed by expanding
/// (Oz)^β into monomials; an orthogonal substitution maps each Hermite
/// degree onto itself, so the top-degree coefficients determine the block.
std::vector<Eigen::MatrixXd> substitution_blocks(const Eigen::MatrixXd& orthogonal, const HermiteBasis& local);

/// The 6 x 6 orthogonal map of a pair collision with orientation Ω acting
/// on (a, b).
Eigen::MatrixXd collision_matrix(const Vec3& omega);

/// Average over Ω ∈ S² of the collision substitution on the 6-variable
/// basis (a then b) up to degree d. Shared by every pair operator. The
/// spherical rule is refined by doubling until successive results agree to
/// 1e-10; NumericalError if they still differ by more than 1e-8.
/// Cached per d.
const std::vector<Eigen::MatrixXd>& pair_average_blocks(int d);

/// Thermostat average T on the 3-variable basis of one particle, up to
/// degree d. Taken from pair_average_blocks restricted to partner degree 0
/// and cross-checked against direct Gauss-Hermite x sphere quadrature when
/// `cross_check` is set (NumericalError on disagreement beyond 1e-8).
/// Cached per d.
const std::vector<Eigen::MatrixXd>& thermostat_blocks(int d, bool cross_check = true);

/// Full (all degrees, including cross-degree entries) matrix of T on the
/// 3-variable basis by Gauss-Hermite x sphere quadrature. Test oracle for
/// degree preservation.
Eigen::MatrixXd thermostat_matrix_by_quadrature(int d);

/// Adds scale * (local operator lifted onto `vars`) to `target`. Local
/// variable q of `local` corresponds to target variable vars[q].
void add_lifted(OperatorMatrix& target, const std::vector<Eigen::MatrixXd>& local_blocks, const HermiteBasis& local,
                std::span<const int> vars, double scale);

/// T_i on the 3M-variable system basis.
OperatorMatrix assemble_T(int M, int d, int particle = 0);
/// T_i on the joint 3(M+N)-variable basis, acting on system particle i.
OperatorMatrix assemble_T_joint(const ModelParams& p, int d, int particle = 0);

enum class PairKind { System, Reservoir, Interaction };

/// R^S_ij, R^R_ij or R^I_ij on the joint basis. For System and Reservoir
/// i < j index particles of that group; for Interaction i is a system and j
/// a reservoir particle (0-based).
OperatorMatrix assemble_pair_rotation(PairKind kind, int i, int j, const ModelParams& p, int d);

/// Generator on the joint basis: RSystem gives 𝓛 = 𝓛_S + 𝓛_R + 𝓛_I,
/// TSystem gives 𝓛̄ = 𝓛_S + 𝓛_R + 𝓛_T (the thermostat term touches only v).
OperatorMatrix assemble_generator(SystemKind kind, const ModelParams& p, int d);

struct Lemma2Result {
  double lhs = 0.0;  // ||(1/N) Σ_j R^I_ij u - T_i u||²
  double rhs = 0.0;  // (1/N)(<u, T_i u> - <T_i u, T_i u>)
  /// (1/N)(<R^I_i1 u, R^I_i1 u> - <T_i u, T_i u>): the value lhs takes
  /// exactly, since the pair average is not idempotent.
  double rhs_second_moment = 0.0;
  double abs_diff() const { return std::abs(lhs - rhs); }
};

/// Both sides of the variance identity for u on the 3M-variable basis,
/// evaluated with assembled matrices on the joint basis of degree d.
Lemma2Result verify_lemma2(const HermiteCoeffs& u, const ModelParams& p, int d, int particle = 0);

/// S ↦ ∫ A_Ω^{⊗m} S dΩ with A_Ω = I - Ω⊗Ω, as a 3^m x 3^m matrix.
struct TensorOperator {
  int degree = 0;
  Eigen::MatrixXd matrix;
};

/// Built from even sphere moments and cross-checked against the product
/// spherical rule (NumericalError beyond 1e-10). ContractError if m > 6.
TensorOperator tensor_T(int m);

/// Orthonormal basis (columns) of the symmetric tensors in (R^3)^{⊗m},
/// one column per exponent triple in HermiteBasis(3, m) block order.
Eigen::MatrixXd symmetric_tensor_basis(int m);

/// Eigenvalues (ascending) of a symmetric matrix.
Eigen::VectorXd symmetric_eigenvalues(const Eigen::MatrixXd& a);

/// k̂ = -(largest eigenvalue of G on the orthogonal complement of the range
/// of `invariant_projector`), over all degree blocks. ContractError if the
/// complement is empty; NumericalError if k̂ <= 0.
double spectral_gap(const OperatorMatrix& G, const OperatorMatrix& invariant_projector);

}  // namespace kacbath
