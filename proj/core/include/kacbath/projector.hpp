#pragma once

#include <cstdint>
#include <functional>
#include <ostream>
#include <vector>

#include "kacbath/frame.hpp"
#include "kacbath/hermite.hpp"
#include "kacbath/randomness.hpp"
#include "kacbath/spectral.hpp"

namespace kacbath {

struct BoundConstant {
  int M = 0;
  int N = 0;
  double C = 0.0;
};

/// C = √(3M/(3N-5)) + √(((M+N)/N)³ - 1). ContractError unless M >= 1 and
/// 3N - 5 > 0.
BoundConstant lemma1_constant(int M, int N);

using JointFunction = std::function<double(const JointState&)>;

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
};

/// (1/n) Σ h(O_k s) over Haar rotations O_k fixing the momentum directions.
McEstimate apply_R_mc(const JointFunction& h, const MomentumFrame& frame, const JointState& s, std::int64_t n,
                      RngStream& rng);

struct RatioOptions {
  int inner = 8;                       // rotations per outer state
  std::int64_t max_samples = 10'000'000;  // rotation draws, outer * inner
  double rel_target = 0.05;            // stop once std_error < rel_target * C
  std::int64_t chunk_outer = 4096;     // outer states per chunk (one stream each)
  std::uint64_t seed = 1;
  int threads = 1;
};

struct RatioEstimate {
  int M = 0;
  int N = 0;
  double C = 0.0;
  double ratio = 0.0;
  double std_error = 0.0;
  std::int64_t samples = 0;
  double h_norm = 0.0;  // exact ||h - 1||
};

/// Monte Carlo ||R[h] - 1|| / ||h - 1|| for h on the 3M system variables.
///
/// Outer states z ~ Γ on R^{3(M+N)}; for each, `inner` points are drawn
/// uniformly from the orbit {Oz}, i.e. z keeps its momentum component and
/// its complement part is replaced by a uniform direction of the same
/// length. ((Σa)² - Σa²)/(n(n-1)) over the inner values a = h - 1 is an
/// unbiased estimate of (R[h](z) - 1)². The square root and its standard
/// error come from the delta method. Sampling continues chunk by chunk until
/// the target or max_samples is reached; the result is deterministic in
/// (seed, chunk_outer) and independent of `threads`.
RatioEstimate estimate_lemma1_ratio(const HermiteCoeffs& h, int M, int N, const RatioOptions& opt);

/// One line per estimate: M,N,C,ratio,stderr,samples.
void write_ratio_csv(std::ostream& out, const std::vector<RatioEstimate>& rows);

struct GaussianIdentity {
  double numeric = 0.0;
  double exact = 0.0;
};

/// ∫∫∫ n(s,V)² Γ du ds dV against ((M+N)/N)³. The 6-dimensional kernel is a
/// product over coordinates of one 2-dimensional Gaussian, integrated here
/// by nested double-exponential (sinh-sinh) quadrature and cubed. M = 0 is allowed
/// (n ≡ 1). NumericalError if the quadrature error estimate exceeds 1e-12.
GaussianIdentity verify_gaussian_identity(int M, int N);

/// Orthonormal basis (columns, one matrix per degree block) of the
/// rotation-invariant functions inside the degree-d joint Hermite space.
/// Block m is spanned by the homogeneous invariants (g·z)^a |z|^{2b},
/// |a| + 2b = m, carried into Hermite coordinates (monomial coefficient of
/// z^α times √α!).
std::vector<Eigen::MatrixXd> invariant_basis(int M, int N, int d);

/// Orthogonal projection onto the rotation-invariant functions inside the
/// degree-d joint Hermite space, U Uᵀ per block of invariant_basis.
OperatorMatrix invariant_projector(int M, int N, int d);

/// max |G R| over blocks: how far the range of R is from the kernel of G.
double invariant_residual(const OperatorMatrix& G, const OperatorMatrix& R);

/// Number of eigenvalues of G with |λ| <= tol, over all blocks.
int kernel_dimension(const OperatorMatrix& G, double tol = 1e-10);

}  // namespace kacbath
