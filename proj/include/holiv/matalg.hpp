#pragma once

#include <Eigen/Dense>
#include <complex>
#include <utility>
#include <vector>

#include "holiv/error.hpp"

namespace holiv::matalg {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Centralized numerical tolerances. Every module reads these defaults
// instead of sprinkling literals.
struct Tolerances {
  double construction = 1e-10;       // unitarity defect accepted at build time
  double solve = 1e-9;               // residual accepted for span solves
  double gram_condition_bound = 1e12;  // gram_solve refuses beyond this
};

const Tolerances& tolerances();

// Thin wrapper enforcing the unitarity invariant at construction time.
// If the candidate drifts beyond the construction tolerance it is
// re-projected onto the unitary group (polar factor); a genuinely singular
// candidate is a SingularInput error.
class UnitaryMatrix {
 public:
  UnitaryMatrix() = default;
  static UnitaryMatrix certify(CMatrix m);

  const CMatrix& mat() const { return m_; }
  double defect() const { return defect_; }
  Eigen::Index dim() const { return m_.rows(); }

 private:
  CMatrix m_;
  double defect_ = 0.0;
};

// Full SVD M = U * sigma.asDiagonal() * V.adjoint(), singular values
// descending. One-sided Jacobi: deterministic (fixed cyclic pivot order) and
// accurate for the small dense matrices this library works with.
struct Svd {
  CMatrix U;
  Eigen::VectorXd sigma;
  CMatrix V;
};

Svd jacobi_svd(const CMatrix& M);

// Nearest unitary Q(Q*Q)^{-1/2}; composed as U_left * V_right^* from the
// SVD. SingularInput when the smallest singular value is <= tol.
UnitaryMatrix polar_unitary(const CMatrix& Q, double tol);

// Largest singular value.
double operator_norm(const CMatrix& M);

// Unit vector z with ||Mz|| = sigma_max(M), plus that value.
// ZeroMatrix when M vanishes.
std::pair<CVector, double> top_singular_vector(const CMatrix& M);

// Least-squares coefficients c minimizing ||sum_i c_i basis_i - target||_F,
// via the Hermitian Gram system under the Frobenius inner product.
// IllConditioned when the Gram condition number breaches the bound.
CVector gram_solve(const std::vector<CMatrix>& basis, const CMatrix& target);

// Frobenius inner product <A,B> = tr(A^* B).
Complex frobenius_inner(const CMatrix& a, const CMatrix& b);

// exp(S) for skew-Hermitian S, via the Hermitian eigendecomposition of iS.
// Exactly unitary up to rounding.
CMatrix exp_skew(const CMatrix& S);

}  // namespace holiv::matalg
