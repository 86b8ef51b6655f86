#include "holiv/matalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace holiv {

const char* err_name(Err e) {
  switch (e) {
    case Err::SingularInput: return "SingularInput";
    case Err::ZeroMatrix: return "ZeroMatrix";
    case Err::IllConditioned: return "IllConditioned";
    case Err::SpanNotSaturated: return "SpanNotSaturated";
    case Err::NotIrreducible: return "NotIrreducible";
    case Err::DimensionMismatch: return "DimensionMismatch";
    case Err::DegenerateZ: return "DegenerateZ";
    case Err::MissingWord: return "MissingWord";
    case Err::NotHyperbolic: return "NotHyperbolic";
    case Err::TooFar: return "TooFar";
    case Err::JumpTooLarge: return "JumpTooLarge";
    case Err::BudgetExceeded: return "BudgetExceeded";
    case Err::NotOnStableLeaf: return "NotOnStableLeaf";
    case Err::TolUnreachable: return "TolUnreachable";
    case Err::RankMismatch: return "RankMismatch";
    case Err::EmptyOrbitList: return "EmptyOrbitList";
    case Err::InsufficientPowers: return "InsufficientPowers";
    case Err::NearSingularNode: return "NearSingularNode";
    case Err::CoverGap: return "CoverGap";
    case Err::EmptyChart: return "EmptyChart";
    case Err::DegenerateBasis: return "DegenerateBasis";
    case Err::ParseError: return "ParseError";
    case Err::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace holiv

namespace holiv::matalg {

const Tolerances& tolerances() {
  static const Tolerances t{};
  return t;
}

// ---------------------------------------------------------------------------
// One-sided Jacobi SVD.
//
// Works on the columns of a working copy W of M (transposing first if
// rows < cols), zeroing the off-diagonal Gram entries pair by pair in a fixed
// cyclic order. On convergence the columns of W are orthogonal; their norms
// are the singular values and V accumulates the applied rotations, giving
// M = U diag(sigma) V^*.
// ---------------------------------------------------------------------------
namespace {

Svd jacobi_svd_tall(const CMatrix& M) {
  const Eigen::Index m = M.rows(), n = M.cols();
  CMatrix W = M;
  CMatrix V = CMatrix::Identity(n, n);

  const double scale = std::max(1.0, W.norm());
  const double off_tol = 1e-15 * scale * scale;
  const int max_sweeps = 64;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double max_off = 0.0;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) {
        const double app = W.col(p).squaredNorm();
        const double aqq = W.col(q).squaredNorm();
        Complex apq = W.col(p).dot(W.col(q));  // conj(p)^T q
        const double mag = std::abs(apq);
        max_off = std::max(max_off, mag);
        if (mag <= off_tol || mag <= 1e-18 * std::sqrt(app * aqq)) continue;

        // Phase-align column q so the coupling becomes real positive, then
        // apply the classic symmetric Jacobi rotation for [[app, |apq|],
        // [|apq|, aqq]].
        const Complex phase = apq / mag;
        const double tau = (aqq - app) / (2.0 * mag);
        const double t = (tau >= 0 ? 1.0 : -1.0) /
                         (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;

        for (Eigen::Index r = 0; r < m; ++r) {
          const Complex wp = W(r, p);
          const Complex wq = W(r, q) * std::conj(phase);
          W(r, p) = c * wp - s * wq;
          W(r, q) = s * wp + c * wq;
        }
        for (Eigen::Index r = 0; r < n; ++r) {
          const Complex vp = V(r, p);
          const Complex vq = V(r, q) * std::conj(phase);
          V(r, p) = c * vp - s * vq;
          V(r, q) = s * vp + c * vq;
        }
      }
    }
    if (max_off <= off_tol) break;
  }

  Eigen::VectorXd sigma(n);
  for (Eigen::Index j = 0; j < n; ++j) sigma(j) = W.col(j).norm();

  // Sort descending (stable on ties to keep determinism).
  std::vector<Eigen::Index> order(static_cast<size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return sigma(a) > sigma(b);
  });

  Svd out;
  out.U = CMatrix::Zero(m, n);
  out.V = CMatrix::Zero(n, n);
  out.sigma = Eigen::VectorXd::Zero(n);
  const double rank_floor = 1e-300;
  Eigen::Index filled = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = order[static_cast<size_t>(j)];
    out.sigma(j) = sigma(src);
    out.V.col(j) = V.col(src);
    if (sigma(src) > rank_floor) {
      out.U.col(j) = W.col(src) / sigma(src);
      filled = j + 1;
    }
  }
  // Orthonormal completion for null columns: Gram-Schmidt standard basis
  // vectors against what is already there (deterministic order).
  for (Eigen::Index j = filled; j < n; ++j) {
    for (Eigen::Index cand = 0; cand < m; ++cand) {
      Eigen::VectorXcd v = Eigen::VectorXcd::Zero(m);
      v(cand) = 1.0;
      for (Eigen::Index k = 0; k < j; ++k)
        v -= out.U.col(k) * (out.U.col(k).dot(v));
      const double nv = v.norm();
      if (nv > 1e-6) {
        out.U.col(j) = v / nv;
        break;
      }
    }
  }
  return out;
}

}  // namespace

Svd jacobi_svd(const CMatrix& M) {
  if (M.rows() >= M.cols()) return jacobi_svd_tall(M);
  // Wide case: factor the adjoint and swap the roles of U and V.
  Svd t = jacobi_svd_tall(M.adjoint());
  Svd out;
  out.U = t.V;
  out.V = t.U;
  out.sigma = t.sigma;
  return out;
}

UnitaryMatrix polar_unitary(const CMatrix& Q, double tol) {
  if (Q.rows() != Q.cols())
    fail(Err::InvalidArgument, "polar_unitary: matrix must be square");
  Svd svd = jacobi_svd(Q);
  const double smin = svd.sigma(svd.sigma.size() - 1);
  if (smin <= tol)
    fail(Err::SingularInput,
         "polar_unitary: smallest singular value " + std::to_string(smin) +
             " <= tol");
  UnitaryMatrix u;
  return UnitaryMatrix::certify(svd.U * svd.V.adjoint());
}

double operator_norm(const CMatrix& M) {
  if (M.size() == 0) return 0.0;
  if (M.norm() == 0.0) return 0.0;
  Svd svd = jacobi_svd(M);
  return svd.sigma(0);
}

std::pair<CVector, double> top_singular_vector(const CMatrix& M) {
  if (M.size() == 0 || M.norm() <= 0.0)
    fail(Err::ZeroMatrix, "top_singular_vector: zero matrix");
  Svd svd = jacobi_svd(M);
  return {svd.V.col(0), svd.sigma(0)};
}

Complex frobenius_inner(const CMatrix& a, const CMatrix& b) {
  return (a.adjoint() * b).trace();
}

CVector gram_solve(const std::vector<CMatrix>& basis, const CMatrix& target) {
  if (basis.empty()) fail(Err::InvalidArgument, "gram_solve: empty basis");
  const Eigen::Index n = static_cast<Eigen::Index>(basis.size());
  CMatrix G(n, n);
  CVector rhs(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j)
      G(i, j) = frobenius_inner(basis[static_cast<size_t>(i)],
                                basis[static_cast<size_t>(j)]);
    rhs(i) = frobenius_inner(basis[static_cast<size_t>(i)], target);
  }
  G = (0.5 * (G + G.adjoint())).eval();

  Svd gsvd = jacobi_svd(G);
  const double smax = gsvd.sigma(0);
  const double smin = gsvd.sigma(gsvd.sigma.size() - 1);
  if (smax <= 0.0 || smin <= 0.0 ||
      smax / smin >= tolerances().gram_condition_bound)
    fail(Err::IllConditioned,
         "gram_solve: Gram condition number exceeds bound");

  Eigen::LDLT<CMatrix> ldlt(G);
  return ldlt.solve(rhs);
}

UnitaryMatrix UnitaryMatrix::certify(CMatrix m) {
  if (m.rows() != m.cols())
    fail(Err::InvalidArgument, "UnitaryMatrix: must be square");
  const Eigen::Index n = m.rows();
  double defect =
      operator_norm(m.adjoint() * m - CMatrix::Identity(n, n));
  if (defect > tolerances().construction) {
    Svd svd = jacobi_svd(m);
    if (svd.sigma(n - 1) <= 1e-8)
      fail(Err::SingularInput, "UnitaryMatrix: candidate is singular");
    m = svd.U * svd.V.adjoint();
    defect = operator_norm(m.adjoint() * m - CMatrix::Identity(n, n));
  }
  UnitaryMatrix u;
  u.m_ = std::move(m);
  u.defect_ = defect;
  return u;
}

CMatrix exp_skew(const CMatrix& S) {
  // iS is Hermitian: diagonalize and exponentiate the spectrum.
  const Eigen::Index n = S.rows();
  CMatrix H = Complex(0, 1) * S;
  H = (0.5 * (H + H.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
  CVector phases(n);
  for (Eigen::Index k = 0; k < n; ++k)
    phases(k) = std::exp(Complex(0, -es.eigenvalues()(k)));
  return es.eigenvectors() * phases.asDiagonal() *
         es.eigenvectors().adjoint();
}

}  // namespace holiv::matalg
