#include "doctest.h"

#include <Eigen/Dense>
#include <complex>
#include <vector>

#include "holiv/matalg.hpp"
#include "holiv/rng.hpp"

using namespace holiv;
using matalg::CMatrix;
using matalg::Complex;
using matalg::CVector;

// ===========================================================================
// Independent oracles.
//
// These deliberately avoid the library's SVD path: the nearest-unitary oracle
// is a projected gradient descent on the unitary group, the norm oracle is
// power iteration on M*M, and the top-vector oracle is random sampling.
// Expected values in the tests below are produced by these oracles, never by
// the functions under test.
// ===========================================================================
namespace oracle {

// exp(S) for skew-Hermitian S via scaling-and-squaring Taylor series —
// independent of matalg::exp_skew's eigendecomposition route.
CMatrix exp_series(CMatrix S) {
  int squarings = 0;
  while (S.norm() > 0.25) {
    S *= 0.5;
    ++squarings;
  }
  CMatrix result = CMatrix::Identity(S.rows(), S.cols());
  CMatrix term = result;
  for (int k = 1; k <= 24; ++k) {
    term = (term * S / double(k)).eval();
    result += term;
  }
  for (int i = 0; i < squarings; ++i) result = (result * result).eval();
  return result;
}

// argmin over unitaries W of ||Q - W||_F by Riemannian gradient descent
// with geodesic retraction W <- exp(eta * skew((Q - W)W^*)) * W.
CMatrix nearest_unitary_descent(const CMatrix& Q) {
  const Eigen::Index n = Q.rows();
  CMatrix W = CMatrix::Identity(n, n);
  double eta = 0.5;
  double f = (Q - W).squaredNorm();
  for (int it = 0; it < 4000; ++it) {
    CMatrix g = (Q - W) * W.adjoint();
    CMatrix S = 0.5 * (g - g.adjoint());
    if (S.norm() < 1e-14) break;
    CMatrix Wn = exp_series((eta * S).eval()) * W;
    double fn = (Q - Wn).squaredNorm();
    if (fn < f) {
      W = Wn;
      f = fn;
      eta *= 1.1;
    } else {
      eta *= 0.5;
      if (eta < 1e-12) break;
    }
  }
  return W;
}

// sigma_max via power iteration on M^*M.
double power_iteration_norm(const CMatrix& M, int iters = 2000) {
  CMatrix G = M.adjoint() * M;
  CVector v = CVector::Ones(G.rows());
  v /= v.norm();
  double lambda = 0.0;
  for (int i = 0; i < iters; ++i) {
    CVector w = G * v;
    double nw = w.norm();
    if (nw == 0.0) return 0.0;
    v = w / nw;
    lambda = std::real(Complex(v.adjoint() * G * v));
  }
  return std::sqrt(std::max(0.0, lambda));
}

}  // namespace oracle

static CMatrix random_invertible(rng::Stream& rs, int n) {
  for (;;) {
    CMatrix Q = rs.gaussian(n, n);
    if (std::abs(Q.determinant()) > 0.05) return Q;
  }
}

// ===========================================================================
// polar_unitary
// ===========================================================================

TEST_CASE("polar_unitary: identity maps to identity") {
  CMatrix I = CMatrix::Identity(3, 3);
  auto U = matalg::polar_unitary(I, 1e-12);
  CHECK((U.mat() - I).norm() < 1e-12);
}

TEST_CASE("polar_unitary: positive scaling has identity radial part") {
  rng::Stream rs(7, "matalg-polar-scale");
  for (int trial = 0; trial < 5; ++trial) {
    auto U0 = rs.haar_unitary(3);
    CMatrix Q = 2.0 * U0.mat();
    auto U = matalg::polar_unitary(Q, 1e-12);
    CHECK((U.mat() - U0.mat()).norm() < 1e-11);
  }
}

TEST_CASE("polar_unitary: matches projected-gradient nearest-unitary oracle") {
  rng::Stream rs(11, "matalg-polar-oracle");
  for (int trial = 0; trial < 8; ++trial) {
    CMatrix Q = random_invertible(rs, 3);
    CMatrix W_oracle = oracle::nearest_unitary_descent(Q);
    auto U = matalg::polar_unitary(Q, 1e-12);
    // Both should be the global minimizer; compare distances and matrices.
    CHECK((U.mat() - W_oracle).norm() < 1e-6);
    CHECK((Q - U.mat()).norm() <= (Q - W_oracle).norm() + 1e-9);
  }
}

TEST_CASE("polar_unitary: result is unitary within 1e-12") {
  rng::Stream rs(13, "matalg-polar-unitarity");
  for (int trial = 0; trial < 10; ++trial) {
    int n = 2 + trial % 3;
    CMatrix Q = random_invertible(rs, n);
    auto U = matalg::polar_unitary(Q, 1e-12);
    CMatrix d = U.mat().adjoint() * U.mat() - CMatrix::Identity(n, n);
    CHECK(matalg::operator_norm(d) < 1e-12);
  }
}

TEST_CASE("polar_unitary: singular input raises SingularInput") {
  CMatrix Q = CMatrix::Zero(2, 2);
  Q(0, 0) = 1.0;
  CHECK_THROWS_AS(matalg::polar_unitary(Q, 1e-10), Error);
  try {
    matalg::polar_unitary(Q, 1e-10);
  } catch (const Error& e) {
    CHECK(e.code() == Err::SingularInput);
  }
}

TEST_CASE("property: polar_unitary(U*R) = U for unitary U, PD Hermitian R") {
  rng::Stream rs(17, "matalg-polar-ur");
  for (int trial = 0; trial < 20; ++trial) {
    int n = 2 + trial % 3;
    auto U = rs.haar_unitary(n);
    CMatrix A = rs.gaussian(n, n);
    CMatrix R = A.adjoint() * A + 0.3 * CMatrix::Identity(n, n);
    R = 0.5 * (R + R.adjoint()).eval();
    auto W = matalg::polar_unitary(U.mat() * R, 1e-12);
    CHECK((W.mat() - U.mat()).norm() < 1e-9);
  }
}

// ===========================================================================
// operator_norm
// ===========================================================================

TEST_CASE("operator_norm: zero matrix") {
  CHECK(matalg::operator_norm(CMatrix::Zero(3, 3)) == 0.0);
}

TEST_CASE("operator_norm: diagonal(3, 4i) -> 4") {
  CMatrix M = CMatrix::Zero(2, 2);
  M(0, 0) = 3.0;
  M(1, 1) = Complex(0.0, 4.0);
  CHECK(matalg::operator_norm(M) == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("operator_norm: matches power-iteration oracle on random 4x4") {
  rng::Stream rs(19, "matalg-norm-oracle");
  for (int trial = 0; trial < 10; ++trial) {
    CMatrix M = rs.gaussian(4, 4);
    double expected = oracle::power_iteration_norm(M);
    CHECK(matalg::operator_norm(M) ==
          doctest::Approx(expected).epsilon(1e-8));
  }
}

TEST_CASE("property: submultiplicativity and unitary norm one") {
  rng::Stream rs(23, "matalg-norm-props");
  for (int trial = 0; trial < 20; ++trial) {
    CMatrix A = rs.gaussian(3, 3);
    CMatrix B = rs.gaussian(3, 3);
    CHECK(matalg::operator_norm(A * B) <=
          matalg::operator_norm(A) * matalg::operator_norm(B) + 1e-10);
    auto U = rs.haar_unitary(3);
    CHECK(matalg::operator_norm(U.mat()) == doctest::Approx(1.0).epsilon(1e-10));
  }
}

// ===========================================================================
// top_singular_vector
// ===========================================================================

TEST_CASE("top_singular_vector: diagonal(2, 1) -> (e1, 2)") {
  CMatrix M = CMatrix::Zero(2, 2);
  M(0, 0) = 2.0;
  M(1, 1) = 1.0;
  auto [z, s] = matalg::top_singular_vector(M);
  CHECK(s == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(std::abs(z(0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(z(1)) < 1e-12);
}

TEST_CASE("top_singular_vector: rank-one projector ww* -> (w, 1)") {
  rng::Stream rs(29, "matalg-topvec-proj");
  CVector w = rs.gaussian(3, 1);
  w /= w.norm();
  CMatrix P = w * w.adjoint();
  auto [z, s] = matalg::top_singular_vector(P);
  CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
  // z = w up to phase
  CHECK(std::abs(Complex(w.adjoint() * z)) ==
        doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("top_singular_vector: beats 1e4 random unit vectors") {
  rng::Stream rs(31, "matalg-topvec-sampling");
  CMatrix M = rs.gaussian(3, 3);
  auto [z, s] = matalg::top_singular_vector(M);
  CHECK(z.norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK((M * z).norm() == doctest::Approx(s).epsilon(1e-12));
  double best = 0.0;
  for (int i = 0; i < 10000; ++i) {
    CVector w = rs.gaussian(3, 1);
    w /= w.norm();
    best = std::max(best, (M * w).norm());
  }
  CHECK((M * z).norm() >= best - 1e-12);
}

TEST_CASE("top_singular_vector: zero matrix raises ZeroMatrix") {
  try {
    matalg::top_singular_vector(CMatrix::Zero(2, 3));
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Err::ZeroMatrix);
  }
}

// ===========================================================================
// gram_solve
// ===========================================================================

TEST_CASE("gram_solve: basis {I}, target 3I -> (3)") {
  std::vector<CMatrix> basis = {CMatrix::Identity(2, 2)};
  CVector c = matalg::gram_solve(basis, 3.0 * CMatrix::Identity(2, 2));
  REQUIRE(c.size() == 1);
  CHECK(std::abs(c(0) - Complex(3.0, 0.0)) < 1e-12);
}

TEST_CASE("gram_solve: orthonormal Pauli-like basis recovers coefficients") {
  // sigma matrices scaled to unit Frobenius norm: orthonormal family.
  CMatrix s0 = CMatrix::Identity(2, 2) / std::sqrt(2.0);
  CMatrix s1(2, 2), s2(2, 2), s3(2, 2);
  s1 << 0, 1, 1, 0;
  s2 << 0, Complex(0, -1), Complex(0, 1), 0;
  s3 << 1, 0, 0, -1;
  s1 /= std::sqrt(2.0);
  s2 /= std::sqrt(2.0);
  s3 /= std::sqrt(2.0);
  std::vector<CMatrix> basis = {s0, s1, s2, s3};
  CVector truth(4);
  truth << Complex(1.5, 0.25), Complex(-0.5, 1.0), Complex(0.0, -2.0),
      Complex(3.0, 0.0);
  CMatrix target = CMatrix::Zero(2, 2);
  for (int i = 0; i < 4; ++i) target += truth(i) * basis[i];
  CVector c = matalg::gram_solve(basis, target);
  CHECK((c - truth).norm() < 1e-12);
}

TEST_CASE("gram_solve: in-span target from random coefficients, residual < 1e-9") {
  rng::Stream rs(37, "matalg-gram-derived");
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<CMatrix> basis = {rs.gaussian(3, 3), rs.gaussian(3, 3)};
    CVector truth(2);
    truth << rs.cnormal(), rs.cnormal();
    CMatrix target = truth(0) * basis[0] + truth(1) * basis[1];
    CVector c = matalg::gram_solve(basis, target);
    CMatrix synth = c(0) * basis[0] + c(1) * basis[1];
    CHECK((synth - target).norm() < 1e-9);
  }
}

TEST_CASE("gram_solve: near-dependent basis raises IllConditioned") {
  rng::Stream rs(41, "matalg-gram-illcond");
  CMatrix A = rs.gaussian(2, 2);
  std::vector<CMatrix> basis = {A, A + 1e-15 * rs.gaussian(2, 2)};
  try {
    matalg::gram_solve(basis, A);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.code() == Err::IllConditioned);
  }
}

TEST_CASE("property: gram_solve re-synthesis is a projection") {
  rng::Stream rs(43, "matalg-gram-projection");
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<CMatrix> basis = {rs.gaussian(2, 2), rs.gaussian(2, 2),
                                  rs.gaussian(2, 2)};
    CMatrix target = rs.gaussian(2, 2);  // generally out of span
    CVector c1 = matalg::gram_solve(basis, target);
    CMatrix proj = CMatrix::Zero(2, 2);
    for (int i = 0; i < 3; ++i) proj += c1(i) * basis[i];
    CVector c2 = matalg::gram_solve(basis, proj);
    CHECK((c1 - c2).norm() < 1e-12);
  }
}

// ===========================================================================
// supporting pieces
// ===========================================================================

TEST_CASE("jacobi_svd reconstructs and orders singular values") {
  rng::Stream rs(47, "matalg-svd-reconstruct");
  for (int trial = 0; trial < 10; ++trial) {
    int rows = 2 + trial % 4;
    int cols = 2 + (trial / 2) % 3;
    CMatrix M = rs.gaussian(rows, cols);
    auto svd = matalg::jacobi_svd(M);
    CMatrix R = svd.U * svd.sigma.asDiagonal() * svd.V.adjoint();
    CHECK((R - M).norm() < 1e-10 * std::max(1.0, M.norm()));
    for (int i = 0; i + 1 < svd.sigma.size(); ++i)
      CHECK(svd.sigma(i) >= svd.sigma(i + 1) - 1e-14);
    CHECK((svd.U.adjoint() * svd.U -
           CMatrix::Identity(svd.U.cols(), svd.U.cols()))
              .norm() < 1e-11);
    CHECK((svd.V.adjoint() * svd.V -
           CMatrix::Identity(svd.V.cols(), svd.V.cols()))
              .norm() < 1e-11);
  }
}

TEST_CASE("exp_skew agrees with series oracle and is unitary") {
  rng::Stream rs(53, "matalg-expskew");
  for (int trial = 0; trial < 10; ++trial) {
    CMatrix S = rs.skew_hermitian(3, 0.8);
    CMatrix E = matalg::exp_skew(S);
    CHECK((E - oracle::exp_series(S)).norm() < 1e-11);
    CHECK((E.adjoint() * E - CMatrix::Identity(3, 3)).norm() < 1e-12);
  }
}

TEST_CASE("UnitaryMatrix::certify re-projects drifted products") {
  rng::Stream rs(59, "matalg-certify");
  auto U = rs.haar_unitary(3);
  CMatrix drifted = U.mat() + 1e-6 * rs.gaussian(3, 3);
  auto W = matalg::UnitaryMatrix::certify(drifted);
  CMatrix d = W.mat().adjoint() * W.mat() - CMatrix::Identity(3, 3);
  CHECK(matalg::operator_norm(d) <= 1e-10);
}
