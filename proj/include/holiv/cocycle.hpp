#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "holiv/dynamics.hpp"
#include "holiv/freemonoid.hpp"
#include "holiv/matalg.hpp"
#include "holiv/rng.hpp"

namespace holiv::cocycle {

// One frequency of a trigonometric-polynomial generator table. The profile
// attached to frequency k is cos(2*pi*k.x) + sin(2*pi*k.x), except k = (0,0)
// whose profile is the constant 1. `coeff` must be skew-Hermitian: the field
// value exp(sum_k coeff_k * profile_k(x)) is then exactly unitary.
struct TrigTerm {
  int k1 = 0;
  int k2 = 0;
  matalg::CMatrix coeff;
};

// Scalar trigonometric profile f(x) = sum_j amp_j * (cos + sin)(2*pi*k_j.x),
// used to twist a field by the phase e^{i*sigma*f(x)}.
struct ScalarTerm {
  int k1 = 0;
  int k2 = 0;
  double amp = 0.0;
};

// A unitary cocycle over a fixed hyperbolic torus map: a generator field
// A : T^2 -> U(r) together with the regularity data the holonomy bounds
// consume. Two construction paths exist:
//
//  * analytic: a trigonometric coefficient table (serializable, exact
//    derivatives, exact curvature commutators);
//  * opaque: an arbitrary smooth generator function (gauge transforms,
//    products); derivatives and curvature are then sampled by central
//    finite differences and plaquette loops on a 64x64 grid.
//
// At construction the field measures
//  * holder_constant: a Lipschitz bound on x -> A(x) (exponent 1),
//  * curvature_bound: 1.5x the largest sampled curvature norm of the
//    connection d + omega, floored away from zero so certified holonomy
//    errors never degenerate to an exact-zero claim,
//  * holonomy_constant: the empirical prefactor C in the truncation bound
//    K_F * C * lambda^{-n * alpha}, calibrated on probe leaf pairs against
//    depth-40 references and doubled for safety.
// All three are deterministic functions of the field data.
class CocycleField {
 public:
  using Generator = std::function<matalg::CMatrix(const dynamics::TorusPoint&)>;

  // Analytic path. Every coefficient must be rank x rank skew-Hermitian
  // (InvalidArgument otherwise); duplicate frequencies are summed.
  CocycleField(const dynamics::HyperbolicMap& map, int rank,
               std::vector<TrigTerm> terms);

  // Opaque path. `gen` must take unitary values (checked on a sample grid).
  CocycleField(const dynamics::HyperbolicMap& map, int rank, Generator gen);

  // A(x) = I.
  static CocycleField trivial(const dynamics::HyperbolicMap& map, int rank);
  // A(x) = exp(skew_log), constant in x.
  static CocycleField constant(const dynamics::HyperbolicMap& map,
                               const matalg::CMatrix& skew_log);
  // Random analytic field: skew-Hermitian coefficients of scale `amplitude`
  // on all frequencies with |k|_inf <= max_freq, damped by 1/(1+|k|^2).
  static CocycleField random(const dynamics::HyperbolicMap& map, int rank,
                             int max_freq, double amplitude,
                             rng::Stream& stream);

  int rank() const { return rank_; }
  const dynamics::HyperbolicMap& map() const { return map_; }

  // Generator value; exactly unitary up to rounding.
  matalg::CMatrix at(const dynamics::TorusPoint& p) const;

  // Connection form sampled from the generator's logarithmic derivative:
  // omega_i(x) = skew part of (d_i A)(x) A(x)^*. Analytic fields return the
  // exact table derivative; opaque fields use central differences.
  std::array<matalg::CMatrix, 2> connection(
      const dynamics::TorusPoint& p) const;

  double holder_exponent() const { return holder_exponent_; }
  double holder_constant() const { return holder_constant_; }
  double curvature_bound() const { return curvature_bound_; }
  double holonomy_constant() const { return holonomy_constant_; }

  bool analytic() const { return analytic_; }
  // Coefficient table; InvalidArgument for opaque fields.
  const std::vector<TrigTerm>& terms() const;

 private:
  void finalize();

  dynamics::HyperbolicMap map_;
  int rank_ = 1;
  bool analytic_ = false;
  std::vector<TrigTerm> terms_;
  Generator gen_;
  double holder_exponent_ = 1.0;
  double holder_constant_ = 0.0;
  double curvature_bound_ = 0.0;
  double holonomy_constant_ = 1.0;
};

// JSON coefficient table {rank, terms:[{k:[k1,k2], re:[[..]], im:[[..]]}]}.
// Only analytic fields serialize; from_json validates skew-Hermitian
// coefficients (InvalidArgument / ParseError).
std::string to_json(const CocycleField& field);
CocycleField from_json(const dynamics::HyperbolicMap& map,
                       const std::string& text);

// n-step transport. For n >= 0 the ordered product
//   A(map^{n-1} x) ... A(map x) A(x),
// for n < 0 the inverse of the transport over |n| steps starting at
// map^{n} x, so transport(x, -n) * transport(map^{-n} x, n) = I. Long
// products are re-projected onto the unitary group every 64 factors.
matalg::UnitaryMatrix transport(const CocycleField& c,
                                const dynamics::TorusPoint& x, long long n);

// Transport along explicitly supplied orbit points:
// A(pts[m-1]) ... A(pts[0]). Callers with analytically known orbits (trunk
// points, rational periodic points) use this to avoid float re-iteration.
matalg::UnitaryMatrix transport_along(
    const CocycleField& c, const std::vector<dynamics::TorusPoint>& pts);

// Comparison transport along the straight torus segment from `a` to `b`
// (shortest representative): 16-point midpoint-rule product of
// exp(delta . omega(midpoint)).
matalg::CMatrix bridge(const CocycleField& c, const dynamics::TorusPoint& a,
                       const dynamics::TorusPoint& b);

// A truncated holonomy limit plus its certificate. The certified error is
// exactly curvature_bound * holonomy_constant * lambda^{-depth * exponent}
// with the field's logged constants.
struct HolonomyResult {
  matalg::UnitaryMatrix u;
  int depth = 0;
  double certified_error = 0.0;
};

// Stable holonomy H^s_{x->y} for y on the local stable leaf of x
// (NotOnStableLeaf otherwise): the depth-n truncation of
//   lim transport(y,n)^{-1} * bridge(map^n x -> map^n y) * transport(x,n),
// n chosen as the smallest depth whose certified bound is <= tol, clamped
// to [4, 200]; TolUnreachable when 200 still misses tol. The y-orbit is
// slaved to the x-orbit through the exact leaf geometry so the pair
// contracts at machine precision even at depth 200.
HolonomyResult stable_holonomy(const CocycleField& c,
                               const dynamics::TorusPoint& x,
                               const dynamics::TorusPoint& y, double tol);

// Mirror of stable_holonomy under the inverse map: y must lie on the local
// unstable leaf of x, and the truncation runs backward.
HolonomyResult unstable_holonomy(const CocycleField& c,
                                 const dynamics::TorusPoint& x,
                                 const dynamics::TorusPoint& y, double tol);

// Fixed-depth truncations of the same limits (no tolerance logic); used by
// decay diagnostics and the calibration probes themselves.
matalg::UnitaryMatrix stable_holonomy_at_depth(const CocycleField& c,
                                               const dynamics::TorusPoint& x,
                                               const dynamics::TorusPoint& y,
                                               int depth);
matalg::UnitaryMatrix unstable_holonomy_at_depth(const CocycleField& c,
                                                 const dynamics::TorusPoint& x,
                                                 const dynamics::TorusPoint& y,
                                                 int depth);

// Parry representation value of a homoclinic orbit:
//   rho(gamma) = H^s_{x_s -> 0} * transport(x_u, T) * H^u_{0 -> x_u},
// each factor truncated to tolerance `tol`.
matalg::UnitaryMatrix parry_eval(const CocycleField& c,
                                 const dynamics::HomoclinicOrbit& gamma,
                                 double tol);

// Multiplicative extension to free-monoid words over a generator list:
// rho(g_{i1}^{e1} ... ) = rho(gens[i1-1])^{e1} * ..., left-to-right.
// InvalidArgument for generator ids outside [1, gens.size()].
matalg::UnitaryMatrix parry_word(
    const CocycleField& c, const std::vector<dynamics::HomoclinicOrbit>& gens,
    const freemonoid::FreeWord& word, double tol);

// Finite Parry composition through the orbit translates x_u(gamma; m) and
// x_s(gamma; n): one long transport over m + T + n steps along the orbit,
// bridged to the fixed point at both ends, conjugated back by the
// fixed-point transports. error_bound = K_F * C * lambda^{-min(m,n)*alpha}.
struct ParryApprox {
  matalg::UnitaryMatrix u;
  double error_bound = 0.0;
};

ParryApprox parry_approx(const CocycleField& c,
                         const dynamics::HomoclinicOrbit& gamma, int m, int n);

// Wilson loop of a periodic orbit: trace of the once-around transport,
// evaluated on the orbit's exact rational points.
struct WilsonRecord {
  int orbit_id = 0;
  long long length = 0;
  matalg::Complex trace{0.0, 0.0};
};

WilsonRecord wilson(const CocycleField& c, const dynamics::PeriodicOrbit& orbit,
                    int orbit_id = 0);

// Gauge transform A'(x) = p(map x) A(x) p(x)^*, with the gauge p supplied as
// the generator of another field of the same rank (RankMismatch otherwise).
// The result is an opaque field; A and A' are cohomologous by construction.
CocycleField gauge_transform(const CocycleField& c, const CocycleField& gauge);

// Twist by a scalar phase: A'(x) = e^{i*sigma*f(x)} A(x) with f the given
// mean-zero profile (InvalidArgument when a (0,0) term appears). Analytic
// fields stay analytic: the twist adds i*sigma*amp*I to the matching
// coefficients.
CocycleField phase_twist(const CocycleField& c,
                         const std::vector<ScalarTerm>& profile, double sigma);

// The induced cocycle on r x r matrices, H |-> A2(x) H A1(x)^*, presented as
// a rank r^2 field acting on column-major vectorizations:
// vec(A2 H A1^*) = (conj(A1) kron A2) vec(H). Analytic whenever both inputs
// are analytic (the log tables combine exactly); RankMismatch otherwise on
// unequal ranks.
CocycleField hom_cocycle(const CocycleField& c1, const CocycleField& c2);

// Column-major vectorization helpers matching hom_cocycle's convention.
matalg::CVector vec(const matalg::CMatrix& h);
matalg::CMatrix unvec(const matalg::CVector& v, int rank);

// sup over the list of length-normalized Wilson gaps
//   l(gamma)^{-1} |W_1(gamma) - W_2(gamma)|.
// EmptyOrbitList on an empty list; RankMismatch on unequal ranks.
double wilson_discrepancy(const CocycleField& c1, const CocycleField& c2,
                          const std::vector<dynamics::PeriodicOrbit>& orbits);

}  // namespace holiv::cocycle
