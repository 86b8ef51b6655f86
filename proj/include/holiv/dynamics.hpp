#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <vector>

#include "holiv/error.hpp"

namespace holiv::dynamics {

// ---------------------------------------------------------------------------
// Points on the 2-torus
// ---------------------------------------------------------------------------

/// A point of the torus [0,1)^2. Coordinates are always reduced mod 1.
struct TorusPoint {
  double x = 0.0;
  double y = 0.0;
};

/// Reduce a real number into [0,1).
double wrap1(double t);

/// Reduce a plane vector into the fundamental square [0,1)^2.
TorusPoint wrap(const Eigen::Vector2d& v);

Eigen::Vector2d to_vec(const TorusPoint& p);

/// Shortest lift of (to - from): components in [-1/2, 1/2).
Eigen::Vector2d shortest_rep(const TorusPoint& from, const TorusPoint& to);

/// Euclidean distance on the torus (length of the shortest lift).
double torus_distance(const TorusPoint& a, const TorusPoint& b);

// ---------------------------------------------------------------------------
// Exact rational points (periodic-orbit enumeration works over these)
// ---------------------------------------------------------------------------

/// A rational number num/den reduced to lowest terms with den > 0.
struct Rational {
  long long num = 0;
  long long den = 1;

  /// Build num/den reduced into [0,1).
  static Rational mod1(long long num, long long den);

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Three-way comparison of rationals by value (cross multiplication, exact).
int compare(const Rational& a, const Rational& b);

struct RationalPoint {
  Rational x;
  Rational y;

  TorusPoint to_point() const { return TorusPoint{x.value(), y.value()}; }

  friend bool operator==(const RationalPoint&, const RationalPoint&) = default;
};

// ---------------------------------------------------------------------------
// The base system: a hyperbolic toral automorphism
// ---------------------------------------------------------------------------

/// Integer 2x2 matrix M with |det M| = 1 and |tr M| > 2, acting on the torus.
///
/// The expanding eigenvalue has modulus lambda() > 1; v_u() and v_s() are the
/// unit unstable/stable eigenvectors.  Signed eigenvalues are exposed because
/// an automorphism with negative trace or determinant flips leaf orientation
/// on each step.
class HyperbolicMap {
 public:
  /// Entries row-major: [[a, b], [c, d]].  Throws NotHyperbolic when
  /// |trace| <= 2, InvalidArgument when |det| != 1.
  HyperbolicMap(long long a, long long b, long long c, long long d);

  long long trace() const { return m_[0] + m_[3]; }
  long long det() const { return m_[0] * m_[3] - m_[1] * m_[2]; }
  std::array<long long, 4> coeffs() const { return m_; }
  Eigen::Matrix2d matrix() const;

  /// The inverse automorphism (integer entries since |det| = 1).
  HyperbolicMap inverse() const;

  TorusPoint apply(const TorusPoint& p) const;
  TorusPoint apply_inverse(const TorusPoint& p) const;
  RationalPoint apply(const RationalPoint& p) const;

  /// Action on plane vectors (no reduction mod 1).
  Eigen::Vector2d apply_linear(const Eigen::Vector2d& v) const;

  double lambda() const { return std::abs(lambda_u_); }
  double lambda_u_signed() const { return lambda_u_; }
  double lambda_s_signed() const { return lambda_s_; }
  const Eigen::Vector2d& v_u() const { return v_u_; }
  const Eigen::Vector2d& v_s() const { return v_s_; }

  /// Coordinates (u, s) of a plane vector in the eigenbasis: d = u v_u + s v_s.
  Eigen::Vector2d leaf_coords(const Eigen::Vector2d& d) const;

 private:
  std::array<long long, 4> m_{};
  double lambda_u_ = 0.0;  // signed, |lambda_u_| > 1
  double lambda_s_ = 0.0;  // signed, |lambda_s_| < 1
  Eigen::Vector2d v_u_{Eigen::Vector2d::Zero()};
  Eigen::Vector2d v_s_{Eigen::Vector2d::Zero()};
  Eigen::Matrix2d frame_inv_{Eigen::Matrix2d::Zero()};  // [v_u | v_s]^{-1}
};

struct Lines {
  Eigen::Vector2d v_u;
  Eigen::Vector2d v_s;
  double lambda = 0.0;
};

/// Unit eigenvectors and the expansion rate lambda > 1 of the map.
Lines stable_unstable_lines(const HyperbolicMap& map);

// ---------------------------------------------------------------------------
// Periodic orbits (exact arithmetic)
// ---------------------------------------------------------------------------

struct PeriodicOrbit {
  int period = 0;                    // number of points on the orbit
  std::vector<RationalPoint> points; // map(points[k]) == points[k+1 mod n]
  bool primitive = true;             // period is minimal
};

/// Number of solutions of map^n(x) = x, i.e. |det(M^n - I)|.
long long fixed_point_count(const HyperbolicMap& map, int n);

/// All primitive periodic orbits of period <= n_max, each listed once.
/// Points are exact rationals: solutions of (M^n - I)x = 0 mod 1 obtained by
/// integer normal-form reduction of M^n - I.
std::vector<PeriodicOrbit> enumerate_periodic_orbits(const HyperbolicMap& map, int n_max);

// ---------------------------------------------------------------------------
// Bowen bracket
// ---------------------------------------------------------------------------

struct BracketResult {
  TorusPoint z;
  double t_shift = 0.0;  // always 0 in the discrete-time model
};

/// The unique local intersection z of the unstable leaf through x with the
/// stable leaf through y: z - x in span(v_u) and z - y in span(v_s) on the
/// local cover.  Throws TooFar when d(x, y) >= eps_box.
BracketResult bowen_bracket(const HyperbolicMap& map, const TorusPoint& x,
                            const TorusPoint& y, double eps_box);

// ---------------------------------------------------------------------------
// Fundamental domains on the invariant leaves of the fixed point 0
// ---------------------------------------------------------------------------

/// Multiplicative annuli D = {t : delta/lambda < |t| <= delta} in arclength
/// along W^s(0) and W^u(0).  Every orbit converging to 0 along a leaf crosses
/// the corresponding annulus exactly once.
struct FundamentalDomains {
  double delta_s = 0.0;
  double delta_u = 0.0;
  double lambda = 0.0;

  bool contains_s(double s) const;
  bool contains_u(double u) const;
};

FundamentalDomains fundamental_domains(const HyperbolicMap& map, double delta = 0.05);

// ---------------------------------------------------------------------------
// Homoclinic orbits
// ---------------------------------------------------------------------------

/// An orbit homoclinic to the fixed point 0: the orbit of an intersection
/// point p = a v_u = b v_s + k (k a lattice vector) of the projected leaves.
///
/// The trunk is the segment [x_u, ..., x_s] of the orbit between its last
/// crossing of D_u and its first crossing of D_s; length T = trunk steps.
/// Leaf coordinates of the i-th trunk point are u = a lambda_u^(j_u + i),
/// s = b lambda_s^(j_u + i); the closed form extends the trunk to all of Z.
struct HomoclinicOrbit {
  int id = 0;

  double a = 0.0;   // unstable arclength of the base intersection point
  double b = 0.0;   // stable arclength of the base intersection point
  double kx = 0.0;  // lattice vector with a v_u - b v_s = k (exact integers for
  double ky = 0.0;  // enumerated orbits; beyond int64 range for long glued ones)
  int j_u = 0;      // exponent offset: x_u corresponds to a lambda_u^{j_u}
  int length = 0;   // T >= 1

  double lambda_u = 0.0;  // signed frame snapshot
  double lambda_s = 0.0;
  Eigen::Vector2d v_u{Eigen::Vector2d::Zero()};
  Eigen::Vector2d v_s{Eigen::Vector2d::Zero()};

  std::vector<TorusPoint> trunk_points;  // length + 1 points, x_u first

  const TorusPoint& x_u() const { return trunk_points.front(); }
  const TorusPoint& x_s() const { return trunk_points.back(); }

  /// Orbit point at trunk index i (any integer; outside [0, length] the
  /// closed-form leaf parameterization is used).
  TorusPoint point(int i) const;

  /// Analytic leaf coordinates at trunk index i.
  double u_coord_at(int i) const;
  double s_coord_at(int i) const;

  /// x_s(gamma; n) = map^n(x_s) for n >= 0: decays toward 0 like lambda^{-n}.
  TorusPoint translate_s(int n) const { return point(length + n); }
  /// x_u(gamma; -n) = map^{-n}(x_u) for n >= 0.
  TorusPoint translate_u(int n) const { return point(-n); }
};

/// All homoclinic orbits whose lattice vector k (canonical representative of
/// the class {M^j k}) satisfies |k_x|, |k_y| <= complexity_bound, normalized
/// so x_u lies in D_u and T is the first hitting time of D_s.  When the raw
/// minimum of T over the batch drops below 1, every orbit is shifted by the
/// same whole number of map steps so min T = 1.
std::vector<HomoclinicOrbit> homoclinic_points(const HyperbolicMap& map,
                                               const FundamentalDomains& domains,
                                               long long complexity_bound);

// ---------------------------------------------------------------------------
// Shadowing
// ---------------------------------------------------------------------------

/// Closed-form shadowing for the linear model.  Given a pseudo-orbit with
/// jumps e_k = map(x_k) - x_{k+1} of size <= jump_tolerance, returns the
/// exact orbit y with ||y_k - x_k|| <= C jump_tolerance, C = lambda/(lambda-1) + 1.
/// Corrections solve c_{k+1} = M c_k + e_k by a backward geometric sum along
/// v_u (boundary u_N = 0) and a forward sum along v_s (boundary s_0 = 0), so
/// an endpoint lying on an invariant leaf stays on that leaf.  A pseudo-orbit
/// whose first and last points coincide is closed up into a periodic orbit.
/// Throws JumpTooLarge when some jump exceeds jump_tolerance.
std::vector<TorusPoint> shadow(const HyperbolicMap& map,
                               const std::vector<TorusPoint>& pseudo_orbit,
                               double jump_tolerance);

// ---------------------------------------------------------------------------
// Good orbits: short homoclinic orbits whose trunk fills the torus
// ---------------------------------------------------------------------------

struct GoodOrbit {
  HomoclinicOrbit orbit;
  double density_radius = 0.0;     // max over a fixed grid of distance to trunk
  double separation_radius = 0.0;  // min pairwise transversal trunk distance
  double epsilon = 0.0;            // target scale
};

/// Builds a homoclinic orbit with T <= eps^{-1/2} whose trunk visits a
/// low-discrepancy net of the torus: a pseudo-orbit [x_u-side seed, net
/// points, x_s-side seed] is glued and shadowed into a genuine orbit, then
/// re-normalized to the fundamental-domain convention (the domains are
/// enlarged by a whole number of map steps so the budget stays reachable;
/// crossing counts relative to the passed domains are unaffected).  Reports
/// measured density and separation radii of the trunk.  Throws BudgetExceeded
/// when even the bare orbit does not fit the length budget.
GoodOrbit good_orbit(const HyperbolicMap& map, const FundamentalDomains& domains,
                     double epsilon);

}  // namespace holiv::dynamics
