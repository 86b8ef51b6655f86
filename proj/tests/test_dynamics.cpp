#include "doctest.h"

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <map>
#include <set>
#include <vector>

#include "holiv/dynamics.hpp"
#include "holiv/rng.hpp"

using namespace holiv;
using dynamics::HyperbolicMap;
using dynamics::TorusPoint;

// ===========================================================================
// Independent oracles.
//
// Periodic-point counts are cross-checked two ways that never touch the
// integer normal-form path used by the library: (a) exhaustive enumeration of
// the (1/d)Z^2 lattice, d = |det(M^n - I)|, which contains every rational
// fixed point of M^n by Cramer's rule; (b) the frozen trace identity
// #Fix(M^n) = tr(M^n) - 2 for a cat map, with primitive counts obtained by
// divisor inclusion-exclusion.  Expected values below come from these
// oracles, never from the functions under test.
// ===========================================================================
namespace oracle {

using Mat2 = std::array<long long, 4>;  // row-major [[a,b],[c,d]]

Mat2 mul(const Mat2& p, const Mat2& q) {
  return {p[0] * q[0] + p[1] * q[2], p[0] * q[1] + p[1] * q[3],
          p[2] * q[0] + p[3] * q[2], p[2] * q[1] + p[3] * q[3]};
}

Mat2 mat_pow(Mat2 m, int n) {
  Mat2 r{1, 0, 0, 1};
  for (int i = 0; i < n; ++i) r = mul(r, m);
  return r;
}

// #Fix(M^n) by brute force over the lattice of denominator d = |det(M^n - I)|.
long long lattice_fixed_count(const Mat2& m, int n) {
  Mat2 a = mat_pow(m, n);
  a[0] -= 1;
  a[3] -= 1;
  const long long d = std::llabs(a[0] * a[3] - a[1] * a[2]);
  long long count = 0;
  for (long long i = 0; i < d; ++i)
    for (long long j = 0; j < d; ++j)
      if ((a[0] * i + a[1] * j) % d == 0 && (a[2] * i + a[3] * j) % d == 0) ++count;
  return count;
}

// Points of exact (minimal) period n, from the fixed-point counts of all
// divisors by inclusion-exclusion.
long long exact_period_count(const std::vector<long long>& fix_by_period, int n) {
  long long total = fix_by_period[static_cast<size_t>(n)];
  for (int m = 1; m < n; ++m)
    if (n % m == 0) total -= exact_period_count(fix_by_period, m);
  return total;
}

}  // namespace oracle

namespace {

// Frozen for the cat map [[2,1],[1,1]]: tr(M^n) for n = 1..10 and the
// expansion rate (3 + sqrt(5))/2.  [Traces satisfy t_{n+1} = 3 t_n - t_{n-1}.]
const std::vector<long long> kCatTraces = {0,  3,   7,   18,   47,   123,
                                           322, 843, 2207, 5778, 15127};
constexpr double kCatLambda = 2.618033988749895;

HyperbolicMap cat_map() { return HyperbolicMap(2, 1, 1, 1); }

double orbit_defect(const HyperbolicMap& map, const std::vector<TorusPoint>& pts) {
  double worst = 0.0;
  for (size_t k = 0; k + 1 < pts.size(); ++k)
    worst = std::max(worst, dynamics::torus_distance(map.apply(pts[k]), pts[k + 1]));
  return worst;
}

}  // namespace

// ===========================================================================
// HyperbolicMap and stable/unstable lines
// ===========================================================================

TEST_CASE("hyperbolic map rejects non-hyperbolic and non-unimodular input") {
  CHECK_THROWS_AS(HyperbolicMap(1, 1, 0, 1), Error);  // trace 2
  try {
    HyperbolicMap(1, 1, 0, 1);
  } catch (const Error& e) {
    CHECK(e.code() == Err::NotHyperbolic);
  }
  try {
    HyperbolicMap(3, 0, 0, 2);  // det 6
  } catch (const Error& e) {
    CHECK(e.code() == Err::InvalidArgument);
  }
}

TEST_CASE("cat map eigendata: lambda = (3+sqrt 5)/2 and eigen-residuals < 1e-12") {
  auto lines = dynamics::stable_unstable_lines(cat_map());
  CHECK(lines.lambda == doctest::Approx(kCatLambda).epsilon(1e-14));
  const HyperbolicMap m = cat_map();
  Eigen::Vector2d ru = m.matrix() * lines.v_u - m.lambda_u_signed() * lines.v_u;
  Eigen::Vector2d rs = m.matrix() * lines.v_s - m.lambda_s_signed() * lines.v_s;
  CHECK(ru.norm() < 1e-12);
  CHECK(rs.norm() < 1e-12);
  CHECK(lines.v_u.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(lines.v_s.norm() == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(m.lambda_u_signed() * m.lambda_s_signed() - double(m.det())) < 1e-12);
}

TEST_CASE("inverse map swaps the stable and unstable lines") {
  auto lines = dynamics::stable_unstable_lines(cat_map());
  auto inv = dynamics::stable_unstable_lines(cat_map().inverse());
  CHECK(std::abs(lines.v_u.dot(inv.v_s)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(lines.v_s.dot(inv.v_u)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(inv.lambda == doctest::Approx(lines.lambda).epsilon(1e-12));
}

TEST_CASE("squared map keeps the eigenvectors and squares lambda") {
  auto lines = dynamics::stable_unstable_lines(cat_map());
  auto sq = dynamics::stable_unstable_lines(HyperbolicMap(5, 3, 3, 2));  // M^2
  CHECK(std::abs(lines.v_u.dot(sq.v_u)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(lines.v_s.dot(sq.v_s)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(sq.lambda == doctest::Approx(lines.lambda * lines.lambda).epsilon(1e-12));
}

TEST_CASE("map application agrees between rational and floating point") {
  const HyperbolicMap m = cat_map();
  dynamics::RationalPoint p{dynamics::Rational::mod1(3, 7), dynamics::Rational::mod1(5, 7)};
  dynamics::RationalPoint q = m.apply(p);
  // (2*3/7 + 5/7, 3/7 + 5/7) = (11/7, 8/7) = (4/7, 1/7) mod 1
  CHECK(q.x == dynamics::Rational::mod1(4, 7));
  CHECK(q.y == dynamics::Rational::mod1(1, 7));
  TorusPoint f = m.apply(p.to_point());
  CHECK(dynamics::torus_distance(f, q.to_point()) < 1e-14);
  // inverse undoes apply
  TorusPoint back = m.apply_inverse(f);
  CHECK(dynamics::torus_distance(back, p.to_point()) < 1e-14);
}

// ===========================================================================
// Periodic orbits
// ===========================================================================

TEST_CASE("cat map n_max=1: exactly the fixed point at 0") {
  auto orbits = dynamics::enumerate_periodic_orbits(cat_map(), 1);
  REQUIRE(orbits.size() == 1);
  CHECK(orbits[0].period == 1);
  CHECK(orbits[0].primitive);
  REQUIRE(orbits[0].points.size() == 1);
  CHECK(orbits[0].points[0].x.num == 0);
  CHECK(orbits[0].points[0].y.num == 0);
}

TEST_CASE("cat map n_max=2: points of period dividing 2 number tr(M^2) - 2 = 5") {
  auto orbits = dynamics::enumerate_periodic_orbits(cat_map(), 2);
  long long points = 0;
  for (const auto& orb : orbits) points += orb.period;
  CHECK(points == 5);
  CHECK(oracle::lattice_fixed_count({2, 1, 1, 1}, 2) == 5);
}

TEST_CASE("periodic counts match tr(M^n) - 2 for n = 1..10 and the lattice oracle") {
  auto orbits = dynamics::enumerate_periodic_orbits(cat_map(), 10);
  std::map<int, long long> exact_points;  // period -> points of that exact period
  for (const auto& orb : orbits) {
    CHECK(orb.primitive);
    CHECK(orb.points.size() == static_cast<size_t>(orb.period));
    exact_points[orb.period] += orb.period;
  }
  std::vector<long long> fix(11, 0);
  for (int n = 1; n <= 10; ++n) fix[static_cast<size_t>(n)] = kCatTraces[static_cast<size_t>(n)] - 2;
  for (int n = 1; n <= 10; ++n) {
    long long expected = oracle::exact_period_count(fix, n);
    CHECK_MESSAGE(exact_points[n] == expected, "period ", n);
    // fixed-point count of M^n from the library, against the frozen traces
    CHECK(dynamics::fixed_point_count(cat_map(), n) == fix[static_cast<size_t>(n)]);
  }
  // exhaustive small-denominator cross-check, n <= 6
  for (int n = 1; n <= 6; ++n)
    CHECK(oracle::lattice_fixed_count({2, 1, 1, 1}, n) == fix[static_cast<size_t>(n)]);
}

TEST_CASE("every enumerated orbit is an exact orbit with minimal period") {
  const HyperbolicMap m = cat_map();
  auto orbits = dynamics::enumerate_periodic_orbits(m, 6);
  std::set<std::array<long long, 4>> seen;  // dedupe guard on starting points
  for (const auto& orb : orbits) {
    for (size_t k = 0; k < orb.points.size(); ++k) {
      dynamics::RationalPoint next = m.apply(orb.points[k]);
      CHECK(next == orb.points[(k + 1) % orb.points.size()]);
    }
    // minimality: no proper divisor period fixes the starting point
    for (int d = 1; d < orb.period; ++d) {
      if (orb.period % d != 0) continue;
      dynamics::RationalPoint p = orb.points[0];
      for (int i = 0; i < d; ++i) p = m.apply(p);
      CHECK_FALSE(p == orb.points[0]);
    }
    auto key = std::array<long long, 4>{orb.points[0].x.num, orb.points[0].x.den,
                                        orb.points[0].y.num, orb.points[0].y.den};
    CHECK(seen.insert(key).second);
  }
}

TEST_CASE("unimodular conjugation preserves orbit counts per period") {
  // P = [[1,1],[0,1]]: P M P^{-1} = [[3,-1],[1,0]]
  auto base = dynamics::enumerate_periodic_orbits(cat_map(), 6);
  auto conj = dynamics::enumerate_periodic_orbits(HyperbolicMap(3, -1, 1, 0), 6);
  std::map<int, int> count_base, count_conj;
  for (const auto& orb : base) ++count_base[orb.period];
  for (const auto& orb : conj) ++count_conj[orb.period];
  CHECK(count_base == count_conj);
}

// ===========================================================================
// Bowen bracket
// ===========================================================================

TEST_CASE("bracket of a point with itself is the point") {
  TorusPoint x{0.3, 0.7};
  auto r = dynamics::bowen_bracket(cat_map(), x, x, 0.1);
  CHECK(dynamics::torus_distance(r.z, x) < 1e-14);
  CHECK(r.t_shift == 0.0);
}

TEST_CASE("bracket depends on y only through its stable leaf") {
  // In particular for y on the stable leaf of x the bracket collapses to x.
  const HyperbolicMap m = cat_map();
  TorusPoint x{0.25, 0.6};
  TorusPoint y = dynamics::wrap(dynamics::to_vec(x) + 0.01 * m.v_s());
  auto r = dynamics::bowen_bracket(m, x, y, 0.1);
  CHECK(dynamics::torus_distance(r.z, x) < 1e-12);

  rng::Stream rng(17, "bracket-leaf");
  for (int trial = 0; trial < 25; ++trial) {
    TorusPoint p{rng.uniform(), rng.uniform()};
    Eigen::Vector2d d(0.03 * (rng.uniform() - 0.5), 0.03 * (rng.uniform() - 0.5));
    TorusPoint q = dynamics::wrap(dynamics::to_vec(p) + d);
    TorusPoint q_slid = dynamics::wrap(dynamics::to_vec(q) + 0.01 * (rng.uniform() - 0.5) * m.v_s());
    auto r1 = dynamics::bowen_bracket(m, p, q, 0.2);
    auto r2 = dynamics::bowen_bracket(m, p, q_slid, 0.2);
    CHECK(dynamics::torus_distance(r1.z, r2.z) < 1e-10);
  }
}

TEST_CASE("bracket residuals: z - x along v_u, z - y along v_s, size bound") {
  const HyperbolicMap m = cat_map();
  const double C = m.lambda() / (m.lambda() - 1.0) + 1.0;
  rng::Stream rng(4, "bracket-residual");
  for (int trial = 0; trial < 50; ++trial) {
    TorusPoint x{rng.uniform(), rng.uniform()};
    Eigen::Vector2d d(0.05 * (rng.uniform() - 0.5), 0.05 * (rng.uniform() - 0.5));
    TorusPoint y = dynamics::wrap(dynamics::to_vec(x) + d);
    auto r = dynamics::bowen_bracket(m, x, y, 0.1);
    Eigen::Vector2d zx = dynamics::shortest_rep(x, r.z);
    Eigen::Vector2d zy = dynamics::shortest_rep(y, r.z);
    // wedge with the leaf direction vanishes iff parallel
    CHECK(std::abs(zx.x() * m.v_u().y() - zx.y() * m.v_u().x()) < 1e-10);
    CHECK(std::abs(zy.x() * m.v_s().y() - zy.y() * m.v_s().x()) < 1e-10);
    double dist = dynamics::torus_distance(x, y);
    CHECK(zx.norm() + zy.norm() <= C * dist + 1e-12);
  }
}

TEST_CASE("bracket refuses distant pairs") {
  CHECK_THROWS_AS(dynamics::bowen_bracket(cat_map(), TorusPoint{0.1, 0.1},
                                          TorusPoint{0.4, 0.6}, 0.05),
                  Error);
}

// ===========================================================================
// Fundamental domains
// ===========================================================================

TEST_CASE("stable annulus is disjoint from its map translate and tiles by powers") {
  const HyperbolicMap m = cat_map();
  auto dom = dynamics::fundamental_domains(m);
  CHECK(dom.delta_s == doctest::Approx(0.05));
  rng::Stream rng(9, "domains");
  for (int trial = 0; trial < 200; ++trial) {
    // sample s in the annulus, both components
    double mag = dom.delta_s / m.lambda() + rng.uniform() * dom.delta_s * (1.0 - 1.0 / m.lambda());
    double s = (rng.uniform() < 0.5 ? -1.0 : 1.0) * std::nextafter(mag, dom.delta_s);
    if (!dom.contains_s(s)) continue;
    // one map step contracts stable arclength by exactly lambda^{-1}
    CHECK_FALSE(dom.contains_s(s * m.lambda_s_signed()));
    // k steps scale by lambda^{-k} and land in the k-th translate only
    for (int k = 1; k <= 4; ++k) {
      double sk = s * std::pow(m.lambda_s_signed(), k);
      CHECK(std::abs(sk) == doctest::Approx(std::abs(s) * std::pow(m.lambda(), -k)));
      CHECK_FALSE(dom.contains_s(sk));
    }
  }
  // every nonzero arclength below delta has exactly one annulus translate
  for (int trial = 0; trial < 100; ++trial) {
    double s = (rng.uniform() - 0.5) * 0.08;
    if (s == 0.0) continue;
    int hits = 0;
    for (int k = -40; k <= 40; ++k) {
      if (dom.contains_s(s * std::pow(m.lambda(), k))) ++hits;
    }
    CHECK(hits == 1);
  }
}

// ===========================================================================
// Homoclinic orbits
// ===========================================================================

TEST_CASE("complexity bound 0 yields no orbit (the fixed point is excluded)") {
  auto dom = dynamics::fundamental_domains(cat_map());
  auto orbits = dynamics::homoclinic_points(cat_map(), dom, 0);
  CHECK(orbits.empty());
}

TEST_CASE("homoclinic orbits at bound 3: endpoints, length, and orbit identity") {
  const HyperbolicMap m = cat_map();
  auto dom = dynamics::fundamental_domains(m);
  auto orbits = dynamics::homoclinic_points(m, dom, 3);
  REQUIRE(!orbits.empty());
  for (const auto& orb : orbits) {
    CHECK(orb.length >= 1);
    // x_u in D_u, x_s in D_s (arclength membership)
    CHECK(dom.contains_u(orb.u_coord_at(0)));
    CHECK(dom.contains_s(orb.s_coord_at(orb.length)));
    // lattice identity of the base point: a v_u - b v_s = k exactly
    Eigen::Vector2d residual =
        orb.a * m.v_u() - orb.b * m.v_s() - Eigen::Vector2d(orb.kx, orb.ky);
    CHECK(residual.norm() < 1e-10);
    CHECK(orb.kx == std::round(orb.kx));  // exact integers at this bound
    CHECK(orb.ky == std::round(orb.ky));
    // x_s = map^T(x_u) by direct iteration (T is small at this bound)
    TorusPoint p = orb.x_u();
    for (int i = 0; i < orb.length; ++i) p = m.apply(p);
    CHECK(dynamics::torus_distance(p, orb.x_s()) < 1e-10);
    // trunk samples lie on the orbit
    CHECK(orbit_defect(m, orb.trunk_points) < 1e-10);
    CHECK(orb.trunk_points.size() == static_cast<size_t>(orb.length) + 1);
  }
  // distinct orbits have distinct canonical lattice vectors
  std::set<std::pair<long long, long long>> ks;
  for (const auto& orb : orbits)
    CHECK(ks.insert({std::llround(orb.kx), std::llround(orb.ky)}).second);
}

TEST_CASE("every homoclinic orbit crosses D_s exactly once") {
  const HyperbolicMap m = cat_map();
  auto dom = dynamics::fundamental_domains(m);
  for (const auto& orb : dynamics::homoclinic_points(m, dom, 3)) {
    int crossings = 0;
    for (int i = -30; i <= orb.length + 30; ++i)
      if (dom.contains_s(orb.s_coord_at(i))) ++crossings;
    CHECK(crossings == 1);
    // and D_u exactly once as well
    int u_crossings = 0;
    for (int i = -30; i <= orb.length + 30; ++i)
      if (dom.contains_u(orb.u_coord_at(i))) ++u_crossings;
    CHECK(u_crossings == 1);
  }
}

TEST_CASE("stable translates decay to 0 at rate lambda^{-1}") {
  const HyperbolicMap m = cat_map();
  auto dom = dynamics::fundamental_domains(m);
  auto orbits = dynamics::homoclinic_points(m, dom, 2);
  REQUIRE(!orbits.empty());
  TorusPoint zero{0.0, 0.0};
  for (const auto& orb : orbits) {
    double prev = dynamics::torus_distance(orb.translate_s(0), zero);
    for (int n = 1; n <= 8; ++n) {
      double cur = dynamics::torus_distance(orb.translate_s(n), zero);
      double ratio = cur / prev;
      CHECK(ratio > 0.9 / m.lambda());
      CHECK(ratio < 1.1 / m.lambda());
      // the spec'd envelope d(x_s(n), 0) <= d(x_s, 0) (1.1/lambda)^n
      CHECK(cur <= dynamics::torus_distance(orb.translate_s(0), zero) *
                       std::pow(1.1 / m.lambda(), n));
      prev = cur;
    }
    // unstable side decays backward
    double prev_u = dynamics::torus_distance(orb.translate_u(0), zero);
    for (int n = 1; n <= 8; ++n) {
      double cur = dynamics::torus_distance(orb.translate_u(n), zero);
      CHECK(cur / prev_u < 1.1 / m.lambda());
      prev_u = cur;
    }
  }
}

TEST_CASE("raising the complexity bound only adds orbits") {
  const HyperbolicMap m = cat_map();
  auto dom = dynamics::fundamental_domains(m);
  auto small = dynamics::homoclinic_points(m, dom, 2);
  auto large = dynamics::homoclinic_points(m, dom, 3);
  CHECK(large.size() > small.size());
  std::set<std::pair<long long, long long>> ks;
  for (const auto& orb : large) ks.insert({std::llround(orb.kx), std::llround(orb.ky)});
  for (const auto& orb : small)
    CHECK(ks.count({std::llround(orb.kx), std::llround(orb.ky)}) == 1);
}

// ===========================================================================
// Shadowing
// ===========================================================================

TEST_CASE("a true orbit shadows to itself") {
  const HyperbolicMap m = cat_map();
  std::vector<TorusPoint> orbit{TorusPoint{0.123, 0.456}};
  for (int i = 0; i < 12; ++i) orbit.push_back(m.apply(orbit.back()));
  auto shadowed = dynamics::shadow(m, orbit, 1e-6);
  for (size_t k = 0; k < orbit.size(); ++k)
    CHECK(dynamics::torus_distance(shadowed[k], orbit[k]) < 1e-13);
}

TEST_CASE("one jump of size 1e-6 shadows within C*1e-6 and to an exact orbit") {
  const HyperbolicMap m = cat_map();
  const double C = m.lambda() / (m.lambda() - 1.0) + 1.0;
  std::vector<TorusPoint> pseudo{TorusPoint{0.37, 0.81}};
  for (int i = 0; i < 20; ++i) pseudo.push_back(m.apply(pseudo.back()));
  // inject a jump of size 1e-6 at step 10
  pseudo[10] = dynamics::wrap(dynamics::to_vec(pseudo[10]) +
                              Eigen::Vector2d(0.8e-6, -0.6e-6));
  auto shadowed = dynamics::shadow(m, pseudo, 3e-6);
  CHECK(orbit_defect(m, shadowed) < 1e-10);
  for (size_t k = 0; k < pseudo.size(); ++k)
    CHECK(dynamics::torus_distance(shadowed[k], pseudo[k]) <= C * 1e-6);
}

TEST_CASE("shadowing rejects jumps above the tolerance") {
  const HyperbolicMap m = cat_map();
  std::vector<TorusPoint> pseudo{TorusPoint{0.2, 0.2}, TorusPoint{0.9, 0.9}};
  CHECK_THROWS_AS(dynamics::shadow(m, pseudo, 1e-3), Error);
}

TEST_CASE("a periodic pseudo-orbit shadows to a periodic orbit of the same period") {
  const HyperbolicMap m = cat_map();
  // perturb an exact period-4 orbit into a periodic pseudo-orbit
  auto orbits = dynamics::enumerate_periodic_orbits(m, 4);
  const dynamics::PeriodicOrbit* p4 = nullptr;
  for (const auto& orb : orbits)
    if (orb.period == 4) p4 = &orb;
  REQUIRE(p4 != nullptr);
  rng::Stream rng(11, "periodic-shadow");
  std::vector<TorusPoint> pseudo;
  for (const auto& rp : p4->points) {
    Eigen::Vector2d nudge(2e-7 * (rng.uniform() - 0.5), 2e-7 * (rng.uniform() - 0.5));
    pseudo.push_back(dynamics::wrap(dynamics::to_vec(rp.to_point()) + nudge));
  }
  pseudo.push_back(pseudo.front());  // close the loop
  auto shadowed = dynamics::shadow(m, pseudo, 1e-5);
  CHECK(orbit_defect(m, shadowed) < 1e-10);
  CHECK(dynamics::torus_distance(shadowed.front(), shadowed.back()) < 1e-13);
  // applying the map period-many times returns to the start
  TorusPoint cycled = shadowed.front();
  for (int i = 0; i < 4; ++i) cycled = m.apply(cycled);
  CHECK(dynamics::torus_distance(cycled, shadowed.front()) < 1e-10);
}

// ===========================================================================
// Good orbits
// ===========================================================================

TEST_CASE("good orbits meet the length budget and stay genuine homoclinic orbits") {
  const HyperbolicMap m = cat_map();
  auto dom = dynamics::fundamental_domains(m);
  for (double eps : {0.05, 0.02, 0.01}) {
    auto good = dynamics::good_orbit(m, dom, eps);
    CHECK(good.epsilon == eps);
    CHECK(double(good.orbit.length) <= std::pow(eps, -0.5));
    CHECK(good.orbit.length >= 1);
    CHECK(orbit_defect(m, good.orbit.trunk_points) < 1e-10);
    CHECK(good.separation_radius > 0.0);
    CHECK(good.density_radius > 0.0);
    // endpoints genuinely on the leaves: closed-form translates keep decaying
    TorusPoint zero{0.0, 0.0};
    double d0 = dynamics::torus_distance(good.orbit.translate_s(0), zero);
    double d3 = dynamics::torus_distance(good.orbit.translate_s(3), zero);
    CHECK(d3 < d0 * std::pow(1.1 / m.lambda(), 3));
  }
}

TEST_CASE("good orbit crosses the passed stable domain exactly once") {
  const HyperbolicMap m = cat_map();
  auto dom = dynamics::fundamental_domains(m);
  auto good = dynamics::good_orbit(m, dom, 0.02);
  int crossings = 0;
  for (int i = -60; i <= good.orbit.length + 60; ++i)
    if (dom.contains_s(good.orbit.s_coord_at(i))) ++crossings;
  CHECK(crossings == 1);
}

TEST_CASE("halving epsilon does not increase the measured density radius") {
  const HyperbolicMap m = cat_map();
  auto dom = dynamics::fundamental_domains(m);
  double prev = dynamics::good_orbit(m, dom, 0.04).density_radius;
  for (double eps : {0.02, 0.01, 0.005}) {
    double cur = dynamics::good_orbit(m, dom, eps).density_radius;
    CHECK(cur <= prev + 1e-12);
    prev = cur;
  }
}

TEST_CASE("small epsilon: trunk visits every cell of a coarse 4x4 net") {
  const HyperbolicMap m = cat_map();
  auto dom = dynamics::fundamental_domains(m);
  auto good = dynamics::good_orbit(m, dom, 5e-4);
  std::set<std::pair<int, int>> cells;
  for (const auto& p : good.orbit.trunk_points)
    cells.insert({int(p.x * 4.0), int(p.y * 4.0)});
  CHECK(cells.size() == 16);
}

TEST_CASE("an impossible budget raises BudgetExceeded") {
  const HyperbolicMap m = cat_map();
  auto dom = dynamics::fundamental_domains(m);
  CHECK_THROWS_AS(dynamics::good_orbit(m, dom, 2.0), Error);  // budget 0
}
