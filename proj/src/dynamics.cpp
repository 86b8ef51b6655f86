#include "holiv/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <set>
#include <tuple>

namespace holiv::dynamics {

namespace {

using Int128 = __int128;

long long checked_ll(Int128 v) {
  if (v > Int128(INT64_MAX) || v < Int128(INT64_MIN))
    fail(Err::InvalidArgument, "integer overflow in exact torus arithmetic");
  return static_cast<long long>(v);
}

Int128 gcd128(Int128 a, Int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// num/den reduced into [0,1) with 128-bit intermediates.
Rational reduce_mod1(Int128 num, Int128 den) {
  if (den == 0) fail(Err::InvalidArgument, "rational with zero denominator");
  if (den < 0) {
    den = -den;
    num = -num;
  }
  num %= den;
  if (num < 0) num += den;
  Int128 g = gcd128(num, den);
  if (g == 0) g = 1;
  return Rational{checked_ll(num / g), checked_ll(den / g)};
}

// 2x2 integer matrices, row-major.
using IMat = std::array<long long, 4>;

IMat imul(const IMat& p, const IMat& q) {
  auto e = [](Int128 v) { return checked_ll(v); };
  return {e(Int128(p[0]) * q[0] + Int128(p[1]) * q[2]),
          e(Int128(p[0]) * q[1] + Int128(p[1]) * q[3]),
          e(Int128(p[2]) * q[0] + Int128(p[3]) * q[2]),
          e(Int128(p[2]) * q[1] + Int128(p[3]) * q[3])};
}

IMat ipow(const IMat& m, int n) {
  IMat r{1, 0, 0, 1};
  for (int i = 0; i < n; ++i) r = imul(r, m);
  return r;
}

// Diagonalize a (nonsingular) integer matrix by unimodular row/column
// operations: U a V = diag(d1, d2) with d1 | d2, d1, d2 > 0.  Only V is
// tracked: the solutions of a x = 0 mod 1 are exactly x = V (i/d1, j/d2).
void smith_form(IMat a, long long& d1, long long& d2, IMat& v) {
  v = {1, 0, 0, 1};
  auto swap_rows = [&]() { std::swap(a[0], a[2]); std::swap(a[1], a[3]); };
  auto swap_cols = [&]() {
    std::swap(a[0], a[1]);
    std::swap(a[2], a[3]);
    std::swap(v[0], v[1]);
    std::swap(v[2], v[3]);
  };
  // row1 -= q * row0 / col1 -= q * col0
  auto row_op = [&](long long q) { a[2] -= q * a[0]; a[3] -= q * a[1]; };
  auto col_op = [&](long long q) {
    a[1] -= q * a[0];
    a[3] -= q * a[2];
    v[1] -= q * v[0];
    v[3] -= q * v[2];
  };

  for (int guard = 0; (a[1] != 0 || a[2] != 0) && guard < 256; ++guard) {
    if (a[0] == 0) {
      if (a[1] != 0) swap_cols();
      else if (a[2] != 0) swap_rows();
      else { std::swap(a[0], a[3]); swap_rows(); swap_cols(); }
      continue;
    }
    if (a[2] != 0) {
      row_op(a[2] / a[0]);
      if (a[2] != 0) { swap_rows(); continue; }
    }
    if (a[1] != 0) {
      col_op(a[1] / a[0]);
      if (a[1] != 0) { swap_cols(); continue; }
    }
  }
  if (a[1] != 0 || a[2] != 0)
    fail(Err::InvalidArgument, "integer normal-form reduction did not converge");
  if (a[0] == 0) { swap_rows(); swap_cols(); }
  // divisibility d1 | d2: fold column 1 into column 0 and restart the sweep
  if (a[0] != 0 && a[3] % a[0] != 0) {
    a[0] += a[1];  // a[1] is 0; keep shape explicit
    a[2] += a[3];
    v[0] += v[1];
    v[2] += v[3];
    long long e1, e2;
    IMat v2;
    smith_form(a, e1, e2, v2);
    d1 = e1;
    d2 = e2;
    v = imul(v, v2);
    return;
  }
  d1 = std::llabs(a[0]);
  d2 = std::llabs(a[3]);
}

// Lexicographic comparison of exact torus points.
bool rational_point_less(const RationalPoint& p, const RationalPoint& q) {
  int cx = compare(p.x, q.x);
  if (cx != 0) return cx < 0;
  return compare(p.y, q.y) < 0;
}

double pow_signed(double base_signed, int e) {
  double mag = std::pow(std::abs(base_signed), e);
  if (base_signed < 0.0 && (e & 1)) return -mag;
  return mag;
}

// j such that mag * lambda^j lies in (delta/lambda, delta].
int annulus_index(double mag, double delta, double lambda) {
  int j = static_cast<int>(std::floor(std::log(delta / mag) / std::log(lambda)));
  while (mag * std::pow(lambda, j) > delta) --j;
  while (mag * std::pow(lambda, j) <= delta / lambda) ++j;
  return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// Torus points and rationals
// ---------------------------------------------------------------------------

double wrap1(double t) {
  double r = t - std::floor(t);
  if (r >= 1.0) r -= 1.0;
  if (r < 0.0) r += 1.0;
  return r;
}

TorusPoint wrap(const Eigen::Vector2d& v) { return TorusPoint{wrap1(v.x()), wrap1(v.y())}; }

Eigen::Vector2d to_vec(const TorusPoint& p) { return Eigen::Vector2d(p.x, p.y); }

Eigen::Vector2d shortest_rep(const TorusPoint& from, const TorusPoint& to) {
  auto fold = [](double t) {
    double r = t - std::round(t);
    if (r >= 0.5) r -= 1.0;
    if (r < -0.5) r += 1.0;
    return r;
  };
  return Eigen::Vector2d(fold(to.x - from.x), fold(to.y - from.y));
}

double torus_distance(const TorusPoint& a, const TorusPoint& b) {
  return shortest_rep(a, b).norm();
}

Rational Rational::mod1(long long num, long long den) { return reduce_mod1(num, den); }

int compare(const Rational& a, const Rational& b) {
  Int128 lhs = Int128(a.num) * b.den;
  Int128 rhs = Int128(b.num) * a.den;
  if (lhs < rhs) return -1;
  if (lhs > rhs) return 1;
  return 0;
}

// ---------------------------------------------------------------------------
// HyperbolicMap
// ---------------------------------------------------------------------------

HyperbolicMap::HyperbolicMap(long long a, long long b, long long c, long long d)
    : m_{a, b, c, d} {
  const long long dt = a * d - b * c;
  if (dt != 1 && dt != -1)
    fail(Err::InvalidArgument, "torus automorphism needs determinant +-1");
  if (std::llabs(a + d) <= 2)
    fail(Err::NotHyperbolic, "|trace| must exceed 2 for a hyperbolic automorphism");

  const double tr = double(a + d);
  const double disc = std::sqrt(tr * tr - 4.0 * double(dt));
  const double mu1 = (tr + disc) / 2.0;
  const double mu2 = (tr - disc) / 2.0;
  lambda_u_ = std::abs(mu1) > std::abs(mu2) ? mu1 : mu2;
  // the contracting eigenvalue, computed stably as det / lambda_u
  lambda_s_ = double(dt) / lambda_u_;

  auto eigvec = [&](double mu) {
    Eigen::Vector2d v;
    if (b != 0)
      v = Eigen::Vector2d(double(b), mu - double(a));
    else
      v = Eigen::Vector2d(mu - double(d), double(c));
    v.normalize();
    // deterministic sign: largest-magnitude component positive
    int lead = std::abs(v.x()) >= std::abs(v.y()) ? 0 : 1;
    if (v(lead) < 0.0) v = -v;
    return v;
  };
  v_u_ = eigvec(lambda_u_);
  v_s_ = eigvec(lambda_s_);

  Eigen::Matrix2d frame;
  frame.col(0) = v_u_;
  frame.col(1) = v_s_;
  frame_inv_ = frame.inverse();
}

Eigen::Matrix2d HyperbolicMap::matrix() const {
  Eigen::Matrix2d m;
  m << double(m_[0]), double(m_[1]), double(m_[2]), double(m_[3]);
  return m;
}

HyperbolicMap HyperbolicMap::inverse() const {
  const long long dt = det();  // +-1
  return HyperbolicMap(dt * m_[3], -dt * m_[1], -dt * m_[2], dt * m_[0]);
}

TorusPoint HyperbolicMap::apply(const TorusPoint& p) const {
  return TorusPoint{wrap1(double(m_[0]) * p.x + double(m_[1]) * p.y),
                    wrap1(double(m_[2]) * p.x + double(m_[3]) * p.y)};
}

TorusPoint HyperbolicMap::apply_inverse(const TorusPoint& p) const {
  const double dt = double(det());
  return TorusPoint{wrap1(dt * (double(m_[3]) * p.x - double(m_[1]) * p.y)),
                    wrap1(dt * (double(m_[0]) * p.y - double(m_[2]) * p.x))};
}

RationalPoint HyperbolicMap::apply(const RationalPoint& p) const {
  // common denominator p.x.den * p.y.den, 128-bit intermediates
  Int128 xd = p.x.den, yd = p.y.den;
  Int128 xn = p.x.num, yn = p.y.num;
  Int128 den = xd * yd;
  RationalPoint out;
  out.x = reduce_mod1(Int128(m_[0]) * xn * yd + Int128(m_[1]) * yn * xd, den);
  out.y = reduce_mod1(Int128(m_[2]) * xn * yd + Int128(m_[3]) * yn * xd, den);
  return out;
}

Eigen::Vector2d HyperbolicMap::apply_linear(const Eigen::Vector2d& v) const {
  return Eigen::Vector2d(double(m_[0]) * v.x() + double(m_[1]) * v.y(),
                         double(m_[2]) * v.x() + double(m_[3]) * v.y());
}

Eigen::Vector2d HyperbolicMap::leaf_coords(const Eigen::Vector2d& d) const {
  return frame_inv_ * d;
}

Lines stable_unstable_lines(const HyperbolicMap& map) {
  return Lines{map.v_u(), map.v_s(), map.lambda()};
}

// ---------------------------------------------------------------------------
// Periodic orbits
// ---------------------------------------------------------------------------

long long fixed_point_count(const HyperbolicMap& map, int n) {
  if (n < 1) fail(Err::InvalidArgument, "period must be >= 1");
  IMat a = ipow(map.coeffs(), n);
  a[0] -= 1;
  a[3] -= 1;
  return checked_ll(std::abs(Int128(a[0]) * a[3] - Int128(a[1]) * a[2]));
}

std::vector<PeriodicOrbit> enumerate_periodic_orbits(const HyperbolicMap& map, int n_max) {
  if (n_max < 1) fail(Err::InvalidArgument, "n_max must be >= 1");

  // A point is a fixed point of M^m iff (M^m - I) x = 0 mod 1; precompute the
  // integer matrices for every period up to n_max for exact minimality tests.
  std::vector<IMat> a_by_period(static_cast<size_t>(n_max) + 1);
  for (int m = 1; m <= n_max; ++m) {
    IMat a = ipow(map.coeffs(), m);
    a[0] -= 1;
    a[3] -= 1;
    a_by_period[static_cast<size_t>(m)] = a;
  }
  auto fixed_by = [&](const RationalPoint& p, int m) {
    const IMat& a = a_by_period[static_cast<size_t>(m)];
    Int128 xd = p.x.den, yd = p.y.den;
    Int128 r0 = Int128(a[0]) * p.x.num * yd + Int128(a[1]) * p.y.num * xd;
    Int128 r1 = Int128(a[2]) * p.x.num * yd + Int128(a[3]) * p.y.num * xd;
    Int128 den = xd * yd;
    return r0 % den == 0 && r1 % den == 0;
  };

  std::vector<PeriodicOrbit> orbits;
  for (int n = 1; n <= n_max; ++n) {
    long long d1 = 0, d2 = 0;
    IMat v{};
    smith_form(a_by_period[static_cast<size_t>(n)], d1, d2, v);

    std::set<std::pair<Rational, Rational>, bool (*)(const std::pair<Rational, Rational>&,
                                                     const std::pair<Rational, Rational>&)>
        seen([](const std::pair<Rational, Rational>& p, const std::pair<Rational, Rational>& q) {
          int cx = compare(p.first, q.first);
          if (cx != 0) return cx < 0;
          return compare(p.second, q.second) < 0;
        });

    std::vector<PeriodicOrbit> batch;
    for (long long i = 0; i < d1; ++i) {
      for (long long j = 0; j < d2; ++j) {
        RationalPoint p;
        p.x = reduce_mod1(Int128(v[0]) * i * d2 + Int128(v[1]) * j * d1, Int128(d1) * d2);
        p.y = reduce_mod1(Int128(v[2]) * i * d2 + Int128(v[3]) * j * d1, Int128(d1) * d2);

        // keep only points whose minimal period is exactly n
        bool minimal = true;
        for (int m = 1; m < n && minimal; ++m)
          if (n % m == 0 && fixed_by(p, m)) minimal = false;
        if (!minimal) continue;

        // build the orbit and identify it by its smallest point
        std::vector<RationalPoint> pts{p};
        for (int t = 1; t < n; ++t) pts.push_back(map.apply(pts.back()));
        size_t min_at = 0;
        for (size_t t = 1; t < pts.size(); ++t)
          if (rational_point_less(pts[t], pts[min_at])) min_at = t;
        std::rotate(pts.begin(), pts.begin() + static_cast<long>(min_at), pts.end());
        if (!seen.insert({pts[0].x, pts[0].y}).second) continue;

        PeriodicOrbit orb;
        orb.period = n;
        orb.points = std::move(pts);
        orb.primitive = true;
        batch.push_back(std::move(orb));
      }
    }
    std::sort(batch.begin(), batch.end(), [](const PeriodicOrbit& p, const PeriodicOrbit& q) {
      return rational_point_less(p.points[0], q.points[0]);
    });
    for (auto& orb : batch) orbits.push_back(std::move(orb));
  }
  return orbits;
}

// ---------------------------------------------------------------------------
// Bowen bracket
// ---------------------------------------------------------------------------

BracketResult bowen_bracket(const HyperbolicMap& map, const TorusPoint& x,
                            const TorusPoint& y, double eps_box) {
  Eigen::Vector2d d = shortest_rep(x, y);
  if (d.norm() >= eps_box)
    fail(Err::TooFar, "points exceed the bracket radius");
  // d = cu v_u + cs v_s; the bracket moves x along its unstable leaf until the
  // remaining difference to y is purely stable.
  Eigen::Vector2d c = map.leaf_coords(d);
  TorusPoint z = wrap(to_vec(x) + c.x() * map.v_u());
  return BracketResult{z, 0.0};
}

// ---------------------------------------------------------------------------
// Fundamental domains
// ---------------------------------------------------------------------------

bool FundamentalDomains::contains_s(double s) const {
  double m = std::abs(s);
  return m > delta_s / lambda && m <= delta_s;
}

bool FundamentalDomains::contains_u(double u) const {
  double m = std::abs(u);
  return m > delta_u / lambda && m <= delta_u;
}

FundamentalDomains fundamental_domains(const HyperbolicMap& map, double delta) {
  if (delta <= 0.0) fail(Err::InvalidArgument, "domain half-width must be positive");
  return FundamentalDomains{delta, delta, map.lambda()};
}

// ---------------------------------------------------------------------------
// Homoclinic orbits
// ---------------------------------------------------------------------------

TorusPoint HomoclinicOrbit::point(int i) const {
  if (i >= 0 && i <= length) return trunk_points[static_cast<size_t>(i)];
  const double u = u_coord_at(i);
  const double s = s_coord_at(i);
  // both leaf parameterizations describe the same torus point; evaluate the
  // numerically smaller one
  if (std::abs(u) <= std::abs(s)) return wrap(u * v_u);
  return wrap(s * v_s);
}

double HomoclinicOrbit::u_coord_at(int i) const { return a * pow_signed(lambda_u, j_u + i); }

double HomoclinicOrbit::s_coord_at(int i) const { return b * pow_signed(lambda_s, j_u + i); }

namespace {

// Materialize a trunk from the closed-form leaf parameterization (valid when
// all trunk coordinates stay well inside double precision — enumerated short
// orbits qualify).
void fill_trunk_closed_form(HomoclinicOrbit& orb) {
  orb.trunk_points.clear();
  orb.trunk_points.reserve(static_cast<size_t>(orb.length) + 1);
  for (int i = 0; i <= orb.length; ++i) {
    const double u = orb.u_coord_at(i);
    const double s = orb.s_coord_at(i);
    orb.trunk_points.push_back(std::abs(u) <= std::abs(s) ? wrap(u * orb.v_u)
                                                          : wrap(s * orb.v_s));
  }
}

}  // namespace

std::vector<HomoclinicOrbit> homoclinic_points(const HyperbolicMap& map,
                                               const FundamentalDomains& domains,
                                               long long complexity_bound) {
  std::vector<HomoclinicOrbit> orbits;
  if (complexity_bound <= 0) return orbits;

  const IMat m = map.coeffs();
  const IMat minv = map.inverse().coeffs();
  auto step = [](const IMat& mm, long long& kx, long long& ky) {
    long long nx = mm[0] * kx + mm[1] * ky;
    long long ny = mm[2] * kx + mm[3] * ky;
    kx = nx;
    ky = ny;
  };

  // Orbits correspond to classes {M^j k} of lattice vectors.  The class
  // representative is the member minimizing (max-norm, kx, ky) — a choice
  // independent of the enumeration box, so raising the bound only adds
  // orbits.  The norm along a class is a single well up to bounded wobble;
  // a few grace steps past the current norm cover the wobble.
  auto key = [](long long x, long long y) {
    return std::tuple<long long, long long, long long>(std::max(std::llabs(x), std::llabs(y)), x, y);
  };
  std::vector<std::pair<long long, long long>> kept;
  for (long long kx = -complexity_bound; kx <= complexity_bound; ++kx) {
    for (long long ky = -complexity_bound; ky <= complexity_bound; ++ky) {
      if (kx == 0 && ky == 0) continue;
      const long long cap = std::max(std::llabs(kx), std::llabs(ky));
      auto best = key(kx, ky);
      for (int dir = 0; dir < 2; ++dir) {
        long long cx = kx, cy = ky;
        int grace = 0;
        for (int guard = 0; guard < 128; ++guard) {
          step(dir == 0 ? m : minv, cx, cy);
          if (std::max(std::llabs(cx), std::llabs(cy)) > cap) {
            if (++grace > 4) break;
            continue;
          }
          grace = 0;
          best = std::min(best, key(cx, cy));
        }
      }
      if (best == key(kx, ky)) kept.push_back({kx, ky});
    }
  }
  std::sort(kept.begin(), kept.end(),
            [](const std::pair<long long, long long>& p, const std::pair<long long, long long>& q) {
              long long np = std::max(std::llabs(p.first), std::llabs(p.second));
              long long nq = std::max(std::llabs(q.first), std::llabs(q.second));
              return std::tie(np, p.first, p.second) < std::tie(nq, q.first, q.second);
            });

  // Solve a v_u - b v_s = k for each representative.
  Eigen::Matrix2d cross;
  cross.col(0) = map.v_u();
  cross.col(1) = -map.v_s();
  Eigen::Matrix2d cross_inv = cross.inverse();

  struct Raw {
    double a, b;
    long long kx, ky;
    int j_u, j_s;
  };
  std::vector<Raw> raws;
  for (const auto& [kx, ky] : kept) {
    Eigen::Vector2d ab = cross_inv * Eigen::Vector2d(double(kx), double(ky));
    Raw r{ab.x(), ab.y(), kx, ky, 0, 0};
    r.j_u = annulus_index(std::abs(r.a), domains.delta_u, map.lambda());
    // the stable coordinate contracts: annulus index in negative powers
    r.j_s = -annulus_index(std::abs(r.b), domains.delta_s, map.lambda());
    raws.push_back(r);
  }

  // Whole-step shift so every length is >= 1 (the crossing convention may be
  // translated as a block without affecting crossing counts).
  int shift = 0;
  for (const auto& r : raws) shift = std::max(shift, 1 - (r.j_s - r.j_u));
  if (raws.empty()) return orbits;

  int id = 0;
  for (const auto& r : raws) {
    HomoclinicOrbit orb;
    orb.id = id++;
    orb.a = r.a;
    orb.b = r.b;
    orb.kx = double(r.kx);
    orb.ky = double(r.ky);
    orb.j_u = r.j_u - shift;
    orb.length = (r.j_s - r.j_u) + shift;
    orb.lambda_u = map.lambda_u_signed();
    orb.lambda_s = map.lambda_s_signed();
    orb.v_u = map.v_u();
    orb.v_s = map.v_s();
    fill_trunk_closed_form(orb);
    orbits.push_back(std::move(orb));
  }
  return orbits;
}

// ---------------------------------------------------------------------------
// Shadowing
// ---------------------------------------------------------------------------

std::vector<TorusPoint> shadow(const HyperbolicMap& map,
                               const std::vector<TorusPoint>& pseudo_orbit,
                               double jump_tolerance) {
  const size_t n = pseudo_orbit.size();
  if (n < 2) return pseudo_orbit;
  const size_t steps = n - 1;

  const double lu = map.lambda_u_signed();
  const double ls = map.lambda_s_signed();

  std::vector<double> eu(steps), es(steps);
  for (size_t k = 0; k < steps; ++k) {
    Eigen::Vector2d e = shortest_rep(pseudo_orbit[k + 1], map.apply(pseudo_orbit[k]));
    if (e.norm() > jump_tolerance)
      fail(Err::JumpTooLarge, "pseudo-orbit jump exceeds the shadowing tolerance");
    Eigen::Vector2d c = map.leaf_coords(e);
    eu[k] = c.x();
    es[k] = c.y();
  }

  std::vector<double> u(n, 0.0), s(n, 0.0);
  const bool periodic = torus_distance(pseudo_orbit.front(), pseudo_orbit.back()) < 1e-12;
  if (periodic) {
    // periodic corrections: geometric sums over one full period
    const auto N = steps;
    const double fu = 1.0 / (1.0 - std::pow(lu, -double(N)));
    const double fs = 1.0 / (1.0 - std::pow(ls, double(N)));
    for (size_t k = 0; k < N; ++k) {
      double su = 0.0, pw = 1.0;
      for (size_t j = 0; j < N; ++j) {
        pw /= lu;
        su -= pw * eu[(k + j) % N];
      }
      u[k] = fu * su;
      double ss = 0.0;
      pw = 1.0;
      for (size_t j = 1; j <= N; ++j) {
        ss += pw * es[(k + N - j) % N];
        pw *= ls;
      }
      s[k] = fs * ss;
    }
    u[N] = u[0];
    s[N] = s[0];
  } else {
    // boundary conditions u_N = 0 (end stays on its unstable position) and
    // s_0 = 0 (start keeps its stable position)
    for (size_t k = steps; k-- > 0;) u[k] = (u[k + 1] - eu[k]) / lu;
    for (size_t k = 0; k < steps; ++k) s[k + 1] = ls * s[k] + es[k];
  }

  std::vector<TorusPoint> out;
  out.reserve(n);
  for (size_t k = 0; k < n; ++k)
    out.push_back(wrap(to_vec(pseudo_orbit[k]) + u[k] * map.v_u() + s[k] * map.v_s()));
  if (periodic) out.back() = out.front();
  return out;
}

// ---------------------------------------------------------------------------
// Good orbits
// ---------------------------------------------------------------------------

namespace {

// Leaf coordinates of the shortest lift of p around the origin.
Eigen::Vector2d origin_leaf_coords(const HyperbolicMap& map, const TorusPoint& p) {
  return map.leaf_coords(shortest_rep(TorusPoint{0.0, 0.0}, p));
}

double measure_density(const std::vector<TorusPoint>& trunk) {
  constexpr int kGrid = 32;
  double worst = 0.0;
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      TorusPoint cell{(i + 0.5) / kGrid, (j + 0.5) / kGrid};
      double best = 2.0;
      for (const auto& p : trunk) best = std::min(best, torus_distance(cell, p));
      worst = std::max(worst, best);
    }
  }
  return worst;
}

double measure_separation(const HyperbolicMap& map, const std::vector<TorusPoint>& trunk) {
  double best = 2.0;
  for (size_t i = 0; i < trunk.size(); ++i) {
    for (size_t j = i + 1; j < trunk.size(); ++j) {
      Eigen::Vector2d c = map.leaf_coords(shortest_rep(trunk[j], trunk[i]));
      best = std::min(best, std::abs(c.x()));
    }
  }
  return best;
}

}  // namespace

GoodOrbit good_orbit(const HyperbolicMap& map, const FundamentalDomains& domains,
                     double epsilon) {
  if (epsilon <= 0.0) fail(Err::InvalidArgument, "epsilon must be positive");
  const int budget = static_cast<int>(std::floor(std::pow(epsilon, -0.5)));
  if (budget < 1) fail(Err::BudgetExceeded, "length budget below one map step");

  const double lambda = map.lambda();
  // Translate the crossing convention by whole map steps: enlarged annuli make
  // the shortest homoclinic loops fit small budgets.  Crossing counts against
  // the caller's domains are unaffected.
  const int lift_steps = std::max(
      0, static_cast<int>(std::floor(std::log(0.35 / domains.delta_u) / std::log(lambda))));
  const double delta_g_u = domains.delta_u * std::pow(lambda, lift_steps);
  const double delta_g_s = domains.delta_s * std::pow(lambda, lift_steps);

  const double phi_inv = 2.0 / (1.0 + std::sqrt(5.0));
  const double a0 = delta_g_u * (1.0 + 1.0 / lambda) / 2.0;

  for (int net_size = std::max(0, budget - 1); net_size >= 0; --net_size) {
    // skeleton: unstable-leaf seed, low-discrepancy net, stable-leaf seed
    std::vector<TorusPoint> pseudo;
    pseudo.push_back(wrap(a0 * map.v_u()));

    std::vector<TorusPoint> net;
    for (int i = 0; i < net_size; ++i)
      net.push_back(TorusPoint{wrap1((i + 0.5) / net_size), wrap1((i + 0.5) * phi_inv)});
    std::vector<bool> used(net.size(), false);
    for (int hop = 0; hop < net_size; ++hop) {
      TorusPoint target = map.apply(pseudo.back());
      size_t pick = 0;
      double best = 3.0;
      for (size_t t = 0; t < net.size(); ++t) {
        if (used[t]) continue;
        double d = torus_distance(target, net[t]);
        if (d < best) {
          best = d;
          pick = t;
        }
      }
      used[pick] = true;
      pseudo.push_back(net[pick]);
    }

    const double tail_s = origin_leaf_coords(map, map.apply(pseudo.back())).y();
    const double b_end = (tail_s >= 0.0 ? 1.0 : -1.0) * delta_g_s * (1.0 + 1.0 / lambda) / 2.0;
    pseudo.push_back(wrap(b_end * map.v_s()));

    // glue into a genuine orbit; the linear model shadows any bounded jump
    std::vector<TorusPoint> y = shadow(map, pseudo, 0.75);
    const int last = static_cast<int>(y.size()) - 1;

    // recover the exact leaf parameters of the glued orbit
    Eigen::Vector2d c0 = origin_leaf_coords(map, y.front());
    Eigen::Vector2d cT = origin_leaf_coords(map, y.back());
    const double alpha = c0.x();  // y_0 = alpha v_u on W^u(0)
    const double beta = cT.y();   // y_last = beta v_s on W^s(0)
    if (std::abs(alpha) < 1e-9 || std::abs(beta) < 1e-9) continue;

    // re-normalize to the (enlarged) crossing convention
    const int start = annulus_index(std::abs(alpha), delta_g_u, lambda);
    const int end = last - annulus_index(std::abs(beta), delta_g_s, lambda);
    const int len = end - start;
    if (len < 1 || len > budget) continue;

    HomoclinicOrbit orb;
    orb.id = 0;
    orb.a = alpha;
    orb.b = beta * pow_signed(map.lambda_s_signed(), -last);
    orb.lambda_u = map.lambda_u_signed();
    orb.lambda_s = map.lambda_s_signed();
    orb.v_u = map.v_u();
    orb.v_s = map.v_s();
    Eigen::Vector2d k_vec = orb.a * orb.v_u - orb.b * orb.v_s;
    orb.kx = k_vec.x();
    orb.ky = k_vec.y();
    orb.j_u = start;
    orb.length = len;
    orb.trunk_points.clear();
    for (int i = start; i <= end; ++i) {
      if (i >= 0 && i <= last) {
        orb.trunk_points.push_back(y[static_cast<size_t>(i)]);
      } else {
        const double u = orb.a * pow_signed(orb.lambda_u, i);
        const double s = orb.b * pow_signed(orb.lambda_s, i);
        orb.trunk_points.push_back(std::abs(u) <= std::abs(s) ? wrap(u * orb.v_u)
                                                              : wrap(s * orb.v_s));
      }
    }

    GoodOrbit good;
    good.orbit = std::move(orb);
    good.density_radius = measure_density(good.orbit.trunk_points);
    good.separation_radius = measure_separation(map, good.orbit.trunk_points);
    good.epsilon = epsilon;
    return good;
  }
  fail(Err::BudgetExceeded, "no homoclinic gluing fits the length budget");
}

}  // namespace holiv::dynamics
