#include "holiv/livsic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "holiv/repstab.hpp"
#include "json.hpp"

namespace holiv::livsic {

namespace {

using dynamics::TorusPoint;
using matalg::CMatrix;
using matalg::CVector;
using matalg::UnitaryMatrix;

// Bracket paths hop in short segments so both legs of every bracket stay
// well inside holonomy range.
constexpr double kHopLength = 0.2;
constexpr double kBracketBox = 0.4;

// Raw bump totals below this are treated as holes in the cover.
constexpr double kCoverFloor = 1e-6;

// Sample pairs closer than this carry mostly transport noise, so they are
// excluded from the exponent fit and the seminorm; the seminorm is floored
// to keep the min-formula extension well defined on flat data.
constexpr double kPairFloor = 1e-2;
constexpr double kSeminormFloor = 1e-14;
constexpr double kAlphaMin = 0.1;

// Nodes whose smallest singular value falls at or below this cannot be
// meaningfully unitarized.
constexpr double kSingularFloor = 0.1;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

// Tags an error with the pipeline stage it surfaced in; inner stages win.
template <typename Fn>
decltype(auto) run_stage(const char* name, Fn&& fn) {
  try {
    return std::forward<Fn>(fn)();
  } catch (Error& e) {
    if (e.stage().empty()) e.set_stage(name);
    throw;
  }
}

// One bracket path from -> z -> to: an unstable leg to the local product
// point, then a stable leg onward.
CMatrix bracket_hop(const cocycle::CocycleField& hom, const TorusPoint& from,
                    const TorusPoint& to, double tol) {
  const auto br = dynamics::bowen_bracket(hom.map(), from, to, kBracketBox);
  const CMatrix up = cocycle::unstable_holonomy(hom, from, br.z, tol).u.mat();
  const CMatrix down = cocycle::stable_holonomy(hom, br.z, to, tol).u.mat();
  return CMatrix(down * up);
}

// Intermediate hop targets along the shortest displacement, ending at the
// exact destination.
std::vector<TorusPoint> hop_targets(const TorusPoint& from,
                                    const TorusPoint& to) {
  const Eigen::Vector2d d = dynamics::shortest_rep(from, to);
  const int hops = std::max(1, static_cast<int>(std::ceil(d.norm() / kHopLength)));
  const Eigen::Vector2d start = dynamics::to_vec(from);
  std::vector<TorusPoint> targets;
  targets.reserve(hops);
  for (int k = 1; k < hops; ++k)
    targets.push_back(
        dynamics::wrap(start + (static_cast<double>(k) / hops) * d));
  targets.push_back(to);
  return targets;
}

// Shared trunk propagation; the pair cocycle is built once by the caller.
TrunkSection trunk_core(const cocycle::CocycleField& c0,
                        const cocycle::CocycleField& c,
                        const cocycle::CocycleField& hom,
                        const UnitaryMatrix& p_star,
                        const dynamics::GoodOrbit& good, double tol) {
  const int r = c0.rank();
  TrunkSection out;
  out.points = good.orbit.trunk_points;
  const int n = static_cast<int>(out.points.size());
  const TorusPoint origin{0.0, 0.0};

  // p_-: carry the base conjugator out the unstable leaf to x_u, then push
  // it forward with the pair recursion p(Mx) = A2(x) p(x) A1(x)*.
  const CMatrix hu =
      cocycle::unstable_holonomy(hom, origin, good.orbit.x_u(), tol).u.mat();
  CMatrix pm = cocycle::unvec(CVector(hu * cocycle::vec(p_star.mat())), r);
  out.p_minus.reserve(n);
  out.p_minus.push_back(UnitaryMatrix::certify(pm));
  for (int i = 1; i < n; ++i) {
    const TorusPoint& prev = out.points[i - 1];
    pm = CMatrix(c.at(prev) * pm * c0.at(prev).adjoint());
    out.p_minus.push_back(UnitaryMatrix::certify(pm));
  }

  // p_+: same through the stable side, pulled backwards.
  const CMatrix hs =
      cocycle::stable_holonomy(hom, origin, good.orbit.x_s(), tol).u.mat();
  CMatrix pp = cocycle::unvec(CVector(hs * cocycle::vec(p_star.mat())), r);
  std::vector<CMatrix> plus(n);
  plus[n - 1] = pp;
  for (int i = n - 2; i >= 0; --i) {
    const TorusPoint& here = out.points[i];
    pp = CMatrix(c.at(here).adjoint() * pp * c0.at(here));
    plus[i] = pp;
  }

  out.p_plus.reserve(n);
  double mismatch = 0.0;
  for (int i = 0; i < n; ++i) {
    out.p_plus.push_back(UnitaryMatrix::certify(plus[i]));
    mismatch = std::max(mismatch, (out.p_minus[i].mat() - plus[i]).norm());
  }
  out.mismatch = mismatch;
  return out;
}

int modulo(long long a, int n) {
  const long long m = a % n;
  return static_cast<int>(m < 0 ? m + n : m);
}

}  // namespace

// ---------------------------------------------------------------------------
// Chart cover
// ---------------------------------------------------------------------------

ChartCover::ChartCover(const dynamics::HyperbolicMap& map, int per_axis,
                       double half_width)
    : map_(map), per_axis_(per_axis), half_width_(half_width) {
  if (per_axis < 1)
    fail(Err::InvalidArgument, "ChartCover: per_axis must be positive");
  if (!(half_width > 0.0))
    fail(Err::InvalidArgument, "ChartCover: half width must be positive");
  charts_.reserve(static_cast<size_t>(per_axis) * per_axis);
  for (int ix = 0; ix < per_axis; ++ix)
    for (int iy = 0; iy < per_axis; ++iy)
      charts_.push_back(Chart{TorusPoint{static_cast<double>(ix) / per_axis,
                                         static_cast<double>(iy) / per_axis},
                              half_width});

  // Worst simultaneous activity over a refined probe grid.
  const int probe = 4 * per_axis;
  int worst = 0;
  for (int ix = 0; ix < probe; ++ix)
    for (int iy = 0; iy < probe; ++iy) {
      const TorusPoint x{static_cast<double>(ix) / probe,
                         static_cast<double>(iy) / probe};
      int active = 0;
      for (int j = 0; j < static_cast<int>(charts_.size()); ++j)
        if (raw_weight(j, x) > 0.0) ++active;
      worst = std::max(worst, active);
    }
  overlap_ = worst;
}

ChartCover ChartCover::standard(const dynamics::HyperbolicMap& map) {
  return ChartCover(map, 8, 0.22);
}

double ChartCover::raw_weight(int chart, const TorusPoint& x) const {
  if (chart < 0 || chart >= static_cast<int>(charts_.size()))
    fail(Err::InvalidArgument, "ChartCover: chart index out of range");
  const Eigen::Vector2d d = dynamics::shortest_rep(charts_[chart].center, x);
  const Eigen::Vector2d uv = map_.leaf_coords(d);
  const double h = charts_[chart].half_width;
  if (std::abs(uv.x()) >= h || std::abs(uv.y()) >= h) return 0.0;
  const double cu = std::cos(0.5 * M_PI * uv.x() / h);
  const double cs = std::cos(0.5 * M_PI * uv.y() / h);
  return cu * cu * cs * cs;
}

std::vector<std::pair<int, double>> ChartCover::weights(
    const TorusPoint& x) const {
  std::vector<std::pair<int, double>> out;
  double total = 0.0;
  for (int j = 0; j < static_cast<int>(charts_.size()); ++j) {
    const double w = raw_weight(j, x);
    if (w > 0.0) {
      out.emplace_back(j, w);
      total += w;
    }
  }
  if (total < kCoverFloor)
    fail(Err::CoverGap,
         "ChartCover: no chart covers the point (raw total " + fmt(total) + ")");
  for (auto& [j, w] : out) w /= total;
  return out;
}

// ---------------------------------------------------------------------------
// Trunk sections and bracket transport
// ---------------------------------------------------------------------------

TrunkSection trunk_sections(const cocycle::CocycleField& c0,
                            const cocycle::CocycleField& c,
                            const UnitaryMatrix& p_star,
                            const dynamics::GoodOrbit& good, double tol) {
  if (c0.map().coeffs() != c.map().coeffs())
    fail(Err::InvalidArgument,
         "trunk_sections: cocycles live over different maps");
  if (c0.rank() != c.rank())
    fail(Err::RankMismatch, "trunk_sections: cocycle ranks differ");
  if (p_star.dim() != c0.rank())
    fail(Err::RankMismatch,
         "trunk_sections: base conjugator rank does not match the cocycles");
  if (good.orbit.trunk_points.empty())
    fail(Err::InvalidArgument, "trunk_sections: empty orbit trunk");
  const auto hom = cocycle::hom_cocycle(c0, c);
  return trunk_core(c0, c, hom, p_star, good, tol);
}

UnitaryMatrix bracket_transport(const cocycle::CocycleField& hom,
                                const TorusPoint& from, const TorusPoint& to,
                                double tol) {
  const int r2 = hom.rank();
  if (dynamics::torus_distance(from, to) < 1e-15)
    return UnitaryMatrix::certify(CMatrix::Identity(r2, r2));
  CMatrix acc = CMatrix::Identity(r2, r2);
  TorusPoint cur = from;
  for (const auto& target : hop_targets(from, to)) {
    acc = CMatrix(bracket_hop(hom, cur, target, tol) * acc);
    cur = target;
  }
  return UnitaryMatrix::certify(acc);
}

// ---------------------------------------------------------------------------
// Holder extension
// ---------------------------------------------------------------------------

ChartCoefficients holder_extend(const TrunkSection& trunk,
                                const ChartCover& cover,
                                const cocycle::CocycleField& hom, double tol) {
  if (trunk.points.empty())
    fail(Err::EmptyChart, "holder_extend: trunk carries no samples");
  if (trunk.p_minus.size() != trunk.points.size())
    fail(Err::DimensionMismatch,
         "holder_extend: trunk sections and points disagree in length");
  const int r = trunk.p_minus.front().dim();
  if (hom.rank() != r * r)
    fail(Err::RankMismatch,
         "holder_extend: pair cocycle rank does not match the trunk data");

  // Every trunk point must be covered before any fitting happens.
  for (const auto& y : trunk.points) cover.weights(y);

  const auto& charts = cover.charts();
  ChartCoefficients out;
  out.sections.resize(charts.size());
  for (size_t j = 0; j < charts.size(); ++j) {
    auto& cs = out.sections[j];
    cs.chart = static_cast<int>(j);
    for (size_t i = 0; i < trunk.points.size(); ++i) {
      if (cover.raw_weight(static_cast<int>(j), trunk.points[i]) <= 0.0)
        continue;
      const auto tr =
          bracket_transport(hom, trunk.points[i], charts[j].center, tol);
      cs.points.push_back(trunk.points[i]);
      cs.centered.push_back(cocycle::unvec(
          CVector(tr.mat() * cocycle::vec(trunk.p_minus[i].mat())), r));
    }
    cs.has_data = !cs.points.empty();
  }

  // Exponent fit over well-separated same-chart pairs; flat data (gaps at
  // transport-noise scale) pins the exponent to one.
  double max_gap = 0.0;
  std::vector<std::pair<double, double>> fit;
  for (const auto& cs : out.sections) {
    if (!cs.has_data) continue;
    for (size_t i = 0; i < cs.points.size(); ++i)
      for (size_t k = i + 1; k < cs.points.size(); ++k) {
        const double d = dynamics::torus_distance(cs.points[i], cs.points[k]);
        const double gap = (cs.centered[i] - cs.centered[k]).norm();
        max_gap = std::max(max_gap, gap);
        if (d >= kPairFloor && gap > 1e-13)
          fit.emplace_back(std::log(d), std::log(gap));
      }
  }
  double alpha = 1.0;
  const double flat_gap = std::max(1e-9, 50.0 * tol);
  if (max_gap >= flat_gap && fit.size() >= 2) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (const auto& [x, y] : fit) {
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double n = static_cast<double>(fit.size());
    const double var = n * sxx - sx * sx;
    if (var > 1e-12) {
      const double slope = (n * sxy - sx * sy) / var;
      if (std::isfinite(slope)) alpha = std::clamp(slope, kAlphaMin, 1.0);
    }
  }
  out.alpha = alpha;

  double s = 0.0;
  for (const auto& cs : out.sections) {
    if (!cs.has_data) continue;
    for (size_t i = 0; i < cs.points.size(); ++i)
      for (size_t k = i + 1; k < cs.points.size(); ++k) {
        const double d = dynamics::torus_distance(cs.points[i], cs.points[k]);
        if (d < kPairFloor) continue;
        const double gap = (cs.centered[i] - cs.centered[k]).norm();
        s = std::max(s, gap / std::pow(d, alpha));
      }
  }
  out.seminorm = std::max(s, kSeminormFloor);

  // Charts the trunk never met inherit the nearest populated chart's data,
  // re-centered by one more bracket transport.
  for (size_t j = 0; j < charts.size(); ++j) {
    auto& cs = out.sections[j];
    if (cs.has_data) continue;
    int best = -1;
    double best_d = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < charts.size(); ++k) {
      if (!out.sections[k].has_data) continue;
      const double d =
          dynamics::torus_distance(charts[j].center, charts[k].center);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(k);
      }
    }
    const auto& src = out.sections[best];
    const auto tr =
        bracket_transport(hom, charts[best].center, charts[j].center, tol);
    cs.points = src.points;
    cs.centered.reserve(src.centered.size());
    for (const auto& a : src.centered)
      cs.centered.push_back(
          cocycle::unvec(CVector(tr.mat() * cocycle::vec(a)), r));
  }
  return out;
}

CMatrix extended_value(const ChartCoefficients& coeffs, const ChartCover& cover,
                       const cocycle::CocycleField& hom, double tol,
                       const TorusPoint& x) {
  if (coeffs.sections.size() != cover.charts().size())
    fail(Err::DimensionMismatch,
         "extended_value: coefficients do not match the cover");
  const auto ws = cover.weights(x);
  const auto& first = coeffs.sections[ws.front().first];
  if (first.centered.empty())
    fail(Err::EmptyChart, "extended_value: active chart carries no data");
  const int r = static_cast<int>(first.centered.front().rows());

  CMatrix acc = CMatrix::Zero(r, r);
  std::vector<double> penalty;
  for (const auto& [j, w] : ws) {
    const auto& cs = coeffs.sections[j];
    penalty.resize(cs.points.size());
    for (size_t i = 0; i < cs.points.size(); ++i)
      penalty[i] = 2.0 * coeffs.seminorm *
                   std::pow(dynamics::torus_distance(x, cs.points[i]),
                            coeffs.alpha);

    // Entrywise min formula at the chart center, real and imaginary parts
    // independently.
    CMatrix b(r, r);
    for (int row = 0; row < r; ++row)
      for (int col = 0; col < r; ++col) {
        double re = std::numeric_limits<double>::infinity();
        double im = std::numeric_limits<double>::infinity();
        for (size_t i = 0; i < cs.centered.size(); ++i) {
          const auto v = cs.centered[i](row, col);
          re = std::min(re, v.real() + penalty[i]);
          im = std::min(im, v.imag() + penalty[i]);
        }
        b(row, col) = matalg::Complex(re, im);
      }

    // Back from the chart center along the same bracket path.
    const auto tr = bracket_transport(hom, x, cover.charts()[j].center, tol);
    acc += w * cocycle::unvec(CVector(tr.mat().adjoint() * cocycle::vec(b)), r);
  }
  return acc;
}

// ---------------------------------------------------------------------------
// Blending and unitarization
// ---------------------------------------------------------------------------

ExtendedSection blend(const ChartCoefficients& coeffs, const ChartCover& cover,
                      const dynamics::GoodOrbit& good,
                      const TrunkSection& trunk,
                      const cocycle::CocycleField& c0,
                      const cocycle::CocycleField& c,
                      const cocycle::CocycleField& hom, int grid_n,
                      double tol) {
  if (grid_n < 2) fail(Err::InvalidArgument, "blend: grid_n must be at least 2");
  if (trunk.points.empty())
    fail(Err::EmptyChart, "blend: trunk carries no samples");
  (void)good;

  ExtendedSection out;
  out.grid_n = grid_n;
  out.alpha = coeffs.alpha;
  out.nodes.reserve(static_cast<size_t>(grid_n) * grid_n);
  out.values.reserve(static_cast<size_t>(grid_n) * grid_n);
  for (int ix = 0; ix < grid_n; ++ix)
    for (int iy = 0; iy < grid_n; ++iy)
      out.nodes.push_back(TorusPoint{static_cast<double>(ix) / grid_n,
                                     static_cast<double>(iy) / grid_n});
  for (const auto& node : out.nodes)
    out.values.push_back(extended_value(coeffs, cover, hom, tol, node));

  // Agreement with the propagated trunk data.
  std::vector<CMatrix> tv(trunk.points.size());
  double agreement = 0.0;
  for (size_t i = 0; i < trunk.points.size(); ++i) {
    tv[i] = extended_value(coeffs, cover, hom, tol, trunk.points[i]);
    agreement = std::max(agreement, (tv[i] - trunk.p_minus[i].mat()).norm());
  }
  out.trunk_agreement = agreement;

  // Transport defect. The map permutes the grid lattice exactly, so node
  // images are other nodes and their values come from the same exact chart
  // formulas; trunk points step to the next trunk point, with one fresh
  // evaluation past the stable end.
  const auto& map = cover.map();
  const auto cf = map.coeffs();
  double defect = 0.0;
  for (int ix = 0; ix < grid_n; ++ix)
    for (int iy = 0; iy < grid_n; ++iy) {
      const int jx = modulo(cf[0] * ix + cf[1] * iy, grid_n);
      const int jy = modulo(cf[2] * ix + cf[3] * iy, grid_n);
      const TorusPoint& node = out.nodes[ix * grid_n + iy];
      const CMatrix& here = out.values[ix * grid_n + iy];
      const CMatrix& image = out.values[jx * grid_n + jy];
      defect = std::max(
          defect,
          (image - CMatrix(c.at(node) * here * c0.at(node).adjoint())).norm());
    }
  for (size_t i = 0; i + 1 < trunk.points.size(); ++i) {
    const TorusPoint& here = trunk.points[i];
    defect = std::max(
        defect,
        (tv[i + 1] - CMatrix(c.at(here) * tv[i] * c0.at(here).adjoint()))
            .norm());
  }
  const TorusPoint& last = trunk.points.back();
  const CMatrix past_end =
      extended_value(coeffs, cover, hom, tol, map.apply(last));
  defect = std::max(
      defect,
      (past_end - CMatrix(c.at(last) * tv.back() * c0.at(last).adjoint()))
          .norm());
  out.sup_defect = defect;

  out.seminorm = holder_seminorm(out.values, out.nodes, out.alpha);
  return out;
}

UnitarizedSection unitarize_section(const ExtendedSection& ext) {
  UnitarizedSection out;
  out.values.reserve(ext.values.size());
  out.radial.reserve(ext.values.size());
  for (size_t k = 0; k < ext.values.size(); ++k) {
    const auto svd = matalg::jacobi_svd(ext.values[k]);
    const double smin = svd.sigma(svd.sigma.size() - 1);
    if (smin <= kSingularFloor)
      fail(Err::NearSingularNode,
           "unitarize_section: node " + std::to_string(k) +
               " has smallest singular value " + fmt(smin));
    out.values.push_back(UnitaryMatrix::certify(CMatrix(svd.U * svd.V.adjoint())));
    double radial = 0.0;
    for (Eigen::Index i = 0; i < svd.sigma.size(); ++i) {
      const double d = svd.sigma(i) - 1.0;
      radial += d * d;
    }
    radial = std::sqrt(radial);
    out.radial.push_back(radial);
    out.max_radial = std::max(out.max_radial, radial);
  }
  return out;
}

double holder_seminorm(const std::vector<CMatrix>& values,
                       const std::vector<TorusPoint>& points, double alpha) {
  if (!(alpha > 0.0) || alpha > 1.0)
    fail(Err::InvalidArgument, "holder_seminorm: alpha must lie in (0, 1]");
  if (values.size() != points.size())
    fail(Err::DimensionMismatch,
         "holder_seminorm: values and points disagree in length");
  for (const auto& v : values)
    if (v.rows() != values.front().rows() || v.cols() != values.front().cols())
      fail(Err::DimensionMismatch, "holder_seminorm: mixed matrix shapes");

  double s = 0.0;
  for (size_t i = 0; i < values.size(); ++i)
    for (size_t k = i + 1; k < values.size(); ++k) {
      const double d = dynamics::torus_distance(points[i], points[k]);
      if (d <= 0.0 || d > 0.25) continue;
      s = std::max(s, (values[i] - values[k]).norm() / std::pow(d, alpha));
    }
  return s;
}

// ---------------------------------------------------------------------------
// Character harvesting and rank certification
// ---------------------------------------------------------------------------

freemonoid::CharTable harvest_characters(
    const cocycle::CocycleField& c,
    const std::vector<dynamics::HomoclinicOrbit>& gens,
    const std::set<freemonoid::FreeWord>& words, int depth) {
  if (depth < 1)
    fail(Err::InvalidArgument, "harvest_characters: depth must be positive");
  const int r = c.rank();
  std::map<int, cocycle::ParryApprox> cache;
  freemonoid::CharTable out;
  for (const auto& w : words) {
    CMatrix acc = CMatrix::Identity(r, r);
    double err = 0.0;
    for (const auto& f : w.factors()) {
      if (f.gen < 1 || f.gen > static_cast<int>(gens.size()))
        fail(Err::InvalidArgument,
             "harvest_characters: word uses generator id " +
                 std::to_string(f.gen) + " outside the generator list");
      auto it = cache.find(f.gen);
      if (it == cache.end())
        it = cache
                 .emplace(f.gen,
                          cocycle::parry_approx(c, gens[f.gen - 1], depth, depth))
                 .first;
      for (int e = 0; e < f.exp; ++e) acc = CMatrix(acc * it->second.u.mat());
      err += f.exp * it->second.error_bound;
    }
    out.set(w, acc.trace(), r * err);
  }
  return out;
}

bool check_rank_agreement(const freemonoid::CharTable& t0,
                          const freemonoid::CharTable& t, int r0, int r_max) {
  if (r0 < 1 || r_max < r0)
    fail(Err::InvalidArgument, "check_rank_agreement: bad rank bounds");
  for (const auto& [w, chi0] : t0.values()) {
    if (w.factors().size() != 1) continue;  // single-generator powers only
    if (!t.contains(w)) continue;
    if (std::abs(chi0 - matalg::Complex(static_cast<double>(r0), 0.0)) > 0.25)
      continue;
    // chi0 certifies this power as near-identity; the other table must
    // read a consistent integer rank there.
    const auto chi = t.at(w);
    const long long rhat = std::llround(chi.real());
    if (rhat < 1 || rhat > r_max) return false;
    if (std::abs(chi - matalg::Complex(static_cast<double>(r0), 0.0)) >= 0.5)
      return false;
    if (std::abs(chi - matalg::Complex(static_cast<double>(rhat), 0.0)) > 0.5)
      return false;
    return rhat == r0;
  }
  fail(Err::InsufficientPowers,
       "check_rank_agreement: no near-identity power among the shared words");
}

// ---------------------------------------------------------------------------
// The end-to-end solver
// ---------------------------------------------------------------------------

LivsicReport livsic_solve(const cocycle::CocycleField& c0,
                          const cocycle::CocycleField& c, double eps_budget,
                          const LivsicConfig& config) {
  if (!(eps_budget > 0.0))
    fail(Err::InvalidArgument, "livsic_solve: eps_budget must be positive");
  if (config.grid_n < 2 || config.wilson_period < 1 ||
      config.harvest_depth < 1 || config.cover_per_axis < 1 ||
      !(config.cover_half_width > 0.0) || !(config.orbit_eps_floor > 0.0) ||
      !(config.holonomy_tol > 0.0) || config.word_cap_scale <= 0.0)
    fail(Err::InvalidArgument, "livsic_solve: bad configuration");
  if (c0.map().coeffs() != c.map().coeffs())
    fail(Err::InvalidArgument, "livsic_solve: cocycles live over different maps");

  LivsicReport report;
  report.rank = c0.rank();
  report.grid_n = config.grid_n;
  const auto& map = c0.map();
  const double tol = config.holonomy_tol;

  // Wilson stage: the measured character discrepancy gates everything.
  const double eps = run_stage("wilson", [&] {
    const auto orbits =
        dynamics::enumerate_periodic_orbits(map, config.wilson_period);
    const double e = cocycle::wilson_discrepancy(c0, c, orbits);
    if (e > eps_budget)
      fail(Err::BudgetExceeded, "livsic_solve: Wilson discrepancy " + fmt(e) +
                                    " exceeds the budget " + fmt(eps_budget));
    return e;
  });
  report.epsilon = eps;

  const double eps_eff = std::max(eps, 1e-12);
  const int cap = std::max(
      2, static_cast<int>(
             std::ceil(config.word_cap_scale * std::abs(std::log(eps_eff)))));
  const double budget_t = std::pow(eps_eff, -0.5 - config.delta_margin);
  const double eps_orbit = std::max(eps_eff, config.orbit_eps_floor);
  report.orbit_budget = budget_t;
  report.word_exponent_cap = cap;
  report.word_factor_cap = 2;

  const auto domains = dynamics::fundamental_domains(map);
  const auto good = run_stage("good-orbit", [&] {
    return dynamics::good_orbit(map, domains, eps_orbit);
  });
  report.orbit_length = good.orbit.length;

  // Harvest stage: short homoclinic generators and their word characters.
  // The length function is bounded below, so when the eps-scale budget is
  // coarser than the shortest available generator it is lifted to that
  // length (the same whole-map-step normalization good_orbit applies).
  const auto gens = run_stage("harvest", [&] {
    auto all = dynamics::homoclinic_points(map, domains, config.complexity);
    if (all.empty())
      fail(Err::BudgetExceeded,
           "livsic_solve: no homoclinic generators available at complexity " +
               std::to_string(config.complexity));
    std::sort(all.begin(), all.end(),
              [](const dynamics::HomoclinicOrbit& a,
                 const dynamics::HomoclinicOrbit& b) {
                return a.length != b.length ? a.length < b.length
                                            : a.id < b.id;
              });
    const double lifted =
        std::max(budget_t, static_cast<double>(all.front().length));
    report.orbit_budget = lifted;
    std::vector<dynamics::HomoclinicOrbit> kept;
    for (const auto& g : all) {
      if (static_cast<double>(g.length) > lifted) continue;
      kept.push_back(g);
      if (kept.size() == 6) break;
    }
    return kept;
  });
  for (const auto& g : gens)
    report.max_generator_length = std::max(report.max_generator_length, g.length);

  const int n_gens = static_cast<int>(gens.size());
  std::set<freemonoid::FreeWord> words;
  for (int i = 1; i <= n_gens; ++i) words.insert(freemonoid::FreeWord::single(i));
  for (int i = 1; i <= std::min(4, n_gens); ++i)
    for (int j = 1; j <= std::min(4, n_gens); ++j)
      if (i != j)
        words.insert(freemonoid::concat(freemonoid::FreeWord::single(i),
                                        freemonoid::FreeWord::single(j)));
  for (int i = 1; i <= std::min(3, n_gens); ++i)
    for (int k = 2; k <= cap; ++k)
      words.insert(freemonoid::FreeWord::single(i, k));

  run_stage("harvest", [&] {
    const auto t0 = harvest_characters(c0, gens, words, config.harvest_depth);
    const auto t = harvest_characters(c, gens, words, config.harvest_depth);
    report.harvest_discrepancy = repstab::char_discrepancy(t0, t, words);
  });

  // Conjugacy stage: align the two transport representations at the fixed
  // point and keep the unitary that carries the reference to the target.
  UnitaryMatrix p_star = UnitaryMatrix::certify(CMatrix::Identity(report.rank, report.rank));
  run_stage("conjugacy", [&] {
    std::vector<CMatrix> images0, images;
    images0.reserve(gens.size());
    images.reserve(gens.size());
    for (const auto& g : gens) {
      images0.push_back(cocycle::parry_eval(c0, g, tol).mat());
      images.push_back(cocycle::parry_eval(c, g, tol).mat());
    }
    const auto rep0 = repstab::UnitaryRep::from_images(images0);
    const auto rep1 = repstab::UnitaryRep::from_images(images);
    const auto conj = repstab::near_conjugacy(rep0, rep1, words);
    report.conjugacy_residual = conj.residual;
    p_star = UnitaryMatrix::certify(CMatrix(conj.p.mat().adjoint()));
  });

  // The pair cocycle is built once and shared by every later stage.
  const auto hom = cocycle::hom_cocycle(c0, c);

  const auto trunk = run_stage("trunk", [&] {
    return trunk_core(c0, c, hom, p_star, good, tol);
  });
  report.trunk_mismatch = trunk.mismatch;

  const ChartCover cover(map, config.cover_per_axis, config.cover_half_width);
  const auto coeffs = run_stage("extend", [&] {
    return holder_extend(trunk, cover, hom, tol);
  });
  report.alpha = coeffs.alpha;

  const auto ext = run_stage("blend", [&] {
    return blend(coeffs, cover, good, trunk, c0, c, hom, config.grid_n, tol);
  });
  report.trunk_agreement = ext.trunk_agreement;
  report.blend_defect_bound = std::max(ext.sup_defect, trunk.mismatch);

  const auto uni = run_stage("unitarize", [&] { return unitarize_section(ext); });
  report.max_radial = uni.max_radial;
  report.nodes = ext.nodes;
  report.p = uni.values;

  // Report stage: the defect and seminorms of the unitarized section.
  run_stage("report", [&] {
    const int n = config.grid_n;
    const auto cf = map.coeffs();
    std::vector<CMatrix> uvals;
    uvals.reserve(uni.values.size());
    for (const auto& u : uni.values) uvals.push_back(u.mat());

    double defect = 0.0;
    std::vector<CMatrix> dvals(uvals.size());
    for (int ix = 0; ix < n; ++ix)
      for (int iy = 0; iy < n; ++iy) {
        const int jx = modulo(cf[0] * ix + cf[1] * iy, n);
        const int jy = modulo(cf[2] * ix + cf[3] * iy, n);
        const size_t k = static_cast<size_t>(ix) * n + iy;
        const TorusPoint& node = report.nodes[k];
        dvals[k] = CMatrix(
            uvals[static_cast<size_t>(jx) * n + jy] -
            CMatrix(c.at(node) * uvals[k] * c0.at(node).adjoint()));
        defect = std::max(defect, dvals[k].norm());
      }

    std::vector<CMatrix> ut(trunk.points.size());
    for (size_t i = 0; i < trunk.points.size(); ++i)
      ut[i] = matalg::polar_unitary(
                  extended_value(coeffs, cover, hom, tol, trunk.points[i]),
                  kSingularFloor)
                  .mat();
    for (size_t i = 0; i + 1 < trunk.points.size(); ++i) {
      const TorusPoint& here = trunk.points[i];
      defect = std::max(
          defect,
          (ut[i + 1] - CMatrix(c.at(here) * ut[i] * c0.at(here).adjoint()))
              .norm());
    }
    const TorusPoint& last = trunk.points.back();
    const CMatrix past_end =
        matalg::polar_unitary(
            extended_value(coeffs, cover, hom, tol, map.apply(last)),
            kSingularFloor)
            .mat();
    defect = std::max(
        defect,
        (past_end - CMatrix(c.at(last) * ut.back() * c0.at(last).adjoint()))
            .norm());

    report.sup_defect = defect;
    report.p_seminorm = holder_seminorm(uvals, report.nodes, coeffs.alpha);
    report.defect_seminorm = holder_seminorm(dvals, report.nodes, coeffs.alpha);
  });

  report.tau_hat = 0.0;
  return report;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string to_json(const LivsicReport& report) {
  nlohmann::json j;
  j["alpha"] = report.alpha;
  j["blend_defect_bound"] = report.blend_defect_bound;
  j["conjugacy_residual"] = report.conjugacy_residual;
  j["defect_seminorm"] = report.defect_seminorm;
  j["epsilon"] = report.epsilon;
  j["grid_n"] = report.grid_n;
  j["harvest_discrepancy"] = report.harvest_discrepancy;
  j["max_generator_length"] = report.max_generator_length;
  j["max_radial"] = report.max_radial;
  j["orbit_budget"] = report.orbit_budget;
  j["orbit_length"] = report.orbit_length;
  j["p_seminorm"] = report.p_seminorm;
  j["rank"] = report.rank;
  j["sup_defect"] = report.sup_defect;
  j["tau_hat"] = report.tau_hat;
  j["trunk_agreement"] = report.trunk_agreement;
  j["trunk_mismatch"] = report.trunk_mismatch;
  j["word_exponent_cap"] = report.word_exponent_cap;
  j["word_factor_cap"] = report.word_factor_cap;
  return j.dump();
}

std::vector<std::uint8_t> grid_bytes(const LivsicReport& report) {
  std::vector<std::uint8_t> out;
  out.reserve(report.p.size() * static_cast<size_t>(report.rank) *
              report.rank * 16);
  const auto push = [&out](double v) {
    const auto bits = std::bit_cast<std::uint64_t>(v);
    for (int b = 0; b < 8; ++b)
      out.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
  };
  for (const auto& u : report.p)
    for (int i = 0; i < u.dim(); ++i)
      for (int j = 0; j < u.dim(); ++j) {
        push(u.mat()(i, j).real());
        push(u.mat()(i, j).imag());
      }
  return out;
}

}  // namespace holiv::livsic
