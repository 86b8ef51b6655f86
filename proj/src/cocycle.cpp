#include "holiv/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <utility>

#include "json.hpp"

namespace holiv::cocycle {

namespace {

using dynamics::TorusPoint;
using matalg::CMatrix;
using matalg::Complex;

constexpr int kReprojectEvery = 64;   // factors between unitary re-projections
constexpr int kBridgeSamples = 16;    // midpoint-rule subdivisions per segment
constexpr int kMinDepth = 4;
constexpr int kMaxDepth = 200;
constexpr int kGrid = 64;             // measurement grid per axis
constexpr double kLeafTol = 1e-8;     // transverse coordinate accepted as zero
constexpr double kMaxLeafDistance = 0.45;

CMatrix identity(int r) { return CMatrix::Identity(r, r); }

double profile(int k1, int k2, const TorusPoint& p) {
  if (k1 == 0 && k2 == 0) return 1.0;
  const double th = 2.0 * M_PI * (k1 * p.x + k2 * p.y);
  return std::cos(th) + std::sin(th);
}

std::array<double, 2> dprofile(int k1, int k2, const TorusPoint& p) {
  if (k1 == 0 && k2 == 0) return {0.0, 0.0};
  const double th = 2.0 * M_PI * (k1 * p.x + k2 * p.y);
  const double radial = 2.0 * M_PI * (std::cos(th) - std::sin(th));
  return {k1 * radial, k2 * radial};
}

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

CMatrix skew_part(const CMatrix& b) { return 0.5 * (b - b.adjoint()); }

bool same_map(const dynamics::HyperbolicMap& a, const dynamics::HyperbolicMap& b) {
  return a.coeffs() == b.coeffs();
}

// Ordered product A(pts.back()) ... A(pts.front()) without the final
// certification; long chains are re-projected onto the unitary group
// periodically so rounding never accumulates past the construction tolerance.
CMatrix raw_chain(const CocycleField& c, const std::vector<TorusPoint>& pts) {
  CMatrix p = identity(c.rank());
  int since_projection = 0;
  for (const auto& x : pts) {
    p = c.at(x) * p;
    if (++since_projection == kReprojectEvery) {
      p = matalg::polar_unitary(p, 1e-3).mat();
      since_projection = 0;
    }
  }
  return p;
}

// Smallest depth whose certified truncation bound clears tol; clamped to
// [kMinDepth, kMaxDepth], TolUnreachable when the cap still misses.
int depth_for(const CocycleField& c, double tol) {
  if (!(tol > 0.0))
    fail(Err::InvalidArgument, "holonomy tolerance must be positive");
  const double lam = c.map().lambda();
  const double alpha = c.holder_exponent();
  const double scale = c.curvature_bound() * c.holonomy_constant();
  auto bound = [&](int n) { return scale * std::pow(lam, -alpha * n); };

  int n = kMinDepth;
  const double need = scale / tol;
  if (need > 1e200)  // keeps the ceil cast finite; the cap is hopeless anyway
    fail(Err::TolUnreachable,
         "certified holonomy bound cannot reach the requested tolerance "
         "within the depth cap");
  if (need > 1.0)
    n = std::max(kMinDepth,
                 static_cast<int>(std::ceil(std::log(need) / (alpha * std::log(lam)))));
  while (n <= kMaxDepth && bound(n) > tol) ++n;
  if (n > kMaxDepth)
    fail(Err::TolUnreachable,
         "certified holonomy bound cannot reach the requested tolerance "
         "within the depth cap");
  return n;
}

// Transverse-coordinate check: returns the leaf offset of y relative to x
// (the stable or unstable coordinate of the shortest representative) and
// rejects pairs that are far apart or off the leaf.
double leaf_offset(const CocycleField& c, const TorusPoint& x,
                   const TorusPoint& y, bool stable) {
  const Eigen::Vector2d d = dynamics::shortest_rep(x, y);
  if (d.norm() > kMaxLeafDistance)
    fail(Err::NotOnStableLeaf, "points are not in a common leaf-local chart");
  const Eigen::Vector2d uv = c.map().leaf_coords(d);
  const double along = stable ? uv.y() : uv.x();
  const double across = stable ? uv.x() : uv.y();
  if (std::abs(across) > kLeafTol)
    fail(Err::NotOnStableLeaf, stable
                                   ? "target is off the local stable leaf"
                                   : "target is off the local unstable leaf");
  return along;
}

}  // namespace

// ---------------------------------------------------------------------------
// CocycleField
// ---------------------------------------------------------------------------

CocycleField::CocycleField(const dynamics::HyperbolicMap& map, int rank,
                           std::vector<TrigTerm> terms)
    : map_(map), rank_(rank), analytic_(true) {
  if (rank < 1) fail(Err::InvalidArgument, "cocycle rank must be >= 1");
  std::map<std::pair<int, int>, CMatrix> merged;
  for (auto& t : terms) {
    if (t.coeff.rows() != rank || t.coeff.cols() != rank)
      fail(Err::InvalidArgument, "coefficient dimension does not match rank");
    if (matalg::operator_norm(t.coeff + t.coeff.adjoint()) >
        1e-12 * (1.0 + matalg::operator_norm(t.coeff)))
      fail(Err::InvalidArgument, "coefficient is not skew-Hermitian");
    auto [it, fresh] = merged.try_emplace({t.k1, t.k2}, t.coeff);
    if (!fresh) it->second += t.coeff;
  }
  terms_.clear();
  for (const auto& [k, coeff] : merged) terms_.push_back({k.first, k.second, coeff});
  finalize();
}

CocycleField::CocycleField(const dynamics::HyperbolicMap& map, int rank,
                           Generator gen)
    : map_(map), rank_(rank), analytic_(false), gen_(std::move(gen)) {
  if (rank < 1) fail(Err::InvalidArgument, "cocycle rank must be >= 1");
  // Pre-measurement sanity: the generator must take unitary values.
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      const TorusPoint p{(i + 0.5) / 8.0, (j + 0.5) / 8.0};
      const CMatrix a = gen_(p);
      if (a.rows() != rank || a.cols() != rank)
        fail(Err::InvalidArgument, "generator dimension does not match rank");
      if (matalg::operator_norm(a.adjoint() * a - identity(rank)) > 1e-9)
        fail(Err::InvalidArgument, "generator is not unitary on the sample grid");
    }
  }
  finalize();
}

CocycleField CocycleField::trivial(const dynamics::HyperbolicMap& map, int rank) {
  return CocycleField(map, rank, std::vector<TrigTerm>{});
}

CocycleField CocycleField::constant(const dynamics::HyperbolicMap& map,
                                    const matalg::CMatrix& skew_log) {
  std::vector<TrigTerm> terms = {{0, 0, skew_log}};
  return CocycleField(map, static_cast<int>(skew_log.rows()), std::move(terms));
}

CocycleField CocycleField::random(const dynamics::HyperbolicMap& map, int rank,
                                  int max_freq, double amplitude,
                                  rng::Stream& stream) {
  if (max_freq < 0) fail(Err::InvalidArgument, "max_freq must be >= 0");
  std::vector<TrigTerm> terms;
  for (int k1 = -max_freq; k1 <= max_freq; ++k1) {
    for (int k2 = -max_freq; k2 <= max_freq; ++k2) {
      const double scale = amplitude / (1.0 + k1 * k1 + k2 * k2);
      terms.push_back({k1, k2, stream.skew_hermitian(rank, scale)});
    }
  }
  return CocycleField(map, rank, std::move(terms));
}

matalg::CMatrix CocycleField::at(const dynamics::TorusPoint& p) const {
  if (!analytic_) return gen_(p);
  CMatrix h = CMatrix::Zero(rank_, rank_);
  for (const auto& t : terms_) h += profile(t.k1, t.k2, p) * t.coeff;
  return matalg::exp_skew(h);
}

std::array<matalg::CMatrix, 2> CocycleField::connection(
    const dynamics::TorusPoint& p) const {
  if (analytic_) {
    CMatrix w1 = CMatrix::Zero(rank_, rank_);
    CMatrix w2 = CMatrix::Zero(rank_, rank_);
    for (const auto& t : terms_) {
      const auto d = dprofile(t.k1, t.k2, p);
      w1 += d[0] * t.coeff;
      w2 += d[1] * t.coeff;
    }
    return {w1, w2};
  }
  const double h = 1e-5;
  const CMatrix a_adj = gen_(p).adjoint();
  const CMatrix dx = (gen_(TorusPoint{dynamics::wrap1(p.x + h), p.y}) -
                      gen_(TorusPoint{dynamics::wrap1(p.x - h), p.y})) /
                     (2.0 * h);
  const CMatrix dy = (gen_(TorusPoint{p.x, dynamics::wrap1(p.y + h)}) -
                      gen_(TorusPoint{p.x, dynamics::wrap1(p.y - h)})) /
                     (2.0 * h);
  return {skew_part(dx * a_adj), skew_part(dy * a_adj)};
}

const std::vector<TrigTerm>& CocycleField::terms() const {
  if (!analytic_)
    fail(Err::InvalidArgument, "field has no coefficient table");
  return terms_;
}

void CocycleField::finalize() {
  // Lipschitz scale of the generator: largest sampled connection norm. The
  // 1.2 headroom covers between-node variation of the smooth fields in use.
  double lip = 0.0;
  double curv = 0.0;
  const double step = 1.0 / kGrid;
  for (int i = 0; i < kGrid; ++i) {
    for (int j = 0; j < kGrid; ++j) {
      const TorusPoint p{(i + 0.5) * step, (j + 0.5) * step};
      const auto w = connection(p);
      lip = std::max({lip, matalg::operator_norm(w[0]), matalg::operator_norm(w[1])});

      CMatrix f = w[0] * w[1] - w[1] * w[0];
      if (!analytic_) {
        // Curl part of the discrete curvature; the analytic table is a pure
        // gradient, so its curl vanishes identically and is skipped.
        const double h = step / 2.0;
        const auto wxp = connection(TorusPoint{dynamics::wrap1(p.x + h), p.y});
        const auto wxm = connection(TorusPoint{dynamics::wrap1(p.x - h), p.y});
        const auto wyp = connection(TorusPoint{p.x, dynamics::wrap1(p.y + h)});
        const auto wym = connection(TorusPoint{p.x, dynamics::wrap1(p.y - h)});
        f += (wxp[1] - wxm[1]) / (2.0 * h) - (wyp[0] - wym[0]) / (2.0 * h);
      }
      curv = std::max(curv, matalg::operator_norm(f));
    }
  }
  holder_constant_ = lip * 1.2;

  // Floored so certified errors never claim exactness: flat and Abelian
  // fields have zero curvature but still carry Hoelder truncation tails,
  // which the calibrated prefactor below absorbs against this floor.
  curvature_bound_ = std::max(curv * 1.5, 1e-6 * (1.0 + lip * lip));

  // Empirical truncation prefactor: compare fixed-depth holonomies against
  // depth-40 references on probe pairs spanning both leaves and the working
  // range of leaf distances, then double the worst ratio.
  const auto lines = dynamics::stable_unstable_lines(map_);
  const double lam = map_.lambda();
  const TorusPoint probes[5] = {
      {0.13, 0.29}, {0.61, 0.47}, {0.83, 0.19}, {0.37, 0.71}, {0.57, 0.91}};
  const double dists[3] = {0.1, -0.2, 0.3};
  double worst = 0.0;
  for (const auto& x : probes) {
    for (double d : dists) {
      for (bool stable : {true, false}) {
        const Eigen::Vector2d dir = stable ? lines.v_s : lines.v_u;
        const TorusPoint y = dynamics::wrap(dynamics::to_vec(x) + d * dir);
        const CMatrix ref = stable ? stable_holonomy_at_depth(*this, x, y, 40).mat()
                                   : unstable_holonomy_at_depth(*this, x, y, 40).mat();
        for (int n : {6, 10, 14}) {
          const CMatrix h = stable
                                ? stable_holonomy_at_depth(*this, x, y, n).mat()
                                : unstable_holonomy_at_depth(*this, x, y, n).mat();
          const double gap = matalg::operator_norm(h - ref);
          worst = std::max(
              gap / (curvature_bound_ * std::pow(lam, -holder_exponent_ * n)), worst);
        }
      }
    }
  }
  holonomy_constant_ = 2.0 * std::max(worst, 1.0);
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::string to_json(const CocycleField& field) {
  const auto& terms = field.terms();  // rejects opaque fields
  nlohmann::json root;
  root["rank"] = field.rank();
  root["terms"] = nlohmann::json::array();
  for (const auto& t : terms) {
    nlohmann::json jt;
    jt["k"] = {t.k1, t.k2};
    nlohmann::json re = nlohmann::json::array();
    nlohmann::json im = nlohmann::json::array();
    for (Eigen::Index i = 0; i < t.coeff.rows(); ++i) {
      nlohmann::json re_row = nlohmann::json::array();
      nlohmann::json im_row = nlohmann::json::array();
      for (Eigen::Index j = 0; j < t.coeff.cols(); ++j) {
        re_row.push_back(t.coeff(i, j).real());
        im_row.push_back(t.coeff(i, j).imag());
      }
      re.push_back(re_row);
      im.push_back(im_row);
    }
    jt["re"] = re;
    jt["im"] = im;
    root["terms"].push_back(jt);
  }
  return root.dump(2);
}

CocycleField from_json(const dynamics::HyperbolicMap& map,
                       const std::string& text) {
  const nlohmann::json root = nlohmann::json::parse(text, nullptr, false);
  if (root.is_discarded() || !root.is_object() || !root.contains("rank") ||
      !root.contains("terms") || !root["rank"].is_number_integer() ||
      !root["terms"].is_array())
    fail(Err::ParseError, "cocycle table must be {rank, terms[]}");
  const int rank = root["rank"].get<int>();
  if (rank < 1) fail(Err::InvalidArgument, "cocycle rank must be >= 1");

  std::vector<TrigTerm> terms;
  try {
    for (const auto& jt : root["terms"]) {
      if (!jt.is_object() || !jt.contains("k") || !jt.contains("re") ||
          !jt.contains("im") || !jt["k"].is_array() || jt["k"].size() != 2)
        fail(Err::ParseError, "term must carry k = [k1, k2], re, im");
      TrigTerm t;
      t.k1 = jt["k"][0].get<int>();
      t.k2 = jt["k"][1].get<int>();
      const auto& re = jt["re"];
      const auto& im = jt["im"];
      if (!re.is_array() || !im.is_array() ||
          re.size() != static_cast<size_t>(rank) ||
          im.size() != static_cast<size_t>(rank))
        fail(Err::ParseError, "coefficient rows do not match rank");
      t.coeff = CMatrix::Zero(rank, rank);
      for (int i = 0; i < rank; ++i) {
        if (re[i].size() != static_cast<size_t>(rank) ||
            im[i].size() != static_cast<size_t>(rank))
          fail(Err::ParseError, "coefficient columns do not match rank");
        for (int j = 0; j < rank; ++j)
          t.coeff(i, j) = Complex(re[i][j].get<double>(), im[i][j].get<double>());
      }
      terms.push_back(std::move(t));
    }
  } catch (const nlohmann::json::exception&) {
    fail(Err::ParseError, "cocycle table entry has a wrong value type");
  }
  return CocycleField(map, rank, std::move(terms));
}

// ---------------------------------------------------------------------------
// Transport
// ---------------------------------------------------------------------------

matalg::UnitaryMatrix transport(const CocycleField& c,
                                const dynamics::TorusPoint& x, long long n) {
  if (n >= 0) {
    std::vector<TorusPoint> pts;
    pts.reserve(static_cast<size_t>(n));
    TorusPoint p = x;
    for (long long j = 0; j < n; ++j) {
      pts.push_back(p);
      p = c.map().apply(p);
    }
    return matalg::UnitaryMatrix::certify(raw_chain(c, pts));
  }
  // transport(x, -n) = transport(map^{-n} x, n)^{-1}: walk back, multiply
  // forward from the deepest preimage, and return the adjoint.
  std::vector<TorusPoint> pts(static_cast<size_t>(-n));
  TorusPoint p = x;
  for (long long j = 0; j < -n; ++j) {
    p = c.map().apply_inverse(p);
    pts[static_cast<size_t>(-n - 1 - j)] = p;
  }
  return matalg::UnitaryMatrix::certify(raw_chain(c, pts).adjoint());
}

matalg::UnitaryMatrix transport_along(const CocycleField& c,
                                      const std::vector<dynamics::TorusPoint>& pts) {
  return matalg::UnitaryMatrix::certify(raw_chain(c, pts));
}

matalg::CMatrix bridge(const CocycleField& c, const dynamics::TorusPoint& a,
                       const dynamics::TorusPoint& b) {
  const Eigen::Vector2d delta = dynamics::shortest_rep(a, b);
  if (delta.norm() == 0.0) return identity(c.rank());
  const Eigen::Vector2d step = delta / kBridgeSamples;
  CMatrix p = identity(c.rank());
  for (int i = 1; i <= kBridgeSamples; ++i) {
    const TorusPoint mid =
        dynamics::wrap(dynamics::to_vec(a) + (i - 0.5) * step);
    const auto w = c.connection(mid);
    p = matalg::exp_skew(step.x() * w[0] + step.y() * w[1]) * p;
  }
  return p;
}

// ---------------------------------------------------------------------------
// Leaf holonomy
// ---------------------------------------------------------------------------

namespace {

// Shared fixed-depth core. The y-orbit is slaved to the float x-orbit
// through the exact leaf geometry (offset * lambda^{+-j} along the leaf
// direction), so the pair contracts at machine precision at any depth even
// though a chaotic float orbit on its own loses digits linearly in j.
matalg::UnitaryMatrix holonomy_core(const CocycleField& c, const TorusPoint& x,
                                    double offset, int depth, bool stable) {
  const auto lines = dynamics::stable_unstable_lines(c.map());
  const Eigen::Vector2d dir = stable ? lines.v_s : lines.v_u;
  const double rate = stable ? c.map().lambda_s_signed()
                             : 1.0 / c.map().lambda_u_signed();

  // Ascending index order as raw_chain consumes it: for the stable side the
  // paths run x, map x, ...; for the unstable side map^{-depth} x, ...,
  // map^{-1} x (the forward product starting at the deepest preimage).
  std::vector<TorusPoint> xs(static_cast<size_t>(depth));
  TorusPoint deep = x;
  if (stable) {
    for (int j = 0; j < depth; ++j) {
      xs[static_cast<size_t>(j)] = deep;
      deep = c.map().apply(deep);
    }
  } else {
    for (int j = 0; j < depth; ++j) {
      deep = c.map().apply_inverse(deep);
      xs[static_cast<size_t>(depth - 1 - j)] = deep;
    }
  }
  // deep now holds map^{depth} x (stable) and the loop left map^{-depth} x
  // in xs.front() (unstable).
  const TorusPoint x_end = stable ? deep : (xs.empty() ? x : xs.front());

  std::vector<TorusPoint> ys(xs.size());
  double scale = stable ? 1.0 : std::pow(rate, depth);
  if (stable) {
    for (size_t j = 0; j < xs.size(); ++j) {
      ys[j] = dynamics::wrap(dynamics::to_vec(xs[j]) + offset * scale * dir);
      scale *= rate;
    }
  } else {
    for (size_t j = 0; j < xs.size(); ++j) {
      ys[j] = dynamics::wrap(dynamics::to_vec(xs[j]) + offset * scale * dir);
      scale /= rate;
    }
  }
  const double end_scale = std::pow(rate, depth);
  const TorusPoint y_end =
      dynamics::wrap(dynamics::to_vec(x_end) + offset * end_scale * dir);

  const CMatrix b = bridge(c, x_end, y_end);
  const CMatrix px = raw_chain(c, xs);
  const CMatrix py = raw_chain(c, ys);
  // Stable: transport(y,n)^{-1} B transport(x,n).
  // Unstable: transport(map^{-n}y, n) B transport(map^{-n}x, n)^{-1}.
  const CMatrix h = stable ? CMatrix(py.adjoint() * b * px)
                           : CMatrix(py * b * px.adjoint());
  return matalg::UnitaryMatrix::certify(h);
}

HolonomyResult holonomy_with_tol(const CocycleField& c, const TorusPoint& x,
                                 const TorusPoint& y, double tol, bool stable) {
  const double offset = leaf_offset(c, x, y, stable);
  const int depth = depth_for(c, tol);
  HolonomyResult out;
  out.u = holonomy_core(c, x, offset, depth, stable);
  out.depth = depth;
  out.certified_error = c.curvature_bound() * c.holonomy_constant() *
                        std::pow(c.map().lambda(), -c.holder_exponent() * depth);
  return out;
}

}  // namespace

HolonomyResult stable_holonomy(const CocycleField& c,
                               const dynamics::TorusPoint& x,
                               const dynamics::TorusPoint& y, double tol) {
  return holonomy_with_tol(c, x, y, tol, true);
}

HolonomyResult unstable_holonomy(const CocycleField& c,
                                 const dynamics::TorusPoint& x,
                                 const dynamics::TorusPoint& y, double tol) {
  return holonomy_with_tol(c, x, y, tol, false);
}

matalg::UnitaryMatrix stable_holonomy_at_depth(const CocycleField& c,
                                               const dynamics::TorusPoint& x,
                                               const dynamics::TorusPoint& y,
                                               int depth) {
  if (depth < 0) fail(Err::InvalidArgument, "holonomy depth must be >= 0");
  return holonomy_core(c, x, leaf_offset(c, x, y, true), depth, true);
}

matalg::UnitaryMatrix unstable_holonomy_at_depth(const CocycleField& c,
                                                 const dynamics::TorusPoint& x,
                                                 const dynamics::TorusPoint& y,
                                                 int depth) {
  if (depth < 0) fail(Err::InvalidArgument, "holonomy depth must be >= 0");
  return holonomy_core(c, x, leaf_offset(c, x, y, false), depth, false);
}

// ---------------------------------------------------------------------------
// Parry values
// ---------------------------------------------------------------------------

matalg::UnitaryMatrix parry_eval(const CocycleField& c,
                                 const dynamics::HomoclinicOrbit& gamma,
                                 double tol) {
  const TorusPoint origin{0.0, 0.0};
  const auto hu = unstable_holonomy(c, origin, gamma.x_u(), tol);

  std::vector<TorusPoint> central(static_cast<size_t>(gamma.length));
  for (int j = 0; j < gamma.length; ++j)
    central[static_cast<size_t>(j)] = gamma.point(j);
  const CMatrix hc = raw_chain(c, central);

  const auto hs = stable_holonomy(c, gamma.x_s(), origin, tol);
  return matalg::UnitaryMatrix::certify(hs.u.mat() * hc * hu.u.mat());
}

matalg::UnitaryMatrix parry_word(
    const CocycleField& c, const std::vector<dynamics::HomoclinicOrbit>& gens,
    const freemonoid::FreeWord& word, double tol) {
  std::map<int, CMatrix> cache;
  CMatrix out = identity(c.rank());
  for (const auto& f : word.factors()) {
    if (f.gen < 1 || f.gen > static_cast<int>(gens.size()))
      fail(Err::InvalidArgument,
           "word generator id has no homoclinic orbit attached");
    auto it = cache.find(f.gen);
    if (it == cache.end())
      it = cache.emplace(f.gen, parry_eval(c, gens[static_cast<size_t>(f.gen - 1)], tol)
                                    .mat())
               .first;
    for (int e = 0; e < f.exp; ++e) out = out * it->second;
  }
  return matalg::UnitaryMatrix::certify(out);
}

ParryApprox parry_approx(const CocycleField& c,
                         const dynamics::HomoclinicOrbit& gamma, int m, int n) {
  if (m < 0 || n < 0)
    fail(Err::InvalidArgument, "translate depths must be >= 0");
  const TorusPoint origin{0.0, 0.0};

  std::vector<TorusPoint> pts(static_cast<size_t>(m + gamma.length + n));
  for (int i = -m; i < gamma.length + n; ++i)
    pts[static_cast<size_t>(i + m)] = gamma.point(i);

  const CMatrix b_in = bridge(c, origin, gamma.point(-m));
  const CMatrix b_out = bridge(c, gamma.point(gamma.length + n), origin);
  const CMatrix a0 = c.at(origin);

  CMatrix left = identity(c.rank());   // transport(0, n)^{-1} = A(0)^{-n}
  for (int j = 0; j < n; ++j) left = left * a0.adjoint();
  CMatrix right = identity(c.rank());  // transport(0, -m) = A(0)^{-m}
  for (int j = 0; j < m; ++j) right = right * a0.adjoint();

  ParryApprox out;
  out.u = matalg::UnitaryMatrix::certify(left * b_out * raw_chain(c, pts) * b_in *
                                         right);
  out.error_bound = c.curvature_bound() * c.holonomy_constant() *
                    std::pow(c.map().lambda(),
                             -c.holder_exponent() * std::min(m, n));
  return out;
}

// ---------------------------------------------------------------------------
// Wilson loops and discrepancy
// ---------------------------------------------------------------------------

WilsonRecord wilson(const CocycleField& c, const dynamics::PeriodicOrbit& orbit,
                    int orbit_id) {
  if (orbit.points.empty())
    fail(Err::InvalidArgument, "periodic orbit carries no points");
  std::vector<TorusPoint> pts;
  pts.reserve(orbit.points.size());
  for (const auto& rp : orbit.points) pts.push_back(rp.to_point());
  const auto u = transport_along(c, pts);
  WilsonRecord rec;
  rec.orbit_id = orbit_id;
  rec.length = orbit.period;
  rec.trace = u.mat().trace();
  return rec;
}

CocycleField gauge_transform(const CocycleField& c, const CocycleField& gauge) {
  if (gauge.rank() != c.rank())
    fail(Err::RankMismatch, "gauge rank does not match the field rank");
  if (!same_map(c.map(), gauge.map()))
    fail(Err::InvalidArgument, "gauge is defined over a different base map");
  const CocycleField base = c;
  const CocycleField p = gauge;
  return CocycleField(c.map(), c.rank(), [base, p](const TorusPoint& x) {
    return CMatrix(p.at(base.map().apply(x)) * base.at(x) * p.at(x).adjoint());
  });
}

CocycleField phase_twist(const CocycleField& c,
                         const std::vector<ScalarTerm>& profile_terms,
                         double sigma) {
  for (const auto& t : profile_terms)
    if (t.k1 == 0 && t.k2 == 0)
      fail(Err::InvalidArgument, "twist profile must be mean-zero");

  if (c.analytic()) {
    std::vector<TrigTerm> terms = c.terms();
    for (const auto& t : profile_terms) {
      const CMatrix add =
          Complex(0.0, sigma * t.amp) * identity(c.rank());
      auto it = std::find_if(terms.begin(), terms.end(), [&](const TrigTerm& u) {
        return u.k1 == t.k1 && u.k2 == t.k2;
      });
      if (it == terms.end())
        terms.push_back({t.k1, t.k2, add});
      else
        it->coeff += add;
    }
    return CocycleField(c.map(), c.rank(), std::move(terms));
  }

  const CocycleField base = c;
  const std::vector<ScalarTerm> prof = profile_terms;
  return CocycleField(c.map(), c.rank(), [base, prof, sigma](const TorusPoint& x) {
    double f = 0.0;
    for (const auto& t : prof) f += t.amp * profile(t.k1, t.k2, x);
    return CMatrix(std::exp(Complex(0.0, sigma * f)) * base.at(x));
  });
}

CocycleField hom_cocycle(const CocycleField& c1, const CocycleField& c2) {
  if (c1.rank() != c2.rank())
    fail(Err::RankMismatch, "hom cocycle needs equal ranks");
  if (!same_map(c1.map(), c2.map()))
    fail(Err::InvalidArgument, "hom cocycle needs a common base map");
  const int r = c1.rank();

  if (c1.analytic() && c2.analytic()) {
    // log(conj(A1) kron A2) = conj(H1) kron I + I kron H2: the summands
    // commute pointwise, so the table combines exactly, term by term.
    std::map<std::pair<int, int>, CMatrix> merged;
    const CMatrix eye = identity(r);
    for (const auto& t : c1.terms()) {
      auto [it, fresh] =
          merged.try_emplace({t.k1, t.k2}, kron(t.coeff.conjugate(), eye));
      if (!fresh) it->second += kron(t.coeff.conjugate(), eye);
    }
    for (const auto& t : c2.terms()) {
      auto [it, fresh] = merged.try_emplace({t.k1, t.k2}, kron(eye, t.coeff));
      if (!fresh) it->second += kron(eye, t.coeff);
    }
    std::vector<TrigTerm> terms;
    for (const auto& [k, coeff] : merged)
      terms.push_back({k.first, k.second, coeff});
    return CocycleField(c1.map(), r * r, std::move(terms));
  }

  const CocycleField a = c1;
  const CocycleField b = c2;
  return CocycleField(c1.map(), r * r, [a, b](const TorusPoint& x) {
    return kron(a.at(x).conjugate(), b.at(x));
  });
}

matalg::CVector vec(const matalg::CMatrix& h) {
  return Eigen::Map<const matalg::CVector>(h.data(), h.size());
}

matalg::CMatrix unvec(const matalg::CVector& v, int rank) {
  if (v.size() != static_cast<Eigen::Index>(rank) * rank)
    fail(Err::DimensionMismatch, "vectorized section has the wrong length");
  return Eigen::Map<const matalg::CMatrix>(v.data(), rank, rank);
}

double wilson_discrepancy(const CocycleField& c1, const CocycleField& c2,
                          const std::vector<dynamics::PeriodicOrbit>& orbits) {
  if (orbits.empty())
    fail(Err::EmptyOrbitList, "wilson discrepancy needs at least one orbit");
  if (c1.rank() != c2.rank())
    fail(Err::RankMismatch, "wilson discrepancy needs equal ranks");
  double sup = 0.0;
  for (size_t i = 0; i < orbits.size(); ++i) {
    const auto w1 = wilson(c1, orbits[i], static_cast<int>(i));
    const auto w2 = wilson(c2, orbits[i], static_cast<int>(i));
    sup = std::max(sup, std::abs(w1.trace - w2.trace) /
                            static_cast<double>(orbits[i].period));
  }
  return sup;
}

}  // namespace holiv::cocycle
