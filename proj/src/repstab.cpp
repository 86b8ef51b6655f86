#include "holiv/repstab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "json.hpp"

namespace holiv::repstab {
namespace {

using freemonoid::FreeWord;
using matalg::CMatrix;
using matalg::CVector;
using matalg::Complex;

// Rank decisions (span growth, commutant dimension) all use one tolerance.
constexpr double kRankTol = 1e-8;
// Word-length budget for the span search inside near_conjugacy. Saturation
// ends the scan far earlier for the small dimensions this library targets.
constexpr int kNearConjugacyMaxLen = 8;

CMatrix kron(const CMatrix& a, const CMatrix& b) {
  CMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

double condition_number(const CMatrix& m) {
  const matalg::Svd svd = matalg::jacobi_svd(m);
  const double hi = svd.sigma(0);
  const double lo = svd.sigma(svd.sigma.size() - 1);
  if (lo <= 0.0) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

// All words of the given letter length over the sorted generator ids, in
// lexicographic order (an odometer over id indices).
std::vector<FreeWord> level_words(const std::vector<int>& ids, int len) {
  std::vector<FreeWord> out;
  std::vector<int> idx(len, 0);
  while (true) {
    std::vector<freemonoid::Factor> fs;
    fs.reserve(len);
    for (int i = 0; i < len; ++i) fs.push_back({ids[idx[i]], 1});
    out.push_back(FreeWord::from_factors(std::move(fs)));
    int pos = len - 1;
    while (pos >= 0 && ++idx[pos] == static_cast<int>(ids.size())) {
      idx[pos] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return out;
}

}  // namespace

UnitaryRep::UnitaryRep(int dimension,
                       std::map<int, matalg::UnitaryMatrix> images)
    : dimension_(dimension), images_(std::move(images)) {
  if (dimension_ < 1)
    fail(Err::InvalidArgument, "representation dimension must be positive");
  if (images_.empty())
    fail(Err::InvalidArgument, "representation needs at least one generator");
  for (const auto& [id, img] : images_) {
    if (id < 1) fail(Err::InvalidArgument, "generator ids must be positive");
    if (img.dim() != dimension_)
      fail(Err::DimensionMismatch,
           "generator image size does not match the representation dimension");
  }
}

UnitaryRep UnitaryRep::from_images(const std::vector<CMatrix>& images) {
  if (images.empty())
    fail(Err::InvalidArgument, "representation needs at least one generator");
  for (const CMatrix& m : images)
    if (m.rows() != m.cols())
      fail(Err::DimensionMismatch, "generator images must be square");
  std::map<int, matalg::UnitaryMatrix> certified;
  for (std::size_t i = 0; i < images.size(); ++i)
    certified.emplace(static_cast<int>(i) + 1,
                      matalg::UnitaryMatrix::certify(images[i]));
  return UnitaryRep(static_cast<int>(images.front().rows()),
                    std::move(certified));
}

std::vector<int> UnitaryRep::generator_ids() const {
  std::vector<int> ids;
  ids.reserve(images_.size());
  for (const auto& [id, img] : images_) ids.push_back(id);
  return ids;
}

CMatrix UnitaryRep::evaluate(const FreeWord& w) const {
  CMatrix acc = CMatrix::Identity(dimension_, dimension_);
  for (const auto& f : w.factors()) {
    const auto it = images_.find(f.gen);
    if (it == images_.end())
      fail(Err::InvalidArgument,
           "word uses a generator id the representation does not carry");
    const CMatrix& g = it->second.mat();
    for (int k = 0; k < f.exp; ++k) acc = CMatrix(acc * g);
  }
  return acc;
}

Complex UnitaryRep::character(const FreeWord& w) const {
  return evaluate(w).trace();
}

freemonoid::CharTable UnitaryRep::char_table(
    const std::set<FreeWord>& words) const {
  freemonoid::CharTable table;
  for (const FreeWord& w : words) table.set(w, character(w));
  return table;
}

UnitaryRep random_rep(int dimension, int n_generators, rng::Stream& stream) {
  if (n_generators < 1)
    fail(Err::InvalidArgument, "need at least one generator");
  std::map<int, matalg::UnitaryMatrix> images;
  for (int i = 1; i <= n_generators; ++i)
    images.emplace(i, stream.haar_unitary(dimension));
  return UnitaryRep(dimension, std::move(images));
}

UnitaryRep conjugate_rep(const UnitaryRep& rep,
                         const matalg::UnitaryMatrix& u) {
  if (u.dim() != rep.dimension())
    fail(Err::DimensionMismatch,
         "conjugator size does not match the representation dimension");
  std::map<int, matalg::UnitaryMatrix> images;
  for (const auto& [id, img] : rep.images())
    images.emplace(id, matalg::UnitaryMatrix::certify(
                           u.mat() * img.mat() * u.mat().adjoint()));
  return UnitaryRep(rep.dimension(), std::move(images));
}

UnitaryRep perturb_rep(const UnitaryRep& rep, double delta,
                       rng::Stream& stream) {
  const int r = rep.dimension();
  std::map<int, matalg::UnitaryMatrix> images;
  for (const auto& [id, img] : rep.images()) {
    const CMatrix skew = delta * stream.skew_hermitian(r, 1.0);
    images.emplace(id, matalg::UnitaryMatrix::certify(
                           img.mat() * matalg::exp_skew(skew)));
  }
  return UnitaryRep(r, std::move(images));
}

SpanBasis select_spanning_words(const UnitaryRep& rep, int max_len) {
  if (max_len < 1)
    fail(Err::InvalidArgument, "word-length budget must be at least 1");
  const std::vector<int> ids = rep.generator_ids();
  const int r = rep.dimension();
  const int full = r * r;

  std::vector<FreeWord> kept;
  std::vector<CMatrix> images;
  std::vector<CMatrix> ortho;  // Frobenius-orthonormal span representatives

  // Gram-rank test: a word is kept iff its image has a component outside
  // the current span. Two projection passes keep the representatives
  // orthonormal to working precision.
  const auto try_keep = [&](const FreeWord& w) {
    CMatrix x = rep.evaluate(w);
    CMatrix res = x / x.norm();
    for (int pass = 0; pass < 2; ++pass)
      for (const CMatrix& q : ortho) {
        const Complex c = matalg::frobenius_inner(q, res);
        res -= c * q;
      }
    const double rn = res.norm();
    if (rn <= kRankTol) return false;
    ortho.push_back(res / rn);
    kept.push_back(w);
    images.push_back(std::move(x));
    return true;
  };

  // The empty word heads the length-then-lexicographic order and opens the
  // span with the identity.
  try_keep(FreeWord{});
  bool saturated = static_cast<int>(kept.size()) >= full;

  for (int len = 1; len <= max_len && !saturated; ++len) {
    bool grew = false;
    for (const FreeWord& w : level_words(ids, len)) {
      if (try_keep(w)) {
        grew = true;
        if (static_cast<int>(kept.size()) >= full) {
          saturated = true;  // the span is the whole matrix algebra
          break;
        }
      }
    }
    if (!grew) saturated = true;  // one full level added nothing
  }
  if (!saturated)
    fail(Err::SpanNotSaturated,
         "span still growing at the word-length budget");

  SpanBasis basis;
  basis.words.words = std::move(kept);
  basis.n0 = static_cast<int>(basis.words.words.size());
  basis.gram = CMatrix(basis.n0, basis.n0);
  for (int i = 0; i < basis.n0; ++i)
    for (int j = 0; j < basis.n0; ++j)
      basis.gram(i, j) = matalg::frobenius_inner(images[i], images[j]);
  basis.gram = CMatrix((basis.gram + basis.gram.adjoint()) / 2.0);
  basis.images = std::move(images);

  if (condition_number(basis.gram) >= matalg::tolerances().gram_condition_bound)
    fail(Err::IllConditioned, "basis Gram matrix is too badly conditioned");
  return basis;
}

CMatrix char_matrix(const UnitaryRep& rep,
                    const freemonoid::GeneratingSet& words) {
  const int n = words.n0();
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      m(i, j) = rep.character(freemonoid::concat(words.words[i], words.words[j]));
  return m;
}

CVector coeffs(const SpanBasis& basis, const FreeWord& g,
               const UnitaryRep& rep) {
  if (basis.images.empty())
    fail(Err::InvalidArgument, "basis carries no images");
  if (rep.dimension() != basis.images.front().rows())
    fail(Err::DimensionMismatch,
         "representation dimension does not match the basis images");
  return matalg::gram_solve(basis.images, rep.evaluate(g));
}

CMatrix apply_A(const SpanBasis& basis0, const UnitaryRep& rep,
                const CMatrix& u) {
  if (basis0.images.empty())
    fail(Err::InvalidArgument, "basis carries no images");
  if (u.rows() != u.cols() || u.rows() != basis0.images.front().rows())
    fail(Err::DimensionMismatch,
         "input size does not match the basis images");
  const CVector c = matalg::gram_solve(basis0.images, u);
  const int r = rep.dimension();
  CMatrix out = CMatrix::Zero(r, r);
  for (int j = 0; j < basis0.n0; ++j)
    out += c(j) * rep.evaluate(basis0.words.words[j]);
  return out;
}

bool check_irreducible(const UnitaryRep& rep, const SpanBasis& basis) {
  const int r = rep.dimension();
  const int rr = r * r;
  const int n = basis.n0;
  const CMatrix id = CMatrix::Identity(r, r);

  // [X, rho(g_i)] = 0 as a stacked linear system on vec(X), column-major:
  // vec(X G) = (G^T (x) I) vec(X) and vec(G X) = (I (x) G) vec(X).
  CMatrix sys(n * rr, rr);
  for (int i = 0; i < n; ++i) {
    const CMatrix& g = basis.images[i];
    sys.block(i * rr, 0, rr, rr) =
        kron(g.transpose(), id) - kron(id, g);
  }

  const matalg::Svd svd = matalg::jacobi_svd(sys);
  const double top = std::max(svd.sigma(0), 1.0);
  int null_dim = 0;
  for (Eigen::Index i = 0; i < svd.sigma.size(); ++i)
    if (svd.sigma(i) <= kRankTol * top) ++null_dim;
  return null_dim == 1;
}

double char_discrepancy(const freemonoid::CharTable& t0,
                        const freemonoid::CharTable& t,
                        const std::set<FreeWord>& words) {
  double worst = 0.0;
  for (const FreeWord& w : words)
    worst = std::max(worst, std::abs(t0.at(w) - t.at(w)));
  return worst;
}

std::string to_json(const ConjugacyReport& report) {
  nlohmann::json j;
  j["az_norm"] = report.az_norm;
  j["dimension"] = static_cast<int>(report.p.dim());
  j["epsilon"] = report.epsilon;
  j["gram_condition"] = report.gram_condition;
  j["m0_condition"] = report.m0_condition;
  j["omega_index"] = report.omega_index;
  std::vector<double> re, im;
  for (Eigen::Index i = 0; i < report.p.dim(); ++i)
    for (Eigen::Index k = 0; k < report.p.dim(); ++k) {
      re.push_back(report.p.mat()(i, k).real());
      im.push_back(report.p.mat()(i, k).imag());
    }
  j["p_im"] = im;
  j["p_re"] = re;
  j["residual"] = report.residual;
  j["residual_frobenius"] = report.residual_frobenius;
  return j.dump(2);
}

ConjugacyReport near_conjugacy(const UnitaryRep& rep0, const UnitaryRep& rep,
                               const std::set<FreeWord>& words_for_eps) {
  if (rep0.dimension() != rep.dimension())
    fail(Err::DimensionMismatch, "representations must share a dimension");
  const int r = rep0.dimension();

  const SpanBasis basis0 = select_spanning_words(rep0, kNearConjugacyMaxLen);
  if (!check_irreducible(rep0, basis0))
    fail(Err::NotIrreducible,
         "reference representation has a nontrivial commutant");

  const std::set<FreeWord> g0 = freemonoid::build_g0(basis0.words);
  std::set<FreeWord> eps_words = g0;
  eps_words.insert(words_for_eps.begin(), words_for_eps.end());

  ConjugacyReport report;
  report.epsilon = char_discrepancy(rep0.char_table(eps_words),
                                    rep.char_table(eps_words), eps_words);
  report.m0_condition = condition_number(char_matrix(rep0, basis0.words));
  report.gram_condition = condition_number(basis0.gram);
  report.omega_index = 0;

  // omega = e_0; push the rank-one projector onto it through the
  // intertwiner and take the direction it stretches most.
  CMatrix omega_proj = CMatrix::Zero(r, r);
  omega_proj(0, 0) = 1.0;
  const CMatrix a_omega = apply_A(basis0, rep, omega_proj);
  const auto [z, sigma] = matalg::top_singular_vector(a_omega);
  report.az_norm = sigma;
  if (sigma * sigma <= 1.0 / (2.0 * r))
    fail(Err::DegenerateZ,
         "character data too far apart: A flattens the cyclic projector");

  const CVector az = a_omega * z;
  const Complex inner = (z.adjoint() * az)(0);
  if (std::abs(inner) <= 1.0 / (2.0 * r))
    fail(Err::DegenerateZ,
         "character data too far apart: A rotates the cyclic direction away");
  const double scale = 1.0 / std::sqrt(std::abs(inner));

  // Column i of Q is the image of e_i omega* applied to z, rescaled so Q is
  // nearly isometric.
  CMatrix q(r, r);
  for (int i = 0; i < r; ++i) {
    CMatrix unit = CMatrix::Zero(r, r);
    unit(i, 0) = 1.0;
    const CVector col = apply_A(basis0, rep, unit) * z;
    q.col(i) = scale * col;
  }
  CMatrix p = matalg::polar_unitary(q, 1e-8).mat().adjoint();

  // Fix the global phase so the trace is real and nonnegative; the residual
  // itself is phase-invariant.
  const Complex tp = p.trace();
  if (std::abs(tp) > 1e-12) p *= std::conj(tp) / std::abs(tp);

  const std::set<FreeWord> g0p = freemonoid::build_g0_prime(g0, basis0.words);
  double res_op = 0.0, res_fr = 0.0;
  for (const FreeWord& w : g0p) {
    const CMatrix diff =
        rep0.evaluate(w) - CMatrix(p * rep.evaluate(w) * p.adjoint());
    res_op = std::max(res_op, matalg::operator_norm(diff));
    res_fr = std::max(res_fr, diff.norm());
  }

  report.p = matalg::UnitaryMatrix::certify(std::move(p));
  report.residual = res_op;
  report.residual_frobenius = res_fr;
  return report;
}

}  // namespace holiv::repstab
