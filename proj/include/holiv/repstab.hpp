#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "holiv/error.hpp"
#include "holiv/freemonoid.hpp"
#include "holiv/matalg.hpp"
#include "holiv/rng.hpp"

namespace holiv::repstab {

// Finite-dimensional unitary representation of the free monoid: each
// generator id carries a unitary image and words evaluate multiplicatively,
// left to right. Images are certified unitary at construction time.
class UnitaryRep {
 public:
  UnitaryRep(int dimension, std::map<int, matalg::UnitaryMatrix> images);

  // Certifies raw matrices and assigns generator ids 1..n in order.
  static UnitaryRep from_images(const std::vector<matalg::CMatrix>& images);

  int dimension() const { return dimension_; }
  const std::map<int, matalg::UnitaryMatrix>& images() const {
    return images_;
  }
  std::vector<int> generator_ids() const;

  // Product of generator images in reading order; the empty word gives the
  // identity. InvalidArgument for a generator id the representation lacks.
  matalg::CMatrix evaluate(const freemonoid::FreeWord& w) const;

  // Trace of the word image.
  matalg::Complex character(const freemonoid::FreeWord& w) const;

  // Character values tabulated over an explicit word set.
  freemonoid::CharTable char_table(
      const std::set<freemonoid::FreeWord>& words) const;

 private:
  int dimension_ = 0;
  std::map<int, matalg::UnitaryMatrix> images_;
};

// Representation with independent Haar-unitary generator images, ids 1..n.
UnitaryRep random_rep(int dimension, int n_generators, rng::Stream& stream);

// Conjugates every generator image by a fixed unitary: g -> U rho(g) U*.
UnitaryRep conjugate_rep(const UnitaryRep& rep, const matalg::UnitaryMatrix& u);

// Multiplies each generator image by exp(delta * S_g) with an independent
// unit-scale random skew-Hermitian S_g per generator. Reconstructing the
// stream from the same (seed, stage) reproduces the directions, so a sweep
// over delta can hold the perturbation direction fixed.
UnitaryRep perturb_rep(const UnitaryRep& rep, double delta,
                       rng::Stream& stream);

// Word basis of the matrix algebra spanned by a representation's word
// images, with the Gram matrix of the kept images under the Frobenius inner
// product.
struct SpanBasis {
  freemonoid::GeneratingSet words;      // kept words, in scan order
  std::vector<matalg::CMatrix> images;  // images of the kept words
  matalg::CMatrix gram;                 // G_ij = <image_i, image_j>_F
  int n0 = 0;                           // basis size
};

// Greedy scan of words in length-then-lexicographic order, starting at the
// empty word, keeping each word whose image grows the span (Gram-rank test
// at tolerance 1e-8). Stops once a full length level adds nothing or the
// span fills the whole matrix algebra. For an irreducible representation the
// basis has exactly dimension^2 words.
// Errors: SpanNotSaturated when the span is still growing at max_len;
// IllConditioned when the kept Gram matrix degenerates.
SpanBasis select_spanning_words(const UnitaryRep& rep, int max_len);

// Pair-trace matrix over the given words: (M)_ij = chi(g_i g_j).
matalg::CMatrix char_matrix(const UnitaryRep& rep,
                            const freemonoid::GeneratingSet& words);

// Coefficients d with rho(g) = sum_j d_j rho(g_j), solved through the Gram
// system of the basis images. Propagates IllConditioned.
matalg::CVector coeffs(const SpanBasis& basis, const freemonoid::FreeWord& g,
                       const UnitaryRep& rep);

// The intertwiner between two representations sharing a word basis: expand
// u in basis0's images and re-synthesize the coefficients with the second
// representation's images of the same words, A(u) = sum_j c_j rho(g_j).
matalg::CMatrix apply_A(const SpanBasis& basis0, const UnitaryRep& rep,
                        const matalg::CMatrix& u);

// True iff the commutant of the basis images is trivial: the solution space
// of [X, rho(g_i)] = 0 over all basis words is one-dimensional at rank
// tolerance 1e-8.
bool check_irreducible(const UnitaryRep& rep, const SpanBasis& basis);

// Max over words of |chi_0(w) - chi(w)|. MissingWord when a table lacks one
// of the words.
double char_discrepancy(const freemonoid::CharTable& t0,
                        const freemonoid::CharTable& t,
                        const std::set<freemonoid::FreeWord>& words);

// Outcome of the near-conjugacy construction.
struct ConjugacyReport {
  matalg::UnitaryMatrix p;          // rho_0(g) ~ P rho(g) P*
  double residual = 0.0;            // max operator-norm deviation
  double residual_frobenius = 0.0;  // same maximum in Frobenius norm
  double epsilon = 0.0;             // measured character discrepancy
  double m0_condition = 0.0;        // condition of the pair-trace matrix
  double gram_condition = 0.0;      // condition of the basis Gram matrix
  int omega_index = 0;              // index of the cyclic vector used
  double az_norm = 0.0;             // ||A(omega omega*) z|| at the chosen z
};

// Flat JSON record: the scalar fields plus the phase-fixed entries of P in
// row-major order. Deterministic byte-for-byte for equal reports.
std::string to_json(const ConjugacyReport& report);

// Builds an explicit unitary P aligning two representations whose
// characters nearly agree, and measures the worst deviation
// ||rho_0(g) - P rho(g) P*|| over a fixed evaluation set of short products
// of basis words. The construction: pick omega = first standard basis
// vector, take z as the top singular vector of A(omega omega*), form
// Q x = A(x omega*) z rescaled by |<z, A(omega omega*) z>|^{-1/2}, and
// invert the polar unitary factor of Q. P's global phase is fixed so that
// its trace is real and nonnegative. The character discrepancy epsilon is
// measured over the same evaluation set, extended by words_for_eps.
// Errors: DimensionMismatch; NotIrreducible when the first representation
// has a nontrivial commutant; DegenerateZ when the character data is too
// far apart for the construction to be meaningful; SpanNotSaturated and
// IllConditioned propagate from basis selection.
ConjugacyReport near_conjugacy(
    const UnitaryRep& rep0, const UnitaryRep& rep,
    const std::set<freemonoid::FreeWord>& words_for_eps = {});

}  // namespace holiv::repstab
