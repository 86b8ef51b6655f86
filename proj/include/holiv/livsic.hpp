#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "holiv/cocycle.hpp"
#include "holiv/dynamics.hpp"
#include "holiv/error.hpp"
#include "holiv/freemonoid.hpp"
#include "holiv/matalg.hpp"

namespace holiv::livsic {

// ---------------------------------------------------------------------------
// Chart cover of the torus
// ---------------------------------------------------------------------------

// One chart: a box around `center` of the given half width, measured in
// stable/unstable leaf coordinates. In discrete time the flow-thickened
// box coincides with the transversal box itself.
struct Chart {
  dynamics::TorusPoint center;
  double half_width = 0.0;
};

// Overlapping boxes on a regular lattice of centers, aligned to the
// (v_u, v_s) frame, with cosine-squared bump weights. Raw bumps vanish
// outside the box; normalized weights sum to one exactly wherever the raw
// total is bounded away from zero (CoverGap otherwise).
class ChartCover {
 public:
  ChartCover(const dynamics::HyperbolicMap& map, int per_axis,
             double half_width);

  // 8 x 8 cover with half width 0.22: every point sits well inside several
  // boxes and bracket legs stay within holonomy range.
  static ChartCover standard(const dynamics::HyperbolicMap& map);

  const std::vector<Chart>& charts() const { return charts_; }
  const dynamics::HyperbolicMap& map() const { return map_; }
  int per_axis() const { return per_axis_; }

  // Largest number of charts simultaneously active at a probed point.
  double overlap_factor() const { return overlap_; }

  // Unnormalized bump of one chart at x; zero outside its box.
  double raw_weight(int chart, const dynamics::TorusPoint& x) const;

  // Charts active at x with weights normalized to sum to one.
  // CoverGap when the raw total is below the coverage floor.
  std::vector<std::pair<int, double>> weights(
      const dynamics::TorusPoint& x) const;

 private:
  dynamics::HyperbolicMap map_;
  std::vector<Chart> charts_;
  int per_axis_ = 0;
  double half_width_ = 0.0;
  double overlap_ = 0.0;
};

// ---------------------------------------------------------------------------
// Trunk sections
// ---------------------------------------------------------------------------

// Candidate conjugacy data along the trunk of a good orbit: p_- propagated
// from the fixed point through the unstable then central holonomy of the
// pair cocycle, p_+ through the stable side, and their worst disagreement.
struct TrunkSection {
  std::vector<dynamics::TorusPoint> points;        // the trunk, x_u first
  std::vector<matalg::UnitaryMatrix> p_minus;
  std::vector<matalg::UnitaryMatrix> p_plus;
  double mismatch = 0.0;  // max Frobenius gap between the two sections
};

// Propagates the base-point conjugator p_star along the good orbit's trunk
// in both directions. For truly conjugate pairs and the exact base
// conjugator the two sections coincide up to the holonomy tolerance.
// RankMismatch when p_star does not match the cocycle rank; holonomy errors
// propagate.
TrunkSection trunk_sections(const cocycle::CocycleField& c0,
                            const cocycle::CocycleField& c,
                            const matalg::UnitaryMatrix& p_star,
                            const dynamics::GoodOrbit& good, double tol);

// Parallel transport of pair-cocycle data from one torus point to another
// along a chain of bracket paths (unstable leg, then stable leg, hopping in
// short segments so every leg stays within holonomy range). Exact on
// sections that are invariant under the pair cocycle.
matalg::UnitaryMatrix bracket_transport(const cocycle::CocycleField& hom,
                                        const dynamics::TorusPoint& from,
                                        const dynamics::TorusPoint& to,
                                        double tol);

// ---------------------------------------------------------------------------
// Holder extension over the chart cover
// ---------------------------------------------------------------------------

// Trunk data attached to one chart: sample points and their values bridged
// to the chart center. Charts that met no trunk point are filled by
// nearest-chart bridging and keep has_data = false.
struct ChartSection {
  int chart = 0;
  bool has_data = false;
  std::vector<dynamics::TorusPoint> points;
  std::vector<matalg::CMatrix> centered;
};

// Per-chart extension data: the sections plus the exponent and seminorm of
// the min-formula extension
//   b(x) = min over samples y of (a(y) + 2 d(x,y)^alpha * seminorm),
// applied to real and imaginary parts of every entry separately.
struct ChartCoefficients {
  std::vector<ChartSection> sections;
  double alpha = 1.0;     // extension exponent, fitted from the trunk data
  double seminorm = 0.0;  // Frobenius Holder seminorm of the bridged data
};

// Bridges every trunk value to the centers of the charts containing it,
// fits the Holder exponent and seminorm of the bridged data, and fills
// empty charts from their nearest populated neighbour. EmptyChart when the
// trunk carries no samples at all.
ChartCoefficients holder_extend(const TrunkSection& trunk,
                                const ChartCover& cover,
                                const cocycle::CocycleField& hom, double tol);

// The blended section value at an arbitrary point: each active chart's
// min-formula extension, transported from the chart center back to x along
// the bracket path, combined with the normalized chart weights. CoverGap
// where the cover has a hole.
matalg::CMatrix extended_value(const ChartCoefficients& coeffs,
                               const ChartCover& cover,
                               const cocycle::CocycleField& hom, double tol,
                               const dynamics::TorusPoint& x);

// ---------------------------------------------------------------------------
// Blending and unitarization
// ---------------------------------------------------------------------------

// The extension sampled on a regular grid, with the measured agreement and
// defect data of the blended section (before unitarization).
struct ExtendedSection {
  int grid_n = 0;
  std::vector<dynamics::TorusPoint> nodes;  // row-major (ix * n + iy)
  std::vector<matalg::CMatrix> values;
  double alpha = 1.0;
  double seminorm = 0.0;         // Holder seminorm of the sampled section
  double trunk_agreement = 0.0;  // max gap to p_- over the trunk samples
  double sup_defect = 0.0;  // sup ||p(map x) - A2 p(x) A1*||_F, nodes + trunk
};

// Evaluates the blended section on the grid and records the trunk
// agreement, the transport defect (sampled at grid nodes and trunk points,
// with off-node values taken from the exact chart formulas), and the
// Holder seminorm. CoverGap propagates from evaluation.
ExtendedSection blend(const ChartCoefficients& coeffs, const ChartCover& cover,
                      const dynamics::GoodOrbit& good,
                      const TrunkSection& trunk,
                      const cocycle::CocycleField& c0,
                      const cocycle::CocycleField& c,
                      const cocycle::CocycleField& hom, int grid_n,
                      double tol);

// Nodewise polar projection of an extended section.
struct UnitarizedSection {
  std::vector<matalg::UnitaryMatrix> values;
  std::vector<double> radial;  // ||radial part - I||_F per node
  double max_radial = 0.0;
};

// NearSingularNode when any node's smallest singular value is <= 0.1.
UnitarizedSection unitarize_section(const ExtendedSection& ext);

// Empirical C^alpha seminorm of a matrix-valued section: max over point
// pairs within torus distance 0.25 of ||difference||_F / distance^alpha.
// InvalidArgument unless alpha is in (0, 1]; DimensionMismatch when values
// and points disagree in length.
double holder_seminorm(const std::vector<matalg::CMatrix>& values,
                       const std::vector<dynamics::TorusPoint>& points,
                       double alpha);

// ---------------------------------------------------------------------------
// Character harvesting and rank certification
// ---------------------------------------------------------------------------

// Characters of the transport representation on free-monoid words over the
// homoclinic generators, each evaluated through the finite orbit
// composition at the given depth. Every entry carries a certified error:
// the word's factor count weighs the per-generator composition bounds, and
// the trace picks up a factor of the rank.
freemonoid::CharTable harvest_characters(
    const cocycle::CocycleField& c,
    const std::vector<dynamics::HomoclinicOrbit>& gens,
    const std::set<freemonoid::FreeWord>& words, int depth);

// Pigeonhole rank comparison from character data alone: scan the
// single-generator powers present in both tables for an exponent whose
// first-table character sits within 0.25 of r0 (the power is then close to
// the identity); certify rank agreement iff the second table's character
// at that power stays within 0.5 of r0 and rounds to a rank in [1, r_max].
// InsufficientPowers when no near-identity power is available.
bool check_rank_agreement(const freemonoid::CharTable& t0,
                          const freemonoid::CharTable& t, int r0, int r_max);

// ---------------------------------------------------------------------------
// The end-to-end solver
// ---------------------------------------------------------------------------

struct LivsicConfig {
  int wilson_period = 6;          // periodic orbits measured for epsilon
  double holonomy_tol = 1e-8;     // truncation tolerance for all holonomies
  int grid_n = 24;                // output grid nodes per axis
  long long complexity = 3;       // homoclinic generator complexity bound
  int harvest_depth = 12;         // composition depth for harvested tables
  int cover_per_axis = 8;         // charts per axis
  double cover_half_width = 0.22; // chart box half width (leaf coordinates)
  double word_cap_scale = 1.0;    // scales the ceil(|log eps|) word caps
  double orbit_eps_floor = 1e-4;  // densest good-orbit scale attempted
  double delta_margin = 0.0;      // tightens the T <= eps^(-1/2) budget
};

// Everything the solver measured, plus the unitary section itself.
struct LivsicReport {
  int rank = 0;
  int grid_n = 0;
  std::vector<dynamics::TorusPoint> nodes;  // row-major (ix * n + iy)
  std::vector<matalg::UnitaryMatrix> p;     // unitary section per node

  double epsilon = 0.0;         // measured Wilson discrepancy
  double sup_defect = 0.0;      // sup ||p(map x) - A2 p(x) A1*||_F
  double defect_seminorm = 0.0; // C^alpha seminorm of the defect field
  double p_seminorm = 0.0;      // C^alpha seminorm of the section
  double alpha = 1.0;
  double tau_hat = 0.0;         // fitted decay exponent; set by sweeps only

  // Stage diagnostics.
  double harvest_discrepancy = 0.0;  // char gap over the harvested words
  double conjugacy_residual = 0.0;   // base-point conjugator residual
  double trunk_mismatch = 0.0;
  double trunk_agreement = 0.0;
  double blend_defect_bound = 0.0;  // max(blend sup defect, trunk mismatch)
  double max_radial = 0.0;          // worst unitarization correction

  // Budget accounting.
  int orbit_length = 0;           // trunk length of the good orbit
  double orbit_budget = 0.0;      // enforced length cap: eps^(-1/2 - delta),
                                  // lifted to the shortest generator when
                                  // coarser (lengths are bounded below)
  int max_generator_length = 0;   // longest homoclinic generator consumed
  int word_factor_cap = 0;
  int word_exponent_cap = 0;
};

// Full pipeline: measure the Wilson discrepancy, build a good orbit within
// the length budget, harvest characters of both transport representations,
// construct the base-point conjugator, propagate it along the trunk,
// extend over the chart cover, blend, and unitarize. Stage failures carry
// the stage name. Errors include BudgetExceeded (discrepancy above
// eps_budget, or no generators fit the length budget), RankMismatch,
// NotIrreducible, and anything propagated from the stages.
LivsicReport livsic_solve(const cocycle::CocycleField& c0,
                          const cocycle::CocycleField& c, double eps_budget,
                          const LivsicConfig& config = {});

// Scalar fields as a flat JSON record (deterministic key order and bytes).
std::string to_json(const LivsicReport& report);

// The section as raw bytes: nodes row-major, each node's matrix row-major,
// each entry as two little-endian 64-bit floats (re, im).
std::vector<std::uint8_t> grid_bytes(const LivsicReport& report);

}  // namespace holiv::livsic
