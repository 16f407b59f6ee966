#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specsim/core.hpp"
#include "specsim/moran.hpp"

namespace specsim {

enum class StationaryClass { local_max_V, saddle_or_unstable, unresolved };

std::string to_string(StationaryClass c);

struct StationaryPoint {
  Simplex pi_hat;
  std::vector<double> fitness;          // m(pi_hat)
  double constancy_residual = 0.0;      // max-min of m_x + mu_tilde / (2 pi_x)
  StationaryClass classification = StationaryClass::unresolved;
  int basin_tag = 0;                    // multistart cluster index
  double velocity_norm = 0.0;           // sup-norm of the flow rhs at pi_hat
  std::vector<double> tangent_eigenvalues;  // real parts, tangent-space Jacobian
};

// Multistart discovery of the stationary points of the potential flow:
// integrate from n_starts random interior points plus candidates seeded near
// every admissible small-support face, polish with Newton, then cluster
// terminals by sup-distance < 10 * tol.
std::vector<StationaryPoint> find_stationary_points(const MoranParams& params, int n_starts,
                                                    double tol, std::uint64_t seed = 7);

struct StationarityDiagnostics {
  double constancy_residual = 0.0;
  // worst deviation of the random-subset aggregate identity from the per-site
  // constant, over 20 subsets
  double subset_residual = 0.0;
  bool sign_equivalence_ok = false;   // m_x >= mbar  <=>  pi_x >= 1/(2L+1)
  bool monotone_coupling_ok = false;  // descending m order == descending pi order
};

StationarityDiagnostics verify_stationarity(const Simplex& pi_hat, const KernelSet& kernels,
                                            double mu_tilde);

// ---- face machinery ---------------------------------------------------------

struct FaceSpec {
  std::vector<int> support;  // sorted sites within E
  bool spaced = false;       // consecutive sites >= M apart

  static FaceSpec make(const KernelSet& kernels, std::vector<int> support);
};

struct FaceCandidate {
  bool solved = false;      // linear system nonsingular and weights positive
  bool valid = false;       // solved + Hessian + off-support fitness checks
  bool degenerate = false;  // singular linear system
  std::string reason;
  Simplex pi;               // candidate embedded in the full simplex
  double on_support_fitness = 0.0;  // the common m_1
  double max_off_support_fitness = 0.0;
  double mbar = 0.0;
  std::vector<double> hessian_eigenvalues;  // face-tangent Hessian of mbar
};

// Equal-fitness candidate on a face: solve {m_x(pi) equal on I, sum pi = 1},
// then require positive weights, a negative-definite face-tangent Hessian and
// every off-support fitness strictly below the on-support level. Singleton
// faces skip the (empty) Hessian and use the off-support test alone.
FaceCandidate face_local_max(const FaceSpec& face, const KernelSet& kernels);

// The same linear solve with total mass k instead of 1; the solution scales
// linearly in k. Returns the on-face weights, empty when singular/negative.
std::vector<double> face_equal_fitness_weights(const FaceSpec& face, const KernelSet& kernels,
                                               double total_mass);

// ---- closed-form local maxima ----------------------------------------------

struct TwoPointResult {
  bool conditions_ok = false;
  std::string reason;
  double p = 0.0;   // mass at -x; the partner site -x+M carries 1-p
  double mbar = 0.0;
};

// Closed form for the two-point candidate p delta_{-x} + (1-p) delta_{-x+M};
// requires x in [-M+1, -1] and an assumption-1 kernel set.
TwoPointResult two_point_formula(int x, const KernelSet& kernels);

struct ThreePointResult {
  bool conditions_ok = false;
  std::string reason;
  double p = 0.0;  // printed-formula mass at x-M
  double q = 0.0;  // printed-formula mass at x
  double mbar = 0.0;
  // the linear-solve construction on {x-M, x, x+M}; authoritative
  double oracle_p = 0.0;
  double oracle_q = 0.0;
  double oracle_mbar = 0.0;
  bool oracle_valid = false;
  double discrepancy = 0.0;   // max |printed - oracle| over p, q, mbar
  bool flagged = false;       // discrepancy > 1e-8
};

// Closed form for the three-point candidate on {x-M, x, x+M}, always
// cross-checked against the face construction; the printed formulas are
// evaluated as written and disagreement is reported, never patched.
ThreePointResult three_point_formula(int x, const KernelSet& kernels);

// ---- audits ------------------------------------------------------------------

struct GapAuditReport {
  bool applicable = false;  // effective support has a gap of >= M+1
  bool found = false;       // an improving direction exists
  int gap_left = 0;         // support sites bounding the widest gap
  int gap_right = 0;
  int improving_site = 0;   // y inside the gap with m_y above support fitness
  int donor_site = 0;       // w on the support
  double directional_derivative = 0.0;  // of mbar along delta_y - delta_w
};

// Mass supported on sites spread more than M apart admits an in-gap site of
// strictly higher fitness; reports the resulting ascent direction.
GapAuditReport gap_audit(const Simplex& pi_hat, const KernelSet& kernels,
                         double support_threshold = 1e-6);

struct BoundAuditInputs {
  int n = 0;           // per-site-mass-cap interval parameter, n <= M
  double epsilon = 0;  // middle-mass bound free parameter
};

struct BoundAuditEntry {
  std::string name;
  bool hypothesis_ok = false;
  std::string skip_reason;  // set when hypotheses fail
  bool conclusion_ok = false;
  double margin = 0.0;  // slack of the conclusion inequality (>= 0 iff ok)
};

// Checks every applicable closed-form bound at a validated stationary point:
// two-sided-mass lower bounds, the per-site mass cap, the middle-mass bound
// and the mean-fitness floor. Conclusions of results whose hypotheses hold
// must never fail; a violation signals an implementation bug.
std::vector<BoundAuditEntry> bound_audit(const Simplex& pi_hat, const KernelSet& kernels,
                                         const ModelParams& params,
                                         const BoundAuditInputs& inputs);

// ---- potential local maxima near mean-fitness maxima -------------------------

// Perturbs a validated mean-fitness local maximum inward by
// eps = min(1e-3, sqrt(mu_tilde)), flows to stationarity and returns the
// terminal point iff it stays within sup-distance 0.1 and classifies as a
// local maximum of V.
std::optional<StationaryPoint> v_local_max_near(const Simplex& pi_tilde, const KernelSet& kernels,
                                                const ModelParams& params);

struct BifurcationResult {
  bool found = false;
  std::string note;
  double mu_low = 0.0;   // local max near delta_0 still exists here
  double mu_high = 0.0;  // ... and no longer exists here
  double mu_star = 0.0;  // bracket midpoint after bisection
  std::vector<std::pair<double, bool>> grid_results;  // (mu, has local max)
};

// Scans a monotone mu grid for the mu at which the local maximum of V near
// delta_0 disappears, then bisects the bracketing interval to relative width
// 1e-3.
BifurcationResult bifurcation_scan(const KernelSet& kernels, const ModelParams& base,
                                   const std::vector<double>& mu_grid);

}  // namespace specsim
