#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "specsim/core.hpp"
#include "specsim/dd.hpp"
#include "specsim/rng.hpp"

namespace specsim {

struct MoranParams {
  PhenotypeSpace space{1};
  KernelSet kernels;
  ModelParams model;
  int initial_site = 0;  // pi_0 = delta_{initial_site}

  void validate() const;
};

// One ordered-pair entry of the jump-rate table; selection and mutation
// components are reported separately.
struct PairRate {
  int from = 0;
  int to = 0;
  double selection = 0.0;  // (N/2) pi_x (1/2 + sigma (m_y - m_x)) pi_y
  double mutation = 0.0;   // (N/2) mu pi_x
};

// Rate table over ordered pairs x != y (x -> x moves are no-ops and omitted).
std::vector<PairRate> moran_rates(const PopulationCounts& state, const MoranParams& params);

// Exact Gillespie simulator of the Moran chain, aggregated per source site so
// each event costs O(|E|).
class MoranSimulator {
 public:
  MoranSimulator(const MoranParams& params, std::uint64_t seed, std::uint64_t replica = 0);
  MoranSimulator(const MoranParams& params, PopulationCounts initial, std::uint64_t seed,
                 std::uint64_t replica = 0);

  StepOutcome step(double t_max);

  double time() const { return time_; }
  const PopulationCounts& state() const { return state_; }
  std::vector<double> frequencies() const { return state_.frequencies(); }
  std::uint64_t event_count() const { return events_; }

 private:
  void recompute_fitness();
  void move_particle(int from_idx, int to_idx);

  MoranParams params_;
  PopulationCounts state_;
  long long n_;
  std::vector<double> m_;  // fitness, maintained incrementally
  std::uint64_t events_ = 0;
  double time_ = 0.0;
  Rng clock_rng_;
  Rng choice_rng_;
  std::vector<double> scratch_;
};

RunRecord run_moran(const MoranParams& params, double horizon,
                    const std::vector<double>& snapshot_times, std::uint64_t seed,
                    std::uint64_t replica = 0);

// ---- deterministic limits ----------------------------------------------

enum class OdeVariant { eq6, eq7, eq9 };

// eq6: sigma pi (m - mbar)
// eq7: sigma pi (m - mbar) + (mu/2)(1 - (2L+1) pi)
// eq9:       pi (m - mbar) + (mu_tilde/2)(1 - (2L+1) pi)
std::vector<double> ode_rhs(const Simplex& pi, const KernelSet& kernels, const ModelParams& params,
                            OdeVariant variant);

struct OdeOptions {
  double horizon = 1e9;
  double rel_tol = 1e-9;
  double abs_tol = 1e-12;
  double initial_step = 1e-3;
  double min_step = 1e-14;
  // stop early once the velocity sup-norm falls below this (0 disables)
  double stop_velocity = 0.0;
  double snapshot_interval = 0.0;  // 0 = first and last only
  double clip_floor = 1e-14;       // per-step simplex repair floor
};

struct OdeResult {
  Simplex terminal;
  double time = 0.0;
  bool ok = false;
  bool hit_stop_velocity = false;
  std::string error;
  std::uint64_t steps = 0;
  // for eq9: largest observed single-step decrease of V (should be ~0)
  double max_potential_drop = 0.0;
  std::vector<Snapshot> trajectory;
};

OdeResult integrate_ode(OdeVariant variant, const Simplex& pi0, const KernelSet& kernels,
                        const ModelParams& params, const OdeOptions& opt = {});

// ---- stationary law ------------------------------------------------------

// Closed-form stationary density of the Fleming-Viot chain, up to its
// normalizing constant.
struct StationaryDensity {
  KernelSet kernels;
  ModelParams params;

  // ((N/2) mu - 1) sum log pi + (N/2) mbar; -inf on the boundary
  double log_unnormalized(const Simplex& pi) const;
  // (N/2) V_pi with mu_tilde = mu - 2/N; algebraically identical
  double log_unnormalized_potential_form(const Simplex& pi) const;
};

double log_stationary_density(const Simplex& pi, const StationaryDensity& density);

struct McmcOptions {
  int n_samples = 4000;       // total retained samples across chains
  int n_chains = 4;
  int burn_in = 1000;         // per chain
  double proposal_scale = 200.0;  // kappa of the Dirichlet(kappa * pi) proposal
  std::uint64_t seed = 1;
};

struct McmcResult {
  std::vector<std::vector<double>> samples;
  std::vector<double> log_density;  // of each retained sample
  double acceptance_rate = 0.0;
  double max_split_rhat = 0.0;  // split-chain potential-scale-reduction, worst coordinate
  bool tuning_warning = false;  // acceptance below 1%
};

McmcResult mcmc_sample_stationary(const StationaryDensity& density, const McmcOptions& opt);

// ---- speciation detection -------------------------------------------------

struct SpeciationCriterion {
  int smooth_window = 3;       // centered moving average
  int min_mode_separation = 4; // sites
  double min_mode_mass = 0.15; // within +/- mode_mass_radius of each peak
  int mode_mass_radius = 2;
  double valley_ratio = 0.5;   // between-modes minimum vs the smaller peak
  int version = 1;
};

// True when the frequency vector carries at least two well-separated modes
// under the criterion. Shared with the conditioned model's transient
// bimodality check.
bool is_bimodal(const std::vector<double>& frequency, const SpeciationCriterion& crit = {});

// First snapshot time at which the criterion fires; nullopt if never.
std::optional<double> speciation_time(const std::vector<Snapshot>& trajectory,
                                      const SpeciationCriterion& crit = {});

}  // namespace specsim
