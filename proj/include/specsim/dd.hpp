#pragma once

#include <cstdint>
#include <vector>

#include "specsim/core.hpp"
#include "specsim/rng.hpp"

namespace specsim {

// Parameters of the original birth/death model: Gaussian carrying capacity
// and competition, rare Gaussian-displacement mutation at birth.
struct DDParams {
  PhenotypeSpace space{1};
  double sigma_k = 1.0;
  double sigma_c = 1.0;
  double capacity_scale = 500.0;  // c in K_x = c * exp(-(x - x_hat)^2 / (2 sigma_k^2))
  double birth_rate = 1.0;        // per individual
  double death_scale = 1.0;
  double mutation_prob = 0.015;   // fraction of births that mutate
  double mutation_std = 1.0;
  int x_hat = 0;

  void validate() const;
  KernelSet kernels() const;  // Gaussian K (scaled) and Gaussian C
};

// Integer occupation numbers per phenotype.
struct PopulationCounts {
  std::vector<long long> counts;

  static PopulationCounts delta(const PhenotypeSpace& space, int site, long long n);
  long long total() const;
  std::vector<double> frequencies() const;
};

struct DDRates {
  std::vector<double> birth;  // birth_rate * N_x
  std::vector<double> death;  // death_scale * N_x * (C * N)_x / K_x
  double total = 0.0;
};

DDRates dd_event_rates(const PopulationCounts& state, const DDParams& params,
                       const KernelSet& kernels);

enum class StepOutcome { applied, reached_horizon, extinct };

// Exact event-driven simulator. Owns its state; one instance per replica.
class DDSimulator {
 public:
  DDSimulator(const DDParams& params, PopulationCounts initial, std::uint64_t seed,
              std::uint64_t replica = 0);

  // Advances by one birth or death, or up to t_max if the next event falls
  // beyond it (exact by memorylessness of the exponential clock). Extinction
  // is an absorbing state, not an error.
  StepOutcome step(double t_max);

  double time() const { return time_; }
  const PopulationCounts& state() const { return state_; }
  std::uint64_t event_count() const { return events_; }

 private:
  int sample_offspring_site(int parent);
  void apply_delta(int site, long long delta);

  DDParams params_;
  KernelSet kernels_;
  PopulationCounts state_;
  long long total_ = 0;
  std::vector<double> conv_;  // (C * N)_x, maintained incrementally
  double time_ = 0.0;
  std::uint64_t events_ = 0;
  Rng clock_rng_;
  Rng choice_rng_;
  Rng mutation_rng_;
};

RunRecord run_dd(const DDParams& params, const PopulationCounts& initial, double horizon,
                 const std::vector<double>& snapshot_times, std::uint64_t seed,
                 std::uint64_t replica = 0);

}  // namespace specsim
