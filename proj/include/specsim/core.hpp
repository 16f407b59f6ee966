#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace specsim {

// Phenotype lattice E = [-L, L] on the integers.
struct PhenotypeSpace {
  int half_width;  // L

  explicit PhenotypeSpace(int half_width_);
  int size() const { return 2 * half_width + 1; }
  int index(int site) const { return site + half_width; }
  int site(int idx) const { return idx - half_width; }
  bool contains(int x) const { return x >= -half_width && x <= half_width; }
  bool operator==(const PhenotypeSpace&) const = default;
};

// Probability vector over the lattice. Construction renormalizes small
// floating-point drift (|sum-1| <= 1e-6) and rejects anything worse, which
// signals an upstream bug rather than drift.
class Simplex {
 public:
  Simplex(PhenotypeSpace space, std::vector<double> weights);

  static Simplex delta(PhenotypeSpace space, int site);
  static Simplex uniform(PhenotypeSpace space);
  // (1 - eps) * delta_site + eps * uniform
  static Simplex near_delta(PhenotypeSpace space, int site, double eps);

  const PhenotypeSpace& space() const { return space_; }
  const std::vector<double>& weights() const { return weights_; }
  double operator[](std::size_t idx) const { return weights_[idx]; }
  double at_site(int x) const { return weights_[space_.index(x)]; }
  std::size_t size() const { return weights_.size(); }
  bool strictly_interior(double floor = 0.0) const;
  // first and second moments of the site coordinate
  double mean_site() const;
  double variance_site() const;

 private:
  PhenotypeSpace space_;
  std::vector<double> weights_;
};

// Carrying capacity K over E plus cooperation B and competition C over
// displacements -2L..2L, so x - z never leaves the stored range. The lattice
// is an interval, not a torus: no wraparound.
struct KernelSet {
  PhenotypeSpace space{1};
  std::vector<double> capacity;     // K, indexed by site + L
  std::vector<double> cooperation;  // B, indexed by displacement + 2L
  std::vector<double> competition;  // C, indexed by displacement + 2L
  bool assumption1 = false;         // symmetric unimodal K with K_0 = 1, step B
  double step_level = 1.0;          // b, when B is step form
  int step_width = 1;               // M, when B is step form

  double K(int x) const { return capacity[static_cast<std::size_t>(x + space.half_width)]; }
  // K extended by zero outside E; used by boundary-condition checks
  double K_or_zero(int x) const { return space.contains(x) ? K(x) : 0.0; }
  double B(int z) const { return cooperation[static_cast<std::size_t>(z + 2 * space.half_width)]; }
  double C(int z) const { return competition[static_cast<std::size_t>(z + 2 * space.half_width)]; }

  void validate() const;  // throws std::invalid_argument on broken invariants
};

// Declarative kernel construction covering the forms used throughout:
// Gaussian / rectangular / constant capacity and competition, step / constant /
// one-minus-competition cooperation.
struct KernelSpec {
  int half_width = 1;

  std::string capacity_kind = "gaussian";  // gaussian | rectangular | constant | table
  double sigma_k = 1.0;
  double capacity_scale = 1.0;  // the c in c*exp(...); assumption-1 mode forces 1
  int capacity_peak = 0;        // x_hat
  int capacity_halfwidth = 0;   // rectangular K: 1 on [-w, w] (0 means all of E)
  std::vector<double> capacity_table;

  std::string cooperation_kind = "step";  // step | constant | one_minus_c
  double b = 1.0;
  int m = 1;
  double cooperation_value = 1.0;

  std::string competition_kind = "gaussian";  // gaussian | rectangular | constant
  double sigma_c = 1.0;
  int competition_halfwidth = 0;
  double competition_value = 1.0;
};

KernelSet build_kernels(const KernelSpec& spec);

// Selection strength, mutation rate and population size of the Moran /
// Fleming-Viot model.
struct ModelParams {
  double sigma = 0.5;
  double mu = 0.0;
  long long population = 0;  // N

  double mu_tilde() const { return mu - 2.0 / static_cast<double>(population); }
  void validate() const;
  // stationary-density and system-(9) work additionally needs mu_tilde > 0
  void require_positive_mu_tilde() const;
};

// m_x = K_x sum_z B_{x-z} K_z pi_z  for every x in E
std::vector<double> fitness(const Simplex& pi, const KernelSet& kernels);

// m_bar = sum_x pi_x m_x
double mean_fitness(const Simplex& pi, const std::vector<double>& m);

// V_pi = m_bar + mu_tilde * sum_x log pi_x; -inf when any coordinate is zero,
// so optimizers can reject boundary proposals uniformly.
double potential(const Simplex& pi, const KernelSet& kernels, double mu_tilde);

double sup_distance(const Simplex& a, const Simplex& b);

inline constexpr double kNegativeInfinity = -std::numeric_limits<double>::infinity();

// One timestamped frequency vector of a trajectory.
struct Snapshot {
  double time = 0.0;
  std::vector<double> frequency;
};

// Seeded trajectory metadata shared by all simulators.
struct RunRecord {
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<Snapshot> snapshots;
  // population size per snapshot; filled only by models with varying totals
  std::vector<double> snapshot_totals;
  std::uint64_t event_count = 0;
  std::optional<double> extinction_time;
  std::optional<double> speciation_time;
  double wall_seconds = 0.0;
};

}  // namespace specsim
