#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "specsim/conditioned.hpp"
#include "specsim/core.hpp"
#include "specsim/dd.hpp"
#include "specsim/landscape.hpp"
#include "specsim/moran.hpp"

namespace specsim {

// One experiment per config file. The grammar is a JSON object of typed
// scalars, lists and nested sections; unknown keys are rejected with the
// offending name so typos surface immediately.
struct ExperimentConfig {
  std::string model;  // dd_original | conditioned_dd | moran | ode | landscape |
                      // mcmc | bifurcation | speciation_sweep
  std::uint64_t seed = 1;
  int replicas = 1;
  double horizon = 0.0;
  std::vector<double> snapshot_times;
  double snapshot_interval = 0.0;  // expands against horizon when no explicit list
  std::string output_dir;

  KernelSpec kernel;

  struct MoranSection {
    double sigma = 0.5;
    double mu = 0.0;
    long long population = 1000;
    int initial_site = 0;
  } moran;

  struct DDSection {
    double sigma_k = 1.0;
    double sigma_c = 1.0;
    double capacity_scale = 500.0;
    double birth_rate = 1.0;
    double death_scale = 1.0;
    double mutation_prob = 0.015;
    double mutation_std = 1.0;
    int x_hat = 0;
    int initial_site = 0;
    long long initial_count = 500;
  } dd;

  struct ConditionedSection {
    std::string fitness = "W2";  // W1 | W2
    double mutation = 0.0;       // tridiagonal A parameter; 0 selects identity
    double tol = 1e-12;
    int max_iter = 200000;
    int snapshot_every = 0;
    double init_eps = 1e-4;      // near-delta smoothing of the start
    int initial_site = 0;
    long long population = 0;    // > 0 switches to sampled generations
  } conditioned;

  struct OdeSection {
    std::string variant = "eq7";  // eq6 | eq7 | eq9
    double init_eps = 0.0;        // 0 = exact delta start (eq9 requires > 0)
  } ode;

  struct LandscapeSection {
    int n_starts = 32;
    double tol = 1e-8;
  } landscape;

  BoundAuditInputs bounds;
  McmcOptions mcmc;
  std::vector<double> mu_grid;
  SpeciationCriterion criterion;

  static ExperimentConfig from_json_text(const std::string& text);
  std::string to_json_text() const;  // canonical: sorted keys, round-trips losslessly
  std::string hash() const;          // 64-bit FNV-1a of the canonical text, hex
  void validate() const;             // named-field diagnostics

  ModelParams model_params() const;
  KernelSet kernels() const;
  std::vector<double> snapshot_schedule() const;
};

struct ExperimentOutcome {
  int exit_code = 0;  // nonzero iff a hard assertion (bound-audit conclusion) fired
  std::vector<std::string> artifacts;
  std::vector<std::string> warnings;
};

ExperimentOutcome run_experiment(const ExperimentConfig& config, bool with_timestamp = true);

// Built-in example configs; names: fig1..fig6, thm25, prop28, bifurcation.
std::vector<std::pair<std::string, std::string>> recipe_list();
std::string recipe_config_text(const std::string& name);

// 17 significant digits; the CSV float format
std::string format_double(double v);

// resolves relative output directories against $SPECSIM_OUT_ROOT (default ".")
std::string resolve_output_dir(const std::string& dir);

}  // namespace specsim
