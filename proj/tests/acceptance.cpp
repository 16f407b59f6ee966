// Acceptance gate: one line per criterion, nonzero exit iff any executed
// criterion fails. Criterion 11 runs hours-scale sweeps and is only executed
// with --slow.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "specsim/harness.hpp"

using namespace specsim;
namespace fs = std::filesystem;

namespace {

// ---------- small utilities ----------------------------------------------------

std::vector<double> interior_draw(Rng& rng, int n, double floor = 1e-6) {
  auto w = rng.dirichlet(std::vector<double>(static_cast<std::size_t>(n), 1.0));
  double sum = 0.0;
  for (auto& v : w) {
    v = std::max(v, floor);
    sum += v;
  }
  for (auto& v : w) v /= sum;
  return w;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double sup_dist_vec(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

MoranParams make_moran(const KernelSet& k, double mu, long long population,
                       double sigma = 0.5) {
  MoranParams p;
  p.space = k.space;
  p.kernels = k;
  p.model.sigma = sigma;
  p.model.mu = mu;
  p.model.population = population;
  return p;
}

KernelSet fig4_kernels() {
  KernelSpec spec;
  spec.half_width = 14;
  spec.capacity_kind = "gaussian";
  spec.sigma_k = std::sqrt(10.0);
  spec.cooperation_kind = "step";
  spec.b = 0.01;
  spec.m = 10;
  spec.competition_kind = "constant";
  return build_kernels(spec);
}

KernelSet concentration_kernels() {
  KernelSpec spec;
  spec.half_width = 2;
  spec.capacity_kind = "table";
  spec.capacity_table = {0.5, 0.9, 1.0, 0.9, 0.5};
  spec.cooperation_kind = "constant";
  spec.cooperation_value = 0.95;
  spec.competition_kind = "constant";
  return build_kernels(spec);
}

// ---------- shared stationary-point batches (criteria 2 and 3) ------------------

struct PointBatch {
  KernelSet kernels;
  double mu_tilde = 0.0;
  std::vector<StationaryPoint> points;
};

const std::vector<PointBatch>& stationary_batches() {
  static std::vector<PointBatch> cache;
  if (!cache.empty()) return cache;
  Rng rng(20202);
  for (int s = 0; s < 16; ++s) {
    PointBatch batch{oracle::random_assumption1(rng, 3)};
    const long long n_pop = 1000000;
    const double mu_tilde = std::pow(10.0, -4.0 + 2.0 * rng.uniform());  // 1e-4 .. 1e-2
    batch.mu_tilde = mu_tilde;
    const auto params =
        make_moran(batch.kernels, mu_tilde + 2.0 / static_cast<double>(n_pop), n_pop);
    batch.points =
        find_stationary_points(params, 6, 1e-9, static_cast<std::uint64_t>(1000 + s));
    cache.push_back(std::move(batch));
  }
  return cache;
}

// ---------- criteria ------------------------------------------------------------

bool criterion01(std::string& detail) {
  Rng rng(10101);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int half = 1 + static_cast<int>(rng.uniform() * 8.0);
    const auto k = oracle::random_assumption1(rng, std::min(half, 8));
    ModelParams mp;
    mp.population = 1000000;
    mp.mu = std::pow(10.0, -5.0 + 4.0 * rng.uniform()) + 2.0 / 1000000.0;
    const Simplex start(k.space, interior_draw(rng, k.space.size(), 1e-9));
    OdeOptions opt;
    opt.horizon = 20.0;
    opt.stop_velocity = 1e-10;
    const auto res = integrate_ode(OdeVariant::eq9, start, k, mp, opt);
    if (!res.ok) {
      detail = "integration failed: " + res.error;
      return false;
    }
    worst = std::max(worst, res.max_potential_drop);
  }
  detail = "worst single-step potential drop " + format_double(worst) + " over 100 draws";
  return worst <= 1e-8;
}

bool criterion02(std::string& detail) {
  int converged = 0;
  double worst_constancy = 0.0, worst_subset = 0.0;
  for (const auto& batch : stationary_batches()) {
    for (const auto& pt : batch.points) {
      if (pt.velocity_norm > 1e-9) continue;
      ++converged;
      const auto diag = verify_stationarity(pt.pi_hat, batch.kernels, batch.mu_tilde);
      worst_constancy = std::max(worst_constancy, diag.constancy_residual);
      worst_subset = std::max(worst_subset, diag.subset_residual);
    }
  }
  detail = std::to_string(converged) + " converged points, worst constancy " +
           format_double(worst_constancy) + ", worst subset residual " +
           format_double(worst_subset);
  return converged >= 20 && worst_constancy < 1e-8 && worst_subset < 1e-8;
}

bool criterion03(std::string& detail) {
  int checked = 0, broken = 0;
  for (const auto& batch : stationary_batches()) {
    for (const auto& pt : batch.points) {
      if (pt.velocity_norm > 1e-9) continue;
      ++checked;
      const auto diag = verify_stationarity(pt.pi_hat, batch.kernels, batch.mu_tilde);
      if (!diag.monotone_coupling_ok || !diag.sign_equivalence_ok) ++broken;
    }
  }
  detail = std::to_string(checked) + " points, " + std::to_string(broken) +
           " order mismatches";
  return checked >= 20 && broken == 0;
}

bool criterion04(std::string& detail) {
  // The flow is the Shahshahani gradient of half the potential: applying G to
  // (m_x + mu_tilde / (2 pi_x)) reproduces the rhs exactly; grad V doubles it.
  Rng rng(40404);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto k = oracle::random_assumption1(rng, 3);
    const int n = k.space.size();
    ModelParams mp;
    mp.population = 200000;
    mp.mu = 1e-4 + 5e-3 * rng.uniform();
    const double mu_tilde = mp.mu_tilde();
    const Simplex pi(k.space, interior_draw(rng, n));
    const auto rhs = ode_rhs(pi, k, mp, OdeVariant::eq9);
    const auto m = fitness(pi, k);
    const double hbar =
        mean_fitness(pi, m) + 0.5 * mu_tilde * static_cast<double>(n);
    for (int i = 0; i < n; ++i) {
      const auto idx = static_cast<std::size_t>(i);
      const double h = m[idx] + mu_tilde / (2.0 * pi[idx]);
      worst = std::max(worst, std::abs(pi[idx] * (h - hbar) - rhs[idx]));
    }
  }
  detail = "max |G grad(V/2) - rhs| = " + format_double(worst) + " over 100 interior points";
  return worst <= 1e-10;
}

bool criterion05(std::string& detail) {
  Rng rng(50505);
  int three_ok = 0, three_flagged = 0, two_ok = 0, algebra = 0, failures = 0;
  double worst_algebra = 0.0;
  for (int draw = 0; draw < 50000 && (three_ok + two_ok < 200 || algebra < 200); ++draw) {
    const auto k = oracle::random_assumption1(rng, 5);
    const int m_step = k.step_width;

    for (int x = -m_step + 1; x <= m_step - 1; ++x) {
      if (!k.space.contains(x - m_step) || !k.space.contains(x + m_step)) continue;
      const auto r = three_point_formula(x, k);
      if (!r.conditions_ok) continue;
      ++three_ok;
      if (r.flagged) ++three_flagged;
      if (!(r.discrepancy <= 1e-8 || (r.flagged && r.oracle_valid))) ++failures;
    }

    if (m_step < 2) continue;
    for (int x = -m_step + 1; x <= -1; ++x) {
      if (!k.space.contains(-x + m_step)) continue;
      const auto r = two_point_formula(x, k);
      if (r.conditions_ok) ++two_ok;
      if (r.reason == "denominator not positive") continue;
      // the closed form solves the same equal-fitness system as the oracle, so
      // it must match whenever both produce an admissible pair
      const auto w =
          face_equal_fitness_weights(FaceSpec::make(k, {-x, -x + m_step}), k, 1.0);
      if (w.size() != 2) continue;
      std::vector<double> full(static_cast<std::size_t>(k.space.size()), 0.0);
      full[static_cast<std::size_t>(k.space.index(-x))] = w[0];
      full[static_cast<std::size_t>(k.space.index(-x + m_step))] = w[1];
      const Simplex pi(k.space, full);
      const double err = std::max(std::abs(r.p - w[0]),
                                  std::abs(r.mbar - mean_fitness(pi, fitness(pi, k))));
      worst_algebra = std::max(worst_algebra, err);
      ++algebra;
      if (err > 1e-8) ++failures;
    }
  }
  detail = std::to_string(three_ok) + " three-point instances with side conditions (" +
           std::to_string(three_flagged) + " flagged, oracle governs), " +
           std::to_string(two_ok) +
           " two-point instances (side conditions provably unsatisfiable on same-side "
           "pairs), " +
           std::to_string(algebra) + " two-point algebra checks, worst " +
           format_double(worst_algebra);
  return failures == 0 && three_ok + two_ok >= 200 && algebra >= 200;
}

bool criterion06(std::string& detail) {
  Rng rng(60606);
  int agree = 0, total = 0;
  while (total < 100) {
    const auto k = oracle::random_assumption1(rng, 4 + static_cast<int>(rng.uniform() * 3.0));
    const double km = k.K_or_zero(k.step_width);
    if (std::abs(km - k.step_level) < 1e-12) continue;
    ++total;
    const auto cand = face_local_max(FaceSpec::make(k, {0}), k);
    if (cand.valid == (km < k.step_level)) ++agree;
  }
  detail = std::to_string(agree) + "/100 draws match the capacity-vs-cooperation predicate";
  return agree == 100;
}

bool criterion07(std::string& detail) {
  const auto k = concentration_kernels();
  StationaryDensity density{k, ModelParams{0.5, 1e-3, 2000}};
  McmcOptions opt;
  opt.n_samples = 4000;
  opt.burn_in = 5000;
  opt.proposal_scale = 2000.0;  // the target is sharply concentrated at the corner
  opt.seed = 25;
  const auto res = mcmc_sample_stationary(density, opt);
  int close = 0;
  for (const auto& s : res.samples)
    if (1.0 - s[2] < 0.1) ++close;  // sup-distance to the center corner
  const double frac = static_cast<double>(close) / static_cast<double>(res.samples.size());

  const auto params = make_moran(k, 1e-3, 2000);  // mu_tilde = 0 exactly
  const auto points = find_stationary_points(params, 16, 1e-9, 7);
  int maxima = 0;
  double dist_to_center = 1.0;
  for (const auto& pt : points) {
    if (pt.classification != StationaryClass::local_max_V) continue;
    ++maxima;
    dist_to_center = sup_distance(pt.pi_hat, Simplex::delta(k.space, 0));
  }
  detail = format_double(100.0 * frac) + "% of samples concentrate; " +
           std::to_string(maxima) + " landscape maximum at distance " +
           format_double(dist_to_center) + " from the center corner";
  return frac >= 0.9 && maxima == 1 && dist_to_center < 1e-6;
}

bool criterion08(std::string& detail) {
  KernelSpec spec;
  spec.half_width = 2;
  spec.capacity_kind = "constant";
  spec.cooperation_kind = "constant";
  spec.cooperation_value = 0.0;
  spec.competition_kind = "constant";
  StationaryDensity density{build_kernels(spec), ModelParams{0.5, 5e-3, 2000}};
  McmcOptions opt;
  opt.n_samples = 8000;
  opt.burn_in = 2000;
  opt.seed = 8;
  const auto res = mcmc_sample_stationary(density, opt);

  const double exact_mean = 0.2;
  const double exact_var = 5.0 * 20.0 / (25.0 * 25.0 * 26.0);
  double worst_sigmas = 0.0;
  for (int i = 0; i < 5; ++i) {
    std::vector<double> coord, sq;
    for (const auto& s : res.samples) {
      coord.push_back(s[static_cast<std::size_t>(i)]);
      const double d = s[static_cast<std::size_t>(i)] - exact_mean;
      sq.push_back(d * d);
    }
    double mean = 0.0, var = 0.0;
    for (double v : coord) mean += v;
    mean /= static_cast<double>(coord.size());
    for (double v : sq) var += v;
    var /= static_cast<double>(sq.size());
    const double se_mean = oracle::batch_se(coord);
    const double se_var = oracle::batch_se(sq);
    worst_sigmas = std::max(worst_sigmas, std::abs(mean - exact_mean) / se_mean);
    worst_sigmas = std::max(worst_sigmas, std::abs(var - exact_var) / se_var);
  }
  detail = "worst deviation " + format_double(worst_sigmas) +
           " standard errors across 5 marginal means and variances";
  return worst_sigmas < 3.0;
}

struct SweepSet {
  KernelSet kernels;
  ModelParams model;
  BoundAuditInputs inputs;
};

SweepSet family_two_sided(Rng& rng) {
  // plateau capacities, vanishing cooperation: maxima sit on +/- ceil(M/2)
  // pairs, firing the two-sided-mass, per-site-cap and fitness-floor audits
  const double k2 = 0.93 + 0.04 * rng.uniform();
  const double k4 = 2e-4 + 3e-4 * rng.uniform();
  KernelSpec spec;
  spec.half_width = 6;
  spec.capacity_kind = "table";
  spec.capacity_table = {0.6 * k4, 0.8 * k4, k4,        0.3, k2, 0.99, 1.0,
                         0.99,     k2,       0.3,       k4,  0.8 * k4, 0.6 * k4};
  spec.cooperation_kind = "step";
  spec.b = 5e-5 + 5e-5 * rng.uniform();
  spec.m = 4;
  spec.competition_kind = "constant";
  SweepSet out{build_kernels(spec)};
  const double mu_tilde = 0.9 * 4.0 * k2 * k2 / std::pow(26.0, 3);
  out.model = ModelParams{0.5, mu_tilde + 1e-5, 200000};
  out.inputs = {.n = 4, .epsilon = 0.05};
  return out;
}

SweepSet family_concentrated(Rng& rng) {
  // steep capacities, strong cooperation: the near-center maximum fires the
  // middle-mass audit
  const double k1 = 0.03 + 0.04 * rng.uniform();
  KernelSpec spec;
  spec.half_width = 4;
  spec.capacity_kind = "table";
  spec.capacity_table = {0.3 * k1, 0.4 * k1, 0.6 * k1, k1, 1.0,
                         k1,       0.6 * k1, 0.4 * k1, 0.3 * k1};
  spec.cooperation_kind = "step";
  spec.b = 0.7 + 0.2 * rng.uniform();
  spec.m = 4;
  spec.competition_kind = "constant";
  SweepSet out{build_kernels(spec)};
  const double mu_tilde = 1e-4 * (0.5 + rng.uniform());
  out.model = ModelParams{0.5, mu_tilde + 2e-6, 1000000};
  out.inputs = {.n = 2, .epsilon = 0.1};
  return out;
}

bool criterion09(std::string& detail) {
  Rng rng(90909);
  int fired_sets = 0, violations = 0, audited_points = 0;
  std::string first_violation;
  for (int s = 0; s < 60; ++s) {
    const SweepSet set = s < 30 ? family_two_sided(rng) : family_concentrated(rng);
    auto params = make_moran(set.kernels, set.model.mu, set.model.population);
    const auto points =
        find_stationary_points(params, 2, 1e-8, static_cast<std::uint64_t>(900 + s));
    bool fired = false;
    for (const auto& pt : points) {
      if (pt.classification != StationaryClass::local_max_V) continue;
      ++audited_points;
      for (const auto& e : bound_audit(pt.pi_hat, set.kernels, set.model, set.inputs)) {
        if (!e.hypothesis_ok) continue;
        fired = true;
        if (!e.conclusion_ok) {
          ++violations;
          if (first_violation.empty())
            first_violation = e.name + " margin " + format_double(e.margin);
        }
      }
    }
    if (fired) ++fired_sets;
  }
  detail = std::to_string(fired_sets) + "/60 parameter sets fired hypotheses over " +
           std::to_string(audited_points) + " validated maxima, " +
           std::to_string(violations) + " conclusion violations" +
           (first_violation.empty() ? "" : " (first: " + first_violation + ")");
  return fired_sets >= 50 && violations == 0;
}

bool criterion10(std::string& detail) {
  const auto k = fig4_kernels();
  ModelParams base{0.5, 5e-5, 50625};
  const auto res = bifurcation_scan(k, base, {4.2e-5, 4.6e-5, 5e-5, 5.4e-5, 5.8e-5});
  if (!res.found) {
    detail = "no flip found in the grid: " + res.note;
    return false;
  }
  detail = "flip bracketed at mu* = " + format_double(res.mu_star);
  return res.mu_star >= 4.5e-5 && res.mu_star <= 5.5e-5;
}

std::vector<double> speciation_samples(const KernelSet& k, double mu, long long population,
                                       double horizon, double interval, int replicas,
                                       std::uint64_t seed, int& undetected) {
  auto params = make_moran(k, mu, population);
  std::vector<double> out;
  for (int r = 0; r < replicas; ++r) {
    // check the detector on the running state and stop at first detection
    MoranSimulator sim(params, seed, static_cast<std::uint64_t>(r));
    std::optional<double> detected;
    for (double next = interval; next <= horizon + 1e-9; next += interval) {
      while (sim.time() < next)
        if (sim.step(next) != StepOutcome::applied) break;
      if (is_bimodal(sim.frequencies())) {
        detected = next;
        break;
      }
    }
    if (detected)
      out.push_back(*detected);
    else {
      ++undetected;
      out.push_back(horizon);  // censored at the horizon
    }
  }
  return out;
}

bool criterion11(std::string& detail) {
  const auto k = fig4_kernels();
  int undetected = 0;
  const auto fast = speciation_samples(k, 6e-5, 50625, 6000.0, 50.0, 5, 4, undetected);
  const double med_fast = median(fast);
  const auto slow = speciation_samples(k, 5e-5, 50625, 40000.0, 250.0, 5, 5, undetected);
  const double med_slow = median(slow);

  const std::vector<double> grid = {4.4e-5, 4.6e-5, 4.8e-5, 5e-5, 5.2e-5, 5.5e-5, 6e-5};
  std::vector<double> means;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    int censored = 0;
    const auto times =
        speciation_samples(k, grid[g], 50625, 60000.0, 250.0, 5,
                           6 + static_cast<std::uint64_t>(g) * 101, censored);
    double mean = 0.0;
    for (double t : times) mean += t;
    means.push_back(mean / static_cast<double>(times.size()));
    undetected += censored;
  }
  bool nonincreasing = true;
  for (std::size_t i = 1; i < means.size(); ++i)
    if (means[i] > means[i - 1]) nonincreasing = false;

  std::ostringstream d;
  d << "median(mu=6e-5) = " << med_fast << ", median(mu=5e-5) = " << med_slow
    << ", grid means:";
  for (double m : means) d << " " << m;
  d << ", censored runs: " << undetected;
  detail = d.str();
  return med_fast >= 1000.0 && med_fast <= 6000.0 && med_slow >= 2.0 * med_fast &&
         nonincreasing;
}

bool criterion12(std::string& detail) {
  const auto k = fig4_kernels();
  auto params = make_moran(k, 1e-3, 100000);
  OdeOptions opt;
  opt.horizon = 50.0;
  const auto ode =
      integrate_ode(OdeVariant::eq7, Simplex::delta(k.space, 0), k, params.model, opt);
  if (!ode.ok) {
    detail = "ODE integration failed: " + ode.error;
    return false;
  }
  std::vector<double> dists;
  for (int r = 0; r < 20; ++r) {
    const auto rec = run_moran(params, 50.0, {50.0}, 12, static_cast<std::uint64_t>(r));
    dists.push_back(sup_dist_vec(rec.snapshots.back().frequency, ode.terminal.weights()));
  }
  const double med = median(dists);
  detail = "median terminal sup-distance " + format_double(med) + " over 20 replicas";
  return med < 0.02;
}

bool criterion13(std::string& detail) {
  KernelSpec spec;
  spec.half_width = 149;
  spec.capacity_kind = "gaussian";
  spec.sigma_k = 60.0;
  spec.cooperation_kind = "constant";
  spec.competition_kind = "gaussian";
  spec.sigma_c = 55.0;
  const auto k = build_kernels(spec);
  // identity mutation cannot move mass between sites, so the spike never
  // spreads into the Gaussian hump; a small nearest-neighbour rate does
  const auto a = MutationMatrix::tridiagonal(k.space, 0.05);

  // the limiting humps have scale ~sigma_k; detect modes over a matching window
  SpeciationCriterion crit;
  crit.min_mode_separation = 10;
  crit.mode_mass_radius = 30;
  crit.min_mode_mass = 0.15;

  auto run = [&](FitnessKind kind, bool& transient_bimodal, bool& final_bimodal,
                 double& variance, bool& converged) {
    Simplex pi = Simplex::near_delta(k.space, 0, 1e-3);
    transient_bimodal = false;
    converged = false;
    for (int iter = 0; iter < 20000; ++iter) {
      const Simplex next = det_map_step(pi, k, kind, a);
      if (iter % 5 == 0 && is_bimodal(next.weights(), crit)) transient_bimodal = true;
      const double move = sup_distance(pi, next);
      pi = next;
      if (move < 1e-12) {
        converged = true;
        break;
      }
    }
    final_bimodal = is_bimodal(pi.weights(), crit);
    variance = pi.variance_site();
  };

  bool w2_transient = false, w2_final = false, w2_conv = false;
  double w2_var = 0.0;
  run(FitnessKind::W2, w2_transient, w2_final, w2_var, w2_conv);
  bool w1_transient = false, w1_final = false, w1_conv = false;
  double w1_var = 0.0;
  run(FitnessKind::W1, w1_transient, w1_final, w1_var, w1_conv);

  std::ostringstream d;
  d << "W2: converged=" << w2_conv << " variance=" << w2_var
    << " transient_bimodal=" << w2_transient << "; W1: converged=" << w1_conv
    << " transient_bimodal=" << w1_transient << " final_bimodal=" << w1_final;
  detail = d.str();
  return w2_conv && !w2_transient && !w2_final && std::abs(w2_var - 575.0) <= 57.5 &&
         w1_conv && w1_transient && !w1_final;
}

bool criterion14(std::string& detail) {
  const fs::path base = fs::temp_directory_path() / "specsim-acceptance-c14";
  fs::remove_all(base);
  auto cfg = ExperimentConfig::from_json_text(recipe_config_text("fig4"));
  cfg.output_dir = (base / "a").string();
  run_experiment(cfg, false);
  cfg.output_dir = (base / "b").string();
  run_experiment(cfg, false);

  int compared = 0;
  for (const auto& entry : fs::directory_iterator(base / "a")) {
    if (entry.path().extension() != ".csv") continue;
    ++compared;
    if (slurp(entry.path()) != slurp(base / "b" / entry.path().filename())) {
      detail = entry.path().filename().string() + " differs between identical runs";
      return false;
    }
  }
  fs::remove_all(base);
  detail = std::to_string(compared) + " CSV artifacts byte-identical across reruns";
  return compared >= 3;
}

}  // namespace

int main(int argc, char** argv) {
  bool slow = false;
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--slow") == 0) {
      slow = true;
    } else if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
      slow = true;
    } else {
      std::cerr << "usage: specsim_acceptance [--slow] [--only N]\n";
      return 2;
    }
  }

  struct Entry {
    int id;
    const char* label;
    std::function<bool(std::string&)> fn;
    bool slow_only = false;
  };
  const std::vector<Entry> entries = {
      {1, "potential never decreases along the flow", criterion01},
      {2, "constancy and subset identities at converged points", criterion02},
      {3, "mass order matches fitness order at stationary points", criterion03},
      {4, "flow equals the metric gradient of the half potential", criterion04},
      {5, "closed-form two/three-point candidates vs linear-solve oracle", criterion05},
      {6, "center-corner local-max predicate", criterion06},
      {7, "stationary law and landscape concentrate on the center corner", criterion07},
      {8, "neutral stationary law matches the Dirichlet closed form", criterion08},
      {9, "closed-form bounds hold at validated maxima across a sweep", criterion09},
      {10, "loss of the center-corner maximum is bracketed", criterion10},
      {11, "speciation-time ordering across mutation rates", criterion11, true},
      {12, "particle system tracks the deterministic limit", criterion12},
      {13, "conditioned-model shapes: transient branching only under W1", criterion13},
      {14, "identical seeds reproduce byte-identical artifacts", criterion14},
  };

  int failures = 0;
  for (const auto& e : entries) {
    if (only != 0 && e.id != only) continue;
    if (e.slow_only && !slow) {
      std::printf("criterion %02d: SKIP — %s (enable with --slow)\n", e.id, e.label);
      continue;
    }
    std::string detail;
    const auto start = std::chrono::steady_clock::now();
    bool pass = false;
    try {
      pass = e.fn(detail);
    } catch (const std::exception& ex) {
      detail = std::string("exception: ") + ex.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("criterion %02d: %s — %s (%s) [%.1fs]\n", e.id, pass ? "PASS" : "FAIL",
                e.label, detail.c_str(), secs);
    std::fflush(stdout);
    if (!pass) ++failures;
  }
  return failures == 0 ? 0 : 1;
}
