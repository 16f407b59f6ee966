#include "specsim/moran.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace specsim {

void MoranParams::validate() const {
  kernels.validate();
  model.validate();
  if (kernels.space != space)
    throw std::invalid_argument("MoranParams: kernels built for a different space");
  if (!space.contains(initial_site))
    throw std::invalid_argument("MoranParams: initial_site outside E");
  // sigma <= 1/2 with K, B <= 1 keeps 1/2 + sigma (m_y - m_x) >= 0
  for (double k : kernels.capacity)
    if (k > 1.0) throw std::invalid_argument("MoranParams: needs K <= 1 for rate nonnegativity");
}

std::vector<PairRate> moran_rates(const PopulationCounts& state, const MoranParams& params) {
  const int n = params.space.size();
  if (static_cast<int>(state.counts.size()) != n)
    throw std::invalid_argument("moran_rates: state dimension mismatch");
  const long long total = state.total();
  if (total != params.model.population)
    throw std::invalid_argument("moran_rates: state total differs from N");

  const Simplex pi(params.space, state.frequencies());
  const auto m = fitness(pi, params.kernels);
  const double half_n = 0.5 * static_cast<double>(params.model.population);
  const double sigma = params.model.sigma;
  const double mu = params.model.mu;

  std::vector<PairRate> rates;
  rates.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1));
  for (int xi = 0; xi < n; ++xi) {
    for (int yi = 0; yi < n; ++yi) {
      if (xi == yi) continue;
      PairRate r;
      r.from = params.space.site(xi);
      r.to = params.space.site(yi);
      r.selection = half_n * pi[static_cast<std::size_t>(xi)] *
                    (0.5 + sigma * (m[static_cast<std::size_t>(yi)] -
                                    m[static_cast<std::size_t>(xi)])) *
                    pi[static_cast<std::size_t>(yi)];
      r.mutation = half_n * mu * pi[static_cast<std::size_t>(xi)];
      if (r.selection < 0.0)
        throw std::invalid_argument("moran_rates: negative selection rate for pair (" +
                                    std::to_string(r.from) + "," + std::to_string(r.to) +
                                    "); sigma misconfigured");
      rates.push_back(r);
    }
  }
  return rates;
}

MoranSimulator::MoranSimulator(const MoranParams& params, std::uint64_t seed,
                               std::uint64_t replica)
    : MoranSimulator(params,
                     PopulationCounts::delta(params.space, params.initial_site,
                                             params.model.population),
                     seed, replica) {}

MoranSimulator::MoranSimulator(const MoranParams& params, PopulationCounts initial,
                               std::uint64_t seed, std::uint64_t replica)
    : params_(params),
      state_(std::move(initial)),
      n_(params.model.population),
      clock_rng_(derive_seed(seed, replica, "moran-event-clock")),
      choice_rng_(derive_seed(seed, replica, "moran-event-choice")) {
  params_.validate();
  if (static_cast<int>(state_.counts.size()) != params_.space.size())
    throw std::invalid_argument("MoranSimulator: initial state dimension mismatch");
  if (state_.total() != n_)
    throw std::invalid_argument("MoranSimulator: initial state total differs from N");
  recompute_fitness();
  scratch_.assign(static_cast<std::size_t>(2 * params_.space.size()), 0.0);
}

void MoranSimulator::recompute_fitness() {
  m_ = fitness(Simplex(params_.space, state_.frequencies()), params_.kernels);
}

void MoranSimulator::move_particle(int from_idx, int to_idx) {
  state_.counts[static_cast<std::size_t>(from_idx)] -= 1;
  state_.counts[static_cast<std::size_t>(to_idx)] += 1;
  const int L = params_.space.half_width;
  const double inv_n = 1.0 / static_cast<double>(n_);
  const double k_from = params_.kernels.capacity[static_cast<std::size_t>(from_idx)];
  const double k_to = params_.kernels.capacity[static_cast<std::size_t>(to_idx)];
  const int from_site = params_.space.site(from_idx);
  const int to_site = params_.space.site(to_idx);
  for (int w = -L; w <= L; ++w) {
    const auto wi = static_cast<std::size_t>(w + L);
    m_[wi] += params_.kernels.capacity[wi] * inv_n *
              (params_.kernels.B(w - to_site) * k_to - params_.kernels.B(w - from_site) * k_from);
  }
  // shed accumulated floating-point drift once in a while
  if ((events_ & 0xFFFFULL) == 0) recompute_fitness();
}

StepOutcome MoranSimulator::step(double t_max) {
  const int n = params_.space.size();
  const double half_n = 0.5 * static_cast<double>(n_);
  const double sigma = params_.model.sigma;
  const double inv_n = 1.0 / static_cast<double>(n_);

  double mbar = 0.0;
  for (int i = 0; i < n; ++i)
    mbar += static_cast<double>(state_.counts[static_cast<std::size_t>(i)]) * inv_n *
            m_[static_cast<std::size_t>(i)];

  // per-source aggregated weights: scratch[2i] selection, scratch[2i+1] mutation
  double total = 0.0;
  const double mut_factor = half_n * params_.model.mu * static_cast<double>(n - 1);
  for (int i = 0; i < n; ++i) {
    const double pi_i =
        static_cast<double>(state_.counts[static_cast<std::size_t>(i)]) * inv_n;
    double sel = 0.0;
    if (pi_i > 0.0) {
      const double mi = m_[static_cast<std::size_t>(i)];
      sel = half_n * pi_i *
            (0.5 * (1.0 - pi_i) + sigma * ((mbar - pi_i * mi) - mi * (1.0 - pi_i)));
      if (sel < 0.0) sel = 0.0;  // FP guard; the exact value is >= 0
    }
    scratch_[static_cast<std::size_t>(2 * i)] = sel;
    scratch_[static_cast<std::size_t>(2 * i + 1)] = mut_factor * pi_i;
    total += sel + scratch_[static_cast<std::size_t>(2 * i + 1)];
  }

  if (total <= 0.0) {  // monomorphic with mu = 0: nothing can ever happen
    time_ = t_max;
    return StepOutcome::reached_horizon;
  }

  const double next_time = time_ + clock_rng_.exponential(total);
  if (next_time > t_max) {
    time_ = t_max;
    return StepOutcome::reached_horizon;
  }
  time_ = next_time;

  const std::size_t pick = choice_rng_.categorical(scratch_.data(), scratch_.size(), total);
  const int src = static_cast<int>(pick / 2);
  int dst = src;
  if (pick % 2 == 0) {
    // selection: target y != src with weight pi_y (1/2 + sigma (m_y - m_src))
    const double m_src = m_[static_cast<std::size_t>(src)];
    double target_total = 0.0;
    std::vector<double> w(static_cast<std::size_t>(n), 0.0);
    for (int y = 0; y < n; ++y) {
      if (y == src) continue;
      const double pi_y =
          static_cast<double>(state_.counts[static_cast<std::size_t>(y)]) * inv_n;
      double v = pi_y * (0.5 + sigma * (m_[static_cast<std::size_t>(y)] - m_src));
      if (v < 0.0) v = 0.0;
      w[static_cast<std::size_t>(y)] = v;
      target_total += v;
    }
    dst = static_cast<int>(choice_rng_.categorical(w.data(), w.size(), target_total));
  } else {
    // mutation: uniform over the other 2L sites
    const auto k = static_cast<int>(choice_rng_.next_u64() % static_cast<std::uint64_t>(n - 1));
    dst = k < src ? k : k + 1;
  }
  ++events_;
  move_particle(src, dst);
  return StepOutcome::applied;
}

RunRecord run_moran(const MoranParams& params, double horizon,
                    const std::vector<double>& snapshot_times, std::uint64_t seed,
                    std::uint64_t replica) {
  if (!(horizon >= 0.0)) throw std::invalid_argument("run_moran: horizon must be >= 0");
  const auto wall_start = std::chrono::steady_clock::now();
  MoranSimulator sim(params, seed, replica);

  RunRecord record;
  record.seed = seed;

  std::vector<double> schedule = snapshot_times;
  std::sort(schedule.begin(), schedule.end());
  std::size_t next_snap = 0;

  record.snapshots.push_back({0.0, sim.frequencies()});
  for (;;) {
    const auto freq_now = sim.frequencies();
    const StepOutcome outcome = sim.step(horizon);
    while (next_snap < schedule.size() && schedule[next_snap] <= sim.time() &&
           schedule[next_snap] > 0.0) {
      record.snapshots.push_back({schedule[next_snap], freq_now});
      ++next_snap;
    }
    if (outcome == StepOutcome::reached_horizon) {
      if (horizon > 0.0 && record.snapshots.back().time != horizon)
        record.snapshots.push_back({horizon, freq_now});
      break;
    }
  }

  record.event_count = sim.event_count();
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return record;
}

// ---- ODE limits -------------------------------------------------------------

namespace {

// rhs written with the boundary-safe algebraic form of the mutation term;
// used internally so the integrator's clip floor cannot divide by zero.
void rhs_into(const std::vector<double>& pi, const KernelSet& kernels, double sigma_or_one,
              double mutation_coeff, std::vector<double>& out) {
  const int L = kernels.space.half_width;
  const int n = kernels.space.size();
  std::vector<double> kp(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    kp[static_cast<std::size_t>(i)] =
        kernels.capacity[static_cast<std::size_t>(i)] * pi[static_cast<std::size_t>(i)];
  std::vector<double> m(static_cast<std::size_t>(n));
  double mbar = 0.0;
  for (int x = -L; x <= L; ++x) {
    double acc = 0.0;
    for (int z = -L; z <= L; ++z) acc += kernels.B(x - z) * kp[static_cast<std::size_t>(z + L)];
    m[static_cast<std::size_t>(x + L)] = kernels.K(x) * acc;
    mbar += pi[static_cast<std::size_t>(x + L)] * m[static_cast<std::size_t>(x + L)];
  }
  out.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] =
        sigma_or_one * pi[static_cast<std::size_t>(i)] * (m[static_cast<std::size_t>(i)] - mbar) +
        mutation_coeff * (1.0 - static_cast<double>(n) * pi[static_cast<std::size_t>(i)]);
  }
}

struct RhsCoeffs {
  double selection;
  double mutation;
};

RhsCoeffs rhs_coeffs(OdeVariant variant, const ModelParams& params) {
  switch (variant) {
    case OdeVariant::eq6:
      return {params.sigma, 0.0};
    case OdeVariant::eq7:
      return {params.sigma, 0.5 * params.mu};
    case OdeVariant::eq9:
      return {1.0, 0.5 * params.mu_tilde()};
  }
  return {0.0, 0.0};
}

}  // namespace

std::vector<double> ode_rhs(const Simplex& pi, const KernelSet& kernels,
                            const ModelParams& params, OdeVariant variant) {
  if (variant == OdeVariant::eq9) {
    params.require_positive_mu_tilde();
    if (!pi.strictly_interior())
      throw std::domain_error("ode_rhs: eq9 requires a strictly interior point");
  }
  const auto c = rhs_coeffs(variant, params);
  std::vector<double> out;
  rhs_into(pi.weights(), kernels, c.selection, c.mutation, out);
  return out;
}

namespace {

// Dormand-Prince 5(4) tableau
constexpr double A21 = 1.0 / 5.0;
constexpr double A31 = 3.0 / 40.0, A32 = 9.0 / 40.0;
constexpr double A41 = 44.0 / 45.0, A42 = -56.0 / 15.0, A43 = 32.0 / 9.0;
constexpr double A51 = 19372.0 / 6561.0, A52 = -25360.0 / 2187.0, A53 = 64448.0 / 6561.0,
                 A54 = -212.0 / 729.0;
constexpr double A61 = 9017.0 / 3168.0, A62 = -355.0 / 33.0, A63 = 46732.0 / 5247.0,
                 A64 = 49.0 / 176.0, A65 = -5103.0 / 18656.0;
constexpr double B1 = 35.0 / 384.0, B3 = 500.0 / 1113.0, B4 = 125.0 / 192.0,
                 B5 = -2187.0 / 6784.0, B6 = 11.0 / 84.0;
constexpr double E1 = 35.0 / 384.0 - 5179.0 / 57600.0, E3 = 500.0 / 1113.0 - 7571.0 / 16695.0,
                 E4 = 125.0 / 192.0 - 393.0 / 640.0, E5 = -2187.0 / 6784.0 + 92097.0 / 339200.0,
                 E6 = 11.0 / 84.0 - 187.0 / 2100.0, E7 = -1.0 / 40.0;

void axpy(std::vector<double>& y, const std::vector<double>& base, double h,
          std::initializer_list<std::pair<double, const std::vector<double>*>> terms) {
  y = base;
  for (auto& [c, k] : terms)
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += h * c * (*k)[i];
}

void repair_simplex(std::vector<double>& w, double floor) {
  double sum = 0.0;
  for (auto& v : w) {
    if (v < floor) v = floor;
    sum += v;
  }
  for (auto& v : w) v /= sum;
}

}  // namespace

OdeResult integrate_ode(OdeVariant variant, const Simplex& pi0, const KernelSet& kernels,
                        const ModelParams& params, const OdeOptions& opt) {
  if (variant == OdeVariant::eq9) {
    params.require_positive_mu_tilde();
    if (!pi0.strictly_interior())
      throw std::domain_error("integrate_ode: eq9 requires a strictly interior start");
  }
  const auto coeffs = rhs_coeffs(variant, params);
  const bool track_v = variant == OdeVariant::eq9;
  const double mu_tilde = params.mu_tilde();

  OdeResult result{pi0};
  result.trajectory.push_back({0.0, pi0.weights()});

  std::vector<double> y = pi0.weights();
  std::vector<double> k1, k2, k3, k4, k5, k6, k7, tmp, ynew;
  double t = 0.0;
  double h = opt.initial_step;
  double v_prev = track_v ? potential(Simplex(kernels.space, y), kernels, mu_tilde) : 0.0;
  double next_snapshot = opt.snapshot_interval;

  rhs_into(y, kernels, coeffs.selection, coeffs.mutation, k1);

  while (t < opt.horizon) {
    h = std::min(h, opt.horizon - t);
    axpy(tmp, y, h, {{A21, &k1}});
    rhs_into(tmp, kernels, coeffs.selection, coeffs.mutation, k2);
    axpy(tmp, y, h, {{A31, &k1}, {A32, &k2}});
    rhs_into(tmp, kernels, coeffs.selection, coeffs.mutation, k3);
    axpy(tmp, y, h, {{A41, &k1}, {A42, &k2}, {A43, &k3}});
    rhs_into(tmp, kernels, coeffs.selection, coeffs.mutation, k4);
    axpy(tmp, y, h, {{A51, &k1}, {A52, &k2}, {A53, &k3}, {A54, &k4}});
    rhs_into(tmp, kernels, coeffs.selection, coeffs.mutation, k5);
    axpy(tmp, y, h, {{A61, &k1}, {A62, &k2}, {A63, &k3}, {A64, &k4}, {A65, &k5}});
    rhs_into(tmp, kernels, coeffs.selection, coeffs.mutation, k6);
    axpy(ynew, y, h, {{B1, &k1}, {B3, &k3}, {B4, &k4}, {B5, &k5}, {B6, &k6}});
    rhs_into(ynew, kernels, coeffs.selection, coeffs.mutation, k7);

    double err = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] +
                            E7 * k7[i]);
      const double scale = opt.abs_tol + opt.rel_tol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      err = std::max(err, std::abs(e) / scale);
    }

    if (err <= 1.0) {
      t += h;
      y = std::move(ynew);
      ynew.clear();
      repair_simplex(y, variant == OdeVariant::eq9 ? opt.clip_floor : 0.0);
      rhs_into(y, kernels, coeffs.selection, coeffs.mutation, k1);
      ++result.steps;

      if (track_v) {
        const double v_now = potential(Simplex(kernels.space, y), kernels, mu_tilde);
        result.max_potential_drop = std::max(result.max_potential_drop, v_prev - v_now);
        v_prev = v_now;
      }
      if (opt.snapshot_interval > 0.0 && t >= next_snapshot) {
        result.trajectory.push_back({t, y});
        while (next_snapshot <= t) next_snapshot += opt.snapshot_interval;
      }
      if (opt.stop_velocity > 0.0) {
        double vmax = 0.0;
        for (double v : k1) vmax = std::max(vmax, std::abs(v));
        if (vmax < opt.stop_velocity) {
          result.hit_stop_velocity = true;
          break;
        }
      }
    }

    const double factor =
        err > 0.0 ? std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0) : 5.0;
    h *= factor;
    if (h < opt.min_step) {
      result.error = "step-size underflow";
      result.terminal = Simplex(kernels.space, y);
      result.time = t;
      result.trajectory.push_back({t, y});
      return result;
    }
  }

  result.terminal = Simplex(kernels.space, y);
  result.time = t;
  result.ok = true;
  result.trajectory.push_back({t, y});
  return result;
}

// ---- stationary law --------------------------------------------------------

double StationaryDensity::log_unnormalized(const Simplex& pi) const {
  double log_sum = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (pi[i] <= 0.0) return kNegativeInfinity;
    log_sum += std::log(pi[i]);
  }
  const double half_n = 0.5 * static_cast<double>(params.population);
  const double mbar = mean_fitness(pi, fitness(pi, kernels));
  return (half_n * params.mu - 1.0) * log_sum + half_n * mbar;
}

double StationaryDensity::log_unnormalized_potential_form(const Simplex& pi) const {
  const double v = potential(pi, kernels, params.mu_tilde());
  if (v == kNegativeInfinity) return kNegativeInfinity;
  return 0.5 * static_cast<double>(params.population) * v;
}

double log_stationary_density(const Simplex& pi, const StationaryDensity& density) {
  return density.log_unnormalized(pi);
}

namespace {

double lgamma_safe(double x) { return std::lgamma(x); }

double log_dirichlet_pdf(const std::vector<double>& x, const std::vector<double>& alpha) {
  double a0 = 0.0, lb = 0.0, lx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] <= 0.0 || alpha[i] <= 0.0) return kNegativeInfinity;
    a0 += alpha[i];
    lb += lgamma_safe(alpha[i]);
    lx += (alpha[i] - 1.0) * std::log(x[i]);
  }
  return lgamma_safe(a0) - lb + lx;
}

double split_rhat(const std::vector<std::vector<double>>& segments) {
  // segments: equally long scalar series
  const std::size_t m = segments.size();
  const std::size_t n = segments.empty() ? 0 : segments[0].size();
  if (m < 2 || n < 2) return 1.0;
  std::vector<double> means(m), vars(m);
  double grand = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double s = 0.0;
    for (double v : segments[j]) s += v;
    means[j] = s / static_cast<double>(n);
    grand += means[j];
    double q = 0.0;
    for (double v : segments[j]) q += (v - means[j]) * (v - means[j]);
    vars[j] = q / static_cast<double>(n - 1);
  }
  grand /= static_cast<double>(m);
  double b = 0.0, w = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    b += (means[j] - grand) * (means[j] - grand);
    w += vars[j];
  }
  b *= static_cast<double>(n) / static_cast<double>(m - 1);
  w /= static_cast<double>(m);
  if (w <= 0.0) return 1.0;
  const double v_hat =
      (static_cast<double>(n - 1) / static_cast<double>(n)) * w + b / static_cast<double>(n);
  return std::sqrt(v_hat / w);
}

}  // namespace

McmcResult mcmc_sample_stationary(const StationaryDensity& density, const McmcOptions& opt) {
  if (!(0.5 * static_cast<double>(density.params.population) * density.params.mu > 0.0))
    throw std::invalid_argument("mcmc_sample_stationary: (N/2) mu must be positive");
  if (opt.n_chains < 1 || opt.n_samples < opt.n_chains)
    throw std::invalid_argument("mcmc_sample_stationary: bad chain/sample counts");
  const auto space = density.kernels.space;
  const auto n = static_cast<std::size_t>(space.size());
  const int per_chain = opt.n_samples / opt.n_chains;

  McmcResult result;
  result.samples.reserve(static_cast<std::size_t>(per_chain) * opt.n_chains);
  std::uint64_t accepted = 0, proposed = 0;
  std::vector<std::vector<std::vector<double>>> chain_series(
      static_cast<std::size_t>(opt.n_chains));

  for (int chain = 0; chain < opt.n_chains; ++chain) {
    Rng rng(derive_seed(opt.seed, static_cast<std::uint64_t>(chain), "mcmc-chain"));
    // dispersed over-initialization: a flat Dirichlet draw
    std::vector<double> current = rng.dirichlet(std::vector<double>(n, 1.0));
    repair_simplex(current, 1e-12);
    double log_cur = density.log_unnormalized(Simplex(space, current));

    chain_series[static_cast<std::size_t>(chain)].assign(n, {});
    for (int it = 0; it < opt.burn_in + per_chain; ++it) {
      std::vector<double> alpha(n);
      for (std::size_t i = 0; i < n; ++i) alpha[i] = opt.proposal_scale * current[i];
      std::vector<double> proposal = rng.dirichlet(alpha);
      ++proposed;

      bool usable = true;
      for (double v : proposal)
        if (!(v > 0.0)) usable = false;
      if (usable) {
        const double log_prop = density.log_unnormalized(Simplex(space, proposal));
        std::vector<double> alpha_rev(n);
        for (std::size_t i = 0; i < n; ++i) alpha_rev[i] = opt.proposal_scale * proposal[i];
        const double log_q_fwd = log_dirichlet_pdf(proposal, alpha);
        const double log_q_rev = log_dirichlet_pdf(current, alpha_rev);
        const double log_ratio = log_prop - log_cur + log_q_rev - log_q_fwd;
        if (std::isfinite(log_ratio) && std::log(rng.uniform_open()) < log_ratio) {
          current = std::move(proposal);
          log_cur = log_prop;
          ++accepted;
        }
      }
      if (it >= opt.burn_in) {
        result.samples.push_back(current);
        result.log_density.push_back(log_cur);
        for (std::size_t i = 0; i < n; ++i)
          chain_series[static_cast<std::size_t>(chain)][i].push_back(current[i]);
      }
    }
  }

  result.acceptance_rate = proposed ? static_cast<double>(accepted) / proposed : 0.0;
  result.tuning_warning = result.acceptance_rate < 0.01;

  // split each chain in half per coordinate and take the worst R-hat
  double worst = 1.0;
  for (std::size_t coord = 0; coord < n; ++coord) {
    std::vector<std::vector<double>> segments;
    for (auto& chain : chain_series) {
      const auto& series = chain[coord];
      const std::size_t half = series.size() / 2;
      if (half < 2) continue;
      segments.emplace_back(series.begin(), series.begin() + static_cast<std::ptrdiff_t>(half));
      segments.emplace_back(series.begin() + static_cast<std::ptrdiff_t>(half),
                            series.begin() + static_cast<std::ptrdiff_t>(2 * half));
    }
    worst = std::max(worst, split_rhat(segments));
  }
  result.max_split_rhat = worst;
  return result;
}

// ---- speciation detection ----------------------------------------------------

namespace {

std::vector<double> moving_average(const std::vector<double>& f, int window) {
  if (window <= 1) return f;
  const int half = window / 2;
  const int n = static_cast<int>(f.size());
  std::vector<double> out(f.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    int cnt = 0;
    for (int j = std::max(0, i - half); j <= std::min(n - 1, i + half); ++j) {
      acc += f[static_cast<std::size_t>(j)];
      ++cnt;
    }
    out[static_cast<std::size_t>(i)] = acc / cnt;
  }
  return out;
}

}  // namespace

bool is_bimodal(const std::vector<double>& frequency, const SpeciationCriterion& crit) {
  const auto s = moving_average(frequency, crit.smooth_window);
  const int n = static_cast<int>(s.size());

  std::vector<int> peaks;
  for (int i = 0; i < n; ++i) {
    const double left = i > 0 ? s[static_cast<std::size_t>(i - 1)] : -1.0;
    const double right = i + 1 < n ? s[static_cast<std::size_t>(i + 1)] : -1.0;
    if (s[static_cast<std::size_t>(i)] > left && s[static_cast<std::size_t>(i)] > right)
      peaks.push_back(i);
  }

  // mass near each peak, from the raw frequencies
  auto peak_mass = [&](int i) {
    double acc = 0.0;
    for (int j = std::max(0, i - crit.mode_mass_radius);
         j <= std::min(n - 1, i + crit.mode_mass_radius); ++j)
      acc += frequency[static_cast<std::size_t>(j)];
    return acc;
  };

  std::vector<int> modes;
  for (int p : peaks)
    if (peak_mass(p) >= crit.min_mode_mass) modes.push_back(p);

  for (std::size_t a = 0; a < modes.size(); ++a) {
    for (std::size_t b = a + 1; b < modes.size(); ++b) {
      const int i = modes[a], j = modes[b];
      if (j - i < crit.min_mode_separation) continue;
      double valley = std::numeric_limits<double>::infinity();
      for (int k = i + 1; k < j; ++k)
        valley = std::min(valley, s[static_cast<std::size_t>(k)]);
      const double smaller = std::min(s[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(j)]);
      if (valley <= crit.valley_ratio * smaller) return true;
    }
  }
  return false;
}

std::optional<double> speciation_time(const std::vector<Snapshot>& trajectory,
                                      const SpeciationCriterion& crit) {
  for (const auto& snap : trajectory)
    if (is_bimodal(snap.frequency, crit)) return snap.time;
  return std::nullopt;
}

}  // namespace specsim
