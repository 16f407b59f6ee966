#include "specsim/dd.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace specsim {

void DDParams::validate() const {
  if (!(sigma_k > 0.0 && sigma_c > 0.0))
    throw std::invalid_argument("DDParams: sigma_k and sigma_c must be positive");
  if (!(capacity_scale > 0.0 && birth_rate > 0.0 && death_scale > 0.0))
    throw std::invalid_argument("DDParams: rates and scales must be positive");
  if (!(mutation_prob >= 0.0 && mutation_prob <= 1.0))
    throw std::invalid_argument("DDParams: mutation_prob must lie in [0,1]");
  if (!(mutation_std > 0.0))
    throw std::invalid_argument("DDParams: mutation_std must be positive");
  if (!space.contains(x_hat)) throw std::invalid_argument("DDParams: x_hat outside E");
}

KernelSet DDParams::kernels() const {
  KernelSpec spec;
  spec.half_width = space.half_width;
  spec.capacity_kind = "gaussian";
  spec.sigma_k = sigma_k;
  spec.capacity_scale = capacity_scale;
  spec.capacity_peak = x_hat;
  spec.cooperation_kind = "constant";  // unused by this model
  spec.cooperation_value = 1.0;
  spec.competition_kind = "gaussian";
  spec.sigma_c = sigma_c;
  return build_kernels(spec);
}

PopulationCounts PopulationCounts::delta(const PhenotypeSpace& space, int site, long long n) {
  if (!space.contains(site)) throw std::invalid_argument("PopulationCounts: site outside E");
  if (n < 0) throw std::invalid_argument("PopulationCounts: negative count");
  PopulationCounts out;
  out.counts.assign(static_cast<std::size_t>(space.size()), 0);
  out.counts[static_cast<std::size_t>(space.index(site))] = n;
  return out;
}

long long PopulationCounts::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0LL);
}

std::vector<double> PopulationCounts::frequencies() const {
  const long long n = total();
  std::vector<double> f(counts.size(), 0.0);
  if (n == 0) return f;
  for (std::size_t i = 0; i < counts.size(); ++i)
    f[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
  return f;
}

DDRates dd_event_rates(const PopulationCounts& state, const DDParams& params,
                       const KernelSet& kernels) {
  const int L = params.space.half_width;
  const int n = params.space.size();
  if (static_cast<int>(state.counts.size()) != n)
    throw std::invalid_argument("dd_event_rates: state dimension mismatch");
  DDRates out;
  out.birth.assign(static_cast<std::size_t>(n), 0.0);
  out.death.assign(static_cast<std::size_t>(n), 0.0);
  for (int x = -L; x <= L; ++x) {
    const auto ix = static_cast<std::size_t>(x + L);
    const double nx = static_cast<double>(state.counts[ix]);
    if (nx == 0.0) continue;
    double conv = 0.0;
    for (int z = -L; z <= L; ++z)
      conv += kernels.C(x - z) * static_cast<double>(state.counts[static_cast<std::size_t>(z + L)]);
    out.birth[ix] = params.birth_rate * nx;
    out.death[ix] = params.death_scale * nx * conv / kernels.K(x);
    out.total += out.birth[ix] + out.death[ix];
  }
  return out;
}

DDSimulator::DDSimulator(const DDParams& params, PopulationCounts initial, std::uint64_t seed,
                         std::uint64_t replica)
    : params_(params),
      kernels_(params.kernels()),
      state_(std::move(initial)),
      clock_rng_(derive_seed(seed, replica, "dd-event-clock")),
      choice_rng_(derive_seed(seed, replica, "dd-event-choice")),
      mutation_rng_(derive_seed(seed, replica, "dd-mutation-displacement")) {
  params_.validate();
  const int n = params_.space.size();
  if (static_cast<int>(state_.counts.size()) != n)
    throw std::invalid_argument("DDSimulator: initial state dimension mismatch");
  total_ = state_.total();
  conv_.assign(static_cast<std::size_t>(n), 0.0);
  const int L = params_.space.half_width;
  for (int x = -L; x <= L; ++x) {
    double acc = 0.0;
    for (int z = -L; z <= L; ++z)
      acc += kernels_.C(x - z) * static_cast<double>(state_.counts[static_cast<std::size_t>(z + L)]);
    conv_[static_cast<std::size_t>(x + L)] = acc;
  }
}

void DDSimulator::apply_delta(int site, long long delta) {
  const int L = params_.space.half_width;
  const auto idx = static_cast<std::size_t>(site + L);
  state_.counts[idx] += delta;
  total_ += delta;
  for (int x = -L; x <= L; ++x)
    conv_[static_cast<std::size_t>(x + L)] += static_cast<double>(delta) * kernels_.C(x - site);
}

int DDSimulator::sample_offspring_site(int parent) {
  if (params_.mutation_prob == 0.0 || mutation_rng_.uniform() >= params_.mutation_prob)
    return parent;
  const int L = params_.space.half_width;
  // Gaussian displacement rounded to the lattice; off-lattice proposals are
  // re-drawn up to 8 times, then clamped to the boundary.
  for (int attempt = 0; attempt < 8; ++attempt) {
    const long displaced =
        parent + std::lround(mutation_rng_.normal(0.0, params_.mutation_std));
    if (displaced >= -L && displaced <= L) return static_cast<int>(displaced);
  }
  const long displaced = parent + std::lround(mutation_rng_.normal(0.0, params_.mutation_std));
  return static_cast<int>(std::clamp(displaced, static_cast<long>(-L), static_cast<long>(L)));
}

StepOutcome DDSimulator::step(double t_max) {
  if (total_ == 0) return StepOutcome::extinct;
  const int n = params_.space.size();

  double total_rate = 0.0;
  std::vector<double> weights(static_cast<std::size_t>(2 * n), 0.0);
  for (int i = 0; i < n; ++i) {
    const double nx = static_cast<double>(state_.counts[static_cast<std::size_t>(i)]);
    if (nx == 0.0) continue;
    const double birth = params_.birth_rate * nx;
    const double death =
        params_.death_scale * nx * conv_[static_cast<std::size_t>(i)] /
        kernels_.capacity[static_cast<std::size_t>(i)];
    weights[static_cast<std::size_t>(2 * i)] = birth;
    weights[static_cast<std::size_t>(2 * i + 1)] = death;
    total_rate += birth + death;
  }

  const double next_time = time_ + clock_rng_.exponential(total_rate);
  if (next_time > t_max) {
    time_ = t_max;
    return StepOutcome::reached_horizon;
  }
  time_ = next_time;
  const std::size_t pick = choice_rng_.categorical(weights.data(), weights.size(), total_rate);
  const int site = params_.space.site(static_cast<int>(pick / 2));
  if (pick % 2 == 0) {
    apply_delta(sample_offspring_site(site), +1);
  } else {
    apply_delta(site, -1);
  }
  ++events_;
  return StepOutcome::applied;
}

RunRecord run_dd(const DDParams& params, const PopulationCounts& initial, double horizon,
                 const std::vector<double>& snapshot_times, std::uint64_t seed,
                 std::uint64_t replica) {
  if (horizon < 0.0) throw std::invalid_argument("run_dd: horizon must be >= 0");
  const auto wall_start = std::chrono::steady_clock::now();
  DDSimulator sim(params, initial, seed, replica);

  RunRecord record;
  record.seed = seed;

  std::vector<double> schedule = snapshot_times;
  std::sort(schedule.begin(), schedule.end());
  std::size_t next_snap = 0;

  record.snapshots.push_back({0.0, sim.state().frequencies()});
  record.snapshot_totals.push_back(static_cast<double>(sim.state().total()));
  for (;;) {
    const auto freq_now = sim.state().frequencies();
    const auto total_now = static_cast<double>(sim.state().total());
    const StepOutcome outcome = sim.step(horizon);
    // the state is piecewise constant: every scheduled time the step jumped
    // over sees the pre-event frequencies
    while (next_snap < schedule.size() && schedule[next_snap] <= sim.time() &&
           schedule[next_snap] > 0.0) {
      record.snapshots.push_back({schedule[next_snap], freq_now});
      record.snapshot_totals.push_back(total_now);
      ++next_snap;
    }
    if (outcome == StepOutcome::extinct) {
      record.extinction_time = sim.time();
      const std::vector<double> empty(freq_now.size(), 0.0);
      while (next_snap < schedule.size() && schedule[next_snap] <= horizon) {
        record.snapshots.push_back({schedule[next_snap], empty});
        record.snapshot_totals.push_back(0.0);
        ++next_snap;
      }
      break;
    }
    if (outcome == StepOutcome::reached_horizon) {
      if (horizon > 0.0 && record.snapshots.back().time != horizon) {
        record.snapshots.push_back({horizon, freq_now});
        record.snapshot_totals.push_back(total_now);
      }
      break;
    }
  }

  record.event_count = sim.event_count();
  record.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - wall_start).count();
  return record;
}

}  // namespace specsim
