#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "specsim/moran.hpp"

using namespace specsim;

namespace {

MoranParams make_params(const KernelSet& kernels, double sigma, double mu, long long N,
                        int site = 0) {
  MoranParams p;
  p.space = kernels.space;
  p.kernels = kernels;
  p.model.sigma = sigma;
  p.model.mu = mu;
  p.model.population = N;
  p.initial_site = site;
  return p;
}

KernelSet flat_kernels(int L) {
  KernelSpec spec;
  spec.half_width = L;
  spec.capacity_kind = "constant";
  spec.cooperation_kind = "constant";
  spec.competition_kind = "constant";
  return build_kernels(spec);
}

}  // namespace

TEST_SUITE("moran") {
  TEST_CASE("rate table at a monomorphic state") {
    const auto k = flat_kernels(1);
    const auto p = make_params(k, 0.5, 0.01, 10);
    const auto state = PopulationCounts::delta(p.space, 0, 10);
    const auto rates = moran_rates(state, p);
    for (const auto& r : rates) {
      if (r.from == 0) {
        CHECK(r.selection == 0.0);  // pi_y = 0 for every y != 0
        CHECK(r.mutation == doctest::Approx(5.0 * 0.01).epsilon(1e-14));
      } else {
        CHECK(r.selection == 0.0);
        CHECK(r.mutation == 0.0);
      }
    }
  }

  TEST_CASE("neutral rates are symmetric in the pair") {
    const auto k = flat_kernels(2);  // m is constant
    const auto p = make_params(k, 0.5, 0.0, 20);
    PopulationCounts state;
    state.counts = {2, 3, 5, 4, 6};
    const auto rates = moran_rates(state, p);
    const auto freq = state.frequencies();
    for (const auto& r : rates) {
      const double expected = (20.0 / 4.0) * freq[static_cast<std::size_t>(r.from + 2)] *
                              freq[static_cast<std::size_t>(r.to + 2)];
      CHECK(r.selection == doctest::Approx(expected).epsilon(1e-12));
    }
  }

  TEST_CASE("rate table: three-site hand computation") {
    KernelSpec spec;
    spec.half_width = 1;
    spec.capacity_kind = "table";
    spec.capacity_table = {0.5, 1.0, 0.8};
    spec.cooperation_kind = "constant";
    spec.cooperation_value = 1.0;
    spec.competition_kind = "constant";
    const auto k = build_kernels(spec);
    const auto p = make_params(k, 0.25, 0.1, 4);
    PopulationCounts state;
    state.counts = {1, 2, 1};
    const auto freq = state.frequencies();  // 1/4, 1/2, 1/4
    // m_x = K_x * sum_z K_z pi_z with B = 1
    const double dot = 0.5 * 0.25 + 1.0 * 0.5 + 0.8 * 0.25;
    const auto rates = moran_rates(state, p);
    for (const auto& r : rates) {
      const double mx = k.K(r.from) * dot, my = k.K(r.to) * dot;
      const double sel = 2.0 * freq[static_cast<std::size_t>(r.from + 1)] *
                         (0.5 + 0.25 * (my - mx)) * freq[static_cast<std::size_t>(r.to + 1)];
      CHECK(r.selection == doctest::Approx(sel).epsilon(1e-12));
      CHECK(r.mutation ==
            doctest::Approx(2.0 * 0.1 * freq[static_cast<std::size_t>(r.from + 1)])
                .epsilon(1e-12));
    }
  }

  TEST_CASE("monomorphic start without mutation never moves") {
    const auto k = flat_kernels(2);
    const auto p = make_params(k, 0.5, 0.0, 50);
    const auto rec = run_moran(p, 100.0, {50.0}, 13);
    CHECK(rec.event_count == 0);
    for (const auto& snap : rec.snapshots) CHECK(snap.frequency[2] == 1.0);
  }

  TEST_CASE("neutral chain long-run occupation is uniform on average") {
    const auto k = flat_kernels(1);
    const auto p = make_params(k, 0.5, 0.5, 30);
    MoranSimulator sim(p, derive_seed(777, 0, "neutral-test"));
    // time-average occupation of site 0 over a long run
    double integral = 0.0, t_prev = 0.0;
    const double horizon = 4000.0;
    while (sim.time() < horizon) {
      const double f = sim.frequencies()[1];
      if (sim.step(horizon) == StepOutcome::reached_horizon) {
        integral += f * (horizon - t_prev);
        break;
      }
      integral += f * (sim.time() - t_prev);
      t_prev = sim.time();
    }
    CHECK(integral / horizon == doctest::Approx(1.0 / 3.0).epsilon(0.1));
  }

  TEST_CASE("ode rhs: zeros where the structure demands them") {
    const auto k = flat_kernels(2);
    const auto space = PhenotypeSpace(2);
    ModelParams mp;
    mp.sigma = 0.5;
    mp.mu = 0.01;
    mp.population = 1000;

    const auto at_delta = ode_rhs(Simplex::delta(space, 1), k, mp, OdeVariant::eq6);
    for (double v : at_delta) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));

    const auto at_uniform = ode_rhs(Simplex::uniform(space), k, mp, OdeVariant::eq7);
    for (double v : at_uniform) CHECK(v == doctest::Approx(0.0).epsilon(1e-15));
  }

  TEST_CASE("ode rhs sums to zero") {
    Rng rng(52);
    ModelParams mp;
    mp.sigma = 0.4;
    mp.mu = 0.05;
    mp.population = 500;
    for (int trial = 0; trial < 20; ++trial) {
      const auto k = oracle::random_assumption1(rng, 3);
      const Simplex pi(PhenotypeSpace(3), oracle::random_interior(rng, 7));
      for (auto variant : {OdeVariant::eq6, OdeVariant::eq7, OdeVariant::eq9}) {
        const auto v = ode_rhs(pi, k, mp, variant);
        long double s = 0.0L;
        for (double x : v) s += x;
        CHECK(std::abs(static_cast<double>(s)) < 1e-12);
      }
    }
  }

  TEST_CASE("integrating from a fixed point stays put") {
    const auto k = flat_kernels(2);
    ModelParams mp;
    mp.mu = 0.02;
    mp.population = 1000;
    const auto uniform = Simplex::uniform(PhenotypeSpace(2));
    OdeOptions opt;
    opt.horizon = 50.0;
    const auto res = integrate_ode(OdeVariant::eq9, uniform, k, mp, opt);
    REQUIRE(res.ok);
    CHECK(sup_distance(res.terminal, uniform) < 1e-10);
  }

  TEST_CASE("stationary density: the two algebraic forms agree") {
    Rng rng(61);
    for (int trial = 0; trial < 100; ++trial) {
      StationaryDensity d{oracle::random_assumption1(rng, 2), {}};
      d.params.mu = 0.01 + 0.1 * rng.uniform();
      d.params.population = 100 + static_cast<long long>(rng.uniform() * 1000);
      const Simplex pi(PhenotypeSpace(2), oracle::random_interior(rng, 5));
      const double a = d.log_unnormalized(pi);
      const double b = d.log_unnormalized_potential_form(pi);
      CHECK(a == doctest::Approx(b).epsilon(1e-9));
    }
  }

  TEST_CASE("stationary density with no cooperation reduces to a Dirichlet") {
    KernelSpec spec;
    spec.half_width = 2;
    spec.capacity_kind = "constant";
    spec.cooperation_kind = "constant";
    spec.cooperation_value = 0.0;  // m is identically zero
    spec.competition_kind = "constant";
    StationaryDensity d{build_kernels(spec), {}};
    d.params.mu = 0.01;
    d.params.population = 1000;  // (N/2) mu = 5 -> Dirichlet(5,...,5)
    Rng rng(71);
    for (int trial = 0; trial < 50; ++trial) {
      const auto w = oracle::random_interior(rng, 5);
      double expected = 0.0;
      for (double v : w) expected += 4.0 * std::log(v);  // alpha - 1 = 4
      CHECK(d.log_unnormalized(Simplex(PhenotypeSpace(2), w)) ==
            doctest::Approx(expected).epsilon(1e-10));
    }
  }

  TEST_CASE("stationary density: L = 1 spot value at uniform") {
    // (N/2) mu = 2: density proportional to pi_-1 pi_0 pi_1 e^{(N/2) mbar}
    const auto k = flat_kernels(1);  // mbar = 1 everywhere
    StationaryDensity d{k, {}};
    d.params.mu = 0.004;
    d.params.population = 1000;
    const auto u = Simplex::uniform(PhenotypeSpace(1));
    CHECK(d.log_unnormalized(u) ==
          doctest::Approx(3.0 * std::log(1.0 / 3.0) + 500.0).epsilon(1e-12));
  }

  TEST_CASE("mcmc on a tiny target runs and reports diagnostics") {
    StationaryDensity d{flat_kernels(1), {}};
    d.params.mu = 0.02;
    d.params.population = 500;  // Dirichlet(5,5,5)
    McmcOptions opt;
    opt.n_samples = 2000;
    opt.burn_in = 500;
    opt.seed = 5;
    const auto res = mcmc_sample_stationary(d, opt);
    CHECK(res.samples.size() == 2000);
    CHECK(res.acceptance_rate > 0.01);
    CHECK(res.max_split_rhat < 1.3);
    for (const auto& s : res.samples) {
      double sum = 0.0;
      for (double v : s) sum += v;
      CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
  }

  TEST_CASE("bimodality detector: constructed two-spike state fires") {
    // 40% at -5, 40% at +5, 20% spread over the rest
    std::vector<double> f(21, 0.2 / 19.0);
    f[5] = 0.4;
    f[15] = 0.4;
    CHECK(is_bimodal(f));
  }

  TEST_CASE("bimodality detector: unimodal hump never fires") {
    std::vector<double> f(21, 0.0);
    double total = 0.0;
    for (int i = 0; i < 21; ++i) {
      f[static_cast<std::size_t>(i)] = std::exp(-0.5 * (i - 10.0) * (i - 10.0) / 9.0);
      total += f[static_cast<std::size_t>(i)];
    }
    for (auto& v : f) v /= total;
    CHECK(!is_bimodal(f));

    std::vector<Snapshot> traj;
    for (int t = 0; t < 10; ++t) traj.push_back({static_cast<double>(t), f});
    CHECK(!speciation_time(traj).has_value());
  }

  TEST_CASE("speciation time picks the first bimodal snapshot") {
    std::vector<double> uni(21, 0.0);
    uni[10] = 1.0;
    std::vector<double> bi(21, 0.2 / 19.0);
    bi[5] = 0.4;
    bi[15] = 0.4;
    std::vector<Snapshot> traj{{0.0, uni}, {10.0, uni}, {20.0, bi}, {30.0, bi}};
    REQUIRE(speciation_time(traj).has_value());
    CHECK(*speciation_time(traj) == 20.0);
  }

  TEST_CASE("determinism: identical seeds give identical trajectories") {
    const auto k = flat_kernels(2);
    const auto p = make_params(k, 0.5, 0.05, 40);
    const auto a = run_moran(p, 20.0, {5.0, 10.0, 20.0}, 31);
    const auto b = run_moran(p, 20.0, {5.0, 10.0, 20.0}, 31);
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    CHECK(a.event_count == b.event_count);
    for (std::size_t s = 0; s < a.snapshots.size(); ++s)
      for (std::size_t i = 0; i < a.snapshots[s].frequency.size(); ++i)
        CHECK(a.snapshots[s].frequency[i] == b.snapshots[s].frequency[i]);
  }

  TEST_CASE("particle conservation") {
    const auto k = flat_kernels(2);
    const auto p = make_params(k, 0.5, 0.1, 25);
    MoranSimulator sim(p, 99);
    for (int i = 0; i < 2000; ++i) {
      if (sim.step(1e9) != StepOutcome::applied) break;
      CHECK(sim.state().total() == 25);
    }
    CHECK(sim.event_count() > 0);
  }
}
