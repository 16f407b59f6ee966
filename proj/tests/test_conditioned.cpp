#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "specsim/conditioned.hpp"

using namespace specsim;

namespace {

KernelSet gaussian_kernels(int L, double sigma_k, double sigma_c) {
  KernelSpec spec;
  spec.half_width = L;
  spec.capacity_kind = "gaussian";
  spec.sigma_k = sigma_k;
  spec.cooperation_kind = "constant";
  spec.cooperation_value = 1.0;
  spec.competition_kind = "gaussian";
  spec.sigma_c = sigma_c;
  return build_kernels(spec);
}

KernelSet rectangular_kernels(int L, int kw, int cw) {
  KernelSpec spec;
  spec.half_width = L;
  spec.capacity_kind = "rectangular";
  spec.capacity_halfwidth = kw;
  spec.cooperation_kind = "constant";
  spec.competition_kind = "rectangular";
  spec.competition_halfwidth = cw;
  return build_kernels(spec);
}

}  // namespace

TEST_SUITE("conditioned") {
  TEST_CASE("fitness at a point mass: W1 vanishes, W2 is one") {
    const auto k = gaussian_kernels(3, 2.0, 1.5);
    const auto d0 = Simplex::delta(PhenotypeSpace(3), 0);
    CHECK(fitness_w(d0, k, FitnessKind::W1)[3] == 0.0);
    CHECK(fitness_w(d0, k, FitnessKind::W2)[3] == doctest::Approx(1.0).epsilon(1e-14));
  }

  TEST_CASE("fitness matches direct evaluation on rectangular kernels") {
    const auto k = rectangular_kernels(2, 2, 1);
    Rng rng(17);
    for (int trial = 0; trial < 30; ++trial) {
      const auto w = oracle::random_interior(rng, 5);
      const Simplex pi(PhenotypeSpace(2), w);
      const auto w1 = fitness_w(pi, k, FitnessKind::W1);
      const auto w2 = fitness_w(pi, k, FitnessKind::W2);
      for (int x = -2; x <= 2; ++x) {
        long double conv = 0.0L;
        for (int z = -2; z <= 2; ++z)
          conv += static_cast<long double>(k.C(x - z)) * w[static_cast<std::size_t>(z + 2)];
        const double c = static_cast<double>(conv);
        CHECK(w1[static_cast<std::size_t>(x + 2)] ==
              doctest::Approx(std::max(0.0, 1.0 - c / k.K(x))).epsilon(1e-12));
        CHECK(w2[static_cast<std::size_t>(x + 2)] ==
              doctest::Approx(k.K(x) / c).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("deterministic map: constant fitness on the support is a fixed point") {
    // constant kernels make W2 constant everywhere, so any pi is stationary
    KernelSpec spec;
    spec.half_width = 2;
    spec.capacity_kind = "constant";
    spec.cooperation_kind = "constant";
    spec.competition_kind = "constant";
    const auto k = build_kernels(spec);
    Rng rng(23);
    const Simplex pi(PhenotypeSpace(2), oracle::random_interior(rng, 5));
    const auto a = MutationMatrix::identity(PhenotypeSpace(2));
    const auto next = det_map_step(pi, k, FitnessKind::W2, a);
    CHECK(sup_distance(pi, next) < 1e-12);
  }

  TEST_CASE("deterministic map: L = 1 hand expansion") {
    const auto k = rectangular_kernels(1, 1, 0);  // K = 1; C = 1{z = 0}
    const auto space = PhenotypeSpace(1);
    const Simplex pi(space, {0.25, 0.70, 0.05});
    const auto a = MutationMatrix::identity(space);
    // W2_x = 1 / pi_x, so pi_x W_x = 1 everywhere and the update equalizes
    const auto next = det_map_step(pi, k, FitnessKind::W2, a);
    CHECK(next.at_site(-1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(next.at_site(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(next.at_site(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }

  TEST_CASE("identity mutation never grows the support") {
    const auto k = gaussian_kernels(3, 2.5, 2.0);
    const auto space = PhenotypeSpace(3);
    std::vector<double> w = {0.0, 0.2, 0.0, 0.5, 0.3, 0.0, 0.0};
    Simplex pi(space, w);
    const auto a = MutationMatrix::identity(space);
    for (int t = 0; t < 50; ++t) {
      pi = det_map_step(pi, k, FitnessKind::W2, a);
      CHECK(pi[0] == 0.0);
      CHECK(pi[2] == 0.0);
      CHECK(pi[5] == 0.0);
      CHECK(pi[6] == 0.0);
    }
  }

  TEST_CASE("sampled generation: resampling law is a probability vector") {
    const auto k = gaussian_kernels(2, 2.0, 1.5);
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
      const Simplex pi(PhenotypeSpace(2), oracle::random_interior(rng, 5));
      const auto p =
          resampling_law(pi, k, FitnessKind::W2, MutationMatrix::identity(PhenotypeSpace(2)));
      long double s = 0.0L;
      for (double v : p) {
        CHECK(v >= 0.0);
        s += v;
      }
      CHECK(static_cast<double>(s) == doctest::Approx(1.0).epsilon(1e-12));
    }
  }

  TEST_CASE("sampled generation: empirical mean matches the exact law") {
    const auto space = PhenotypeSpace(2);
    const auto k = gaussian_kernels(2, 2.0, 1.5);
    const auto a = MutationMatrix::identity(space);
    PopulationCounts counts;
    counts.counts = {3, 10, 20, 10, 7};
    const long long N = counts.total();
    const Simplex pi(space, counts.frequencies());
    const auto p = resampling_law(pi, k, FitnessKind::W2, a);

    const int replicas = 10000;
    std::vector<double> mean(5, 0.0);
    Rng rng(derive_seed(2024, 0, "wf-test"));
    for (int r = 0; r < replicas; ++r) {
      const auto next = wf_sample_step(counts, k, FitnessKind::W2, a, rng);
      CHECK(next.total() == N);
      for (int i = 0; i < 5; ++i)
        mean[static_cast<std::size_t>(i)] +=
            static_cast<double>(next.counts[static_cast<std::size_t>(i)]) /
            static_cast<double>(N);
    }
    for (int i = 0; i < 5; ++i) {
      mean[static_cast<std::size_t>(i)] /= replicas;
      const double se = std::sqrt(p[static_cast<std::size_t>(i)] *
                                  (1.0 - p[static_cast<std::size_t>(i)]) /
                                  (static_cast<double>(N) * replicas));
      CHECK(std::abs(mean[static_cast<std::size_t>(i)] - p[static_cast<std::size_t>(i)]) <
            3.0 * se + 1e-12);
    }
  }

  TEST_CASE("fixed-point iteration: starting at a fixed point stops immediately") {
    KernelSpec spec;
    spec.half_width = 2;
    spec.capacity_kind = "constant";
    spec.cooperation_kind = "constant";
    spec.competition_kind = "constant";
    const auto k = build_kernels(spec);
    Rng rng(41);
    const Simplex pi(PhenotypeSpace(2), oracle::random_interior(rng, 5));
    const auto res = iterate_to_fixed_point(pi, k, FitnessKind::W2,
                                            MutationMatrix::identity(PhenotypeSpace(2)), {});
    CHECK(res.converged);
    CHECK(res.iterations <= 1);
  }

  TEST_CASE("fixed point satisfies the constant-fitness condition") {
    // wider competition than capacity: the iteration contracts to one hump
    const auto k = gaussian_kernels(6, 3.0, 4.0);
    const auto space = PhenotypeSpace(6);
    FixedPointOptions opt;
    opt.tol = 1e-13;
    const auto res = iterate_to_fixed_point(Simplex::near_delta(space, 0, 1e-3), k,
                                            FitnessKind::W2, MutationMatrix::identity(space), opt);
    REQUIRE(res.converged);
    CHECK(res.condition3_residual < 10 * opt.tol * 1e3);  // scaled by W magnitude
    // W2 stationarity: K_x = c (C * pi)(x) with one c across the support
    const auto w = fitness_w(res.pi_hat, k, FitnessKind::W2);
    double c_min = 1e300, c_max = -1e300;
    for (int i = 0; i < space.size(); ++i) {
      if (res.pi_hat[static_cast<std::size_t>(i)] < 1e-9) continue;
      c_min = std::min(c_min, w[static_cast<std::size_t>(i)]);
      c_max = std::max(c_max, w[static_cast<std::size_t>(i)]);
    }
    CHECK(c_max - c_min < 1e-9);
  }

  TEST_CASE("tridiagonal mutation matrix is row-stochastic and reflecting") {
    const auto space = PhenotypeSpace(3);
    const auto a = MutationMatrix::tridiagonal(space, 0.1);
    for (int i = 0; i < 7; ++i) {
      long double row = 0.0L;
      for (int j = 0; j < 7; ++j) row += a(i, j);
      CHECK(static_cast<double>(row) == doctest::Approx(1.0).epsilon(1e-14));
    }
    CHECK(a(0, 1) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(a(0, 0) == doctest::Approx(0.9).epsilon(1e-15));  // reflecting boundary
  }

  TEST_CASE("W2 with an all-zero denominator names the site") {
    KernelSpec spec;
    spec.half_width = 1;
    spec.capacity_kind = "constant";
    spec.cooperation_kind = "constant";
    spec.competition_kind = "rectangular";
    spec.competition_halfwidth = 0;  // C = 1{z=0}
    const auto k = build_kernels(spec);
    const auto pi = Simplex::delta(PhenotypeSpace(1), -1);
    CHECK_THROWS_AS(fitness_w(pi, k, FitnessKind::W2), std::domain_error);
  }
}
