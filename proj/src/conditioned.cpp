#include "specsim/conditioned.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace specsim {

MutationMatrix::MutationMatrix(PhenotypeSpace space, std::vector<double> row_major)
    : space_(space), n_(static_cast<std::size_t>(space.size())), a_(std::move(row_major)) {
  if (a_.size() != n_ * n_)
    throw std::invalid_argument("MutationMatrix: wrong dimension");
  for (std::size_t r = 0; r < n_; ++r) {
    double sum = 0.0;
    for (std::size_t c = 0; c < n_; ++c) {
      const double v = a_[r * n_ + c];
      if (!(v >= 0.0)) throw std::invalid_argument("MutationMatrix: negative entry");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw std::invalid_argument("MutationMatrix: row " + std::to_string(r) +
                                  " sums to " + std::to_string(sum));
  }
}

MutationMatrix MutationMatrix::identity(PhenotypeSpace space) {
  const auto n = static_cast<std::size_t>(space.size());
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) a[i * n + i] = 1.0;
  MutationMatrix m(space, std::move(a));
  m.identity_ = true;
  return m;
}

MutationMatrix MutationMatrix::tridiagonal(PhenotypeSpace space, double mu) {
  if (!(mu >= 0.0 && mu <= 0.5))
    throw std::invalid_argument("MutationMatrix::tridiagonal: mu must lie in [0, 1/2]");
  const auto n = static_cast<std::size_t>(space.size());
  std::vector<double> a(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    a[i * n + i] = 1.0 - 2.0 * mu;
    if (i > 0)
      a[i * n + (i - 1)] += mu;
    else
      a[i * n + i] += mu;  // reflect at the left edge
    if (i + 1 < n)
      a[i * n + (i + 1)] += mu;
    else
      a[i * n + i] += mu;  // reflect at the right edge
  }
  return MutationMatrix(space, std::move(a));
}

std::vector<double> fitness_w(const Simplex& pi, const KernelSet& kernels, FitnessKind kind) {
  if (pi.space() != kernels.space)
    throw std::invalid_argument("fitness_w: simplex and kernels live on different spaces");
  const int L = kernels.space.half_width;
  const int n = kernels.space.size();
  std::vector<double> w(static_cast<std::size_t>(n), 0.0);
  for (int x = -L; x <= L; ++x) {
    double conv = 0.0;
    for (int z = -L; z <= L; ++z)
      conv += kernels.C(x - z) * pi[static_cast<std::size_t>(z + L)];
    const double kx = kernels.K(x);
    if (kind == FitnessKind::W1) {
      w[static_cast<std::size_t>(x + L)] = std::max(0.0, 1.0 - conv / kx);
    } else {
      if (conv <= 0.0)
        throw std::domain_error("fitness_w: W2 denominator (C*pi) is zero at site " +
                                std::to_string(x));
      w[static_cast<std::size_t>(x + L)] = kx / conv;
    }
  }
  return w;
}

std::vector<double> resampling_law(const Simplex& pi, const KernelSet& kernels, FitnessKind kind,
                                   const MutationMatrix& a) {
  const auto w = fitness_w(pi, kernels, kind);
  const std::size_t n = pi.size();
  double mean_w = 0.0;
  for (std::size_t i = 0; i < n; ++i) mean_w += pi[i] * w[i];
  if (!(mean_w > 0.0))
    throw std::domain_error(
        "resampling_law: mean fitness is zero; the state is degenerate under W1");
  std::vector<double> p(n, 0.0);
  if (a.is_identity()) {
    for (std::size_t i = 0; i < n; ++i) p[i] = pi[i] * w[i] / mean_w;
  } else {
    for (std::size_t y = 0; y < n; ++y) {
      const double mass = pi[y] * w[y] / mean_w;
      if (mass == 0.0) continue;
      for (std::size_t x = 0; x < n; ++x)
        p[x] += a(static_cast<int>(y), static_cast<int>(x)) * mass;
    }
  }
  return p;
}

Simplex det_map_step(const Simplex& pi, const KernelSet& kernels, FitnessKind kind,
                     const MutationMatrix& a) {
  return Simplex(pi.space(), resampling_law(pi, kernels, kind, a));
}

PopulationCounts wf_sample_step(const PopulationCounts& counts, const KernelSet& kernels,
                                FitnessKind kind, const MutationMatrix& a, Rng& rng) {
  const long long n_total = counts.total();
  if (n_total < 1) throw std::invalid_argument("wf_sample_step: population must be >= 1");
  const Simplex pi(kernels.space, counts.frequencies());
  const auto p = resampling_law(pi, kernels, kind, a);

  // multinomial draw via N categorical samples against the cumulative law
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    cdf[i] = acc;
  }
  PopulationCounts out;
  out.counts.assign(p.size(), 0);
  for (long long k = 0; k < n_total; ++k) {
    const double u = rng.uniform() * acc;
    const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
    const auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(
        it - cdf.begin(), static_cast<std::ptrdiff_t>(p.size()) - 1));
    ++out.counts[idx];
  }
  return out;
}

FixedPointResult iterate_to_fixed_point(const Simplex& pi0, const KernelSet& kernels,
                                        FitnessKind kind, const MutationMatrix& a,
                                        const FixedPointOptions& opt) {
  if (!(opt.tol > 0.0)) throw std::invalid_argument("iterate_to_fixed_point: tol must be > 0");
  FixedPointResult result{pi0};
  result.trajectory.push_back({0.0, pi0.weights()});

  Simplex current = pi0;
  for (int it = 1; it <= opt.max_iter; ++it) {
    Simplex next = det_map_step(current, kernels, kind, a);
    const double d = sup_distance(next, current);
    current = std::move(next);
    if (opt.snapshot_every > 0 && it % opt.snapshot_every == 0)
      result.trajectory.push_back({static_cast<double>(it), current.weights()});
    result.iterations = it;
    result.last_step_distance = d;
    if (d < opt.tol) {
      result.converged = true;
      break;
    }
  }
  result.pi_hat = current;
  result.trajectory.push_back({static_cast<double>(result.iterations), current.weights()});

  // condition-(3) residual: W constant on the numerical support
  const auto w = fitness_w(current, kernels, kind);
  double wmin = std::numeric_limits<double>::infinity();
  double wmax = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (current[i] > opt.support_threshold) {
      wmin = std::min(wmin, w[i]);
      wmax = std::max(wmax, w[i]);
    }
  }
  result.condition3_residual = (wmax >= wmin) ? wmax - wmin : 0.0;
  return result;
}

}  // namespace specsim
