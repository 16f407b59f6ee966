#include "specsim/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace specsim {

namespace {
constexpr double kRenormalizeAt = 1e-12;
constexpr double kRejectAt = 1e-6;
constexpr double kCapacityFloor = 1e-300;
}  // namespace

PhenotypeSpace::PhenotypeSpace(int half_width_) : half_width(half_width_) {
  if (half_width < 1) throw std::invalid_argument("PhenotypeSpace: half_width must be >= 1");
}

Simplex::Simplex(PhenotypeSpace space, std::vector<double> weights)
    : space_(space), weights_(std::move(weights)) {
  if (static_cast<int>(weights_.size()) != space_.size())
    throw std::invalid_argument("Simplex: weight vector has wrong dimension");
  double sum = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw std::invalid_argument("Simplex: negative or NaN weight");
    sum += w;
  }
  const double drift = std::abs(sum - 1.0);
  if (drift > kRejectAt)
    throw std::invalid_argument("Simplex: weights sum to " + std::to_string(sum) +
                                ", beyond the 1e-6 rejection threshold");
  if (drift > kRenormalizeAt) {
    for (double& w : weights_) w /= sum;
  }
}

Simplex Simplex::delta(PhenotypeSpace space, int site) {
  if (!space.contains(site)) throw std::invalid_argument("Simplex::delta: site outside E");
  std::vector<double> w(static_cast<std::size_t>(space.size()), 0.0);
  w[static_cast<std::size_t>(space.index(site))] = 1.0;
  return Simplex(space, std::move(w));
}

Simplex Simplex::uniform(PhenotypeSpace space) {
  std::vector<double> w(static_cast<std::size_t>(space.size()),
                        1.0 / static_cast<double>(space.size()));
  return Simplex(space, std::move(w));
}

Simplex Simplex::near_delta(PhenotypeSpace space, int site, double eps) {
  if (!(eps >= 0.0 && eps <= 1.0))
    throw std::invalid_argument("Simplex::near_delta: eps must be in [0,1]");
  std::vector<double> w(static_cast<std::size_t>(space.size()),
                        eps / static_cast<double>(space.size()));
  w[static_cast<std::size_t>(space.index(site))] += 1.0 - eps;
  return Simplex(space, std::move(w));
}

bool Simplex::strictly_interior(double floor) const {
  return std::all_of(weights_.begin(), weights_.end(),
                     [floor](double w) { return w > floor; });
}

double Simplex::mean_site() const {
  double m = 0.0;
  for (int i = 0; i < space_.size(); ++i) m += weights_[static_cast<std::size_t>(i)] * space_.site(i);
  return m;
}

double Simplex::variance_site() const {
  const double m = mean_site();
  double v = 0.0;
  for (int i = 0; i < space_.size(); ++i) {
    const double d = space_.site(i) - m;
    v += weights_[static_cast<std::size_t>(i)] * d * d;
  }
  return v;
}

void KernelSet::validate() const {
  const int L = space.half_width;
  if (static_cast<int>(capacity.size()) != 2 * L + 1 ||
      static_cast<int>(cooperation.size()) != 4 * L + 1 ||
      static_cast<int>(competition.size()) != 4 * L + 1)
    throw std::invalid_argument("KernelSet: vector dimensions do not match the space");
  for (int z = 0; z <= 2 * L; ++z) {
    if (std::abs(B(z) - B(-z)) > 0.0)
      throw std::invalid_argument("KernelSet: cooperation kernel not symmetric");
    if (std::abs(C(z) - C(-z)) > 0.0)
      throw std::invalid_argument("KernelSet: competition kernel not symmetric");
  }
  if (assumption1) {
    if (K(0) != 1.0) throw std::invalid_argument("KernelSet: assumption-1 mode needs K_0 = 1");
    for (int x = 0; x <= L; ++x) {
      if (K(x) <= 0.0 || K(x) > 1.0)
        throw std::invalid_argument("KernelSet: assumption-1 capacity must lie in (0,1]");
      if (std::abs(K(x) - K(-x)) > 0.0)
        throw std::invalid_argument("KernelSet: assumption-1 capacity must be symmetric");
      if (x > 0 && K(x) > K(x - 1))
        throw std::invalid_argument("KernelSet: assumption-1 capacity must be unimodal");
    }
  }
}

namespace {

std::vector<double> make_capacity(const KernelSpec& s, bool assumption1) {
  const int L = s.half_width;
  std::vector<double> K(static_cast<std::size_t>(2 * L + 1), 1.0);
  if (s.capacity_kind == "gaussian") {
    if (!(s.sigma_k > 0.0))
      throw std::invalid_argument("build_kernels: sigma_k must be positive");
    const double scale = assumption1 ? 1.0 : s.capacity_scale;
    if (!(scale > 0.0))
      throw std::invalid_argument("build_kernels: capacity_scale must be positive");
    const int peak = assumption1 ? 0 : s.capacity_peak;
    for (int x = -L; x <= L; ++x) {
      const double d = x - peak;
      double v = scale * std::exp(-d * d / (2.0 * s.sigma_k * s.sigma_k));
      // Assumption 1 requires K > 0; never let the tail underflow to zero.
      if (v < kCapacityFloor) v = kCapacityFloor;
      K[static_cast<std::size_t>(x + L)] = v;
    }
  } else if (s.capacity_kind == "rectangular") {
    const int w = s.capacity_halfwidth > 0 ? s.capacity_halfwidth : L;
    for (int x = -L; x <= L; ++x)
      K[static_cast<std::size_t>(x + L)] =
          std::abs(x) <= w ? 1.0 : (assumption1 ? kCapacityFloor : 0.0);
  } else if (s.capacity_kind == "constant") {
    // already ones
  } else if (s.capacity_kind == "table") {
    if (static_cast<int>(s.capacity_table.size()) != 2 * L + 1)
      throw std::invalid_argument("build_kernels: capacity_table has wrong length");
    K = s.capacity_table;
  } else {
    throw std::invalid_argument("build_kernels: unknown capacity_kind '" + s.capacity_kind + "'");
  }
  return K;
}

std::vector<double> make_symmetric_displacement(int L, auto&& f) {
  std::vector<double> v(static_cast<std::size_t>(4 * L + 1), 0.0);
  for (int z = -2 * L; z <= 2 * L; ++z)
    v[static_cast<std::size_t>(z + 2 * L)] = f(std::abs(z));
  return v;
}

}  // namespace

KernelSet build_kernels(const KernelSpec& spec) {
  const int L = spec.half_width;
  if (L < 1) throw std::invalid_argument("build_kernels: half_width must be >= 1");

  KernelSet out{PhenotypeSpace(L), {}, {}, {}};

  std::vector<double> C;
  if (spec.competition_kind == "gaussian") {
    if (!(spec.sigma_c > 0.0))
      throw std::invalid_argument("build_kernels: sigma_c must be positive");
    C = make_symmetric_displacement(
        L, [&](int z) { return std::exp(-double(z) * z / (2.0 * spec.sigma_c * spec.sigma_c)); });
  } else if (spec.competition_kind == "rectangular") {
    const int w = spec.competition_halfwidth;
    if (w < 0) throw std::invalid_argument("build_kernels: competition_halfwidth must be >= 0");
    C = make_symmetric_displacement(L, [&](int z) { return z <= w ? 1.0 : 0.0; });
  } else if (spec.competition_kind == "constant") {
    C = make_symmetric_displacement(L, [&](int) { return spec.competition_value; });
  } else {
    throw std::invalid_argument("build_kernels: unknown competition_kind '" +
                                spec.competition_kind + "'");
  }

  std::vector<double> B;
  bool assumption1 = false;
  if (spec.cooperation_kind == "step") {
    if (!(spec.b >= 0.0 && spec.b <= 1.0))
      throw std::invalid_argument("build_kernels: b must lie in [0,1]");
    if (spec.m < 1 || spec.m > 2 * L)
      throw std::invalid_argument("build_kernels: m must lie in [1, 2L]");
    B = make_symmetric_displacement(
        L, [&](int z) { return spec.b + (1.0 - spec.b) * (z >= spec.m ? 1.0 : 0.0); });
    assumption1 = true;  // step cooperation; the capacity shape is checked below
  } else if (spec.cooperation_kind == "constant") {
    if (!(spec.cooperation_value >= 0.0 && spec.cooperation_value <= 1.0))
      throw std::invalid_argument("build_kernels: cooperation_value must lie in [0,1]");
    B = make_symmetric_displacement(L, [&](int) { return spec.cooperation_value; });
  } else if (spec.cooperation_kind == "one_minus_c") {
    B.resize(C.size());
    for (std::size_t i = 0; i < C.size(); ++i) {
      if (C[i] < 0.0 || C[i] > 1.0)
        throw std::invalid_argument("build_kernels: one_minus_c needs C in [0,1]");
      B[i] = 1.0 - C[i];
    }
  } else {
    throw std::invalid_argument("build_kernels: unknown cooperation_kind '" +
                                spec.cooperation_kind + "'");
  }

  out.capacity = make_capacity(spec, assumption1);
  out.cooperation = std::move(B);
  out.competition = std::move(C);
  out.assumption1 = assumption1;
  out.step_level = spec.b;
  out.step_width = spec.m;
  if (out.assumption1 && spec.capacity_kind == "table") {
    // a tabulated capacity qualifies only when it actually has the required
    // shape: symmetric, unimodal from the center, K_0 = 1, values in (0, 1]
    if (out.K(0) != 1.0) out.assumption1 = false;
    for (int x = 0; x <= L && out.assumption1; ++x) {
      if (out.K(x) <= 0.0 || out.K(x) > 1.0 || out.K(x) != out.K(-x) ||
          (x > 0 && out.K(x) > out.K(x - 1)))
        out.assumption1 = false;
    }
  }
  out.validate();
  return out;
}

void ModelParams::validate() const {
  if (!(sigma > 0.0 && sigma <= 0.5))
    throw std::invalid_argument("ModelParams: sigma must lie in (0, 1/2]");
  if (!(mu >= 0.0)) throw std::invalid_argument("ModelParams: mu must be nonnegative");
  if (population < 1) throw std::invalid_argument("ModelParams: population must be >= 1");
}

void ModelParams::require_positive_mu_tilde() const {
  if (!(mu_tilde() > 0.0))
    throw std::invalid_argument("ModelParams: mu_tilde = mu - 2/N must be positive here");
}

std::vector<double> fitness(const Simplex& pi, const KernelSet& kernels) {
  if (pi.space() != kernels.space)
    throw std::invalid_argument("fitness: simplex and kernels live on different spaces");
  const int L = kernels.space.half_width;
  const int n = kernels.space.size();
  std::vector<double> m(static_cast<std::size_t>(n), 0.0);
  // cache K_z pi_z once; the double loop is the O(|E|^2) quadratic form
  std::vector<double> kp(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    kp[static_cast<std::size_t>(i)] =
        kernels.capacity[static_cast<std::size_t>(i)] * pi[static_cast<std::size_t>(i)];
  for (int x = -L; x <= L; ++x) {
    double acc = 0.0;
    for (int z = -L; z <= L; ++z)
      acc += kernels.B(x - z) * kp[static_cast<std::size_t>(z + L)];
    m[static_cast<std::size_t>(x + L)] = kernels.K(x) * acc;
  }
  return m;
}

double mean_fitness(const Simplex& pi, const std::vector<double>& m) {
  if (pi.size() != m.size())
    throw std::invalid_argument("mean_fitness: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) acc += pi[i] * m[i];
  return acc;
}

double potential(const Simplex& pi, const KernelSet& kernels, double mu_tilde) {
  double log_sum = 0.0;
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (pi[i] <= 0.0) return kNegativeInfinity;
    log_sum += std::log(pi[i]);
  }
  return mean_fitness(pi, fitness(pi, kernels)) + mu_tilde * log_sum;
}

double sup_distance(const Simplex& a, const Simplex& b) {
  if (a.space() != b.space())
    throw std::invalid_argument("sup_distance: different spaces");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace specsim
