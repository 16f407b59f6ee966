#include "specsim/landscape.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace specsim {

std::string to_string(StationaryClass c) {
  switch (c) {
    case StationaryClass::local_max_V: return "local_max_V";
    case StationaryClass::saddle_or_unstable: return "saddle_or_unstable";
    case StationaryClass::unresolved: return "unresolved";
  }
  return "unresolved";
}

namespace {

// quadratic-form coefficient Q_{xy} = K_x B_{x-y} K_y; mbar = pi' Q pi,
// m = Q pi
double quad_entry(const KernelSet& k, int x, int y) { return k.K(x) * k.B(x - y) * k.K(y); }

std::vector<double> flow_rhs(const std::vector<double>& pi, const KernelSet& kernels,
                             double mu_tilde) {
  const int L = kernels.space.half_width;
  const int n = kernels.space.size();
  std::vector<double> kp(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    kp[static_cast<std::size_t>(i)] = kernels.capacity[static_cast<std::size_t>(i)] *
                                      pi[static_cast<std::size_t>(i)];
  std::vector<double> m(static_cast<std::size_t>(n));
  double mbar = 0.0;
  for (int x = -L; x <= L; ++x) {
    double acc = 0.0;
    for (int z = -L; z <= L; ++z) acc += kernels.B(x - z) * kp[static_cast<std::size_t>(z + L)];
    m[static_cast<std::size_t>(x + L)] = kernels.K(x) * acc;
    mbar += pi[static_cast<std::size_t>(x + L)] * m[static_cast<std::size_t>(x + L)];
  }
  std::vector<double> f(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    f[static_cast<std::size_t>(i)] =
        pi[static_cast<std::size_t>(i)] * (m[static_cast<std::size_t>(i)] - mbar) +
        0.5 * mu_tilde * (1.0 - static_cast<double>(n) * pi[static_cast<std::size_t>(i)]);
  return f;
}

Eigen::MatrixXd flow_jacobian(const std::vector<double>& pi, const KernelSet& kernels,
                              double mu_tilde) {
  const int L = kernels.space.half_width;
  const int n = kernels.space.size();
  Eigen::MatrixXd q(n, n);
  for (int x = -L; x <= L; ++x)
    for (int y = -L; y <= L; ++y) q(x + L, y + L) = quad_entry(kernels, x, y);
  Eigen::Map<const Eigen::VectorXd> p(pi.data(), n);
  const Eigen::VectorXd m = q * p;
  const double mbar = p.dot(m);
  Eigen::MatrixXd j(n, n);
  for (int x = 0; x < n; ++x)
    for (int y = 0; y < n; ++y)
      j(x, y) = p(x) * (q(x, y) - 2.0 * m(y)) +
                (x == y ? (m(x) - mbar) - 0.5 * mu_tilde * static_cast<double>(n) : 0.0);
  return j;
}

// orthonormal basis of the sum-zero subspace (Helmert columns)
Eigen::MatrixXd sum_zero_basis(int n) {
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(n, n - 1);
  for (int j = 1; j < n; ++j) {
    const double norm = std::sqrt(static_cast<double>(j) * (j + 1));
    for (int i = 0; i < j; ++i) u(i, j - 1) = 1.0 / norm;
    u(j, j - 1) = -static_cast<double>(j) / norm;
  }
  return u;
}

// constancy of m_x + mu_tilde / (2 pi_x); for mu_tilde = 0 restricted to the
// effective support
double constancy_residual_of(const std::vector<double>& pi, const std::vector<double>& m,
                             double mu_tilde, double support_threshold = 1e-9) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < pi.size(); ++i) {
    if (mu_tilde == 0.0 && pi[i] <= support_threshold) continue;
    const double c = m[i] + (mu_tilde > 0.0 ? mu_tilde / (2.0 * pi[i]) : 0.0);
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return hi >= lo ? hi - lo : 0.0;
}

struct PolishResult {
  std::vector<double> pi;
  bool converged = false;
  double residual = std::numeric_limits<double>::infinity();
};

// relative stationarity residual: max_x |m_x - mbar + mu_tilde/(2 pi_x) - n mu_tilde/2|
double scaled_residual(const std::vector<double>& pi, const KernelSet& kernels,
                       double mu_tilde) {
  const int n = kernels.space.size();
  const Simplex s(kernels.space, pi);
  const auto m = fitness(s, kernels);
  const double mbar = mean_fitness(s, m);
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double r = m[static_cast<std::size_t>(i)] - mbar +
                     mu_tilde / (2.0 * pi[static_cast<std::size_t>(i)]) -
                     0.5 * mu_tilde * static_cast<double>(n);
    worst = std::max(worst, std::abs(r));
  }
  return worst;
}

PolishResult newton_polish(std::vector<double> pi, const KernelSet& kernels, double mu_tilde,
                           double tol = 1e-11, int max_iter = 300) {
  const int n = kernels.space.size();
  PolishResult out;
  out.residual = scaled_residual(pi, kernels, mu_tilde);
  double best = out.residual;
  std::vector<double> best_pi = pi;
  int stale = 0;
  for (int it = 0; it < max_iter && best > tol; ++it) {
    const auto f = flow_rhs(pi, kernels, mu_tilde);
    Eigen::MatrixXd a(n + 1, n);
    a.topRows(n) = flow_jacobian(pi, kernels, mu_tilde);
    a.bottomRows(1).setOnes();
    Eigen::VectorXd rhs(n + 1);
    for (int i = 0; i < n; ++i) rhs(i) = f[static_cast<std::size_t>(i)];
    rhs(n) = 0.0;
    const Eigen::VectorXd delta = a.colPivHouseholderQr().solve(rhs);

    double lambda = 1.0;
    std::vector<double> next(pi.size());
    for (int bt = 0; bt < 60; ++bt) {
      bool positive = true;
      double sum = 0.0;
      for (int i = 0; i < n; ++i) {
        next[static_cast<std::size_t>(i)] = pi[static_cast<std::size_t>(i)] - lambda * delta(i);
        if (next[static_cast<std::size_t>(i)] <= 0.0) positive = false;
        sum += next[static_cast<std::size_t>(i)];
      }
      if (positive) {
        for (auto& v : next) v /= sum;
        break;
      }
      lambda *= 0.5;
      if (bt == 59) return out;  // wedged against the boundary
    }
    pi = next;
    const double r = scaled_residual(pi, kernels, mu_tilde);
    if (r < best) {
      best = r;
      best_pi = pi;
      stale = 0;
    } else if (++stale > 8) {
      break;
    }
  }
  out.pi = best_pi;
  out.residual = best;
  out.converged = best <= tol;
  if (out.pi.empty()) out.pi = std::move(pi);
  return out;
}

std::pair<StationaryClass, std::vector<double>> classify_interior(const std::vector<double>& pi,
                                                                  const KernelSet& kernels,
                                                                  double mu_tilde) {
  const int n = kernels.space.size();
  const Eigen::MatrixXd j = flow_jacobian(pi, kernels, mu_tilde);
  const Eigen::MatrixXd u = sum_zero_basis(n);
  const Eigen::MatrixXd a = u.transpose() * j * u;
  Eigen::EigenSolver<Eigen::MatrixXd> es(a);
  std::vector<double> re(static_cast<std::size_t>(n - 1));
  for (int i = 0; i < n - 1; ++i) re[static_cast<std::size_t>(i)] = es.eigenvalues()(i).real();
  std::sort(re.begin(), re.end());
  const double top = re.back();
  StationaryClass cls = StationaryClass::unresolved;
  if (top < -1e-10)
    cls = StationaryClass::local_max_V;
  else if (top > 1e-10)
    cls = StationaryClass::saddle_or_unstable;
  return {cls, re};
}

// general equal-fitness face solve, no spacing requirement; used both by the
// public face API and by boundary classification
struct FaceSolve {
  bool solved = false;
  bool degenerate = false;
  std::vector<double> weights;       // on-face, in support order
  double common_fitness = 0.0;
};

FaceSolve solve_face(const std::vector<int>& support, const KernelSet& kernels,
                     double total_mass) {
  const int k = static_cast<int>(support.size());
  FaceSolve out;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(k + 1, k + 1);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k + 1);
  for (int r = 0; r < k; ++r) {
    for (int c = 0; c < k; ++c) a(r, c) = quad_entry(kernels, support[r], support[c]);
    a(r, k) = -1.0;  // -S
  }
  for (int c = 0; c < k; ++c) a(k, c) = 1.0;
  rhs(k) = total_mass;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) {
    out.degenerate = true;
    return out;
  }
  const Eigen::VectorXd sol = lu.solve(rhs);
  out.weights.resize(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) out.weights[static_cast<std::size_t>(i)] = sol(i);
  out.common_fitness = sol(k);
  out.solved = true;
  return out;
}

FaceCandidate evaluate_face(const std::vector<int>& support, const KernelSet& kernels) {
  const int k = static_cast<int>(support.size());
  FaceCandidate out{.pi = Simplex::uniform(kernels.space)};
  const FaceSolve sol = solve_face(support, kernels, 1.0);
  if (sol.degenerate) {
    out.degenerate = true;
    out.reason = "singular equal-fitness system";
    return out;
  }
  for (double w : sol.weights) {
    if (!(w > 1e-14)) {
      out.reason = "nonpositive weight in the face solution";
      return out;
    }
  }
  out.solved = true;
  std::vector<double> full(static_cast<std::size_t>(kernels.space.size()), 0.0);
  for (int i = 0; i < k; ++i)
    full[static_cast<std::size_t>(kernels.space.index(support[i]))] =
        sol.weights[static_cast<std::size_t>(i)];
  out.pi = Simplex(kernels.space, full);
  out.on_support_fitness = sol.common_fitness;
  const auto m = fitness(out.pi, kernels);
  out.mbar = mean_fitness(out.pi, m);

  // face-tangent Hessian of mbar: 2 Q restricted to I, projected on sum-zero
  if (k >= 2) {
    Eigen::MatrixXd h(k, k);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) h(r, c) = 2.0 * quad_entry(kernels, support[r], support[c]);
    const Eigen::MatrixXd u = sum_zero_basis(k);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(u.transpose() * h * u);
    out.hessian_eigenvalues.assign(es.eigenvalues().data(),
                                   es.eigenvalues().data() + (k - 1));
    if (es.eigenvalues().maxCoeff() >= -1e-10) {
      out.reason = "face Hessian not negative definite";
      out.max_off_support_fitness = kNegativeInfinity;
      return out;
    }
  }

  double off = kNegativeInfinity;
  for (int x = -kernels.space.half_width; x <= kernels.space.half_width; ++x) {
    if (std::find(support.begin(), support.end(), x) != support.end()) continue;
    off = std::max(off, m[static_cast<std::size_t>(kernels.space.index(x))]);
  }
  out.max_off_support_fitness = off;
  if (off >= out.on_support_fitness) {
    out.reason = "off-support fitness reaches the support level";
    return out;
  }
  out.valid = true;
  return out;
}

StationaryPoint make_point(const std::vector<double>& pi, const KernelSet& kernels,
                           double mu_tilde) {
  StationaryPoint pt{.pi_hat = Simplex(kernels.space, pi)};
  pt.fitness = fitness(pt.pi_hat, kernels);
  pt.constancy_residual = constancy_residual_of(pt.pi_hat.weights(), pt.fitness, mu_tilde);
  const auto f = flow_rhs(pt.pi_hat.weights(), kernels, mu_tilde);
  for (double v : f) pt.velocity_norm = std::max(pt.velocity_norm, std::abs(v));
  if (mu_tilde > 0.0) {
    auto [cls, eigs] = classify_interior(pt.pi_hat.weights(), kernels, mu_tilde);
    if (pt.constancy_residual > 1e-8) cls = StationaryClass::unresolved;
    pt.classification = cls;
    pt.tangent_eigenvalues = std::move(eigs);
  } else {
    // boundary regime: classification through the face of the effective support
    std::vector<int> support;
    for (int x = -kernels.space.half_width; x <= kernels.space.half_width; ++x)
      if (pt.pi_hat.at_site(x) > 1e-9) support.push_back(x);
    const FaceCandidate face = evaluate_face(support, kernels);
    if (pt.constancy_residual > 1e-8)
      pt.classification = StationaryClass::unresolved;
    else if (face.valid)
      pt.classification = StationaryClass::local_max_V;
    else if (face.degenerate)
      pt.classification = StationaryClass::unresolved;
    else
      pt.classification = StationaryClass::saddle_or_unstable;
    pt.tangent_eigenvalues = face.hessian_eigenvalues;
  }
  return pt;
}

std::vector<double> flow_to_rest(const std::vector<double>& start, const KernelSet& kernels,
                                 const ModelParams& model, double stop_velocity,
                                 double horizon) {
  const double mu_tilde = model.mu_tilde();
  OdeOptions opt;
  opt.horizon = horizon;
  opt.stop_velocity = stop_velocity;
  opt.rel_tol = 1e-8;
  opt.abs_tol = 1e-12;
  const OdeVariant variant = mu_tilde > 0.0 ? OdeVariant::eq9 : OdeVariant::eq6;
  const OdeResult res = integrate_ode(variant, Simplex(kernels.space, start), kernels, model,
                                      opt);
  return res.terminal.weights();
}

}  // namespace

std::vector<StationaryPoint> find_stationary_points(const MoranParams& params, int n_starts,
                                                    double tol, std::uint64_t seed) {
  params.validate();
  if (n_starts < 1) throw std::invalid_argument("find_stationary_points: n_starts >= 1");
  if (!(tol > 0.0)) throw std::invalid_argument("find_stationary_points: tol must be > 0");
  const KernelSet& kernels = params.kernels;
  const double mu_tilde = params.model.mu_tilde();
  if (mu_tilde < 0.0)
    throw std::invalid_argument("find_stationary_points: needs mu - 2/N >= 0");
  const int L = kernels.space.half_width;
  const int n = kernels.space.size();

  std::vector<std::vector<double>> starts;
  Rng rng(derive_seed(seed, 0, "landscape-multistart"));
  for (int i = 0; i < n_starts; ++i)
    starts.push_back(rng.dirichlet(std::vector<double>(static_cast<std::size_t>(n), 1.0)));

  // face-candidate seeds: every corner, plus the exactly-M-spaced pairs and
  // triples when the kernels have the step cooperation structure
  std::vector<std::vector<int>> faces;
  for (int x = -L; x <= L; ++x) faces.push_back({x});
  if (kernels.assumption1) {
    const int m_step = kernels.step_width;
    for (int y = -L; y + m_step <= L; ++y) faces.push_back({y, y + m_step});
    for (int x = -L + m_step; x + m_step <= L; ++x)
      faces.push_back({x - m_step, x, x + m_step});
  }
  const double eps = 1e-3;
  for (const auto& face : faces) {
    const FaceSolve sol = solve_face(face, kernels, 1.0);
    std::vector<double> w(static_cast<std::size_t>(n), eps / static_cast<double>(n));
    bool positive = sol.solved;
    if (sol.solved)
      for (double v : sol.weights) positive = positive && v > 0.0;
    if (face.size() == 1) positive = true;
    if (!positive) continue;
    if (face.size() == 1) {
      w[static_cast<std::size_t>(kernels.space.index(face[0]))] += 1.0 - eps;
    } else {
      for (std::size_t i = 0; i < face.size(); ++i)
        w[static_cast<std::size_t>(kernels.space.index(face[i]))] +=
            (1.0 - eps) * sol.weights[i];
    }
    starts.push_back(std::move(w));
  }

  std::vector<StationaryPoint> found;
  for (std::size_t si = 0; si < starts.size(); ++si) {
    double sum = 0.0;
    for (auto& v : starts[si]) {
      v = std::max(v, 1e-12);
      sum += v;
    }
    for (auto& v : starts[si]) v /= sum;

    std::vector<double> terminal =
        flow_to_rest(starts[si], kernels, params.model, std::max(tol, 1e-9), 1e7);
    if (mu_tilde > 0.0) {
      const PolishResult pol = newton_polish(terminal, kernels, mu_tilde);
      if (!pol.pi.empty()) terminal = pol.pi;
    } else {
      // snap onto the face of the effective support
      std::vector<int> support;
      for (int x = -L; x <= L; ++x)
        if (terminal[static_cast<std::size_t>(x + L)] > 1e-6) support.push_back(x);
      const FaceSolve sol = solve_face(support, kernels, 1.0);
      bool usable = sol.solved;
      if (usable)
        for (double v : sol.weights) usable = usable && v > 0.0;
      if (usable) {
        std::fill(terminal.begin(), terminal.end(), 0.0);
        for (std::size_t i = 0; i < support.size(); ++i)
          terminal[static_cast<std::size_t>(kernels.space.index(support[i]))] = sol.weights[i];
      }
    }

    StationaryPoint pt = make_point(terminal, kernels, mu_tilde);

    bool merged = false;
    for (auto& existing : found) {
      if (sup_distance(existing.pi_hat, pt.pi_hat) < 10.0 * tol) {
        if (pt.velocity_norm < existing.velocity_norm) {
          const int tag = existing.basin_tag;
          existing = pt;
          existing.basin_tag = tag;
        }
        merged = true;
        break;
      }
    }
    if (!merged) {
      pt.basin_tag = static_cast<int>(found.size());
      found.push_back(std::move(pt));
    }
  }
  return found;
}

StationarityDiagnostics verify_stationarity(const Simplex& pi_hat, const KernelSet& kernels,
                                            double mu_tilde) {
  const int n = kernels.space.size();
  const auto m = fitness(pi_hat, kernels);
  const double mbar = mean_fitness(pi_hat, m);
  StationarityDiagnostics out;
  out.constancy_residual = constancy_residual_of(pi_hat.weights(), m, mu_tilde);

  // aggregate identity over random subsets J:
  //   sum_J pi m + |J| mu_tilde / 2 = c * sum_J pi   with c = mbar + n mu_tilde / 2
  const double c = mbar + 0.5 * mu_tilde * static_cast<double>(n);
  Rng rng(derive_seed(0xD1A6, 0, "stationarity-subsets"));
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> subset;
    while (subset.empty())
      for (int i = 0; i < n; ++i)
        if (rng.uniform() < 0.5) subset.push_back(i);
    double mass = 0.0, weighted = 0.0;
    for (int i : subset) {
      mass += pi_hat[static_cast<std::size_t>(i)];
      weighted += pi_hat[static_cast<std::size_t>(i)] * m[static_cast<std::size_t>(i)];
    }
    const double lhs =
        weighted / mass + 0.5 * mu_tilde * static_cast<double>(subset.size()) / mass;
    worst = std::max(worst, std::abs(lhs - c));
  }
  out.subset_residual = worst;

  // sign equivalence: m_x >= mbar  <=>  pi_x >= 1/n (with a tolerance band)
  out.sign_equivalence_ok = true;
  const double uniform_mass = 1.0 / static_cast<double>(n);
  for (int i = 0; i < n; ++i) {
    const double dm = m[static_cast<std::size_t>(i)] - mbar;
    const double dp = pi_hat[static_cast<std::size_t>(i)] - uniform_mass;
    if (std::abs(dm) < 1e-10 || std::abs(dp) < 1e-12) continue;
    if ((dm > 0.0) != (dp > 0.0)) out.sign_equivalence_ok = false;
  }

  // monotone coupling: descending m order equals descending pi order
  std::vector<int> by_m(static_cast<std::size_t>(n)), by_pi(static_cast<std::size_t>(n));
  std::iota(by_m.begin(), by_m.end(), 0);
  by_pi = by_m;
  std::stable_sort(by_m.begin(), by_m.end(), [&](int a, int b) {
    return m[static_cast<std::size_t>(a)] > m[static_cast<std::size_t>(b)];
  });
  std::stable_sort(by_pi.begin(), by_pi.end(), [&](int a, int b) {
    return pi_hat[static_cast<std::size_t>(a)] > pi_hat[static_cast<std::size_t>(b)];
  });
  out.monotone_coupling_ok = true;
  for (int i = 0; i < n; ++i) {
    if (by_m[static_cast<std::size_t>(i)] == by_pi[static_cast<std::size_t>(i)]) continue;
    // order mismatch is fine only across ties (within 1e-10 in m and pi)
    const int a = by_m[static_cast<std::size_t>(i)];
    const int b = by_pi[static_cast<std::size_t>(i)];
    if (std::abs(m[static_cast<std::size_t>(a)] - m[static_cast<std::size_t>(b)]) > 1e-10 ||
        std::abs(pi_hat[static_cast<std::size_t>(a)] - pi_hat[static_cast<std::size_t>(b)]) >
            1e-10)
      out.monotone_coupling_ok = false;
  }
  return out;
}

FaceSpec FaceSpec::make(const KernelSet& kernels, std::vector<int> support) {
  if (support.empty()) throw std::invalid_argument("FaceSpec: empty support");
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());
  for (int x : support)
    if (!kernels.space.contains(x)) throw std::invalid_argument("FaceSpec: site outside E");
  FaceSpec spec;
  spec.spaced = true;
  for (std::size_t i = 1; i < support.size(); ++i)
    if (support[i] - support[i - 1] < kernels.step_width) spec.spaced = false;
  spec.support = std::move(support);
  return spec;
}

FaceCandidate face_local_max(const FaceSpec& face, const KernelSet& kernels) {
  if (face.support.empty()) throw std::invalid_argument("face_local_max: empty support");
  if (face.support.size() > 1 && !face.spaced)
    throw std::invalid_argument(
        "face_local_max: support sites must be spaced >= M apart (see FaceSpec::make)");
  return evaluate_face(face.support, kernels);
}

std::vector<double> face_equal_fitness_weights(const FaceSpec& face, const KernelSet& kernels,
                                               double total_mass) {
  const FaceSolve sol = solve_face(face.support, kernels, total_mass);
  if (!sol.solved) return {};
  for (double w : sol.weights)
    if (!(w > 0.0)) return {};
  return sol.weights;
}

TwoPointResult two_point_formula(int x, const KernelSet& kernels) {
  if (!kernels.assumption1)
    throw std::invalid_argument("two_point_formula: needs step-cooperation kernels");
  const int m_step = kernels.step_width;
  if (x < -m_step + 1 || x > -1)
    throw std::invalid_argument("two_point_formula: x must lie in [-M+1, -1]");
  TwoPointResult out;
  if (!kernels.space.contains(-x) || !kernels.space.contains(-x + m_step)) {
    out.reason = "support site outside E";
    return out;
  }
  const double b = kernels.step_level;
  const double k1 = kernels.K(-x);
  const double k2 = kernels.K(-x + m_step);
  const double denom = 2.0 * k1 * k2 - b * k1 * k1 - b * k2 * k2;
  if (!(denom > 0.0)) {
    out.reason = "denominator not positive";
    return out;
  }
  out.p = k2 * (k1 - b * k2) / denom;
  out.mbar = k1 * k1 * k2 * k2 * (1.0 - b * b) / denom;
  const double threshold = k1 * k2 * (1.0 + b) / (k1 + k2);
  if (!(b < threshold && kernels.K_or_zero(-x - m_step) < threshold &&
        kernels.K_or_zero(-x + 2 * m_step) < threshold)) {
    out.reason = "neighbor-capacity side condition fails";
    return out;
  }
  out.conditions_ok = true;
  return out;
}

ThreePointResult three_point_formula(int x, const KernelSet& kernels) {
  if (!kernels.assumption1)
    throw std::invalid_argument("three_point_formula: needs step-cooperation kernels");
  const int m_step = kernels.step_width;
  if (x < -m_step + 1 || x > m_step - 1)
    throw std::invalid_argument("three_point_formula: x must lie in [-M+1, M-1]");
  ThreePointResult out;
  if (!kernels.space.contains(x - m_step) || !kernels.space.contains(x + m_step)) {
    out.reason = "support site outside E";
    return out;
  }
  const double b = kernels.step_level;
  const double k1 = kernels.K(x - m_step);
  const double k2 = kernels.K(x);
  const double k3 = kernels.K(x + m_step);

  // evaluated exactly as printed, including the mixed exponents in a
  const double a = k1 * k1 * k2 * k2 + k1 * k1 * k3 * k3 * k3 + k2 * k2 * k3 * k3 * k3;
  const double c = 2.0 * k1 * k2 * k3 * (k1 + k2 + k3) - (1.0 + b) * a;
  if (c > 0.0) {
    out.p = k2 * k3 / c * (k1 * k3 + k1 * k2 - (1.0 + b) * k2 * k3);
    out.q = k1 * k3 / c * (k1 * k2 + k2 * k3 - (1.0 + b) * k1 * k3);
    out.mbar = (2.0 - b - b * b) * k1 * k1 * k2 * k2 * k3 * k3 / c;
  }

  const double neighbor_cap = k1 * k2 * k3 * (2.0 - b - b * b) /
                              ((1.0 - b) * (k1 * k2 + k1 * k3 + k2 * k3));
  const double side = x <= 0 ? (1.0 - b) * (1.0 / k2 + 1.0 / k1) - 1.0 / k3
                             : (1.0 - b) * (1.0 / k2 + 1.0 / k3) - 1.0 / k1;
  if (!(c > 0.0)) {
    out.reason = "c not positive";
  } else if (!(2.0 - b > side)) {
    out.reason = "interiority side condition fails";
  } else if (!(kernels.K_or_zero(x - 2 * m_step) < neighbor_cap &&
               kernels.K_or_zero(x + 2 * m_step) < neighbor_cap)) {
    out.reason = "neighbor-capacity side condition fails";
  } else {
    out.conditions_ok = true;
  }

  const FaceCandidate oracle = evaluate_face({x - m_step, x, x + m_step}, kernels);
  out.oracle_valid = oracle.valid;
  if (oracle.solved) {
    out.oracle_p = oracle.pi.at_site(x - m_step);
    out.oracle_q = oracle.pi.at_site(x);
    out.oracle_mbar = oracle.mbar;
    if (c > 0.0) {
      out.discrepancy = std::max({std::abs(out.p - out.oracle_p), std::abs(out.q - out.oracle_q),
                                  std::abs(out.mbar - out.oracle_mbar)});
      out.flagged = out.discrepancy > 1e-8;
    }
  }
  return out;
}

GapAuditReport gap_audit(const Simplex& pi_hat, const KernelSet& kernels,
                         double support_threshold) {
  const int L = kernels.space.half_width;
  const int m_step = kernels.step_width;
  GapAuditReport out;

  std::vector<int> support;
  for (int x = -L; x <= L; ++x)
    if (pi_hat.at_site(x) > support_threshold) support.push_back(x);
  if (support.size() < 2) return out;

  const auto m = fitness(pi_hat, kernels);
  int donor = support[0];
  for (int s : support)
    if (m[static_cast<std::size_t>(kernels.space.index(s))] <
        m[static_cast<std::size_t>(kernels.space.index(donor))])
      donor = s;
  double support_top = kNegativeInfinity;
  for (int s : support)
    support_top = std::max(support_top, m[static_cast<std::size_t>(kernels.space.index(s))]);

  for (std::size_t i = 0; i + 1 < support.size(); ++i) {
    if (support[i + 1] - support[i] < m_step + 1) continue;
    out.applicable = true;
    for (int y = support[i] + 1; y < support[i + 1]; ++y) {
      const double my = m[static_cast<std::size_t>(kernels.space.index(y))];
      if (my > support_top && (!out.found || my > m[static_cast<std::size_t>(kernels.space.index(
                                                 out.improving_site))])) {
        out.found = true;
        out.gap_left = support[i];
        out.gap_right = support[i + 1];
        out.improving_site = y;
      }
    }
  }
  if (out.found) {
    out.donor_site = donor;
    out.directional_derivative =
        2.0 * (m[static_cast<std::size_t>(kernels.space.index(out.improving_site))] -
               m[static_cast<std::size_t>(kernels.space.index(donor))]);
  }
  return out;
}

std::vector<BoundAuditEntry> bound_audit(const Simplex& pi_hat, const KernelSet& kernels,
                                         const ModelParams& params,
                                         const BoundAuditInputs& inputs) {
  const int L = kernels.space.half_width;
  const int n = kernels.space.size();
  const int m_step = kernels.step_width;
  const double b = kernels.step_level;
  const double mu_tilde = params.mu_tilde();
  const auto m = fitness(pi_hat, kernels);
  const double mbar = mean_fitness(pi_hat, m);
  constexpr double kSlack = 1e-9;  // numerical-stationarity allowance

  std::vector<BoundAuditEntry> ledger;
  auto skip_all = [&](const std::string& reason) {
    for (const char* name :
         {"two-sided-mass", "per-site-mass-cap", "middle-mass", "mean-fitness-floor"})
      ledger.push_back({name, false, reason, false, 0.0});
    return ledger;
  };
  if (!kernels.assumption1) return skip_all("kernels lack the step-cooperation structure");
  if (L < 1) return skip_all("degenerate lattice");

  const double k1 = kernels.K(1);

  {  // two-sided-mass lower bounds
    BoundAuditEntry e{.name = "two-sided-mass"};
    const double d = k1 / ((2.0 * m_step - 1.0) * static_cast<double>(n));
    bool left = false, right = false;
    for (int x = -L; x <= -1; ++x)
      if (pi_hat.at_site(x) > 1.0 / static_cast<double>(n)) left = true;
    for (int x = 1; x <= L; ++x)
      if (pi_hat.at_site(x) > 1.0 / static_cast<double>(n)) right = true;
    if (!(b < 1.0 - 1e-12)) {
      e.skip_reason = "b too close to 1";
    } else if (!(pi_hat.at_site(0) < d)) {
      e.skip_reason = "mass at 0 not small enough";
    } else if (!left && !right) {
      e.skip_reason = "no site carries above-average mass on either side";
    } else {
      e.hypothesis_ok = true;
      double margin = std::numeric_limits<double>::infinity();
      if (left) {
        double rhs_mass = 0.0;
        for (int z = 1; z <= L; ++z) rhs_mass += pi_hat.at_site(z);
        const double bound =
            d * std::min({1.0, 1.0 / (2.0 * (1.0 - b)),
                          (1.0 / k1 - 1.0) / (2.0 * (1.0 - b))});
        margin = std::min(margin, rhs_mass - bound);
      }
      if (right) {
        double lhs_mass = 0.0;
        for (int z = -L; z <= -1; ++z) lhs_mass += pi_hat.at_site(z);
        const double bound = k1 * std::min(1.0 / k1 - 1.0, 1.0) /
                             (2.0 * (1.0 - b) * (2.0 * m_step - 1.0) * static_cast<double>(n));
        margin = std::min(margin, lhs_mass - bound);
      }
      e.margin = margin;
      e.conclusion_ok = margin >= -kSlack;
    }
    ledger.push_back(std::move(e));
  }

  const int p_site = (m_step + 1) / 2;  // ceil(M/2)
  const double cap_hyp_bound =
      kernels.space.contains(p_site)
          ? 4.0 * kernels.K(p_site) * kernels.K(p_site) /
                std::pow(4.0 * L + 2.0, 3)
          : 0.0;

  {  // per-site mass cap
    BoundAuditEntry e{.name = "per-site-mass-cap"};
    const int nn = inputs.n;
    if (!kernels.space.contains(p_site)) {
      e.skip_reason = "ceil(M/2) outside E";
    } else if (nn < 1 || nn > m_step || nn > L) {
      e.skip_reason = "interval parameter n outside [1, min(M, L)]";
    } else if (!(mu_tilde > 0.0)) {
      e.skip_reason = "mu - 2/N not positive";
    } else if (!(mu_tilde <= cap_hyp_bound)) {
      e.skip_reason = "mutation too strong for the mass-cap hypothesis";
    } else {
      const double kp = kernels.K(p_site);
      const double kn = kernels.K(nn);
      const double level = std::pow(mu_tilde * kp / 4.0, 2.0 / 3.0);
      if (!(b + kn < level)) {
        e.skip_reason = "b + K_n not below the required level";
      } else {
        e.hypothesis_ok = true;
        const int l_site = m_step - nn;
        const double bound = mu_tilde / (2.0 * (level - b - kn));
        double margin = std::numeric_limits<double>::infinity();
        for (int x = -L; x <= L; ++x) {
          const int ax = std::abs(x);
          if (ax >= nn || ax <= l_site) margin = std::min(margin, bound - pi_hat.at_site(x));
        }
        e.margin = margin;
        e.conclusion_ok = margin >= -kSlack;
      }
    }
    ledger.push_back(std::move(e));
  }

  {  // middle-mass bound
    BoundAuditEntry e{.name = "middle-mass"};
    const int q_site = m_step / 2;  // floor(M/2)
    const double eps = inputs.epsilon;
    if (q_site < 1 || q_site - 1 > L) {
      e.skip_reason = "floor(M/2) < 1";
    } else {
      const double kq1 = kernels.K(q_site - 1);
      const double eps_max = b * (1.0 - k1) * kq1 / (b * (1.0 - k1) * kq1 + k1);
      double tail = 0.0;
      for (int x = -L; x <= L; ++x)
        if (std::abs(x) >= q_site) tail += pi_hat.at_site(x);
      if (!(tail < eps && eps < eps_max)) {
        e.skip_reason = "epsilon does not separate the tail mass from its cap";
      } else {
        e.hypothesis_ok = true;
        const double denom = b * (1.0 - k1) * kq1 * (1.0 - eps) - k1 * eps;
        double middle = 0.0;
        for (int x = -q_site + 1; x <= q_site - 1; ++x)
          if (x != 0) middle += pi_hat.at_site(x);
        e.margin = mu_tilde / (2.0 * denom) - middle;
        e.conclusion_ok = e.margin >= -kSlack;
      }
    }
    ledger.push_back(std::move(e));
  }

  {  // mean-fitness floor
    BoundAuditEntry e{.name = "mean-fitness-floor"};
    if (!kernels.space.contains(p_site)) {
      e.skip_reason = "ceil(M/2) outside E";
    } else if (!(mu_tilde > 0.0)) {
      e.skip_reason = "mu - 2/N not positive";
    } else if (!(mu_tilde <= cap_hyp_bound)) {
      e.skip_reason = "mutation too strong for the floor hypothesis";
    } else {
      e.hypothesis_ok = true;
      const double floor = std::pow(mu_tilde * kernels.K(p_site) / 4.0, 2.0 / 3.0);
      e.margin = mbar - floor;
      e.conclusion_ok = e.margin >= -kSlack;
    }
    ledger.push_back(std::move(e));
  }
  return ledger;
}

std::optional<StationaryPoint> v_local_max_near(const Simplex& pi_tilde,
                                                const KernelSet& kernels,
                                                const ModelParams& params) {
  params.require_positive_mu_tilde();
  const double mu_tilde = params.mu_tilde();
  const int n = kernels.space.size();
  const double eps = std::min(1e-3, std::sqrt(mu_tilde));

  std::vector<double> start(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    start[static_cast<std::size_t>(i)] =
        (1.0 - eps) * pi_tilde[static_cast<std::size_t>(i)] + eps / static_cast<double>(n);

  std::vector<double> terminal = flow_to_rest(start, kernels, params, 1e-6, 1e6);
  PolishResult pol = newton_polish(terminal, kernels, mu_tilde);
  if (!pol.converged) {
    terminal = flow_to_rest(pol.pi.empty() ? terminal : pol.pi, kernels, params, 1e-9, 1e7);
    pol = newton_polish(terminal, kernels, mu_tilde);
  }
  if (!pol.pi.empty()) terminal = pol.pi;

  StationaryPoint pt = make_point(terminal, kernels, mu_tilde);
  if (sup_distance(pt.pi_hat, Simplex(kernels.space, pi_tilde.weights())) > 0.1)
    return std::nullopt;
  if (pt.classification != StationaryClass::local_max_V) return std::nullopt;
  return pt;
}

BifurcationResult bifurcation_scan(const KernelSet& kernels, const ModelParams& base,
                                   const std::vector<double>& mu_grid) {
  if (mu_grid.size() < 2)
    throw std::invalid_argument("bifurcation_scan: need at least two grid points");
  for (std::size_t i = 1; i < mu_grid.size(); ++i)
    if (!(mu_grid[i] > mu_grid[i - 1]))
      throw std::invalid_argument("bifurcation_scan: mu grid must be strictly increasing");

  if (!(base.sigma > 0.0))
    throw std::invalid_argument("bifurcation_scan: sigma must be positive");

  const Simplex delta0 = Simplex::delta(kernels.space, 0);
  auto has_max = [&](double mu) {
    ModelParams p = base;
    p.mu = mu;
    p.require_positive_mu_tilde();
    // The reversible measure of the particle generator at selection strength
    // sigma is exp((N sigma / 2)[mbar + ((mu - 2/N)/sigma) sum log pi]), so the
    // potential governing delta_0 stability at (sigma, mu, N) is V with the
    // mutation parameter divided by sigma. Rescale before handing the point to
    // the unit-strength potential machinery.
    const double scaled = p.mu_tilde() / base.sigma;
    ModelParams effective = p;
    effective.mu = scaled + 2.0 / static_cast<double>(p.population);
    return v_local_max_near(delta0, kernels, effective).has_value();
  };

  BifurcationResult out;
  for (double mu : mu_grid) out.grid_results.emplace_back(mu, has_max(mu));

  std::size_t flip = out.grid_results.size();
  for (std::size_t i = 0; i + 1 < out.grid_results.size(); ++i) {
    if (out.grid_results[i].second != out.grid_results[i + 1].second) {
      flip = i;
      break;
    }
  }
  if (flip == out.grid_results.size()) {
    out.note = "no bifurcation in range";
    return out;
  }

  double lo = out.grid_results[flip].first;
  double hi = out.grid_results[flip + 1].first;
  const bool lo_has = out.grid_results[flip].second;
  while (hi - lo > 1e-3 * 0.5 * (hi + lo)) {
    const double mid = 0.5 * (lo + hi);
    if (has_max(mid) == lo_has)
      lo = mid;
    else
      hi = mid;
  }
  out.found = true;
  out.mu_low = lo_has ? lo : hi;
  out.mu_high = lo_has ? hi : lo;
  out.mu_star = 0.5 * (lo + hi);
  return out;
}

}  // namespace specsim
