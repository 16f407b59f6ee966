#pragma once

#include <vector>

#include "specsim/core.hpp"
#include "specsim/dd.hpp"
#include "specsim/rng.hpp"

namespace specsim {

enum class FitnessKind { W1, W2 };

// Row-stochastic mutation matrix over E x E.
class MutationMatrix {
 public:
  MutationMatrix(PhenotypeSpace space, std::vector<double> row_major);

  static MutationMatrix identity(PhenotypeSpace space);
  // mu * delta_{-1} + (1 - 2 mu) * delta_0 + mu * delta_{+1}, with reflecting
  // boundary rows so every row still sums to 1.
  static MutationMatrix tridiagonal(PhenotypeSpace space, double mu);

  const PhenotypeSpace& space() const { return space_; }
  double operator()(int from_idx, int to_idx) const {
    return a_[static_cast<std::size_t>(from_idx) * n_ + static_cast<std::size_t>(to_idx)];
  }
  bool is_identity() const { return identity_; }

 private:
  PhenotypeSpace space_;
  std::size_t n_;
  std::vector<double> a_;
  bool identity_ = false;
};

// W1_x = max(0, 1 - (C*pi)_x / K_x);  W2_x = K_x / (C*pi)_x
std::vector<double> fitness_w(const Simplex& pi, const KernelSet& kernels, FitnessKind kind);

// The resampling law p_x = sum_y A(y,x) pi_y W_y / sum_z pi_z W_z.
// Throws std::domain_error when the mean fitness is zero (W1 can reach this
// when competition saturates capacity everywhere).
std::vector<double> resampling_law(const Simplex& pi, const KernelSet& kernels, FitnessKind kind,
                                   const MutationMatrix& a);

Simplex det_map_step(const Simplex& pi, const KernelSet& kernels, FitnessKind kind,
                     const MutationMatrix& a);

// One multinomial(N, p) generation replacement.
PopulationCounts wf_sample_step(const PopulationCounts& counts, const KernelSet& kernels,
                                FitnessKind kind, const MutationMatrix& a, Rng& rng);

struct FixedPointResult {
  Simplex pi_hat;
  bool converged = false;
  int iterations = 0;
  double last_step_distance = 0.0;
  // max - min of W over {x : pi_hat_x > support_threshold}; the condition-(3)
  // residual for A = I
  double condition3_residual = 0.0;
  std::vector<Snapshot> trajectory;  // iterate index stored as time
};

struct FixedPointOptions {
  double tol = 1e-12;
  int max_iter = 200000;
  int snapshot_every = 0;  // 0 = only first and last
  double support_threshold = 1e-9;
};

FixedPointResult iterate_to_fixed_point(const Simplex& pi0, const KernelSet& kernels,
                                        FitnessKind kind, const MutationMatrix& a,
                                        const FixedPointOptions& opt = {});

}  // namespace specsim
