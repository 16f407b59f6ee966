#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>
#include <vector>

namespace specsim {

// 64-bit mixer from splitmix64; used both as a stream generator and as the
// seed-derivation primitive so that derived streams are decorrelated.
constexpr std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a64(std::string_view data);

// Deterministic, collision-resistant derivation of a per-(replica, stream)
// seed from a master seed. Distinct tags keep the event-clock, event-choice
// and mutation-displacement streams independent.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t replica_index,
                          std::string_view stream_tag);

// xoshiro256** with hand-rolled double/normal/gamma transforms.
// std::<distribution> implementations are not pinned by the standard, so we
// avoid them everywhere reproducibility is promised.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // uniform in [0, 1)
  double uniform();
  // uniform in (0, 1)
  double uniform_open();
  double exponential(double rate);
  double normal(double mean = 0.0, double stddev = 1.0);
  double gamma(double shape);                         // scale 1
  // index in [0, n) proportional to weights[i]; weights need not be normalized
  std::size_t categorical(const double* weights, std::size_t n, double total);
  std::vector<double> dirichlet(const std::vector<double>& alpha);

 private:
  std::uint64_t s_[4];
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace specsim
