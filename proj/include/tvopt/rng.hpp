#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include <Eigen/Dense>

namespace tvopt {

// SplitMix64 finalizer (Steele, Lea & Flood). Bijective 64-bit mix.
std::uint64_t splitmix64_mix(std::uint64_t z);

// FNV-1a 64-bit hash, used to fold experiment ids into seeds.
std::uint64_t fnv1a64(std::string_view text);

// Deterministic random source: xoshiro256** whose 256-bit state is filled by
// a SplitMix64 sequence started at mix(seed) ^ mix(stream + golden). Normals
// come from the Marsaglia polar method and uniforms from the top 53 bits, so
// identical (seed, stream) pairs reproduce identical draws on any IEEE-754
// platform with a correctly rounded sqrt/log.
class SeededRng {
 public:
  static constexpr std::string_view kAlgorithm = "xoshiro256**/splitmix64/marsaglia-polar";

  SeededRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

  std::uint64_t next_u64();
  // Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();

  Eigen::VectorXd normal_vector(Eigen::Index n);
  // Draw from N(0, F F^T) given a factor F.
  Eigen::VectorXd gaussian(const Eigen::MatrixXd& factor);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::array<std::uint64_t, 4> s_{};
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace tvopt
