#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "udr/matrix.hpp"

namespace udr {

/// Seeded pseudo-random stream.
///
/// Generator: xoshiro256** with its 256-bit state expanded from the 64-bit
/// seed by splitmix64. Uniforms take the top 53 bits; normals come from the
/// Box-Muller transform (both values of each pair are used, in order).
/// Equal seeds give equal sequences at equal draw order on any platform
/// with IEEE doubles and a correctly rounded libm.
///
/// A stream is single-owner. Parallel work derives independent streams with
/// `child(index)`, which seeds a new stream at `seed + index`.
class RngStream {
 public:
  static constexpr std::string_view kAlgorithm = "xoshiro256**/splitmix64+box-muller";

  explicit RngStream(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }
  RngStream child(std::uint64_t index) const { return RngStream(seed_ + index); }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);
  double normal();

 private:
  std::uint64_t seed_;
  std::array<std::uint64_t, 4> s_{};
  std::optional<double> spare_normal_;
};

/// One Gamma(shape, rate) draw (mean shape / rate), Marsaglia-Tsang.
double gamma_draw(RngStream& rng, double shape, double rate);

/// n i.i.d. Gamma(shape, rate) draws. Rejects non-positive parameters.
std::vector<double> sample_gamma(RngStream& rng, double shape, double rate, std::size_t n);

/// n x d matrix of i.i.d. standard normals, filled row by row.
Matrix sample_gaussian(RngStream& rng, std::size_t n, std::size_t d);

std::vector<double> sample_uniform(RngStream& rng, std::size_t n, double lo = 0.0,
                                   double hi = 1.0);

/// In-place Fisher-Yates shuffle.
void shuffle(RngStream& rng, std::vector<std::size_t>& index);

/// splitmix64 finalizer; used to mix seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace udr
