#include "udr/rng.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace udr {

namespace {

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed) : seed_(seed) {
  std::uint64_t z = seed;
  for (auto& word : s_) {
    word = mix64(z);
    z += 0x9e3779b97f4a7c15ULL;
  }
}

std::uint64_t RngStream::next_u64() {
  const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double RngStream::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::below(std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("RngStream::below: bound must be positive");
  // Lemire's multiply-shift with rejection.
  std::uint64_t x = next_u64();
  __uint128_t m = static_cast<__uint128_t>(x) * bound;
  auto low = static_cast<std::uint64_t>(m);
  if (low < bound) {
    const std::uint64_t threshold = -bound % bound;
    while (low < threshold) {
      x = next_u64();
      m = static_cast<__uint128_t>(x) * bound;
      low = static_cast<std::uint64_t>(m);
    }
  }
  return static_cast<std::uint64_t>(m >> 64);
}

double RngStream::normal() {
  if (spare_normal_) {
    const double v = *spare_normal_;
    spare_normal_.reset();
    return v;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_normal_ = radius * std::sin(angle);
  return radius * std::cos(angle);
}

double gamma_draw(RngStream& rng, double shape, double rate) {
  if (shape < 1.0) {
    // Boost: X ~ Ga(shape + 1) then X * U^(1/shape) ~ Ga(shape).
    const double x = gamma_draw(rng, shape + 1.0, rate);
    return x * std::pow(rng.uniform(), 1.0 / shape);
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

std::vector<double> sample_gamma(RngStream& rng, double shape, double rate, std::size_t n) {
  if (!(shape > 0.0) || !(rate > 0.0)) {
    throw std::invalid_argument("sample_gamma: shape and rate must be positive (got shape=" +
                                std::to_string(shape) + ", rate=" + std::to_string(rate) + ")");
  }
  if (n == 0) throw std::invalid_argument("sample_gamma: n must be at least 1");
  std::vector<double> out(n);
  for (auto& v : out) v = gamma_draw(rng, shape, rate);
  return out;
}

Matrix sample_gaussian(RngStream& rng, std::size_t n, std::size_t d) {
  if (n == 0 || d == 0) throw std::invalid_argument("sample_gaussian: n and d must be >= 1");
  Matrix out(n, d);
  for (double& v : out.data()) v = rng.normal();
  return out;
}

std::vector<double> sample_uniform(RngStream& rng, std::size_t n, double lo, double hi) {
  if (!(lo < hi)) throw std::invalid_argument("sample_uniform: need lo < hi");
  std::vector<double> out(n);
  for (auto& v : out) v = lo + (hi - lo) * rng.uniform();
  return out;
}

void shuffle(RngStream& rng, std::vector<std::size_t>& index) {
  for (std::size_t i = index.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(index[i - 1], index[j]);
  }
}

}  // namespace udr
