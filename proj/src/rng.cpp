#include "holiv/rng.hpp"

#include <cmath>

namespace holiv::rng {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t splitmix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  return h;
}

}  // namespace

Stream::Stream(std::uint64_t seed, std::string_view stage)
    : base_(splitmix64(seed ^ splitmix64(fnv1a(stage)))) {}

std::uint64_t Stream::next_u64() {
  ++counter_;
  return splitmix64(base_ + counter_ * kGolden);
}

double Stream::uniform() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

double Stream::normal() {
  if (have_cached_normal_) {
    have_cached_normal_ = false;
    return cached_normal_;
  }
  // Box-Muller; u1 kept away from zero so the log is finite.
  double u1 = uniform();
  if (u1 < 1e-300) u1 = 1e-300;
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 6.283185307179586476925286766559 * u2;
  cached_normal_ = r * std::sin(a);
  have_cached_normal_ = true;
  return r * std::cos(a);
}

std::complex<double> Stream::cnormal() {
  const double re = normal();
  const double im = normal();
  return {re * 0.7071067811865475244, im * 0.7071067811865475244};
}

int Stream::uniform_int(int lo, int hi) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
  return lo + static_cast<int>(next_u64() % span);
}

matalg::CMatrix Stream::gaussian(int rows, int cols) {
  matalg::CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = cnormal();
  return m;
}

matalg::CMatrix Stream::skew_hermitian(int n, double scale) {
  matalg::CMatrix g = gaussian(n, n);
  return scale * 0.5 * (g - g.adjoint());
}

matalg::UnitaryMatrix Stream::haar_unitary(int n) {
  for (;;) {
    matalg::CMatrix g = gaussian(n, n);
    try {
      return matalg::polar_unitary(g, 1e-8);
    } catch (const Error&) {
      // vanishingly unlikely singular draw; redraw deterministically
      continue;
    }
  }
}

}  // namespace holiv::rng
