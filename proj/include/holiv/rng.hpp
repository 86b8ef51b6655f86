#pragma once

#include <complex>
#include <cstdint>
#include <string_view>

#include "holiv/matalg.hpp"

namespace holiv::rng {

// Counter-based generator: the output at draw i is a pure function of
// (seed, stage name, i), so results are independent of evaluation order and
// identical across runs and platforms. Distributions are hand-pinned
// (Box-Muller for normals) instead of std:: ones, whose outputs vary by
// standard library.
class Stream {
 public:
  Stream(std::uint64_t seed, std::string_view stage);

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double normal();
  std::complex<double> cnormal();
  int uniform_int(int lo, int hi);  // inclusive bounds

  matalg::CMatrix gaussian(int rows, int cols);
  matalg::CMatrix skew_hermitian(int n, double scale);
  matalg::UnitaryMatrix haar_unitary(int n);

 private:
  std::uint64_t base_ = 0;
  std::uint64_t counter_ = 0;
  bool have_cached_normal_ = false;
  double cached_normal_ = 0.0;
};

}  // namespace holiv::rng
