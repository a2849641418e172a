#include "nsp/decorrelate.hpp"

#include <string>

#include "nsp/core.hpp"

namespace nsp {

int Dpcm2::forward(int x) {
  const int e = x - (2 * x1_ - x2_);
  x2_ = x1_;
  x1_ = x;
  return e;
}

int Dpcm2::inverse(int e) {
  const int x = e + 2 * x1_ - x2_;
  if (!in_sample_range(x))
    throw Error(Errc::corrupt_stream, "DPCM2 reconstruction " + std::to_string(x) + " out of range");
  x2_ = x1_;
  x1_ = x;
  return x;
}

}  // namespace nsp
