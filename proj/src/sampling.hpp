#pragma once

#include "viewpos/volume.hpp"

namespace viewpos::detail {

// Trilinear lookup in continuous voxel coordinates. Points outside
// [0, n-1] on any axis return kFillValue.
class Sampler {
 public:
  explicit Sampler(const Volume& v)
      : data_(v.data().data()),
        nx_(v.dims()[0]),
        ny_(v.dims()[1]),
        nz_(v.dims()[2]),
        sx_(1),
        sy_(static_cast<std::ptrdiff_t>(nx_)),
        sz_(static_cast<std::ptrdiff_t>(nx_) * ny_) {}

  bool inside(double x, double y, double z) const {
    return x >= 0.0 && y >= 0.0 && z >= 0.0 && x <= nx_ - 1 && y <= ny_ - 1 && z <= nz_ - 1;
  }

  float operator()(double x, double y, double z) const {
    if (!inside(x, y, z)) return kFillValue;
    return interpolate(x, y, z);
  }

  // Caller guarantees inside(x, y, z).
  float interpolate(double x, double y, double z) const {
    int i = static_cast<int>(x);
    int j = static_cast<int>(y);
    int k = static_cast<int>(z);
    if (i > nx_ - 2) i = nx_ - 2;
    if (j > ny_ - 2) j = ny_ - 2;
    if (k > nz_ - 2) k = nz_ - 2;
    const double fx = x - i, fy = y - j, fz = z - k;
    const float* p = data_ + i * sx_ + j * sy_ + k * sz_;
    const double c00 = p[0] + fx * (p[sx_] - p[0]);
    const double c10 = p[sy_] + fx * (p[sy_ + sx_] - p[sy_]);
    const double c01 = p[sz_] + fx * (p[sz_ + sx_] - p[sz_]);
    const double c11 = p[sz_ + sy_] + fx * (p[sz_ + sy_ + sx_] - p[sz_ + sy_]);
    const double c0 = c00 + fy * (c10 - c00);
    const double c1 = c01 + fy * (c11 - c01);
    return static_cast<float>(c0 + fz * (c1 - c0));
  }

 private:
  const float* data_;
  int nx_, ny_, nz_;
  std::ptrdiff_t sx_, sy_, sz_;
};

}  // namespace viewpos::detail
