#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "viewpos/geom.hpp"

namespace viewpos {

using Dims = std::array<int, 3>;

// 3D scalar grid centered on the origin. Voxel (i,j,k) sits at
// ((i-(nx-1)/2)s, (j-(ny-1)/2)s, (k-(nz-1)/2)s); data is x-fastest.
class Volume {
 public:
  // Throws UsageError for dims < 2, spacing <= 0, size mismatch or
  // non-finite samples.
  Volume(Dims dims, double spacing, std::vector<float> data);
  Volume(Dims dims, double spacing, float fill = 0.0f);

  const Dims& dims() const { return dims_; }
  double spacing() const { return spacing_; }
  std::size_t size() const { return data_.size(); }
  std::span<const float> data() const { return data_; }

  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims_[1]) * k);
  }
  float at(int i, int j, int k) const { return data_[index(i, j, k)]; }

  Vec3 world(int i, int j, int k) const;
  // Continuous voxel coordinates of a physical point.
  Vec3 to_index(const Vec3& p) const;
  // Physical edge length along the largest axis (n * spacing).
  double extent() const;

 private:
  Dims dims_;
  double spacing_;
  std::vector<float> data_;
};

// Fill value for samples outside the voxel hull.
inline constexpr float kFillValue = 0.0f;

struct Slice {
  SliceGeometry geometry;
  std::vector<float> data;  // row-major, data[row * width + col]
  std::optional<Pose> pose;
  std::string source;  // file the slice was loaded from, if any

  float at(int col, int row) const { return data[static_cast<std::size_t>(row) * geometry.width + col]; }
  // Throws ShapeError if data does not match geometry or has non-finite values.
  void validate() const;
};

float sample_trilinear(const Volume& v, const Vec3& point);

Slice extract_slice(const Volume& v, const Pose& p, const SliceGeometry& g);

// Pull-back resampling: out(x) = v(rt^-1 x) on a centered grid.
Volume resample_volume(const Volume& v, const Pose& rt, Dims out_dims, double out_spacing);
inline Volume resample_volume(const Volume& v, const Pose& rt) {
  return resample_volume(v, rt, v.dims(), v.spacing());
}

// Separable Gaussian blur (sigma in voxels) followed by centered resampling
// at factor-times coarser spacing. factor == 1 returns a copy.
Volume downsample(const Volume& v, int factor);

// Voxelwise x -> (x - mean) / sd over the whole grid; constant volumes map to 0.
Volume standardize(const Volume& v);

// Affine rescale onto [0, 1]; constant volumes map to 0.
Volume rescale_unit(const Volume& v);

}  // namespace viewpos
