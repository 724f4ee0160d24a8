#include "viewpos/volume.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "viewpos/error.hpp"
#include "viewpos/parallel.hpp"
#include "sampling.hpp"

namespace viewpos {

namespace {

void check_dims(const Dims& dims, double spacing) {
  for (int d : dims) {
    if (d < 2) throw UsageError("volume dims must all be >= 2");
  }
  if (!(spacing > 0.0) || !std::isfinite(spacing)) {
    throw UsageError("volume spacing must be positive");
  }
}

std::size_t voxel_count(const Dims& d) {
  return static_cast<std::size_t>(d[0]) * static_cast<std::size_t>(d[1]) *
         static_cast<std::size_t>(d[2]);
}

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    k[i + radius] = std::exp(-0.5 * (i * i) / (sigma * sigma));
    sum += k[i + radius];
  }
  for (double& w : k) w /= sum;
  return k;
}

// Blur along one axis with clamped borders.
std::vector<float> blur_axis(const std::vector<float>& in, const Dims& d, int axis,
                             const std::vector<double>& k) {
  std::vector<float> out(in.size());
  const int radius = static_cast<int>(k.size() / 2);
  const std::size_t stride = axis == 0 ? 1 : axis == 1 ? d[0] : static_cast<std::size_t>(d[0]) * d[1];
  const int n = d[axis];
  const int nz = d[2];
  parallel_for(static_cast<std::size_t>(nz), [&](std::size_t kz) {
    for (int j = 0; j < d[1]; ++j) {
      for (int i = 0; i < d[0]; ++i) {
        const int pos = axis == 0 ? i : axis == 1 ? j : static_cast<int>(kz);
        const std::size_t base = i + static_cast<std::size_t>(d[0]) * (j + static_cast<std::size_t>(d[1]) * kz);
        const std::size_t line0 = base - static_cast<std::size_t>(pos) * stride;
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t) {
          const int q = std::clamp(pos + t, 0, n - 1);
          acc += k[t + radius] * in[line0 + static_cast<std::size_t>(q) * stride];
        }
        out[base] = static_cast<float>(acc);
      }
    }
  });
  return out;
}

}  // namespace

Volume::Volume(Dims dims, double spacing, std::vector<float> data)
    : dims_(dims), spacing_(spacing), data_(std::move(data)) {
  check_dims(dims_, spacing_);
  if (data_.size() != voxel_count(dims_)) {
    throw UsageError("volume data size " + std::to_string(data_.size()) +
                     " does not match dims");
  }
  for (float x : data_) {
    if (!std::isfinite(x)) throw UsageError("volume contains non-finite samples");
  }
}

Volume::Volume(Dims dims, double spacing, float fill) : dims_(dims), spacing_(spacing) {
  check_dims(dims_, spacing_);
  if (!std::isfinite(fill)) throw UsageError("non-finite fill value");
  data_.assign(voxel_count(dims_), fill);
}

Vec3 Volume::world(int i, int j, int k) const {
  return Vec3((i - (dims_[0] - 1) / 2.0) * spacing_, (j - (dims_[1] - 1) / 2.0) * spacing_,
              (k - (dims_[2] - 1) / 2.0) * spacing_);
}

Vec3 Volume::to_index(const Vec3& p) const {
  return Vec3(p.x() / spacing_ + (dims_[0] - 1) / 2.0, p.y() / spacing_ + (dims_[1] - 1) / 2.0,
              p.z() / spacing_ + (dims_[2] - 1) / 2.0);
}

double Volume::extent() const {
  return *std::max_element(dims_.begin(), dims_.end()) * spacing_;
}

void Slice::validate() const {
  geometry.validate();
  if (data.size() != static_cast<std::size_t>(geometry.width) * geometry.height) {
    throw ShapeError("slice data does not match its geometry");
  }
  for (float x : data) {
    if (!std::isfinite(x)) throw ShapeError("slice contains non-finite values");
  }
}

float sample_trilinear(const Volume& v, const Vec3& point) {
  const detail::Sampler s(v);
  const Vec3 idx = v.to_index(point);
  return s(idx.x(), idx.y(), idx.z());
}

Slice extract_slice(const Volume& v, const Pose& p, const SliceGeometry& g) {
  g.validate();
  Slice out;
  out.geometry = g;
  out.pose = p;
  out.data.resize(static_cast<std::size_t>(g.width) * g.height);

  const detail::Sampler s(v);
  const Vec3 origin = v.to_index(slice_point(p, g, 0.0, 0.0));
  const Vec3 dcol = p.rotation * Vec3(g.spacing / v.spacing(), 0.0, 0.0);
  const Vec3 drow = p.rotation * Vec3(0.0, -g.spacing / v.spacing(), 0.0);
  for (int row = 0; row < g.height; ++row) {
    const Vec3 start = origin + row * drow;
    float* dst = out.data.data() + static_cast<std::size_t>(row) * g.width;
    for (int col = 0; col < g.width; ++col) {
      const Vec3 q = start + col * dcol;
      dst[col] = s(q.x(), q.y(), q.z());
    }
  }
  return out;
}

Volume resample_volume(const Volume& v, const Pose& rt, Dims out_dims, double out_spacing) {
  check_dims(out_dims, out_spacing);
  std::vector<float> out(voxel_count(out_dims));
  const detail::Sampler s(v);
  const Pose inv = rt.inverse();
  const Vec3 di = inv.rotation * Vec3(out_spacing / v.spacing(), 0.0, 0.0);
  const Vec3 half((out_dims[0] - 1) / 2.0, (out_dims[1] - 1) / 2.0, (out_dims[2] - 1) / 2.0);
  parallel_for(static_cast<std::size_t>(out_dims[2]), [&](std::size_t k) {
    for (int j = 0; j < out_dims[1]; ++j) {
      const Vec3 x0 = (Vec3(0.0, j, static_cast<double>(k)) - half) * out_spacing;
      const Vec3 start = v.to_index(inv.apply(x0));
      float* dst = out.data() + static_cast<std::size_t>(out_dims[0]) *
                                    (j + static_cast<std::size_t>(out_dims[1]) * k);
      for (int i = 0; i < out_dims[0]; ++i) {
        const Vec3 q = start + i * di;
        dst[i] = s(q.x(), q.y(), q.z());
      }
    }
  });
  return Volume(out_dims, out_spacing, std::move(out));
}

Volume downsample(const Volume& v, int factor) {
  if (factor < 1) throw UsageError("downsample factor must be >= 1");
  if (factor == 1) return v;
  const auto kernel = gaussian_kernel(0.5 * factor);
  std::vector<float> buf(v.data().begin(), v.data().end());
  for (int axis = 0; axis < 3; ++axis) buf = blur_axis(buf, v.dims(), axis, kernel);
  const Volume blurred(v.dims(), v.spacing(), std::move(buf));
  Dims out;
  for (int a = 0; a < 3; ++a) out[a] = std::max(2, (v.dims()[a] - 1) / factor + 1);
  return resample_volume(blurred, Pose::identity(), out, v.spacing() * factor);
}

Volume standardize(const Volume& v) {
  const auto d = v.data();
  double sum = 0.0, sq = 0.0;
  for (float x : d) {
    sum += x;
    sq += static_cast<double>(x) * x;
  }
  const double n = static_cast<double>(d.size());
  const double mean = sum / n;
  const double var = std::max(0.0, sq / n - mean * mean);
  const double sd = std::sqrt(var);
  std::vector<float> out(d.size(), 0.0f);
  if (sd > 1e-12) {
    for (std::size_t i = 0; i < d.size(); ++i) out[i] = static_cast<float>((d[i] - mean) / sd);
  }
  return Volume(v.dims(), v.spacing(), std::move(out));
}

Volume rescale_unit(const Volume& v) {
  const auto d = v.data();
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  const double span = static_cast<double>(*hi) - *lo;
  std::vector<float> out(d.size(), 0.0f);
  if (span > 0.0) {
    for (std::size_t i = 0; i < d.size(); ++i) out[i] = static_cast<float>((d[i] - *lo) / span);
  }
  return Volume(v.dims(), v.spacing(), std::move(out));
}

}  // namespace viewpos
