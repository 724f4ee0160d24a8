#include "viewpos/phantom.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <string>

#include "viewpos/error.hpp"
#include "viewpos/parallel.hpp"

namespace viewpos {

namespace {

// Scene coordinates are authored for a 180 mm field of view and scaled to the
// requested grid.
constexpr double kSceneExtent = 180.0;

struct Ellipsoid {
  Vec3 center;
  Vec3 radii;
  Rotation orientation;
  float intensity;
};

const std::array<Ellipsoid, 6>& scene() {
  static const std::array<Ellipsoid, 6> kScene = [] {
    auto axis_rot = [](Vec3 axis, double deg) { return Rotation::about_axis(axis.normalized(), deg_to_rad(deg)); };
    return std::array<Ellipsoid, 6>{{
        // torso shell
        {Vec3(0, 0, 0), Vec3(80, 68, 74), Rotation::about_z(deg_to_rad(10)), 0.2f},
        // myocardium-like block
        {Vec3(10, -4, 6), Vec3(44, 36, 40), axis_rot(Vec3(1, 1, 0.3), 35), 0.45f},
        // left chamber
        {Vec3(22, -10, 12), Vec3(17, 13, 24), axis_rot(Vec3(0.3, 1, 0.2), 40), 0.95f},
        // right chamber
        {Vec3(-6, 10, 4), Vec3(21, 11, 17), axis_rot(Vec3(1, 0, 0.5), -25), 0.75f},
        // atrium
        {Vec3(6, 14, -22), Vec3(15, 12, 10), Rotation::identity(), 0.6f},
        // spine
        {Vec3(-4, -56, -6), Vec3(9, 10, 62), Rotation::about_x(deg_to_rad(8)), 1.0f},
    }};
  }();
  return kScene;
}

// Approximate signed distance (scene units) to an ellipsoid surface via the
// first-order expansion of the normalized radius q around q = 1.
double signed_distance(const Ellipsoid& e, const Vec3& y) {
  const Vec3 local = e.orientation.matrix().transpose() * (y - e.center);
  const Vec3 m = local.cwiseQuotient(e.radii);
  const double q = m.norm();
  if (q < 1e-12) return -e.radii.minCoeff();
  const Vec3 grad = m.cwiseQuotient(e.radii) / q;
  return (q - 1.0) / grad.norm();
}

float scene_value(const Vec3& y, double edge) {
  float value = 0.0f;
  for (const auto& e : scene()) {
    if ((y - e.center).norm() > e.radii.maxCoeff() + edge) continue;
    const double d = signed_distance(e, y);
    const double w = std::clamp(0.5 - d / edge, 0.0, 1.0);
    if (w > 0.0) value = static_cast<float>(value * (1.0 - w) + e.intensity * w);
  }
  return value;
}

std::mt19937_64 subject_rng(std::uint64_t seed, int index, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(stream)};
  return std::mt19937_64(seq);
}

}  // namespace

void PhantomParams::validate() const {
  if (n_subjects < 1) throw UsageError("phantom cohort needs n_subjects >= 1");
  for (int d : dims) {
    if (d < 2) throw UsageError("phantom dims must be >= 2");
  }
  if (!(spacing > 0.0)) throw UsageError("phantom spacing must be positive");
  if (jitter_rot_max_deg < 0.0 || jitter_rot_max_deg > 30.0) {
    throw UsageError("jitter_rot_max must lie in [0, 30] degrees");
  }
  const double min_extent = *std::min_element(dims.begin(), dims.end()) * spacing;
  if (jitter_trans_max_mm < 0.0 || jitter_trans_max_mm > 0.1 * min_extent) {
    throw UsageError("jitter_trans_max must lie in [0, 0.1 * extent]");
  }
  if (intensity_noise_sd < 0.0) throw UsageError("intensity noise sd must be >= 0");
  const auto [lo, hi] = shape_scale_range;
  if (lo > hi || lo < 0.8 || hi > 1.2) {
    throw UsageError("shape_scale_range must be an ordered pair inside [0.8, 1.2]");
  }
}

Volume render_scene(Dims dims, double spacing, const Pose& jitter, const Vec3& scale,
                    double noise_sd, std::uint64_t noise_seed) {
  const double unit = *std::min_element(dims.begin(), dims.end()) * spacing / kSceneExtent;
  const double edge = std::max(2.0, 1.5 * spacing / unit);
  const Vec3 half((dims[0] - 1) / 2.0, (dims[1] - 1) / 2.0, (dims[2] - 1) / 2.0);
  const Mat3 rt = jitter.rotation.matrix().transpose();

  std::vector<float> data(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2]);
  parallel_for(static_cast<std::size_t>(dims[2]), [&](std::size_t k) {
    for (int j = 0; j < dims[1]; ++j) {
      for (int i = 0; i < dims[0]; ++i) {
        const Vec3 x = (Vec3(i, j, static_cast<double>(k)) - half) * spacing;
        const Vec3 y = (rt * (x - jitter.translation)).cwiseQuotient(scale) / unit;
        data[i + static_cast<std::size_t>(dims[0]) * (j + static_cast<std::size_t>(dims[1]) * k)] =
            scene_value(y, edge);
      }
    }
  });

  if (noise_sd > 0.0) {
    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> noise(0.0, noise_sd);
    for (float& v : data) v = static_cast<float>(std::clamp(v + noise(rng), 0.0, 1.0));
  }
  return Volume(dims, spacing, std::move(data));
}

PhantomSubject make_phantom(const PhantomParams& params, int subject_index) {
  params.validate();
  if (subject_index < 0 || subject_index >= params.n_subjects) {
    throw UsageError("subject index " + std::to_string(subject_index) + " outside cohort of " +
                     std::to_string(params.n_subjects));
  }
  auto rng = subject_rng(params.seed, subject_index, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  Vec3 axis(gauss(rng), gauss(rng), gauss(rng));
  if (axis.norm() < 1e-12) axis = Vec3::UnitZ();
  const double angle = deg_to_rad(params.jitter_rot_max_deg) * unit(rng);
  Pose jitter;
  jitter.rotation = Rotation::about_axis(axis.normalized(), angle);
  for (int a = 0; a < 3; ++a) jitter.translation[a] = params.jitter_trans_max_mm * (2.0 * unit(rng) - 1.0);

  Vec3 scale;
  const auto [lo, hi] = params.shape_scale_range;
  for (int a = 0; a < 3; ++a) scale[a] = lo + (hi - lo) * unit(rng);

  const std::uint64_t noise_seed = subject_rng(params.seed, subject_index, 1)();
  Volume v = render_scene(params.dims, params.spacing, jitter, scale, params.intensity_noise_sd, noise_seed);
  return PhantomSubject{std::move(v), jitter, scale};
}

std::vector<PhantomSubject> make_cohort(const PhantomParams& params) {
  params.validate();
  std::vector<PhantomSubject> out;
  out.reserve(static_cast<std::size_t>(params.n_subjects));
  for (int i = 0; i < params.n_subjects; ++i) out.push_back(make_phantom(params, i));
  return out;
}

}  // namespace viewpos
