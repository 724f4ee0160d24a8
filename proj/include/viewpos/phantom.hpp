#pragma once

// Deterministic synthetic cohorts. Every subject renders one fixed canonical
// scene (a torso-like shell around an asymmetric cluster of chamber-like
// ellipsoids) after a per-subject anisotropic scale and rigid jitter, so the
// returned jitter pose is exact ground truth: canonical point y appears at
// jitter.apply(scale * y) in the subject volume.

#include <cstdint>
#include <utility>
#include <vector>

#include "viewpos/geom.hpp"
#include "viewpos/volume.hpp"

namespace viewpos {

struct PhantomParams {
  std::uint64_t seed = 0;
  int n_subjects = 1;
  Dims dims{180, 180, 180};
  double spacing = 1.0;
  double jitter_rot_max_deg = 0.0;
  double jitter_trans_max_mm = 0.0;
  double intensity_noise_sd = 0.0;
  std::pair<double, double> shape_scale_range{1.0, 1.0};

  // Throws UsageError when a field is outside its allowed range.
  void validate() const;
};

struct PhantomSubject {
  Volume volume;
  Pose jitter;                 // canonical frame -> subject frame
  Vec3 scale = Vec3::Ones();   // per-axis, applied before the jitter
};

PhantomSubject make_phantom(const PhantomParams& params, int subject_index);
std::vector<PhantomSubject> make_cohort(const PhantomParams& params);

// Renders the canonical scene with an explicit jitter and scale; make_phantom
// draws those from the seed and calls this.
Volume render_scene(Dims dims, double spacing, const Pose& jitter, const Vec3& scale,
                    double noise_sd, std::uint64_t noise_seed);

}  // namespace viewpos
