#pragma once

#include <span>
#include <utility>
#include <vector>

#include "viewpos/registration.hpp"
#include "viewpos/volume.hpp"

namespace viewpos {

struct AtlasBuild {
  Volume atlas;                       // L x L x L, intensities in [0, 1]
  std::vector<Pose> subject_transforms;  // subject -> atlas
  int iterations_run = 0;
  // Mean subject-to-reference NCC; entry 0 is the initial center-aligned mean.
  std::vector<double> mean_ncc;
  // Per iteration, the subjects whose registration failed and were left out
  // of that iteration's mean.
  std::vector<std::vector<int>> excluded;
};

struct AtlasOptions {
  int size = 180;        // L, voxels per side
  int max_iters = 5;
  double min_improvement = 1e-4;
  RegistrationConfig registration;
};

// Multi-iteration averaging. Iteration 0 averages the standardized,
// center-aligned cohort. Each later iteration registers every subject except
// subject 0 (which fixes the atlas frame) to the mean of the others,
// warm-started from its previous transform and kept only if that correlation
// improves, then the reference becomes the mean of all aligned subjects.
// Atlas spacing is the first subject's extent divided by L.
AtlasBuild build_atlas(std::span<const Volume> cohort, const AtlasOptions& opts);

// Registers v onto the atlas and resamples it on the atlas grid.
std::pair<Volume, Pose> align_to_atlas(const Volume& v, const Volume& atlas,
                                       const RegistrationConfig& cfg = {});

}  // namespace viewpos
