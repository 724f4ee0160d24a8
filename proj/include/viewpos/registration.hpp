#pragma once

#include <optional>

#include "viewpos/geom.hpp"
#include "viewpos/volume.hpp"

namespace viewpos {

enum class Metric { NCC, MSE };

struct RegistrationConfig {
  int pyramid_levels = 3;         // factors 2^(levels-1) ... 1
  Metric metric = Metric::NCC;
  double rot_search_deg = 15.0;   // grid seeding bound per rotvec axis
  double trans_search_mm = 10.0;  // grid seeding bound per translation axis
  int local_opt_iters = 200;      // Nelder-Mead iterations per level
  double convergence_tol = 1e-6;  // metric units
  // Skip grid seeding and refine from `initial` only.
  bool global_search = true;
  std::optional<Pose> initial;

  void validate() const;
};

struct RegistrationResult {
  Pose rt;  // moving -> fixed: resample_volume(moving, rt) lands on fixed
  double score = 0.0;
  bool converged = false;
};

// Pearson correlation over all voxels; 0 if either side is constant.
// Throws ShapeError on dim mismatch.
double ncc(const Volume& a, const Volume& b);

// Similarity between fixed(x) and moving(rt^-1 x) over fixed voxels whose
// pull-back lands inside the moving hull. Higher is better: NCC, or negated
// mean squared difference. `stride` subsamples the fixed grid.
double registration_score(const Volume& moving, const Volume& fixed, const Pose& rt, Metric metric,
                          int stride = 1);

// Multi-resolution rigid registration. Throws NumericError if the metric goes
// non-finite. If nothing beats the identity (or cfg.initial) the start pose is
// returned with converged = false.
RegistrationResult register_rigid(const Volume& moving, const Volume& fixed,
                                  const RegistrationConfig& cfg = {});

}  // namespace viewpos
