#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "viewpos/geom.hpp"
#include "viewpos/predictor.hpp"
#include "viewpos/registration.hpp"
#include "viewpos/similarity.hpp"
#include "viewpos/volume.hpp"

namespace viewpos {

struct AtlasPrompt {
  const Volume* atlas = nullptr;
  Pose predicted_pose;  // query pose in atlas space
};

struct FineConfig {
  double gamma = 6.0;  // half-range: degrees on angular axes, mm on the offset axis
  int n_normal_candidates = 9;
  double inplane_step_deg = 3.0;
  double trans_step_mm = 2.0;
  int max_iters = 20;
  // When a round finds nothing better, halve gamma and both steps and keep
  // going, at most this many times. 0 keeps the range fixed.
  int refine_levels = 0;

  void validate() const;
};

struct TraceEntry {
  Pose pose;
  double score = 0.0;
};

struct PositionResult {
  Slice slice;
  Pose pose;  // target frame
  double score = 0.0;
  int iterations = 0;
  std::vector<TraceEntry> trace;  // starts with the coarse pose
  Pose coarse_pose;
  std::vector<std::string> warnings;

  nlohmann::json to_json() const;
};

AtlasPrompt make_prompt(const Slice& query, const Volume& atlas, const PosePredictor& predictor);

// Registers atlas onto target and maps the prompt pose through the result.
// A non-converged registration appends to `warnings` (if given).
Pose coarse_position(const AtlasPrompt& prompt, const Volume& target, const RegistrationConfig& reg_cfg,
                     std::vector<std::string>* warnings = nullptr);
// Same with a precomputed atlas -> target transform.
Pose coarse_position(const AtlasPrompt& prompt, const Pose& atlas_to_target);

// p_c first, then cap-spiral normals x in-plane deltas x offset deltas, with
// near-duplicates of p_c dropped.
std::vector<Pose> resample_candidates(const Pose& p_c, const FineConfig& cfg);

PositionResult fine_position(const Slice& query, const Volume& target, const Pose& p_coarse,
                             const FineConfig& cfg, const FeatureExtractor& extractor);

struct PositionConfig {
  RegistrationConfig registration;
  FineConfig fine;
};

// Errors are rethrown as StageError labelled "predict", "coarse" or "fine".
PositionResult position(const Slice& query, const Volume& target, const Volume& atlas,
                        const PosePredictor& predictor, const PositionConfig& cfg,
                        const FeatureExtractor& extractor);

}  // namespace viewpos
