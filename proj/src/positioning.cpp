#include "viewpos/positioning.hpp"

#include <cmath>

#include <spdlog/spdlog.h>

#include "viewpos/error.hpp"
#include "viewpos/io.hpp"
#include "viewpos/parallel.hpp"

namespace viewpos {

namespace {

constexpr double kStopTol = 1e-9;
constexpr double kDuplicateTol = 1e-9;

bool same_pose(const Pose& a, const Pose& b) {
  return (a.rotation.matrix() - b.rotation.matrix()).norm() <= kDuplicateTol &&
         (a.translation - b.translation).norm() <= kDuplicateTol;
}

// Deltas k*step for integer k with |k*step| <= limit, ordered from -limit up.
std::vector<double> symmetric_steps(double limit, double step) {
  const int k = static_cast<int>(std::floor(limit / step + 1e-9));
  std::vector<double> out;
  for (int i = -k; i <= k; ++i) out.push_back(i * step);
  return out;
}

template <typename F>
auto staged(const char* stage, F&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

}  // namespace

void FineConfig::validate() const {
  if (!(gamma > 0.0)) throw UsageError("fine gamma must be > 0");
  if (n_normal_candidates < 1) throw UsageError("n_normal_candidates must be >= 1");
  if (!(inplane_step_deg > 0.0) || !(trans_step_mm > 0.0)) throw UsageError("fine steps must be > 0");
  if (max_iters < 1) throw UsageError("max_iters must be >= 1");
  if (refine_levels < 0) throw UsageError("refine_levels must be >= 0");
}

nlohmann::json PositionResult::to_json() const {
  nlohmann::json tr = nlohmann::json::array();
  for (const auto& e : trace) tr.push_back({{"pose", pose_to_json(e.pose)}, {"score", e.score}});
  nlohmann::json j{{"pose", pose_to_json(pose)},
                   {"score", score},
                   {"coarse_pose", pose_to_json(coarse_pose)},
                   {"iterations", iterations},
                   {"trace", tr}};
  if (!warnings.empty()) j["warnings"] = warnings;
  return j;
}

AtlasPrompt make_prompt(const Slice& query, const Volume& atlas, const PosePredictor& predictor) {
  return {&atlas, predictor.predict(query)};
}

Pose coarse_position(const AtlasPrompt& prompt, const Pose& atlas_to_target) {
  return compose_pose(atlas_to_target, prompt.predicted_pose);
}

Pose coarse_position(const AtlasPrompt& prompt, const Volume& target, const RegistrationConfig& reg_cfg,
                     std::vector<std::string>* warnings) {
  if (!prompt.atlas) throw UsageError("atlas prompt has no atlas");
  const RegistrationResult reg = register_rigid(*prompt.atlas, target, reg_cfg);
  if (!reg.converged) {
    spdlog::warn("atlas-to-target registration did not converge (score {:.4f})", reg.score);
    if (warnings) warnings->push_back("registration did not converge");
  }
  return coarse_position(prompt, reg.rt);
}

std::vector<Pose> resample_candidates(const Pose& p_c, const FineConfig& cfg) {
  cfg.validate();
  const Mat3& rc = p_c.rotation.matrix();
  const Vec3 n_c = rc.col(2);
  const double cos_cap = std::cos(deg_to_rad(cfg.gamma));
  const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
  const int n = cfg.n_normal_candidates;

  const auto inplane = symmetric_steps(cfg.gamma, cfg.inplane_step_deg);
  const auto offsets = symmetric_steps(cfg.gamma, cfg.trans_step_mm);

  std::vector<Pose> out{p_c};
  out.reserve(1 + static_cast<std::size_t>(n) * inplane.size() * offsets.size());
  for (int i = 0; i < n; ++i) {
    // Area-uniform spiral over the cap, expressed in p_c's frame.
    const double cos_t = 1.0 - (1.0 - cos_cap) * (i + 0.5) / n;
    const double sin_t = std::sqrt(std::max(0.0, 1.0 - cos_t * cos_t));
    const double phi = 2.0 * kPi * i / golden;
    const Vec3 n_i = (rc * Vec3(sin_t * std::cos(phi), sin_t * std::sin(phi), cos_t)).normalized();
    const Rotation tilt = rotation_between(n_c, n_i) * p_c.rotation;
    for (double da : inplane) {
      const Rotation r = tilt * Rotation::about_z(deg_to_rad(da));
      for (double dd : offsets) {
        Pose cand{r, p_c.translation + dd * n_i};
        if (!same_pose(cand, p_c)) out.push_back(cand);
      }
    }
  }
  return out;
}

PositionResult fine_position(const Slice& query, const Volume& target, const Pose& p_coarse,
                             const FineConfig& cfg, const FeatureExtractor& extractor) {
  cfg.validate();
  query.validate();
  const SliceGeometry& g = query.geometry;
  const Feature qf = extractor.extract(query);
  auto score = [&](const Pose& p) { return csim(extractor.extract(extract_slice(target, p, g)), qf); };

  PositionResult res;
  res.coarse_pose = p_coarse;
  Pose center = p_coarse;
  double best = score(center);
  res.trace.push_back({center, best});

  FineConfig round = cfg;
  int level = 0;
  while (res.iterations < cfg.max_iters) {
    const auto cands = resample_candidates(center, round);
    ++res.iterations;
    std::vector<double> scores(cands.size());
    parallel_for(cands.size(), [&](std::size_t i) { scores[i] = score(cands[i]); });
    std::size_t arg = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
      if (scores[i] > scores[arg]) arg = i;
    }
    if (scores[arg] <= best + kStopTol) {
      if (level == cfg.refine_levels) break;
      ++level;
      round.gamma /= 2;
      round.inplane_step_deg /= 2;
      round.trans_step_mm /= 2;
      continue;
    }
    center = cands[arg];
    best = scores[arg];
    res.trace.push_back({center, best});
    spdlog::debug("fine iteration {}: score {:.6f}", res.iterations, best);
  }

  res.pose = center;
  res.score = best;
  res.slice = extract_slice(target, center, g);
  return res;
}

PositionResult position(const Slice& query, const Volume& target, const Volume& atlas,
                        const PosePredictor& predictor, const PositionConfig& cfg,
                        const FeatureExtractor& extractor) {
  const AtlasPrompt prompt = staged("predict", [&] { return make_prompt(query, atlas, predictor); });
  std::vector<std::string> warnings;
  const Pose coarse =
      staged("coarse", [&] { return coarse_position(prompt, target, cfg.registration, &warnings); });
  PositionResult res =
      staged("fine", [&] { return fine_position(query, target, coarse, cfg.fine, extractor); });
  res.warnings = std::move(warnings);
  return res;
}

}  // namespace viewpos
