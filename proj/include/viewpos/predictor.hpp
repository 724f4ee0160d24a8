#pragma once

#include <filesystem>
#include <functional>
#include <span>
#include <vector>

#include "json.hpp"
#include "viewpos/geom.hpp"
#include "viewpos/pairs.hpp"
#include "viewpos/similarity.hpp"
#include "viewpos/volume.hpp"

namespace viewpos {

// Maps a query slice to its pose in atlas space.
class PosePredictor {
 public:
  virtual ~PosePredictor() = default;
  virtual Pose predict(const Slice& query) const = 0;
};

// (feature, pose) store. Features are D x D area-downsampled, standardized
// slices (extract_downsample).
class SliceBank {
 public:
  explicit SliceBank(int d = 32);

  void add(const Slice& s, const Pose& p);
  // Throws ShapeError unless f has D*D entries.
  void add_feature(const Feature& f, const Pose& p);

  int feature_size() const { return d_; }
  std::size_t size() const { return poses_.size(); }
  bool empty() const { return poses_.empty(); }
  std::span<const float> feature(std::size_t i) const;
  const Pose& pose(std::size_t i) const { return poses_[i]; }

  // Index of the cosine-nearest entry, lowest index on ties. Throws
  // EmptyInputError on an empty bank.
  std::size_t nearest(std::span<const float> query) const;

  // Binary layout, little-endian: "VPBANK01", u32 D, u32 normalized flag,
  // u64 count, then per entry 6 x f64 rotvec-cartesian label and D*D x f32.
  void save(const std::filesystem::path& path) const;
  static SliceBank load(const std::filesystem::path& path);

 private:
  int d_;
  std::vector<float> features_;
  std::vector<double> norms_;
  std::vector<Pose> poses_;
};

// Loads every manifest slice (paths relative to `root`). Throws IoError
// naming the manifest line when a slice cannot be read.
SliceBank build_bank(std::span<const LabeledPair> manifest, const std::filesystem::path& root, int d);
SliceBank build_bank(const std::filesystem::path& manifest_path, int d);

// k must be 1.
Pose knn_predict(const SliceBank& bank, const Slice& query, int k = 1);

class KnnPredictor final : public PosePredictor {
 public:
  explicit KnnPredictor(const SliceBank& bank) : bank_(bank) {}
  Pose predict(const Slice& query) const override { return knn_predict(bank_, query); }

 private:
  const SliceBank& bank_;
};

// Returns a fixed pose: the oracle in tests, or an externally computed
// prediction read from Pose-JSON.
class FixedPosePredictor final : public PosePredictor {
 public:
  explicit FixedPosePredictor(const Pose& p) : pose_(p) {}
  static FixedPosePredictor from_file(const std::filesystem::path& pose_json);
  Pose predict(const Slice&) const override { return pose_; }

 private:
  Pose pose_;
};

// Returns the query's own extraction pose (throws UsageError if absent).
class OraclePredictor final : public PosePredictor {
 public:
  Pose predict(const Slice& query) const override;
};

inline constexpr double kDefaultLambda = 0.01;

// GD(pred, gt) + lambda * |t_pred - t_gt|^2.
double loss_rotvec_cartesian(const Pose& pred, const Pose& gt, double lambda = kDefaultLambda);
// sum_i |a_i_pred - a_i_gt|^2.
double loss_three_point(const ThreePoint& pred, const ThreePoint& gt);
double euclidean_error(const Vec3& pred, const Vec3& gt);

struct PairError {
  double gd_deg = 0, ed_a1 = 0, ed_a2 = 0, ed_a3 = 0, ed_translation = 0;
};

struct ErrorSummary {
  double mean = 0, sd = 0, median = 0;
};
ErrorSummary summarize(std::vector<double> values);

struct PredictorReport {
  std::vector<PairError> pairs;
  ErrorSummary gd_deg, ed_a1, ed_a2, ed_a3, ed_translation;

  nlohmann::json to_json() const;
};

using SliceLoader = std::function<Slice(const LabeledPair&)>;

PredictorReport evaluate_predictor(const PosePredictor& predictor, std::span<const LabeledPair> heldout,
                                   const SliceLoader& load);
PredictorReport evaluate_predictor(const PosePredictor& predictor, const std::filesystem::path& manifest_path);

}  // namespace viewpos
