#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "viewpos/volume.hpp"

namespace viewpos {

using Feature = std::vector<float>;

struct SsimParams {
  int window = 11;             // odd, >= 3; uniform square window
  double dynamic_range = 0.0;  // <= 0: joint observed range of both images
  double k1 = 0.01;            // c1 = (k1 * range)^2
  double k2 = 0.03;            // c2 = (k2 * range)^2
};

// Mean SSIM over all full windows (a single whole-image window when the
// image is smaller than the window). Throws ShapeError on size mismatch.
double ssim(const Slice& q, const Slice& s, const SsimParams& params = {});

// (1/hw) * sum (q - s)^2. Throws ShapeError on size mismatch.
double mse_image(const Slice& q, const Slice& s);

// Cosine similarity; 0 when either vector has zero norm. Throws ShapeError
// on length mismatch.
double csim(std::span<const float> a, std::span<const float> b);

// Area-average to D x D, then zero-mean / unit-variance. A constant slice
// yields the zero vector.
Feature extract_downsample(const Slice& s, int d);

// Per-cell histograms of signed gradient orientation (magnitude weighted),
// each cell L2-normalized, concatenated: cells * cells * bins entries.
Feature extract_gradhist(const Slice& s, int cells, int bins);

class FeatureExtractor {
 public:
  virtual ~FeatureExtractor() = default;
  virtual Feature extract(const Slice& s) const = 0;
  virtual std::size_t length() const = 0;
};

class DownsampleExtractor final : public FeatureExtractor {
 public:
  explicit DownsampleExtractor(int d = 48);
  Feature extract(const Slice& s) const override { return extract_downsample(s, d_); }
  std::size_t length() const override { return static_cast<std::size_t>(d_) * d_; }

 private:
  int d_;
};

class GradHistExtractor final : public FeatureExtractor {
 public:
  GradHistExtractor(int cells = 8, int bins = 9);
  Feature extract(const Slice& s) const override { return extract_gradhist(s, cells_, bins_); }
  std::size_t length() const override { return static_cast<std::size_t>(cells_) * cells_ * bins_; }

 private:
  int cells_, bins_;
};

// Precomputed embeddings: <dir>/index.json maps slice file names to
// {"file": "<name>.f32", "length": n}; each .f32 is little-endian float32.
// Lookups use the slice's source file name.
class ExternalFeatures final : public FeatureExtractor {
 public:
  // Throws IoError for a missing/malformed index or inconsistent lengths.
  explicit ExternalFeatures(const std::filesystem::path& dir);
  // Throws IoError when the slice has no entry.
  Feature extract(const Slice& s) const override;
  std::size_t length() const override { return length_; }

  static void write(const std::filesystem::path& dir, const std::map<std::string, Feature>& features);

 private:
  std::map<std::string, Feature> features_;
  std::size_t length_ = 0;
};

std::unique_ptr<FeatureExtractor> make_extractor(const std::string& name);

}  // namespace viewpos
