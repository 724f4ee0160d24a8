#include "viewpos/predictor.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "viewpos/error.hpp"
#include "viewpos/io.hpp"
#include "viewpos/parallel.hpp"

namespace viewpos {

namespace {

constexpr char kBankMagic[8] = {'V', 'P', 'B', 'A', 'N', 'K', '0', '1'};

template <typename T>
void put(std::ostream& out, T value) {
  auto bytes = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template <typename T>
T get(std::istream& in, const std::filesystem::path& path) {
  std::array<unsigned char, sizeof(T)> bytes;
  in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T));
  if (!in) throw IoError("truncated bank file " + path.string());
  if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
  return std::bit_cast<T>(bytes);
}

double squared_norm(std::span<const float> f) {
  double s = 0.0;
  for (float x : f) s += static_cast<double>(x) * x;
  return s;
}

}  // namespace

SliceBank::SliceBank(int d) : d_(d) {
  if (d < 1) throw UsageError("bank feature size must be >= 1");
}

void SliceBank::add(const Slice& s, const Pose& p) { add_feature(extract_downsample(s, d_), p); }

void SliceBank::add_feature(const Feature& f, const Pose& p) {
  if (f.size() != static_cast<std::size_t>(d_) * d_) throw ShapeError("bank feature has wrong length");
  features_.insert(features_.end(), f.begin(), f.end());
  norms_.push_back(std::sqrt(squared_norm(f)));
  poses_.push_back(p);
}

std::span<const float> SliceBank::feature(std::size_t i) const {
  const std::size_t len = static_cast<std::size_t>(d_) * d_;
  return std::span<const float>(features_).subspan(i * len, len);
}

std::size_t SliceBank::nearest(std::span<const float> query) const {
  if (empty()) throw EmptyInputError("slice bank is empty");
  const std::size_t len = static_cast<std::size_t>(d_) * d_;
  if (query.size() != len) throw ShapeError("query feature length does not match bank");
  const double qn = std::sqrt(squared_norm(query));

  // Fixed-size chunks keep the reduction independent of the thread count.
  constexpr std::size_t kChunk = 1024;
  const std::size_t chunks = (size() + kChunk - 1) / kChunk;
  std::vector<std::pair<double, std::size_t>> best(chunks, {-2.0, 0});
  parallel_for(chunks, [&](std::size_t c) {
    const std::size_t lo = c * kChunk, hi = std::min(size(), lo + kChunk);
    std::pair<double, std::size_t> b{-2.0, lo};
    for (std::size_t i = lo; i < hi; ++i) {
      const float* f = features_.data() + i * len;
      double dot = 0.0;
      for (std::size_t k = 0; k < len; ++k) dot += static_cast<double>(f[k]) * query[k];
      const double cs = (qn == 0.0 || norms_[i] == 0.0) ? 0.0 : dot / (qn * norms_[i]);
      if (cs > b.first) b = {cs, i};
    }
    best[c] = b;
  });
  std::pair<double, std::size_t> out = best.front();
  for (const auto& b : best) {
    if (b.first > out.first) out = b;
  }
  return out.second;
}

void SliceBank::save(const std::filesystem::path& path) const {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kBankMagic, sizeof(kBankMagic));
  put<std::uint32_t>(out, static_cast<std::uint32_t>(d_));
  put<std::uint32_t>(out, 1u);
  put<std::uint64_t>(out, size());
  for (std::size_t i = 0; i < size(); ++i) {
    for (double v : encode_rotvec_cartesian(poses_[i])) put<double>(out, v);
    for (float v : feature(i)) put<float>(out, v);
  }
  if (!out) throw IoError("failed writing " + path.string());
}

SliceBank SliceBank::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open bank " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kBankMagic, sizeof(magic)) != 0) {
    throw IoError(path.string() + " is not a slice bank");
  }
  const auto d = get<std::uint32_t>(in, path);
  get<std::uint32_t>(in, path);
  const auto count = get<std::uint64_t>(in, path);
  if (d < 1 || d > 4096) throw IoError("implausible bank feature size in " + path.string());
  SliceBank bank(static_cast<int>(d));
  Feature f(static_cast<std::size_t>(d) * d);
  for (std::uint64_t i = 0; i < count; ++i) {
    RotvecCartesian label;
    for (double& v : label) v = get<double>(in, path);
    for (float& v : f) v = get<float>(in, path);
    bank.add_feature(f, decode_rotvec_cartesian(label));
  }
  return bank;
}

SliceBank build_bank(std::span<const LabeledPair> manifest, const std::filesystem::path& root, int d) {
  SliceBank bank(d);
  std::vector<Feature> features(manifest.size());
  parallel_for(manifest.size(), [&](std::size_t i) {
    try {
      features[i] = extract_downsample(read_slice(root / manifest[i].slice_ref), d);
    } catch (const Error& e) {
      throw IoError("manifest line " + std::to_string(i + 1) + ": " + e.what());
    }
  });
  for (std::size_t i = 0; i < manifest.size(); ++i) bank.add_feature(features[i], manifest[i].pose);
  return bank;
}

SliceBank build_bank(const std::filesystem::path& manifest_path, int d) {
  const auto entries = read_manifest(manifest_path);
  return build_bank(entries, manifest_path.parent_path(), d);
}

Pose knn_predict(const SliceBank& bank, const Slice& query, int k) {
  if (k != 1) throw UsageError("knn_predict supports k = 1 only");
  if (bank.empty()) throw EmptyInputError("cannot predict from an empty slice bank");
  return bank.pose(bank.nearest(extract_downsample(query, bank.feature_size())));
}

FixedPosePredictor FixedPosePredictor::from_file(const std::filesystem::path& pose_json) {
  return FixedPosePredictor(pose_from_json(read_json(pose_json)));
}

Pose OraclePredictor::predict(const Slice& query) const {
  if (!query.pose) throw UsageError("oracle predictor needs a query with a known pose");
  return *query.pose;
}

double loss_rotvec_cartesian(const Pose& pred, const Pose& gt, double lambda) {
  if (!(lambda > 0.0)) throw UsageError("loss weight lambda must be positive");
  return geodesic_distance(pred.rotation, gt.rotation) + lambda * (pred.translation - gt.translation).squaredNorm();
}

double loss_three_point(const ThreePoint& pred, const ThreePoint& gt) {
  return (pred.a1 - gt.a1).squaredNorm() + (pred.a2 - gt.a2).squaredNorm() + (pred.a3 - gt.a3).squaredNorm();
}

double euclidean_error(const Vec3& pred, const Vec3& gt) { return (pred - gt).norm(); }

ErrorSummary summarize(std::vector<double> values) {
  ErrorSummary s;
  if (values.empty()) return s;
  const double n = static_cast<double>(values.size());
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / n;
  double var = 0.0;
  for (double v : values) var += (v - s.mean) * (v - s.mean);
  s.sd = std::sqrt(var / n);
  std::sort(values.begin(), values.end());
  const std::size_t m = values.size() / 2;
  s.median = values.size() % 2 ? values[m] : 0.5 * (values[m - 1] + values[m]);
  return s;
}

nlohmann::json PredictorReport::to_json() const {
  auto summary = [](const ErrorSummary& s) {
    return nlohmann::json{{"mean", s.mean}, {"sd", s.sd}, {"median", s.median}};
  };
  nlohmann::json per = nlohmann::json::array();
  for (const auto& p : pairs) {
    per.push_back({{"rot_gd_deg", p.gd_deg},
                   {"ed_a1_mm", p.ed_a1},
                   {"ed_a2_mm", p.ed_a2},
                   {"ed_a3_mm", p.ed_a3},
                   {"tra_ed_mm", p.ed_translation}});
  }
  return {{"count", pairs.size()},
          {"rot_gd_deg", summary(gd_deg)},
          {"ed_a1_mm", summary(ed_a1)},
          {"ed_a2_mm", summary(ed_a2)},
          {"ed_a3_mm", summary(ed_a3)},
          {"tra_ed_mm", summary(ed_translation)},
          {"pairs", per}};
}

PredictorReport evaluate_predictor(const PosePredictor& predictor, std::span<const LabeledPair> heldout,
                                   const SliceLoader& load) {
  PredictorReport report;
  report.pairs.resize(heldout.size());
  parallel_for(heldout.size(), [&](std::size_t i) {
    const LabeledPair& pair = heldout[i];
    const Pose pred = predictor.predict(load(pair));
    const ThreePoint tp_pred = pose_to_three_point(pred, pair.geometry);
    const ThreePoint tp_gt = pose_to_three_point(pair.pose, pair.geometry);
    PairError& e = report.pairs[i];
    e.gd_deg = rad_to_deg(geodesic_distance(pred.rotation, pair.pose.rotation));
    e.ed_a1 = euclidean_error(tp_pred.a1, tp_gt.a1);
    e.ed_a2 = euclidean_error(tp_pred.a2, tp_gt.a2);
    e.ed_a3 = euclidean_error(tp_pred.a3, tp_gt.a3);
    e.ed_translation = euclidean_error(pred.translation, pair.pose.translation);
  });
  auto column = [&](double PairError::*field) {
    std::vector<double> v;
    v.reserve(report.pairs.size());
    for (const auto& p : report.pairs) v.push_back(p.*field);
    return summarize(std::move(v));
  };
  report.gd_deg = column(&PairError::gd_deg);
  report.ed_a1 = column(&PairError::ed_a1);
  report.ed_a2 = column(&PairError::ed_a2);
  report.ed_a3 = column(&PairError::ed_a3);
  report.ed_translation = column(&PairError::ed_translation);
  return report;
}

PredictorReport evaluate_predictor(const PosePredictor& predictor, const std::filesystem::path& manifest_path) {
  const auto entries = read_manifest(manifest_path);
  const auto root = manifest_path.parent_path();
  return evaluate_predictor(predictor, entries, [&](const LabeledPair& p) { return read_slice(root / p.slice_ref); });
}

}  // namespace viewpos
