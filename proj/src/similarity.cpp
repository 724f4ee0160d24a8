#include "viewpos/similarity.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>

#include "viewpos/error.hpp"
#include "viewpos/io.hpp"

namespace viewpos {

namespace {

void check_same(const Slice& q, const Slice& s, const char* who) {
  if (q.geometry.width != s.geometry.width || q.geometry.height != s.geometry.height ||
      q.data.size() != s.data.size()) {
    throw ShapeError(std::string(who) + ": slice sizes differ");
  }
}

// Summed-area table with a zero border row/column.
class Integral {
 public:
  Integral(int w, int h) : w_(w), t_(static_cast<std::size_t>(w + 1) * (h + 1), 0.0) {}

  template <typename F>
  void build(int w, int h, F value) {
    for (int y = 0; y < h; ++y) {
      double row = 0.0;
      for (int x = 0; x < w; ++x) {
        row += value(x, y);
        at(x + 1, y + 1) = at(x + 1, y) + row;
      }
    }
  }

  double box(int x0, int y0, int x1, int y1) const {  // [x0, x1) x [y0, y1)
    return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
  }

 private:
  double& at(int x, int y) { return t_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }
  double at(int x, int y) const { return t_[static_cast<std::size_t>(y) * (w_ + 1) + x]; }
  int w_;
  std::vector<double> t_;
};

// Weights of source pixels [0, n) contributing to each of d equal bins.
std::vector<std::vector<std::pair<int, double>>> area_weights(int n, int d) {
  std::vector<std::vector<std::pair<int, double>>> w(static_cast<std::size_t>(d));
  const double bin = static_cast<double>(n) / d;
  for (int u = 0; u < d; ++u) {
    const double lo = u * bin, hi = (u + 1) * bin;
    for (int p = static_cast<int>(std::floor(lo)); p < n && p < hi; ++p) {
      const double overlap = std::min(hi, p + 1.0) - std::max(lo, static_cast<double>(p));
      if (overlap > 0.0) w[u].emplace_back(p, overlap / bin);
    }
  }
  return w;
}

void standardize_in_place(Feature& f) {
  double sum = 0.0, sq = 0.0;
  for (float x : f) {
    sum += x;
    sq += static_cast<double>(x) * x;
  }
  const double n = static_cast<double>(f.size());
  const double mean = sum / n;
  const double var = std::max(0.0, sq / n - mean * mean);
  if (var <= 1e-12 * std::max(1.0, mean * mean)) {
    std::fill(f.begin(), f.end(), 0.0f);
    return;
  }
  const double sd = std::sqrt(var);
  for (float& x : f) x = static_cast<float>((x - mean) / sd);
}

}  // namespace

double ssim(const Slice& q, const Slice& s, const SsimParams& params) {
  check_same(q, s, "ssim");
  if (params.window < 3 || params.window % 2 == 0) throw UsageError("ssim window must be odd and >= 3");
  const int w = q.geometry.width, h = q.geometry.height;

  double range = params.dynamic_range;
  if (!(range > 0.0)) {
    const auto [qlo, qhi] = std::minmax_element(q.data.begin(), q.data.end());
    const auto [slo, shi] = std::minmax_element(s.data.begin(), s.data.end());
    range = static_cast<double>(std::max(*qhi, *shi)) - std::min(*qlo, *slo);
    if (!(range > 0.0)) range = 1.0;
  }
  const double c1 = (params.k1 * range) * (params.k1 * range);
  const double c2 = (params.k2 * range) * (params.k2 * range);

  Integral iq(w, h), is(w, h), iqq(w, h), iss(w, h), iqs(w, h);
  iq.build(w, h, [&](int x, int y) { return double(q.at(x, y)); });
  is.build(w, h, [&](int x, int y) { return double(s.at(x, y)); });
  iqq.build(w, h, [&](int x, int y) { return double(q.at(x, y)) * q.at(x, y); });
  iss.build(w, h, [&](int x, int y) { return double(s.at(x, y)) * s.at(x, y); });
  iqs.build(w, h, [&](int x, int y) { return double(q.at(x, y)) * s.at(x, y); });

  const int wx = std::min(params.window, w);
  const int wy = std::min(params.window, h);
  const double n = static_cast<double>(wx) * wy;
  double total = 0.0;
  int count = 0;
  for (int y = 0; y + wy <= h; ++y) {
    for (int x = 0; x + wx <= w; ++x) {
      const double mq = iq.box(x, y, x + wx, y + wy) / n;
      const double ms = is.box(x, y, x + wx, y + wy) / n;
      const double vq = std::max(0.0, iqq.box(x, y, x + wx, y + wy) / n - mq * mq);
      const double vs = std::max(0.0, iss.box(x, y, x + wx, y + wy) / n - ms * ms);
      const double cov = iqs.box(x, y, x + wx, y + wy) / n - mq * ms;
      total += ((2 * mq * ms + c1) * (2 * cov + c2)) / ((mq * mq + ms * ms + c1) * (vq + vs + c2));
      ++count;
    }
  }
  return total / count;
}

double mse_image(const Slice& q, const Slice& s) {
  check_same(q, s, "mse_image");
  double sum = 0.0;
  for (std::size_t i = 0; i < q.data.size(); ++i) {
    const double d = static_cast<double>(q.data[i]) - s.data[i];
    sum += d * d;
  }
  return sum / static_cast<double>(q.data.size());
}

double csim(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) throw ShapeError("csim: feature lengths differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

Feature extract_downsample(const Slice& s, int d) {
  if (d < 1) throw UsageError("downsample size must be >= 1");
  const int w = s.geometry.width, h = s.geometry.height;
  const auto wx = area_weights(w, d);
  const auto wy = area_weights(h, d);

  std::vector<double> rows(static_cast<std::size_t>(h) * d, 0.0);  // h x d
  for (int y = 0; y < h; ++y) {
    for (int u = 0; u < d; ++u) {
      double acc = 0.0;
      for (const auto& [x, wgt] : wx[u]) acc += wgt * s.at(x, y);
      rows[static_cast<std::size_t>(y) * d + u] = acc;
    }
  }
  Feature f(static_cast<std::size_t>(d) * d);
  for (int v = 0; v < d; ++v) {
    for (int u = 0; u < d; ++u) {
      double acc = 0.0;
      for (const auto& [y, wgt] : wy[v]) acc += wgt * rows[static_cast<std::size_t>(y) * d + u];
      f[static_cast<std::size_t>(v) * d + u] = static_cast<float>(acc);
    }
  }
  standardize_in_place(f);
  return f;
}

Feature extract_gradhist(const Slice& s, int cells, int bins) {
  if (cells < 1 || bins < 1) throw UsageError("gradhist needs cells, bins >= 1");
  const int w = s.geometry.width, h = s.geometry.height;
  std::vector<double> hist(static_cast<std::size_t>(cells) * cells * bins, 0.0);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - 1), y1 = std::min(h - 1, y + 1);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - 1), x1 = std::min(w - 1, x + 1);
      const double gx = (s.at(x1, y) - s.at(x0, y)) / std::max(1, x1 - x0);
      // Row index grows downward; flip so positive gy points up.
      const double gy = (s.at(x, y0) - s.at(x, y1)) / std::max(1, y1 - y0);
      const double mag = std::hypot(gx, gy);
      if (mag == 0.0) continue;
      const double theta = std::atan2(gy, gx) + kPi;  // (0, 2pi]
      const int b = static_cast<int>(theta / (2.0 * kPi) * bins) % bins;
      const int cx = std::min(cells - 1, x * cells / w);
      const int cy = std::min(cells - 1, y * cells / h);
      hist[(static_cast<std::size_t>(cy) * cells + cx) * bins + b] += mag;
    }
  }
  Feature f(hist.size());
  for (int c = 0; c < cells * cells; ++c) {
    double norm = 0.0;
    for (int b = 0; b < bins; ++b) norm += hist[c * bins + b] * hist[c * bins + b];
    norm = std::sqrt(norm);
    for (int b = 0; b < bins; ++b) {
      f[c * bins + b] = norm > 1e-12 ? static_cast<float>(hist[c * bins + b] / norm) : 0.0f;
    }
  }
  return f;
}

DownsampleExtractor::DownsampleExtractor(int d) : d_(d) {
  if (d < 1) throw UsageError("downsample size must be >= 1");
}

GradHistExtractor::GradHistExtractor(int cells, int bins) : cells_(cells), bins_(bins) {
  if (cells < 1 || bins < 1) throw UsageError("gradhist needs cells, bins >= 1");
}

ExternalFeatures::ExternalFeatures(const std::filesystem::path& dir) {
  const json index = read_json(dir / "index.json");
  if (!index.is_object()) throw IoError("feature index must be a JSON object");
  bool first = true;
  for (const auto& [key, entry] : index.items()) {
    std::string file;
    std::size_t length = 0;
    try {
      file = entry.at("file").get<std::string>();
      length = entry.at("length").get<std::size_t>();
    } catch (const json::exception& e) {
      throw IoError("feature index entry " + key + ": " + e.what());
    }
    if (first) {
      length_ = length;
      first = false;
    } else if (length != length_) {
      throw IoError("feature index mixes vector lengths");
    }
    std::ifstream in(dir / file, std::ios::binary);
    if (!in) throw IoError("cannot open feature file " + (dir / file).string());
    std::vector<std::uint32_t> raw(length);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(length * 4));
    if (static_cast<std::size_t>(in.gcount()) != length * 4) {
      throw IoError("feature file " + file + " is shorter than its declared length");
    }
    Feature f(length);
    for (std::size_t i = 0; i < length; ++i) {
      std::uint32_t v = raw[i];
      if constexpr (std::endian::native == std::endian::big) {
        v = ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
      }
      f[i] = std::bit_cast<float>(v);
    }
    features_.emplace(key, std::move(f));
  }
}

Feature ExternalFeatures::extract(const Slice& s) const {
  const std::string key = std::filesystem::path(s.source).filename().string();
  const auto it = features_.find(key);
  if (it == features_.end()) throw IoError("no precomputed features for slice '" + key + "'");
  return it->second;
}

void ExternalFeatures::write(const std::filesystem::path& dir, const std::map<std::string, Feature>& features) {
  json index = json::object();
  for (const auto& [key, f] : features) {
    const std::string file = key + ".f32";
    const auto path = dir / file;
    ensure_parent(path);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    for (float x : f) {
      std::uint32_t v = std::bit_cast<std::uint32_t>(x);
      if constexpr (std::endian::native == std::endian::big) {
        v = ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
      }
      out.write(reinterpret_cast<const char*>(&v), 4);
    }
    index[key] = {{"file", file}, {"length", f.size()}};
  }
  write_json(dir / "index.json", index);
}

std::unique_ptr<FeatureExtractor> make_extractor(const std::string& name) {
  std::vector<std::string> parts;
  std::stringstream ss(name);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  if (parts.empty()) throw UsageError("empty extractor name");
  try {
    if (parts[0] == "downsample") {
      return std::make_unique<DownsampleExtractor>(parts.size() > 1 ? std::stoi(parts[1]) : 48);
    }
    if (parts[0] == "gradhist") {
      return std::make_unique<GradHistExtractor>(parts.size() > 1 ? std::stoi(parts[1]) : 8,
                                                 parts.size() > 2 ? std::stoi(parts[2]) : 9);
    }
  } catch (const std::logic_error&) {
    throw UsageError("bad extractor spec '" + name + "'");
  }
  throw UsageError("unknown extractor '" + name + "' (expected downsample[:D] or gradhist[:cells[:bins]])");
}

}  // namespace viewpos
