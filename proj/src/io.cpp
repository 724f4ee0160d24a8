#include "viewpos/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "viewpos/error.hpp"

namespace viewpos {

namespace {

json vec_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

Vec3 vec_from_json(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) {
    throw IoError(std::string("expected 3-element array for ") + what);
  }
  Vec3 v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw IoError(std::string("non-numeric entry in ") + what);
    v[i] = j[i].get<double>();
  }
  if (!v.allFinite()) throw IoError(std::string("non-finite entry in ") + what);
  return v;
}

std::uint32_t to_little(std::uint32_t x) {
  if constexpr (std::endian::native == std::endian::big) {
    return ((x & 0xffu) << 24) | ((x & 0xff00u) << 8) | ((x >> 8) & 0xff00u) | (x >> 24);
  }
  return x;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const fs::path& path) {
  ensure_parent(path);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

}  // namespace

json pose_to_json(const Pose& p) {
  return json{{"rotvec", vec_to_json(rotation_to_rotvec(p.rotation).value)},
              {"translation_mm", vec_to_json(p.translation)}};
}

Pose pose_from_json(const json& j) {
  if (!j.is_object() || !j.contains("rotvec") || !j.contains("translation_mm")) {
    throw IoError("pose JSON needs \"rotvec\" and \"translation_mm\"");
  }
  Pose p;
  p.rotation = rotvec_to_rotation(RotVec{vec_from_json(j["rotvec"], "rotvec")});
  p.translation = vec_from_json(j["translation_mm"], "translation_mm");
  return p;
}

json three_point_to_json(const ThreePoint& tp) {
  return json{{"a1", vec_to_json(tp.a1)}, {"a2", vec_to_json(tp.a2)}, {"a3", vec_to_json(tp.a3)}};
}

ThreePoint three_point_from_json(const json& j) {
  if (!j.is_object()) throw IoError("three-point JSON must be an object");
  ThreePoint tp;
  tp.a1 = vec_from_json(j.value("a1", json()), "a1");
  tp.a2 = vec_from_json(j.value("a2", json()), "a2");
  tp.a3 = vec_from_json(j.value("a3", json()), "a3");
  return tp;
}

json geometry_to_json(const SliceGeometry& g) {
  return json{{"width", g.width}, {"height", g.height}, {"spacing_mm", g.spacing}};
}

SliceGeometry geometry_from_json(const json& j) {
  try {
    SliceGeometry g;
    g.width = j.at("width").get<int>();
    g.height = j.at("height").get<int>();
    g.spacing = j.at("spacing_mm").get<double>();
    g.validate();
    return g;
  } catch (const json::exception& e) {
    throw IoError(std::string("bad slice geometry: ") + e.what());
  } catch (const UsageError& e) {
    throw IoError(std::string("bad slice geometry: ") + e.what());
  }
}

fs::path sidecar_path(const fs::path& file) {
  fs::path p = file;
  p += ".json";
  return p;
}

void ensure_parent(const fs::path& path) {
  const fs::path parent = path.parent_path();
  if (parent.empty()) return;
  std::error_code ec;
  fs::create_directories(parent, ec);
  if (ec) throw IoError("cannot create directory " + parent.string() + ": " + ec.message());
}

json read_json(const fs::path& path) {
  auto in = open_in(path);
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw IoError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

void write_volume(const fs::path& path, const Volume& v) {
  {
    auto out = open_out(path);
    std::vector<std::uint32_t> raw(v.size());
    const auto d = v.data();
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = to_little(std::bit_cast<std::uint32_t>(d[i]));
    out.write(reinterpret_cast<const char*>(raw.data()),
              static_cast<std::streamsize>(raw.size() * sizeof(std::uint32_t)));
    if (!out) throw IoError("failed writing " + path.string());
  }
  write_json(sidecar_path(path),
             json{{"dims", {v.dims()[0], v.dims()[1], v.dims()[2]}},
                  {"spacing_mm", v.spacing()},
                  {"order", "xyz-fastest-x"}});
}

Volume read_volume(const fs::path& path) {
  const json meta = read_json(sidecar_path(path));
  Dims dims{};
  double spacing = 0.0;
  try {
    const auto& jd = meta.at("dims");
    if (!jd.is_array() || jd.size() != 3) throw IoError("dims must have 3 entries");
    for (int a = 0; a < 3; ++a) dims[a] = jd[a].get<int>();
    const auto& js = meta.at("spacing_mm");
    if (js.is_array()) {
      if (js.empty()) throw IoError("empty spacing");
      spacing = js[0].get<double>();
      for (const auto& s : js) {
        if (std::abs(s.get<double>() - spacing) > 1e-9) {
          throw IoError("anisotropic spacing is not supported: " + path.string());
        }
      }
    } else {
      spacing = js.get<double>();
    }
    if (meta.value("order", std::string("xyz-fastest-x")) != "xyz-fastest-x") {
      throw IoError("unsupported voxel order in " + path.string());
    }
  } catch (const json::exception& e) {
    throw IoError("bad volume sidecar " + sidecar_path(path).string() + ": " + e.what());
  }
  for (int d : dims) {
    if (d < 2) throw IoError("volume dims must be >= 2 in " + path.string());
  }
  const std::size_t n = static_cast<std::size_t>(dims[0]) * dims[1] * dims[2];
  auto in = open_in(path);
  std::vector<std::uint32_t> raw(n);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n * sizeof(std::uint32_t)));
  if (static_cast<std::size_t>(in.gcount()) != n * sizeof(std::uint32_t) || in.peek() != EOF) {
    throw IoError("voxel block size does not match dims in " + path.string());
  }
  std::vector<float> data(n);
  for (std::size_t i = 0; i < n; ++i) data[i] = std::bit_cast<float>(to_little(raw[i]));
  try {
    return Volume(dims, spacing, std::move(data));
  } catch (const UsageError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_slice(const fs::path& path, const Slice& s) {
  s.validate();
  const auto [lo, hi] = std::minmax_element(s.data.begin(), s.data.end());
  const double offset = *lo;
  const double scale = (*hi > *lo) ? (static_cast<double>(*hi) - *lo) / 65535.0 : 0.0;
  {
    auto out = open_out(path);
    out << "P5\n" << s.geometry.width << ' ' << s.geometry.height << "\n65535\n";
    std::vector<unsigned char> bytes(s.data.size() * 2);
    for (std::size_t i = 0; i < s.data.size(); ++i) {
      const double q = scale > 0.0 ? std::round((s.data[i] - offset) / scale) : 0.0;
      const auto v = static_cast<std::uint16_t>(std::clamp(q, 0.0, 65535.0));
      bytes[2 * i] = static_cast<unsigned char>(v >> 8);
      bytes[2 * i + 1] = static_cast<unsigned char>(v & 0xff);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("failed writing " + path.string());
  }
  json meta{{"geometry", geometry_to_json(s.geometry)},
            {"pose", s.pose ? pose_to_json(*s.pose) : json(nullptr)},
            {"rescale", {{"offset", offset}, {"scale", scale}}}};
  write_json(sidecar_path(path), meta);
}

Slice read_slice(const fs::path& path) {
  const json meta = read_json(sidecar_path(path));
  Slice s;
  s.source = path.string();
  double offset = 0.0, scale = 0.0;
  try {
    s.geometry = geometry_from_json(meta.at("geometry"));
    if (meta.contains("pose") && !meta["pose"].is_null()) s.pose = pose_from_json(meta["pose"]);
    offset = meta.at("rescale").at("offset").get<double>();
    scale = meta.at("rescale").at("scale").get<double>();
  } catch (const json::exception& e) {
    throw IoError("bad slice sidecar " + sidecar_path(path).string() + ": " + e.what());
  }

  auto in = open_in(path);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || maxval != 65535 || !in) throw IoError("not a 16-bit P5 PGM: " + path.string());
  in.get();  // single whitespace after header
  if (w != s.geometry.width || h != s.geometry.height) {
    throw IoError("PGM size disagrees with sidecar geometry: " + path.string());
  }
  std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h * 2);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (static_cast<std::size_t>(in.gcount()) != bytes.size()) {
    throw IoError("truncated PGM: " + path.string());
  }
  s.data.resize(static_cast<std::size_t>(w) * h);
  for (std::size_t i = 0; i < s.data.size(); ++i) {
    const unsigned v = (static_cast<unsigned>(bytes[2 * i]) << 8) | bytes[2 * i + 1];
    s.data[i] = static_cast<float>(offset + scale * v);
  }
  return s;
}

}  // namespace viewpos
