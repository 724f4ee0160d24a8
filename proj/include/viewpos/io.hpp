#pragma once

// File formats.
//
//  .vvol    little-endian float32 voxels, x fastest; sidecar "<file>.json"
//           {"dims": [nx,ny,nz], "spacing_mm": s, "order": "xyz-fastest-x"}
//  .pgm     16-bit binary PGM (P5, big-endian samples); sidecar "<file>.json"
//           {"geometry": {...}, "pose": Pose-JSON | null,
//            "rescale": {"offset": a, "scale": b}}  value = a + b * sample
//  Pose     {"rotvec": [3], "translation_mm": [3]}
//  ThreePoint {"a1": [3], "a2": [3], "a3": [3]}

#include <filesystem>
#include <string>

#include "json.hpp"
#include "viewpos/geom.hpp"
#include "viewpos/volume.hpp"

namespace viewpos {

using json = nlohmann::json;
namespace fs = std::filesystem;

json pose_to_json(const Pose& p);
// Throws IoError on malformed input.
Pose pose_from_json(const json& j);
json three_point_to_json(const ThreePoint& tp);
ThreePoint three_point_from_json(const json& j);
json geometry_to_json(const SliceGeometry& g);
SliceGeometry geometry_from_json(const json& j);

fs::path sidecar_path(const fs::path& file);

void write_volume(const fs::path& path, const Volume& v);
// Rejects anisotropic spacing and size/sidecar mismatches with IoError.
Volume read_volume(const fs::path& path);

void write_slice(const fs::path& path, const Slice& s);
Slice read_slice(const fs::path& path);

// Reads a whole JSON document / writes one with a trailing newline.
json read_json(const fs::path& path);
void write_json(const fs::path& path, const json& j);

// Ensures the parent directory of path exists.
void ensure_parent(const fs::path& path);

}  // namespace viewpos
