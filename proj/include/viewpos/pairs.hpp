#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "viewpos/geom.hpp"
#include "viewpos/volume.hpp"

namespace viewpos {

struct PairSpec {
  int n_rotations = 1500;
  // In-plane draws per (normal, offset); 0 means no in-plane rotation.
  int inplane_per_normal = 1;
  double trans_min_mm = -60.0;
  double trans_max_mm = 60.0;
  double trans_step_mm = 5.0;
  SliceGeometry slice_geometry;

  // Closed arithmetic grid trans_min : trans_step : trans_max.
  std::vector<double> offsets() const;
  // Throws RangeError if offsets leave [-L*s/3, L*s/3] (L = smallest volume
  // side) and UsageError for malformed fields.
  void validate(const Volume& aligned) const;
};

using RotvecCartesian = std::array<double, 6>;
using ThreePointLabel = std::array<double, 9>;

RotvecCartesian encode_rotvec_cartesian(const Pose& p);
Pose decode_rotvec_cartesian(const RotvecCartesian& v);
ThreePointLabel encode_three_point(const Pose& p, const SliceGeometry& g);
// Throws DegenerateLabelError for collinear points.
Pose decode_three_point(const ThreePointLabel& v, const SliceGeometry& g);

struct LabeledPair {
  std::string slice_ref;  // manifest-relative path
  Pose pose;
  RotvecCartesian rotvec_cartesian{};
  ThreePointLabel three_point{};
  std::string subject_id;
  SliceGeometry geometry;
};

// Pose schedule for one aligned volume: normals from Fibonacci sampling
// (outer loop), offsets along each normal (middle loop), seeded in-plane
// angles drawn uniformly from [0, pi) (inner loop). slice_ref is filled as
// "<subject_id>/<index>.pgm".
std::vector<LabeledPair> generate_pairs(const Volume& aligned, const PairSpec& spec, std::uint64_t seed,
                                        const std::string& subject_id = "subject");

// Extracts every pair's slice and writes it (PGM + sidecar) under out_dir,
// appending one manifest line per pair to `manifest`.
void write_pairs(const Volume& aligned, const std::vector<LabeledPair>& pairs,
                 const std::filesystem::path& out_dir, std::ostream& manifest);

std::string manifest_line(const LabeledPair& p);
// Throws IoError naming the 1-based line on malformed entries.
std::vector<LabeledPair> read_manifest(const std::filesystem::path& path);

}  // namespace viewpos
