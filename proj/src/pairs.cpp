#include "viewpos/pairs.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "viewpos/error.hpp"
#include "viewpos/io.hpp"
#include "viewpos/parallel.hpp"

namespace viewpos {

std::vector<double> PairSpec::offsets() const {
  std::vector<double> out;
  if (!(trans_step_mm > 0.0) || trans_max_mm < trans_min_mm) return out;
  const int steps = static_cast<int>(std::floor((trans_max_mm - trans_min_mm) / trans_step_mm + 1e-9));
  for (int k = 0; k <= steps; ++k) out.push_back(trans_min_mm + k * trans_step_mm);
  return out;
}

void PairSpec::validate(const Volume& aligned) const {
  if (n_rotations < 1) throw UsageError("pair spec needs n_rotations >= 1");
  if (inplane_per_normal < 0) throw UsageError("inplane_per_normal must be >= 0");
  if (!(trans_step_mm > 0.0)) throw UsageError("trans_step must be positive");
  if (trans_max_mm < trans_min_mm) throw UsageError("trans_max must be >= trans_min");
  slice_geometry.validate();
  const double side = *std::min_element(aligned.dims().begin(), aligned.dims().end()) * aligned.spacing();
  const double bound = side / 3.0;
  if (trans_min_mm < -bound - 1e-9 || trans_max_mm > bound + 1e-9) {
    std::ostringstream msg;
    msg << "translation range [" << trans_min_mm << ", " << trans_max_mm << "] exceeds +/-" << bound
        << " mm (one third of the " << side << " mm volume side)";
    throw RangeError(msg.str());
  }
}

RotvecCartesian encode_rotvec_cartesian(const Pose& p) {
  const Vec3 r = rotation_to_rotvec(p.rotation).value;
  return {r.x(), r.y(), r.z(), p.translation.x(), p.translation.y(), p.translation.z()};
}

Pose decode_rotvec_cartesian(const RotvecCartesian& v) {
  Pose p;
  p.rotation = rotvec_to_rotation(RotVec{Vec3(v[0], v[1], v[2])});
  p.translation = Vec3(v[3], v[4], v[5]);
  return p;
}

ThreePointLabel encode_three_point(const Pose& p, const SliceGeometry& g) {
  const ThreePoint tp = pose_to_three_point(p, g);
  return {tp.a1.x(), tp.a1.y(), tp.a1.z(), tp.a2.x(), tp.a2.y(), tp.a2.z(), tp.a3.x(), tp.a3.y(), tp.a3.z()};
}

Pose decode_three_point(const ThreePointLabel& v, const SliceGeometry& g) {
  ThreePoint tp;
  tp.a1 = Vec3(v[0], v[1], v[2]);
  tp.a2 = Vec3(v[3], v[4], v[5]);
  tp.a3 = Vec3(v[6], v[7], v[8]);
  return three_point_to_pose(tp, g);
}

std::vector<LabeledPair> generate_pairs(const Volume& aligned, const PairSpec& spec, std::uint64_t seed,
                                        const std::string& subject_id) {
  spec.validate(aligned);
  const auto normals = fibonacci_normals(static_cast<std::size_t>(spec.n_rotations));
  const auto offsets = spec.offsets();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> inplane(0.0, kPi);
  const int draws = std::max(1, spec.inplane_per_normal);

  std::vector<LabeledPair> out;
  out.reserve(normals.size() * offsets.size() * draws);
  for (const Vec3& n : normals) {
    for (double d : offsets) {
      for (int k = 0; k < draws; ++k) {
        const double alpha = spec.inplane_per_normal == 0 ? 0.0 : inplane(rng);
        LabeledPair p;
        p.pose = build_pose(n, alpha, d);
        p.rotvec_cartesian = encode_rotvec_cartesian(p.pose);
        p.three_point = encode_three_point(p.pose, spec.slice_geometry);
        p.subject_id = subject_id;
        p.geometry = spec.slice_geometry;
        std::ostringstream ref;
        ref << subject_id << '/' << std::setw(6) << std::setfill('0') << out.size() << ".pgm";
        p.slice_ref = ref.str();
        out.push_back(std::move(p));
      }
    }
  }
  return out;
}

void write_pairs(const Volume& aligned, const std::vector<LabeledPair>& pairs,
                 const std::filesystem::path& out_dir, std::ostream& manifest) {
  parallel_for(pairs.size(), [&](std::size_t i) {
    write_slice(out_dir / pairs[i].slice_ref, extract_slice(aligned, pairs[i].pose, pairs[i].geometry));
  });
  for (const auto& p : pairs) manifest << manifest_line(p) << '\n';
  if (!manifest) throw IoError("failed writing pair manifest");
}

std::string manifest_line(const LabeledPair& p) {
  const json j{{"subject_id", p.subject_id},
               {"slice", p.slice_ref},
               {"pose", pose_to_json(p.pose)},
               {"rotvec_cartesian", p.rotvec_cartesian},
               {"three_point", p.three_point},
               {"geometry", geometry_to_json(p.geometry)}};
  return j.dump();
}

std::vector<LabeledPair> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::vector<LabeledPair> out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      LabeledPair p;
      p.subject_id = j.at("subject_id").get<std::string>();
      p.slice_ref = j.at("slice").get<std::string>();
      p.pose = pose_from_json(j.at("pose"));
      p.rotvec_cartesian = j.at("rotvec_cartesian").get<RotvecCartesian>();
      p.three_point = j.at("three_point").get<ThreePointLabel>();
      p.geometry = geometry_from_json(j.at("geometry"));
      out.push_back(std::move(p));
    } catch (const json::exception& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      throw IoError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace viewpos
