#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "support.hpp"
#include "viewpos/error.hpp"
#include "viewpos/io.hpp"
#include "viewpos/pairs.hpp"

using namespace viewpos;

namespace {

const Volume& aligned() {
  static const Volume v = testing::phantom(60);
  return v;
}

bool same_pose(const Pose& a, const Pose& b, double tol) {
  return geodesic_distance(a.rotation, b.rotation) <= tol && (a.translation - b.translation).norm() <= tol;
}

}  // namespace

TEST_CASE("offset grid") {
  PairSpec spec;
  const auto o = spec.offsets();
  REQUIRE(o.size() == 25);
  for (std::size_t i = 0; i < o.size(); ++i) CHECK(o[i] == doctest::Approx(-60.0 + 5.0 * i));
  spec.trans_min_mm = -7;
  spec.trans_max_mm = 7;
  spec.trans_step_mm = 3;
  CHECK(spec.offsets() == std::vector<double>{-7, -4, -1, 2, 5});
}

TEST_CASE("full-size pair count") {
  const PairSpec spec;  // 1500 normals, 5 mm steps over [-60, 60]
  CHECK(generate_pairs(aligned(), spec, 1).size() == 37500);
}

TEST_CASE("degenerate spec gives a single pair") {
  PairSpec spec;
  spec.n_rotations = 1;
  spec.inplane_per_normal = 0;
  spec.trans_min_mm = spec.trans_max_mm = 0;
  const auto pairs = generate_pairs(aligned(), spec, 3, "s");
  REQUIRE(pairs.size() == 1);
  CHECK(same_pose(pairs[0].pose, build_pose(Vec3::UnitX(), 0.0, 0.0), 1e-12));
  CHECK(pairs[0].slice_ref == "s/000000.pgm");
  CHECK(pairs[0].subject_id == "s");
}

TEST_CASE("translation range bound") {
  PairSpec spec;
  CHECK_NOTHROW(spec.validate(aligned()));
  spec.trans_max_mm = 61;
  CHECK_THROWS_AS(spec.validate(aligned()), RangeError);
  CHECK_THROWS_AS(generate_pairs(aligned(), spec, 1), RangeError);
  spec = {};
  spec.trans_min_mm = -65;
  CHECK_THROWS_AS(spec.validate(aligned()), RangeError);

  spec = {};
  spec.n_rotations = 0;
  CHECK_THROWS_AS(spec.validate(aligned()), UsageError);
  spec = {};
  spec.trans_step_mm = 0;
  CHECK_THROWS_AS(spec.validate(aligned()), UsageError);
  spec = {};
  spec.trans_min_mm = 10;
  spec.trans_max_mm = -10;
  CHECK_THROWS_AS(spec.validate(aligned()), UsageError);
}

TEST_CASE("rotvec-cartesian labels") {
  const RotvecCartesian id = encode_rotvec_cartesian(Pose());
  for (double x : id) CHECK(x == 0.0);
  const RotvecCartesian q = encode_rotvec_cartesian({Rotation::about_z(kPi / 2), Vec3(0, 0, 10)});
  const RotvecCartesian want{0, 0, kPi / 2, 0, 0, 10};
  for (int i = 0; i < 6; ++i) CHECK(q[i] == doctest::Approx(want[i]).epsilon(1e-12));

  std::mt19937_64 rng(6);
  for (int i = 0; i < 1000; ++i) {
    const Pose p = testing::random_pose(rng);
    const Pose back = decode_rotvec_cartesian(encode_rotvec_cartesian(p));
    CHECK((back.rotation.matrix() - p.rotation.matrix()).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK((back.translation - p.translation).norm() <= 1e-9);
  }
}

TEST_CASE("three-point labels") {
  const SliceGeometry g;
  const ThreePointLabel id = encode_three_point(Pose(), g);
  const ThreePointLabel want{0, 0, 0, -90, 90, 0, 90, 90, 0};
  for (int i = 0; i < 9; ++i) CHECK(id[i] == doctest::Approx(want[i]));
  CHECK_THROWS_AS(decode_three_point({0, 0, 0, 1, 1, 1, 2, 2, 2}, g), DegenerateLabelError);

  std::mt19937_64 rng(7);
  for (int i = 0; i < 1000; ++i) {
    const Pose p = testing::random_pose(rng);
    const ThreePointLabel a = encode_three_point(p, g);
    const ThreePointLabel b = encode_three_point(decode_three_point(a, g), g);
    for (int k = 0; k < 9; ++k) CHECK(std::abs(a[k] - b[k]) <= 1e-6);
  }
}

TEST_CASE("emitted pairs are consistent") {
  PairSpec spec;
  spec.n_rotations = 200;
  spec.trans_step_mm = 20;
  const auto pairs = generate_pairs(aligned(), spec, 99, "subj");
  REQUIRE(pairs.size() == 200 * 7);
  const auto normals = fibonacci_normals(200);
  const auto offsets = spec.offsets();
  std::set<std::string> refs;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const LabeledPair& p = pairs[i];
    refs.insert(p.slice_ref);
    const Pose a = decode_rotvec_cartesian(p.rotvec_cartesian);
    const Pose b = decode_three_point(p.three_point, p.geometry);
    CHECK(same_pose(a, p.pose, 1e-6));
    CHECK(same_pose(b, p.pose, 1e-6));
    // Normal-major order, offsets in the middle loop.
    const Vec3& n = normals[i / offsets.size()];
    CHECK((p.pose.normal() - n).norm() < 1e-9);
    CHECK(p.pose.translation.dot(n) == doctest::Approx(offsets[i % offsets.size()]));
    // In-plane angle in [0, pi): recover it against the zero-angle pose.
    const Pose base = build_pose(n, 0.0, 0.0);
    const Vec3 col = base.rotation.inverse() * (p.pose.rotation * Vec3::UnitX());
    double angle = std::atan2(col.y(), col.x());
    CHECK(angle >= -1e-12);
    CHECK(angle < kPi);
  }
  CHECK(refs.size() == pairs.size());
}

TEST_CASE("generation is seeded") {
  PairSpec spec;
  spec.n_rotations = 20;
  spec.trans_step_mm = 30;
  const auto a = generate_pairs(aligned(), spec, 5), b = generate_pairs(aligned(), spec, 5);
  const auto c = generate_pairs(aligned(), spec, 6);
  REQUIRE(a.size() == c.size());
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(manifest_line(a[i]) == manifest_line(b[i]));
    differs = differs || manifest_line(a[i]) != manifest_line(c[i]);
  }
  CHECK(differs);
}

TEST_CASE("pairs on disk") {
  const auto dir = testing::scratch("pairs_disk");
  PairSpec spec;
  spec.n_rotations = 6;
  spec.trans_step_mm = 60;
  spec.slice_geometry = {41, 41, 3.0};
  const auto pairs = generate_pairs(aligned(), spec, 1, "sub");
  {
    std::ofstream m(dir / "manifest.jsonl");
    write_pairs(aligned(), pairs, dir, m);
  }
  const auto back = read_manifest(dir / "manifest.jsonl");
  REQUIRE(back.size() == pairs.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].slice_ref == pairs[i].slice_ref);
    CHECK(back[i].subject_id == "sub");
    CHECK(back[i].geometry == spec.slice_geometry);
    CHECK(same_pose(back[i].pose, pairs[i].pose, 1e-7));
    const Slice s = read_slice(dir / back[i].slice_ref);
    const Slice direct = extract_slice(aligned(), pairs[i].pose, spec.slice_geometry);
    const auto [lo, hi] = std::minmax_element(direct.data.begin(), direct.data.end());
    for (std::size_t k = 0; k < s.data.size(); ++k) CHECK(std::abs(s.data[k] - direct.data[k]) <= (*hi - *lo) / 65535.0 + 1e-6);
  }
  const json line = json::parse(manifest_line(pairs[0]));
  for (const char* key : {"subject_id", "slice", "pose", "rotvec_cartesian", "three_point", "geometry"}) {
    CHECK(line.contains(key));
  }
}

TEST_CASE("malformed manifest names the line") {
  const auto dir = testing::scratch("pairs_bad");
  PairSpec spec;
  spec.n_rotations = 1;
  spec.trans_min_mm = spec.trans_max_mm = 0;
  const auto pairs = generate_pairs(aligned(), spec, 1);
  {
    std::ofstream m(dir / "m.jsonl");
    m << manifest_line(pairs[0]) << "\n{\"slice\": 3}\n";
  }
  try {
    read_manifest(dir / "m.jsonl");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find(":2") != std::string::npos);
  }
  CHECK_THROWS_AS(read_manifest(dir / "absent.jsonl"), IoError);
}
