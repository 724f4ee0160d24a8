#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstring>
#include <random>

#include "support.hpp"
#include "viewpos/error.hpp"
#include "viewpos/io.hpp"

using namespace viewpos;

TEST_CASE("pose json shape") {
  const Pose p{Rotation::about_z(kPi / 2), Vec3(0, 0, 10)};
  const json j = pose_to_json(p);
  REQUIRE(j.contains("rotvec"));
  REQUIRE(j.contains("translation_mm"));
  CHECK(j["rotvec"][2].get<double>() == doctest::Approx(kPi / 2));
  CHECK(j["translation_mm"][2].get<double>() == 10.0);
  const Pose back = pose_from_json(j);
  CHECK((back.rotation.matrix() - p.rotation.matrix()).norm() < 1e-12);
  CHECK_THROWS_AS(pose_from_json(json{{"rotvec", {1, 2}}}), IoError);

  const json tp = three_point_to_json(pose_to_three_point(Pose(), SliceGeometry{}));
  CHECK(tp["a2"] == json({-90.0, 90.0, 0.0}));
  CHECK_THROWS_AS(three_point_from_json(json::object()), IoError);
}

TEST_CASE("volume file round trip") {
  const auto dir = testing::scratch("io_volume");
  const Volume v = testing::phantom(24, 0.05, 2);
  write_volume(dir / "v.vvol", v);
  const Volume r = read_volume(dir / "v.vvol");
  CHECK(r.dims() == v.dims());
  CHECK(r.spacing() == v.spacing());
  CHECK(std::memcmp(r.data().data(), v.data().data(), v.size() * sizeof(float)) == 0);

  const json meta = read_json(dir / "v.vvol.json");
  CHECK(meta["dims"] == json({24, 24, 24}));
  CHECK(meta["order"] == "xyz-fastest-x");
  CHECK(meta["spacing_mm"].get<double>() == doctest::Approx(7.5));

  // Raw layout: little-endian float32, x fastest.
  const std::string bytes = testing::slurp(dir / "v.vvol");
  REQUIRE(bytes.size() == v.size() * 4);
  const std::size_t idx = v.index(3, 1, 0);
  std::uint32_t bits = 0;
  for (int b = 3; b >= 0; --b) bits = (bits << 8) | static_cast<unsigned char>(bytes[idx * 4 + b]);
  float x;
  std::memcpy(&x, &bits, 4);
  CHECK(x == v.at(3, 1, 0));
}

TEST_CASE("volume file errors") {
  const auto dir = testing::scratch("io_volume_bad");
  CHECK_THROWS_AS(read_volume(dir / "missing.vvol"), IoError);

  write_volume(dir / "v.vvol", Volume({4, 4, 4}, 1.0, 1.0f));
  json meta = read_json(dir / "v.vvol.json");
  meta["spacing_mm"] = {1.0, 1.0, 2.0};
  write_json(dir / "v.vvol.json", meta);
  CHECK_THROWS_AS(read_volume(dir / "v.vvol"), IoError);

  meta["spacing_mm"] = 1.0;
  meta["dims"] = {4, 4, 5};
  write_json(dir / "v.vvol.json", meta);
  CHECK_THROWS_AS(read_volume(dir / "v.vvol"), IoError);
}

TEST_CASE("slice file round trip") {
  const auto dir = testing::scratch("io_slice");
  std::mt19937_64 rng(2);
  const Volume v = testing::phantom(40);
  const Pose p = testing::random_pose(rng, 20.0);
  const Slice s = extract_slice(v, p, SliceGeometry{31, 23, 2.0});
  write_slice(dir / "s.pgm", s);

  const std::string bytes = testing::slurp(dir / "s.pgm");
  const std::string header = "P5\n31 23\n65535\n";
  REQUIRE(bytes.compare(0, header.size(), header) == 0);
  CHECK(bytes.size() == header.size() + 31 * 23 * 2);

  const Slice r = read_slice(dir / "s.pgm");
  CHECK(r.geometry == s.geometry);
  CHECK(r.source == (dir / "s.pgm").string());
  REQUIRE(r.pose);
  CHECK((r.pose->translation - p.translation).norm() < 1e-12);
  const auto [lo, hi] = std::minmax_element(s.data.begin(), s.data.end());
  const double step = (*hi - *lo) / 65535.0;
  for (std::size_t i = 0; i < s.data.size(); ++i) CHECK(std::abs(r.data[i] - s.data[i]) <= 0.5 * step + 1e-6);

  // Big-endian samples: the maximum pixel encodes as 0xFFFF.
  const auto imax = static_cast<std::size_t>(std::max_element(s.data.begin(), s.data.end()) - s.data.begin());
  CHECK(static_cast<unsigned char>(bytes[header.size() + 2 * imax]) == 0xff);
}

TEST_CASE("constant slice round trip and missing sidecar") {
  const auto dir = testing::scratch("io_slice_const");
  Slice s;
  s.geometry = {5, 4, 1.0};
  s.data.assign(20, 0.75f);
  write_slice(dir / "c.pgm", s);
  const Slice r = read_slice(dir / "c.pgm");
  for (float x : r.data) CHECK(x == 0.75f);
  CHECK_FALSE(r.pose);

  fs::remove(dir / "c.pgm.json");
  CHECK_THROWS_AS(read_slice(dir / "c.pgm"), IoError);
}
