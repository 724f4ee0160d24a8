#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <random>

#include "support.hpp"
#include "viewpos/error.hpp"
#include "viewpos/registration.hpp"

using namespace viewpos;
using testing::gd_deg;

namespace {

const Volume& fixture() {
  static const Volume v = testing::phantom(64);
  return v;
}

}  // namespace

TEST_CASE("ncc") {
  const Volume& v = fixture();
  CHECK(ncc(v, v) == doctest::Approx(1.0).epsilon(1e-9));

  std::vector<float> neg(v.data().begin(), v.data().end());
  for (float& x : neg) x = 3.0f - x;
  CHECK(ncc(v, Volume(v.dims(), v.spacing(), neg)) == doctest::Approx(-1.0).epsilon(1e-6));

  std::vector<float> shuffled(v.data().begin(), v.data().end());
  std::mt19937_64 rng(1);
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  CHECK(std::abs(ncc(v, Volume(v.dims(), v.spacing(), shuffled))) < 0.5);

  CHECK(ncc(v, Volume(v.dims(), v.spacing(), 1.0f)) == 0.0);
  CHECK_THROWS_AS(ncc(v, Volume({8, 8, 8}, 1.0)), ShapeError);
}

TEST_CASE("registration score") {
  const Volume& v = fixture();
  CHECK(registration_score(v, v, Pose(), Metric::NCC) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(registration_score(v, v, Pose(), Metric::MSE) == doctest::Approx(0.0));
  const Pose off{Rotation(), Vec3(8, 0, 0)};
  CHECK(registration_score(v, v, off, Metric::NCC) < 0.99);
  CHECK(registration_score(v, v, off, Metric::MSE) < 0.0);
}

TEST_CASE("self registration") {
  const auto r = register_rigid(fixture(), fixture());
  CHECK(gd_deg(r.rt.rotation, Rotation()) <= 0.5);
  CHECK(r.rt.translation.norm() <= 0.5);
  CHECK(r.score == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("known translation") {
  const Pose truth{Rotation(), Vec3(5, 0, 0)};
  const Volume fixed = resample_volume(fixture(), truth);
  const auto r = register_rigid(fixture(), fixed);
  CHECK(r.converged);
  CHECK(gd_deg(r.rt.rotation, truth.rotation) <= 1.0);
  CHECK((r.rt.translation - truth.translation).norm() <= 1.0);
}

TEST_CASE("known rotation and translation") {
  const Pose truth{Rotation::about_z(deg_to_rad(12.0)), Vec3(4, -3, 2)};
  const Volume fixed = resample_volume(fixture(), truth);
  const auto r = register_rigid(fixture(), fixed);
  CHECK(r.converged);
  CHECK(gd_deg(r.rt.rotation, truth.rotation) <= 1.0);
  CHECK((r.rt.translation - truth.translation).norm() <= 1.0);
  CHECK(r.score >= registration_score(fixture(), fixed, Pose(), Metric::NCC));
}

TEST_CASE("mse metric") {
  const Pose truth{Rotation::about_x(deg_to_rad(-8.0)), Vec3(0, 3, -4)};
  const Volume fixed = resample_volume(fixture(), truth);
  RegistrationConfig cfg;
  cfg.metric = Metric::MSE;
  const auto r = register_rigid(fixture(), fixed, cfg);
  CHECK(gd_deg(r.rt.rotation, truth.rotation) <= 1.0);
  CHECK((r.rt.translation - truth.translation).norm() <= 1.0);
}

TEST_CASE("inverse consistency") {
  PhantomParams p;
  p.seed = 4;
  p.n_subjects = 2;
  p.dims = {64, 64, 64};
  p.spacing = 180.0 / 64;
  p.jitter_rot_max_deg = 10;
  p.jitter_trans_max_mm = 6;
  p.shape_scale_range = {0.95, 1.05};
  const auto a = make_phantom(p, 0).volume, b = make_phantom(p, 1).volume;
  const auto ab = register_rigid(a, b), ba = register_rigid(b, a);
  const Pose loop = compose_pose(ba.rt, ab.rt);
  CHECK(gd_deg(loop.rotation, Rotation()) <= 2.0);
  CHECK(loop.translation.norm() <= 2.0);
}

TEST_CASE("warm start without global search") {
  const Pose truth{Rotation::about_y(deg_to_rad(4.0)), Vec3(-2, 1, 3)};
  const Volume fixed = resample_volume(fixture(), truth);
  RegistrationConfig cfg;
  cfg.global_search = false;
  cfg.initial = Pose{Rotation(), Vec3(-1, 0, 2)};
  const auto r = register_rigid(fixture(), fixed, cfg);
  CHECK(gd_deg(r.rt.rotation, truth.rotation) <= 1.0);
  CHECK((r.rt.translation - truth.translation).norm() <= 1.0);
}

TEST_CASE("no improvement keeps the start pose") {
  const Volume flat(fixture().dims(), fixture().spacing(), 0.5f);
  const auto r = register_rigid(fixture(), flat);
  CHECK_FALSE(r.converged);
  CHECK(gd_deg(r.rt.rotation, Rotation()) == 0.0);
  CHECK(r.rt.translation.norm() == 0.0);
}

TEST_CASE("config validation") {
  RegistrationConfig cfg;
  cfg.pyramid_levels = 5;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = {};
  cfg.rot_search_deg = 0;
  CHECK_THROWS_AS(cfg.validate(), UsageError);
  cfg = {};
  cfg.trans_search_mm = -1;
  CHECK_THROWS_AS(register_rigid(fixture(), fixture(), cfg), UsageError);
}
