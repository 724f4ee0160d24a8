#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <random>
#include <string>

#include "viewpos/geom.hpp"
#include "viewpos/phantom.hpp"
#include "viewpos/volume.hpp"

namespace testing {

namespace fs = std::filesystem;
using namespace viewpos;

// Fresh scratch directory, removed on construction so reruns start clean.
inline fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "viewpos_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Noise-free canonical phantom covering a 180 mm field.
inline Volume phantom(int n, double noise = 0.0, std::uint64_t seed = 1) {
  PhantomParams p;
  p.seed = seed;
  p.dims = {n, n, n};
  p.spacing = 180.0 / n;
  p.intensity_noise_sd = noise;
  return make_phantom(p, 0).volume;
}

inline Pose random_pose(std::mt19937_64& rng, double max_t = 50.0) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Vec3 axis = Vec3(gauss(rng), gauss(rng), gauss(rng)).normalized();
  const double angle = u(rng) * kPi;
  const Vec3 t(max_t * (2 * u(rng) - 1), max_t * (2 * u(rng) - 1), max_t * (2 * u(rng) - 1));
  return {rotvec_to_rotation({axis * angle}), t};
}

inline double gd_deg(const Rotation& a, const Rotation& b) { return rad_to_deg(geodesic_distance(a, b)); }

}  // namespace testing
