#include "viewpos/registration.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include <spdlog/spdlog.h>

#include "sampling.hpp"
#include "viewpos/error.hpp"
#include "viewpos/parallel.hpp"

namespace viewpos {

namespace {

using Params = Eigen::Matrix<double, 6, 1>;

struct Moments {
  double n = 0, sf = 0, sm = 0, sff = 0, smm = 0, sfm = 0;

  void add(const Moments& o) {
    n += o.n;
    sf += o.sf;
    sm += o.sm;
    sff += o.sff;
    smm += o.smm;
    sfm += o.sfm;
  }
};

double correlation(const Moments& m) {
  if (m.n < 2) return 0.0;
  const double cov = m.sfm - m.sf * m.sm / m.n;
  const double vf = m.sff - m.sf * m.sf / m.n;
  const double vm = m.smm - m.sm * m.sm / m.n;
  if (vf <= 1e-12 * m.n || vm <= 1e-12 * m.n) return 0.0;
  return cov / std::sqrt(vf * vm);
}

// Pose <-> optimizer vector: rotvec in degrees, translation in mm.
Pose to_pose(const Params& x) {
  Pose p;
  p.rotation = rotvec_to_rotation(RotVec{Vec3(deg_to_rad(x[0]), deg_to_rad(x[1]), deg_to_rad(x[2]))});
  p.translation = Vec3(x[3], x[4], x[5]);
  return p;
}

Params to_params(const Pose& p) {
  const Vec3 r = rotation_to_rotvec(p.rotation).value;
  Params x;
  x << rad_to_deg(r.x()), rad_to_deg(r.y()), rad_to_deg(r.z()), p.translation.x(), p.translation.y(),
      p.translation.z();
  return x;
}

// Intensity-weighted centroid (weights shifted so the minimum is zero).
Vec3 centroid(const Volume& v) {
  const auto d = v.data();
  const float lo = *std::min_element(d.begin(), d.end());
  Vec3 acc = Vec3::Zero();
  double w = 0.0;
  for (int k = 0; k < v.dims()[2]; ++k) {
    for (int j = 0; j < v.dims()[1]; ++j) {
      for (int i = 0; i < v.dims()[0]; ++i) {
        const double wi = v.at(i, j, k) - lo;
        if (wi <= 0.0) continue;
        acc += wi * v.world(i, j, k);
        w += wi;
      }
    }
  }
  return w > 0.0 ? Vec3(acc / w) : Vec3(Vec3::Zero());
}

struct Simplex {
  Params x;
  double f;
};

// Nelder-Mead minimization with standard coefficients.
Simplex nelder_mead(const std::function<double(const Params&)>& f, const Params& start,
                    const Params& step, int max_iters, double ftol, double xtol) {
  std::array<Simplex, 7> s;
  s[0] = {start, f(start)};
  for (int i = 0; i < 6; ++i) {
    Params x = start;
    x[i] += step[i];
    s[i + 1] = {x, f(x)};
  }
  auto by_value = [](const Simplex& a, const Simplex& b) { return a.f < b.f; };

  for (int it = 0; it < max_iters; ++it) {
    std::stable_sort(s.begin(), s.end(), by_value);
    double size = 0.0;
    for (int i = 1; i < 7; ++i) size = std::max(size, (s[i].x - s[0].x).cwiseAbs().maxCoeff());
    if (s[6].f - s[0].f < ftol && size < xtol) break;

    Params centroid = Params::Zero();
    for (int i = 0; i < 6; ++i) centroid += s[i].x;
    centroid /= 6.0;

    const Params xr = centroid + (centroid - s[6].x);
    const double fr = f(xr);
    if (fr < s[0].f) {
      const Params xe = centroid + 2.0 * (centroid - s[6].x);
      const double fe = f(xe);
      s[6] = fe < fr ? Simplex{xe, fe} : Simplex{xr, fr};
    } else if (fr < s[5].f) {
      s[6] = {xr, fr};
    } else {
      const bool outside = fr < s[6].f;
      const Params xc = outside ? Params(centroid + 0.5 * (xr - centroid))
                                : Params(centroid + 0.5 * (s[6].x - centroid));
      const double fc = f(xc);
      if (fc < std::min(fr, s[6].f)) {
        s[6] = {xc, fc};
      } else {
        for (int i = 1; i < 7; ++i) {
          s[i].x = s[0].x + 0.5 * (s[i].x - s[0].x);
          s[i].f = f(s[i].x);
        }
      }
    }
  }
  return *std::min_element(s.begin(), s.end(), by_value);
}

std::vector<double> axis_grid(double step, double bound) {
  std::vector<double> g{0.0};
  if (step <= 0.0) return g;
  for (int k = 1; k * step <= bound + 1e-9; ++k) {
    g.push_back(k * step);
    g.push_back(-k * step);
  }
  std::sort(g.begin(), g.end());
  return g;
}

}  // namespace

void RegistrationConfig::validate() const {
  if (pyramid_levels < 1 || pyramid_levels > 4) throw UsageError("pyramid_levels must be in [1, 4]");
  if (!(rot_search_deg > 0.0) || !(trans_search_mm > 0.0)) {
    throw UsageError("registration search bounds must be positive");
  }
  if (local_opt_iters < 1) throw UsageError("local_opt_iters must be >= 1");
  if (!(convergence_tol > 0.0)) throw UsageError("convergence_tol must be positive");
}

double ncc(const Volume& a, const Volume& b) {
  if (a.dims() != b.dims()) throw ShapeError("ncc: volume dims differ");
  const auto da = a.data();
  const auto db = b.data();
  Moments m;
  for (std::size_t i = 0; i < da.size(); ++i) {
    const double x = da[i], y = db[i];
    m.n += 1;
    m.sf += x;
    m.sm += y;
    m.sff += x * x;
    m.smm += y * y;
    m.sfm += x * y;
  }
  return correlation(m);
}

double registration_score(const Volume& moving, const Volume& fixed, const Pose& rt, Metric metric,
                          int stride) {
  stride = std::max(1, stride);
  const detail::Sampler sampler(moving);
  const Pose inv = rt.inverse();
  const Dims& fd = fixed.dims();
  const double ratio = fixed.spacing() / moving.spacing();
  const Vec3 di = inv.rotation * Vec3(stride * ratio, 0.0, 0.0);
  const int nk = (fd[2] + stride - 1) / stride;

  std::vector<Moments> slabs(static_cast<std::size_t>(nk));
  std::vector<double> sq(static_cast<std::size_t>(nk), 0.0);
  parallel_for(static_cast<std::size_t>(nk), [&](std::size_t kk) {
    const int k = static_cast<int>(kk) * stride;
    Moments m;
    double sse = 0.0;
    for (int j = 0; j < fd[1]; j += stride) {
      const Vec3 start = moving.to_index(inv.apply(fixed.world(0, j, k)));
      const float* row = fixed.data().data() + fixed.index(0, j, k);
      Vec3 q = start;
      for (int i = 0; i < fd[0]; i += stride, q += di) {
        if (!sampler.inside(q.x(), q.y(), q.z())) continue;
        const double mv = sampler.interpolate(q.x(), q.y(), q.z());
        const double fv = row[i];
        m.n += 1;
        m.sf += fv;
        m.sm += mv;
        m.sff += fv * fv;
        m.smm += mv * mv;
        m.sfm += fv * mv;
        sse += (fv - mv) * (fv - mv);
      }
    }
    slabs[kk] = m;
    sq[kk] = sse;
  });

  Moments total;
  double sse = 0.0;
  for (std::size_t kk = 0; kk < slabs.size(); ++kk) {
    total.add(slabs[kk]);
    sse += sq[kk];
  }
  // Poses that leave almost no overlap are scored as worst-case.
  const double sampled = std::ceil(fd[0] / double(stride)) * std::ceil(fd[1] / double(stride)) * nk;
  if (total.n < 0.01 * sampled) {
    return metric == Metric::NCC ? -1.0 : -std::numeric_limits<double>::max();
  }
  const double score = metric == Metric::NCC ? correlation(total) : -sse / total.n;
  if (!std::isfinite(score)) throw NumericError("registration metric is not finite");
  return score;
}

RegistrationResult register_rigid(const Volume& moving, const Volume& fixed, const RegistrationConfig& cfg) {
  cfg.validate();
  const Pose start = cfg.initial.value_or(Pose::identity());

  auto flat = [](const Volume& v) {
    const auto [lo, hi] = std::minmax_element(v.data().begin(), v.data().end());
    return *lo == *hi;
  };
  if (flat(moving) || flat(fixed)) {
    spdlog::warn("registration input is constant; keeping the start pose");
    return {start, registration_score(moving, fixed, start, cfg.metric), false};
  }

  struct Level {
    int factor;
    Volume moving, fixed;
  };
  // Built fine to coarse by repeated halving, then consumed coarse to fine.
  std::vector<Level> levels;
  levels.push_back({1, moving, fixed});
  for (int l = 1; l < cfg.pyramid_levels; ++l) {
    const Level& prev = levels.back();
    levels.push_back({prev.factor * 2, downsample(prev.moving, 2), downsample(prev.fixed, 2)});
  }
  std::reverse(levels.begin(), levels.end());

  // Seeds on the coarsest level: rotation grid about the start pose, with
  // translations around the centroid-matching estimate and the start.
  const Level& coarse = levels.front();
  auto coarse_score = [&](const Pose& p) {
    return registration_score(coarse.moving, coarse.fixed, p, cfg.metric);
  };
  std::vector<Pose> seeds{start};
  if (cfg.global_search) {
    const Vec3 cm = centroid(coarse.moving);
    const Vec3 cf = centroid(coarse.fixed);
    const auto rot_axis = axis_grid(15.0, cfg.rot_search_deg);
    const double tstep = std::min(fixed.extent() / 4.0, cfg.trans_search_mm);
    const auto trans_axis = axis_grid(tstep, cfg.trans_search_mm);
    for (double rx : rot_axis) {
      for (double ry : rot_axis) {
        for (double rz : rot_axis) {
          const Rotation r =
              rotvec_to_rotation(RotVec{Vec3(deg_to_rad(rx), deg_to_rad(ry), deg_to_rad(rz))}) * start.rotation;
          const Vec3 t0 = cf - r * cm;
          for (double tx : trans_axis) {
            for (double ty : trans_axis) {
              for (double tz : trans_axis) {
                seeds.push_back(Pose{r, t0 + Vec3(tx, ty, tz)});
              }
            }
          }
        }
      }
    }
  }
  std::vector<double> seed_scores(seeds.size());
  for (std::size_t i = 0; i < seeds.size(); ++i) seed_scores[i] = coarse_score(seeds[i]);
  std::vector<std::size_t> order(seeds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return seed_scores[a] > seed_scores[b]; });

  Params best = to_params(start);
  double best_f = std::numeric_limits<double>::infinity();
  bool first_level = true;
  for (const Level& lv : levels) {
    const int stride = (lv.factor == 1 && fixed.size() > 1'000'000) ? 2 : 1;
    auto objective = [&](const Params& x) {
      return -registration_score(lv.moving, lv.fixed, to_pose(x), cfg.metric, stride);
    };
    const double s = 2.0 * lv.factor;
    Params step;
    step << s, s, s, s, s, s;
    const double xtol = 0.01 * lv.factor;

    std::vector<Params> starts;
    if (first_level) {
      const std::size_t n_starts = std::min<std::size_t>(3, order.size());
      for (std::size_t i = 0; i < n_starts; ++i) starts.push_back(to_params(seeds[order[i]]));
    } else {
      starts.push_back(best);
    }
    best_f = std::numeric_limits<double>::infinity();
    for (const Params& x0 : starts) {
      const Simplex r = nelder_mead(objective, x0, step, cfg.local_opt_iters, cfg.convergence_tol, xtol);
      if (r.f < best_f) {
        best_f = r.f;
        best = r.x;
      }
    }
    spdlog::debug("registration level x{}: score {:.6f}", lv.factor, -best_f);
    first_level = false;
  }

  RegistrationResult out;
  out.rt = to_pose(best);
  out.score = registration_score(moving, fixed, out.rt, cfg.metric);
  const double start_score = registration_score(moving, fixed, start, cfg.metric);
  // Converged: the score improved, or the search settled back on the start
  // pose (already optimal). A drift to an equally scored pose is no gain.
  const bool improved = out.score > start_score + cfg.convergence_tol;
  const bool at_start = rad_to_deg(geodesic_distance(out.rt.rotation, start.rotation)) < 0.1 &&
                        (out.rt.translation - start.translation).norm() < 0.1;
  out.converged = improved || (at_start && out.score >= start_score - cfg.convergence_tol);
  if (!out.converged) {
    out.rt = start;
    out.score = start_score;
  }
  return out;
}

}  // namespace viewpos
