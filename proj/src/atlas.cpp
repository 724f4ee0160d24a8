#include "viewpos/atlas.hpp"

#include <string>

#include <spdlog/spdlog.h>

#include "viewpos/error.hpp"

namespace viewpos {

namespace {

Volume mean_of(const std::vector<Volume>& vols, const std::vector<bool>& use, Dims dims, double spacing) {
  std::vector<double> acc(static_cast<std::size_t>(dims[0]) * dims[1] * dims[2], 0.0);
  int n = 0;
  for (std::size_t s = 0; s < vols.size(); ++s) {
    if (!use[s]) continue;
    const auto d = vols[s].data();
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += d[i];
    ++n;
  }
  if (n == 0) throw NumericError("atlas: every subject failed registration");
  std::vector<float> out(acc.size());
  for (std::size_t i = 0; i < acc.size(); ++i) out[i] = static_cast<float>(acc[i] / n);
  return Volume(dims, spacing, std::move(out));
}

double mean_ncc(const std::vector<Volume>& aligned, const std::vector<bool>& use, const Volume& ref) {
  double sum = 0.0;
  int n = 0;
  for (std::size_t s = 0; s < aligned.size(); ++s) {
    if (!use[s]) continue;
    sum += ncc(aligned[s], ref);
    ++n;
  }
  return n > 0 ? sum / n : 0.0;
}

}  // namespace

AtlasBuild build_atlas(std::span<const Volume> cohort, const AtlasOptions& opts) {
  if (cohort.empty()) throw EmptyInputError("atlas: cohort is empty");
  if (opts.size < 32) throw UsageError("atlas size L must be >= 32");
  if (opts.max_iters < 0) throw UsageError("atlas max_iters must be >= 0");
  opts.registration.validate();

  const int L = opts.size;
  const Dims dims{L, L, L};
  const double spacing = cohort.front().extent() / L;
  const std::size_t n = cohort.size();

  // Standardize every subject on its own grid; out-of-hull fill then equals
  // the subject mean.
  std::vector<Volume> normalized;
  normalized.reserve(n);
  for (const Volume& v : cohort) normalized.push_back(standardize(v));

  std::vector<Pose> transforms(n, Pose::identity());
  std::vector<Volume> aligned;
  aligned.reserve(n);
  for (std::size_t s = 0; s < n; ++s) {
    aligned.push_back(standardize(resample_volume(normalized[s], transforms[s], dims, spacing)));
  }

  AtlasBuild out{Volume(dims, spacing), {}, 0, {}, {}};
  std::vector<bool> use(n, true);
  Volume reference = mean_of(aligned, use, dims, spacing);
  out.mean_ncc.push_back(mean_ncc(aligned, use, reference));
  spdlog::info("atlas: iteration 0 mean NCC {:.6f}", out.mean_ncc.back());

  // Subject 0 anchors the atlas frame. Each pass updates the other subjects
  // one at a time against the mean of the rest.
  // Mean NCC to the full mean is proportional to |sum of z-scores|, so only
  // accepting moves that raise the leave-one-out correlation keeps it
  // non-decreasing, and a subject never locks onto its own ghost.
  const std::size_t voxels = reference.size();
  for (int it = 1; it <= opts.max_iters; ++it) {
    std::vector<double> sum(voxels, 0.0);
    for (const Volume& a : aligned) {
      for (std::size_t i = 0; i < voxels; ++i) sum[i] += a.data()[i];
    }
    std::vector<int> failed;
    std::vector<bool> ok(n, true);
    for (std::size_t s = 1; s < n; ++s) {
      const auto own = aligned[s].data();
      std::vector<float> others(voxels);
      for (std::size_t i = 0; i < voxels; ++i) {
        sum[i] -= own[i];
        others[i] = static_cast<float>(sum[i]);
      }
      const Volume loo(dims, spacing, std::move(others));
      RegistrationConfig cfg = opts.registration;
      cfg.initial = transforms[s];
      cfg.global_search = it == 1 && opts.registration.global_search;
      try {
        const RegistrationResult r = register_rigid(normalized[s], loo, cfg);
        Volume candidate = standardize(resample_volume(normalized[s], r.rt, dims, spacing));
        if (ncc(candidate, loo) > ncc(aligned[s], loo)) {
          transforms[s] = r.rt;
          aligned[s] = std::move(candidate);
        }
      } catch (const Error& e) {
        spdlog::warn("atlas: subject {} excluded from iteration {}: {}", s, it, e.what());
        ok[s] = false;
        failed.push_back(static_cast<int>(s));
        continue;
      }
      const auto upd = aligned[s].data();
      for (std::size_t i = 0; i < voxels; ++i) sum[i] += upd[i];
    }
    reference = mean_of(aligned, ok, dims, spacing);
    out.excluded.push_back(failed);
    out.mean_ncc.push_back(mean_ncc(aligned, ok, reference));
    out.iterations_run = it;
    spdlog::info("atlas: iteration {} mean NCC {:.6f}", it, out.mean_ncc.back());
    if (out.mean_ncc.back() - out.mean_ncc[out.mean_ncc.size() - 2] < opts.min_improvement) break;
  }

  out.atlas = rescale_unit(reference);
  out.subject_transforms = std::move(transforms);
  return out;
}

std::pair<Volume, Pose> align_to_atlas(const Volume& v, const Volume& atlas, const RegistrationConfig& cfg) {
  const RegistrationResult r = register_rigid(v, atlas, cfg);
  return {resample_volume(v, r.rt, atlas.dims(), atlas.spacing()), r.rt};
}

}  // namespace viewpos
