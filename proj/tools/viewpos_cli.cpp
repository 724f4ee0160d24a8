#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "viewpos/atlas.hpp"
#include "viewpos/error.hpp"
#include "viewpos/io.hpp"
#include "viewpos/pairs.hpp"
#include "viewpos/parallel.hpp"
#include "viewpos/phantom.hpp"
#include "viewpos/positioning.hpp"
#include "viewpos/predictor.hpp"
#include "viewpos/registration.hpp"
#include "viewpos/similarity.hpp"

using namespace viewpos;

namespace {

struct Global {
  std::optional<std::uint64_t> seed;
  unsigned threads = 0;
  std::string log_level = "info";
};

std::uint64_t require_seed(const Global& g, const char* cmd) {
  if (!g.seed) throw UsageError(std::string(cmd) + " requires --seed");
  return *g.seed;
}

void require_file(const fs::path& p, const char* what) {
  if (!fs::is_regular_file(p)) throw IoError(std::string(what) + " not found: " + p.string());
}

// Writes JSON to a file, or to stdout for "-".
void emit_json(const std::string& out, const json& j) {
  if (out == "-") {
    std::cout << j.dump(2) << "\n";
  } else {
    write_json(out, j);
  }
}

template <typename F>
auto stage(const std::string& name, F&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(name, e);
  }
}

Volume load_volume(const fs::path& p, const std::string& label) {
  return stage("load " + label, [&] {
    require_file(p, label.c_str());
    return read_volume(p);
  });
}

struct CohortEntry {
  std::string id;
  fs::path volume;
};

std::vector<CohortEntry> read_cohort(const fs::path& manifest) {
  require_file(manifest, "cohort manifest");
  const json j = read_json(manifest);
  std::vector<CohortEntry> out;
  try {
    for (const auto& s : j.at("subjects")) {
      out.push_back({s.at("id").get<std::string>(), manifest.parent_path() / s.at("volume").get<std::string>()});
    }
  } catch (const json::exception& e) {
    throw IoError("malformed cohort manifest " + manifest.string() + ": " + e.what());
  }
  if (out.empty()) throw EmptyInputError("cohort manifest lists no subjects");
  for (const auto& e : out) require_file(e.volume, "cohort volume");
  return out;
}

Dims parse_dims(const std::vector<int>& d) {
  if (d.size() == 1) return {d[0], d[0], d[0]};
  if (d.size() == 3) return {d[0], d[1], d[2]};
  throw UsageError("--dims takes one or three integers");
}

Metric parse_metric(const std::string& m) {
  if (m == "ncc") return Metric::NCC;
  if (m == "mse") return Metric::MSE;
  throw UsageError("unknown metric '" + m + "'");
}

void add_registration_flags(CLI::App* cmd, RegistrationConfig& cfg, std::string& metric) {
  cmd->add_option("--levels", cfg.pyramid_levels, "Pyramid levels")->capture_default_str();
  cmd->add_option("--metric", metric, "ncc or mse")->capture_default_str();
  cmd->add_option("--rot-search", cfg.rot_search_deg, "Rotation seeding bound (deg)")->capture_default_str();
  cmd->add_option("--trans-search", cfg.trans_search_mm, "Translation seeding bound (mm)")->capture_default_str();
  cmd->add_option("--opt-iters", cfg.local_opt_iters, "Local optimizer iterations per level")->capture_default_str();
}

// ---- phantom ----

struct PhantomArgs {
  int n = 1;
  std::vector<int> dims{180};
  double spacing = 1.0;
  double jitter_rot = 10.0;
  double jitter_trans = 8.0;
  double noise = 0.02;
  double scale_min = 0.92, scale_max = 1.08;
  std::string out;
};

void cmd_phantom(const Global& g, const PhantomArgs& a) {
  if (a.n < 1) throw UsageError("--n must be >= 1");
  PhantomParams p;
  p.seed = require_seed(g, "phantom");
  p.n_subjects = a.n;
  p.dims = parse_dims(a.dims);
  p.spacing = a.spacing;
  p.jitter_rot_max_deg = a.jitter_rot;
  p.jitter_trans_max_mm = a.jitter_trans;
  p.intensity_noise_sd = a.noise;
  p.shape_scale_range = {a.scale_min, a.scale_max};
  p.validate();

  const fs::path dir(a.out);
  json subjects = json::array();
  for (int i = 0; i < a.n; ++i) {
    const PhantomSubject s = make_phantom(p, i);
    char id[32];
    std::snprintf(id, sizeof(id), "subject_%03d", i);
    const std::string file = std::string(id) + ".vvol";
    write_volume(dir / file, s.volume);
    subjects.push_back({{"id", id},
                        {"volume", file},
                        {"jitter", pose_to_json(s.jitter)},
                        {"scale", {s.scale.x(), s.scale.y(), s.scale.z()}}});
    spdlog::info("wrote {}", (dir / file).string());
  }
  write_json(dir / "cohort.json", {{"seed", p.seed},
                                   {"dims", p.dims},
                                   {"spacing_mm", p.spacing},
                                   {"jitter_rot_max_deg", p.jitter_rot_max_deg},
                                   {"jitter_trans_max_mm", p.jitter_trans_max_mm},
                                   {"intensity_noise_sd", p.intensity_noise_sd},
                                   {"shape_scale_range", {a.scale_min, a.scale_max}},
                                   {"subjects", subjects}});
}

// ---- build-atlas ----

struct AtlasArgs {
  std::string cohort;
  std::string out;
  std::string aligned_dir;
  std::string metric = "ncc";
  AtlasOptions opts;
};

void cmd_build_atlas(const AtlasArgs& a) {
  const auto entries = stage("load cohort", [&] { return read_cohort(a.cohort); });
  AtlasOptions opts = a.opts;
  opts.registration.metric = parse_metric(a.metric);
  std::vector<Volume> vols;
  for (const auto& e : entries) vols.push_back(load_volume(e.volume, "cohort volume"));

  const AtlasBuild b = stage("atlas", [&] { return build_atlas(vols, opts); });
  write_volume(a.out, b.atlas);

  json transforms = json::array();
  for (std::size_t i = 0; i < entries.size(); ++i) {
    transforms.push_back({{"id", entries[i].id}, {"to_atlas", pose_to_json(b.subject_transforms[i])}});
  }
  fs::path report(a.out);
  report.replace_extension(".build.json");
  write_json(report, {{"iterations", b.iterations_run},
                      {"mean_ncc", b.mean_ncc},
                      {"excluded", b.excluded},
                      {"subjects", transforms}});

  if (!a.aligned_dir.empty()) {
    const fs::path dir(a.aligned_dir);
    json subjects = json::array();
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const Volume aligned =
          resample_volume(vols[i], b.subject_transforms[i], b.atlas.dims(), b.atlas.spacing());
      const std::string file = entries[i].id + ".vvol";
      write_volume(dir / file, aligned);
      subjects.push_back({{"id", entries[i].id}, {"volume", file}});
    }
    write_json(dir / "cohort.json", {{"subjects", subjects}});
  }
  spdlog::info("atlas written to {} after {} iterations", a.out, b.iterations_run);
}

// ---- gen-pairs ----

struct PairsArgs {
  std::string cohort;
  std::vector<std::string> volumes;
  PairSpec spec;
  std::string out;
};

void cmd_gen_pairs(const Global& g, const PairsArgs& a) {
  const std::uint64_t seed = require_seed(g, "gen-pairs");
  std::vector<CohortEntry> entries;
  if (!a.cohort.empty()) entries = stage("load cohort", [&] { return read_cohort(a.cohort); });
  for (const auto& v : a.volumes) {
    stage("load volume", [&] { require_file(v, "volume"); return 0; });
    entries.push_back({fs::path(v).stem().string(), v});
  }
  if (entries.empty()) throw UsageError("gen-pairs needs --cohort or --volume");

  const fs::path dir(a.out);
  fs::create_directories(dir);
  std::ofstream manifest(dir / "manifest.jsonl", std::ios::trunc);
  if (!manifest) throw IoError("cannot write " + (dir / "manifest.jsonl").string());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const Volume v = load_volume(entries[i].volume, "volume");
    stage("pairs", [&] {
      const auto pairs = generate_pairs(v, a.spec, seed + i, entries[i].id);
      write_pairs(v, pairs, dir, manifest);
      spdlog::info("{}: {} pairs", entries[i].id, pairs.size());
      return 0;
    });
  }
}

// ---- build-bank ----

struct BankArgs {
  std::vector<std::string> manifests;
  int d = 32;
  std::string out;
};

void cmd_build_bank(const BankArgs& a) {
  SliceBank bank(a.d);
  for (const auto& m : a.manifests) {
    stage("load manifest", [&] { require_file(m, "manifest"); return 0; });
    const SliceBank part = stage("bank", [&] { return build_bank(fs::path(m), a.d); });
    for (std::size_t i = 0; i < part.size(); ++i) {
      bank.add_feature(Feature(part.feature(i).begin(), part.feature(i).end()), part.pose(i));
    }
  }
  bank.save(a.out);
  spdlog::info("bank with {} entries written to {}", bank.size(), a.out);
}

// ---- register ----

struct RegisterArgs {
  std::string moving, fixed, out = "-";
  std::string metric = "ncc";
  RegistrationConfig cfg;
};

void cmd_register(const RegisterArgs& a) {
  const Volume moving = load_volume(a.moving, "moving volume");
  const Volume fixed = load_volume(a.fixed, "fixed volume");
  RegistrationConfig cfg = a.cfg;
  cfg.metric = parse_metric(a.metric);
  const auto r = stage("register", [&] { return register_rigid(moving, fixed, cfg); });
  emit_json(a.out, {{"rt", pose_to_json(r.rt)}, {"score", r.score}, {"converged", r.converged}});
}

// ---- extract-slice ----

struct ExtractArgs {
  std::string volume, pose, out;
  SliceGeometry geometry;
};

void cmd_extract_slice(const ExtractArgs& a) {
  const Volume v = load_volume(a.volume, "volume");
  const Pose p = stage("load pose", [&] {
    require_file(a.pose, "pose");
    return pose_from_json(read_json(a.pose));
  });
  a.geometry.validate();
  write_slice(a.out, extract_slice(v, p, a.geometry));
}

// ---- position ----

struct PositionArgs {
  std::string query, target, atlas, bank, pose_json, rt_json;
  bool oracle = false;
  std::string extractor = "downsample:48";
  std::string metric = "ncc";
  PositionConfig cfg;
  std::string out = "-";
  std::string slice_out;
};

void cmd_position(const PositionArgs& a) {
  const int predictors = int(!a.bank.empty()) + int(!a.pose_json.empty()) + int(a.oracle);
  if (predictors != 1) throw UsageError("position needs exactly one of --bank, --pose-json, --oracle");
  if (a.out == "-" && a.slice_out.empty()) throw UsageError("--slice-out is required with --out -");
  PositionConfig cfg = a.cfg;
  cfg.registration.metric = parse_metric(a.metric);
  cfg.fine.validate();
  const auto extractor = make_extractor(a.extractor);

  const Slice query = stage("load query", [&] {
    require_file(a.query, "query slice");
    return read_slice(a.query);
  });
  const Volume target = load_volume(a.target, "target");
  const Volume atlas = load_volume(a.atlas, "atlas");

  std::unique_ptr<PosePredictor> predictor;
  std::optional<SliceBank> bank;
  if (!a.bank.empty()) {
    bank = stage("load bank", [&] {
      require_file(a.bank, "bank");
      return SliceBank::load(a.bank);
    });
    predictor = std::make_unique<KnnPredictor>(*bank);
  } else if (!a.pose_json.empty()) {
    predictor = std::make_unique<FixedPosePredictor>(stage("load pose", [&] {
      require_file(a.pose_json, "pose");
      return FixedPosePredictor::from_file(a.pose_json);
    }));
  } else {
    predictor = std::make_unique<OraclePredictor>();
  }

  PositionResult res;
  if (!a.rt_json.empty()) {
    const Pose rt = stage("load rt", [&] {
      require_file(a.rt_json, "rt");
      const json j = read_json(a.rt_json);
      return pose_from_json(j.contains("rt") ? j.at("rt") : j);
    });
    const AtlasPrompt prompt = stage("predict", [&] { return make_prompt(query, atlas, *predictor); });
    const Pose coarse = coarse_position(prompt, rt);
    res = stage("fine", [&] { return fine_position(query, target, coarse, cfg.fine, *extractor); });
  } else {
    res = position(query, target, atlas, *predictor, cfg, *extractor);
  }

  fs::path slice_out = a.slice_out;
  if (slice_out.empty()) {
    slice_out = a.out;
    slice_out.replace_extension(".pgm");
  }
  Slice out_slice = res.slice;
  out_slice.pose = res.pose;
  write_slice(slice_out, out_slice);
  emit_json(a.out, res.to_json());
  spdlog::info("score {:.6f} after {} iterations", res.score, res.iterations);
}

// ---- evaluate ----

struct EvaluateArgs {
  std::string pairs, bank;
  std::vector<std::string> queries, results;
  std::string format = "text";
  std::string out = "-";
};

std::string text_report(const json& j) {
  std::ostringstream os;
  if (j.contains("predictor")) {
    const auto& p = j["predictor"];
    os << "predictor: " << p["count"].get<std::size_t>() << " pairs\n";
    for (const char* key : {"rot_gd_deg", "ed_a1_mm", "ed_a2_mm", "ed_a3_mm", "tra_ed_mm"}) {
      os << "  " << key << ": mean " << p[key]["mean"].get<double>() << " sd " << p[key]["sd"].get<double>()
         << " median " << p[key]["median"].get<double>() << "\n";
    }
  }
  if (j.contains("positioning")) {
    const auto& p = j["positioning"];
    os << "positioning: " << p["runs"].size() << " runs\n";
    for (const auto& r : p["runs"]) {
      os << "  " << r["query"].get<std::string>() << ": ssim " << r["ssim"].get<double>() << " mse "
         << r["mse"].get<double>() << "\n";
    }
    os << "  ssim mean " << p["ssim"]["mean"].get<double>() << " median " << p["ssim"]["median"].get<double>()
       << "\n";
    os << "  mse mean " << p["mse"]["mean"].get<double>() << " median " << p["mse"]["median"].get<double>()
       << "\n";
  }
  return os.str();
}

void cmd_evaluate(const EvaluateArgs& a) {
  if (a.format != "json" && a.format != "text") throw UsageError("--format must be json or text");
  if (a.pairs.empty() == !a.bank.empty()) throw UsageError("--pairs and --bank go together");
  if (a.queries.size() != a.results.size()) throw UsageError("--query and --result counts differ");
  if (a.pairs.empty() && a.queries.empty()) throw UsageError("nothing to evaluate");

  json report = json::object();
  if (!a.pairs.empty()) {
    require_file(a.pairs, "pairs manifest");
    const SliceBank bank = stage("load bank", [&] {
      require_file(a.bank, "bank");
      return SliceBank::load(a.bank);
    });
    const KnnPredictor knn(bank);
    report["predictor"] = stage("evaluate", [&] { return evaluate_predictor(knn, fs::path(a.pairs)); }).to_json();
  }
  if (!a.queries.empty()) {
    json runs = json::array();
    std::vector<double> ssims, mses;
    for (std::size_t i = 0; i < a.queries.size(); ++i) {
      const auto [q, r] = stage("load slices", [&] {
        require_file(a.queries[i], "query slice");
        require_file(a.results[i], "result slice");
        return std::pair{read_slice(a.queries[i]), read_slice(a.results[i])};
      });
      const double s = ssim(q, r), m = mse_image(q, r);
      if (!std::isfinite(s) || !std::isfinite(m)) throw NumericError("non-finite SSIM/MSE for " + a.queries[i]);
      ssims.push_back(s);
      mses.push_back(m);
      runs.push_back({{"query", a.queries[i]}, {"result", a.results[i]}, {"ssim", s}, {"mse", m}});
    }
    auto summary = [](std::vector<double> v) {
      const ErrorSummary s = summarize(std::move(v));
      return json{{"mean", s.mean}, {"sd", s.sd}, {"median", s.median}};
    };
    report["positioning"] = {{"runs", runs}, {"ssim", summary(ssims)}, {"mse", summary(mses)}};
  }

  if (a.format == "json") {
    emit_json(a.out, report);
  } else if (a.out == "-") {
    std::cout << text_report(report);
  } else {
    ensure_parent(a.out);
    std::ofstream(a.out) << text_report(report);
  }
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Usage: return 2;
    case ErrorKind::Data: return 3;
    case ErrorKind::Numeric: return 4;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  spdlog::set_default_logger(spdlog::stderr_color_mt("viewpos"));

  CLI::App app{"Atlas-prompted slice-to-volume view positioning"};
  app.require_subcommand(1);
  Global g;
  app.add_option("--seed", g.seed, "Seed for stochastic stages");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("--log-level", g.log_level, "trace|debug|info|warn|error|off")->capture_default_str();

  PhantomArgs ph;
  auto* phantom = app.add_subcommand("phantom", "Render a synthetic cohort");
  phantom->add_option("--n", ph.n, "Number of subjects")->capture_default_str();
  phantom->add_option("--dims", ph.dims, "Voxels per side, one or three values")->capture_default_str();
  phantom->add_option("--spacing", ph.spacing, "Voxel spacing (mm)")->capture_default_str();
  phantom->add_option("--jitter-rot", ph.jitter_rot, "Max rotation jitter (deg)")->capture_default_str();
  phantom->add_option("--jitter-trans", ph.jitter_trans, "Max translation jitter (mm)")->capture_default_str();
  phantom->add_option("--noise", ph.noise, "Intensity noise sd")->capture_default_str();
  phantom->add_option("--scale-min", ph.scale_min)->capture_default_str();
  phantom->add_option("--scale-max", ph.scale_max)->capture_default_str();
  phantom->add_option("--out", ph.out, "Output directory")->required();

  AtlasArgs at;
  auto* atlas = app.add_subcommand("build-atlas", "Build an atlas from a cohort");
  atlas->add_option("--cohort", at.cohort, "Cohort manifest (cohort.json)")->required();
  atlas->add_option("--size", at.opts.size, "Atlas voxels per side")->capture_default_str();
  atlas->add_option("--max-iters", at.opts.max_iters)->capture_default_str();
  atlas->add_option("--min-improvement", at.opts.min_improvement)->capture_default_str();
  atlas->add_option("--aligned-dir", at.aligned_dir, "Also write subjects resampled into the atlas frame");
  atlas->add_option("--out", at.out, "Atlas .vvol")->required();
  add_registration_flags(atlas, at.opts.registration, at.metric);

  PairsArgs pa;
  auto* pairs = app.add_subcommand("gen-pairs", "Generate slice-pose pairs from aligned volumes");
  pairs->add_option("--cohort", pa.cohort, "Cohort manifest of aligned volumes");
  pairs->add_option("--volume", pa.volumes, "Aligned volume (repeatable)");
  pairs->add_option("--n-rotations", pa.spec.n_rotations)->capture_default_str();
  pairs->add_option("--inplane", pa.spec.inplane_per_normal, "In-plane draws per normal and offset")
      ->capture_default_str();
  pairs->add_option("--trans-min", pa.spec.trans_min_mm)->capture_default_str();
  pairs->add_option("--trans-max", pa.spec.trans_max_mm)->capture_default_str();
  pairs->add_option("--trans-step", pa.spec.trans_step_mm)->capture_default_str();
  pairs->add_option("--width", pa.spec.slice_geometry.width)->capture_default_str();
  pairs->add_option("--height", pa.spec.slice_geometry.height)->capture_default_str();
  pairs->add_option("--slice-spacing", pa.spec.slice_geometry.spacing)->capture_default_str();
  pairs->add_option("--out", pa.out, "Output directory")->required();

  BankArgs ba;
  auto* bank = app.add_subcommand("build-bank", "Build a nearest-neighbour slice bank");
  bank->add_option("--manifest", ba.manifests, "Pair manifest (repeatable)")->required();
  bank->add_option("--d", ba.d, "Feature side length")->capture_default_str();
  bank->add_option("--out", ba.out, "bank.bin")->required();

  RegisterArgs ra;
  auto* reg = app.add_subcommand("register", "Rigidly register two volumes");
  reg->add_option("--moving", ra.moving)->required();
  reg->add_option("--fixed", ra.fixed)->required();
  reg->add_option("--out", ra.out, "Result JSON or -")->capture_default_str();
  add_registration_flags(reg, ra.cfg, ra.metric);

  ExtractArgs ea;
  auto* extract = app.add_subcommand("extract-slice", "Extract a slice at a pose");
  extract->add_option("--volume", ea.volume)->required();
  extract->add_option("--pose", ea.pose, "Pose JSON")->required();
  extract->add_option("--width", ea.geometry.width)->capture_default_str();
  extract->add_option("--height", ea.geometry.height)->capture_default_str();
  extract->add_option("--slice-spacing", ea.geometry.spacing)->capture_default_str();
  extract->add_option("--out", ea.out, "Output .pgm")->required();

  PositionArgs po;
  auto* pos = app.add_subcommand("position", "Position a query slice in a target volume");
  pos->add_option("--query", po.query)->required();
  pos->add_option("--target", po.target)->required();
  pos->add_option("--atlas", po.atlas)->required();
  pos->add_option("--bank", po.bank, "kNN predictor bank");
  pos->add_option("--pose-json", po.pose_json, "Externally predicted atlas-space pose");
  pos->add_flag("--oracle", po.oracle, "Use the query's own pose as the prediction");
  pos->add_option("--rt", po.rt_json, "Precomputed atlas-to-target transform JSON");
  pos->add_option("--extractor", po.extractor, "downsample[:D] or gradhist[:cells[:bins]]")->capture_default_str();
  pos->add_option("--gamma", po.cfg.fine.gamma, "Fine search half-range (deg / mm)")->capture_default_str();
  pos->add_option("--n-normals", po.cfg.fine.n_normal_candidates)->capture_default_str();
  pos->add_option("--inplane-step", po.cfg.fine.inplane_step_deg)->capture_default_str();
  pos->add_option("--trans-step", po.cfg.fine.trans_step_mm)->capture_default_str();
  pos->add_option("--max-iters", po.cfg.fine.max_iters)->capture_default_str();
  pos->add_option("--refine-levels", po.cfg.fine.refine_levels, "Range halvings after a stalled round")
      ->capture_default_str();
  add_registration_flags(pos, po.cfg.registration, po.metric);
  pos->add_option("--out", po.out, "Result JSON or -")->capture_default_str();
  pos->add_option("--slice-out", po.slice_out, "Result slice .pgm (default: --out with .pgm)");

  EvaluateArgs ev;
  auto* eval = app.add_subcommand("evaluate", "Report predictor and positioning errors");
  eval->add_option("--pairs", ev.pairs, "Held-out pair manifest");
  eval->add_option("--bank", ev.bank, "Bank for the kNN predictor");
  eval->add_option("--query", ev.queries, "Query slice (repeatable, paired with --result)");
  eval->add_option("--result", ev.results, "Result slice (repeatable)");
  eval->add_option("--format", ev.format, "text or json")->capture_default_str();
  eval->add_option("--out", ev.out, "Report path or -")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const auto level = spdlog::level::from_str(g.log_level);
    if (level == spdlog::level::off && g.log_level != "off") throw UsageError("unknown --log-level " + g.log_level);
    spdlog::set_level(level);
    set_thread_count(g.threads);
    if (*phantom) cmd_phantom(g, ph);
    if (*atlas) cmd_build_atlas(at);
    if (*pairs) cmd_gen_pairs(g, pa);
    if (*bank) cmd_build_bank(ba);
    if (*reg) cmd_register(ra);
    if (*extract) cmd_extract_slice(ea);
    if (*pos) cmd_position(po);
    if (*eval) cmd_evaluate(ev);
  } catch (const Error& e) {
    spdlog::error("{}", e.what());
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    spdlog::error("{}", e.what());
    return 3;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
