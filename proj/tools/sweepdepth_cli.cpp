// Command-line driver: synthetic data, plane-sweep depth, masks, losses and
// evaluation. Structured results go to stdout as JSON; dense outputs are PFM.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sweepdepth/sweepdepth.hpp"

namespace fs = std::filesystem;
using namespace sweepdepth;
using io::json;

namespace {

std::string indexed(const std::string& dir, const char* stem, int index, const char* ext) {
  char name[64];
  std::snprintf(name, sizeof(name), "%s_%04d.%s", stem, index, ext);
  return (fs::path(dir) / name).string();
}

struct Dataset {
  std::string dir;
  Intrinsics intrinsics;

  explicit Dataset(std::string d) : dir(std::move(d)) {
    intrinsics = io::read_intrinsics((fs::path(dir) / "intrinsics.json").string());
  }
  Image image(int i) const { return io::read_ppm(indexed(dir, "frame", i, "ppm")); }
  Pose pose(int i) const { return io::read_pose(indexed(dir, "pose", i, "json")); }
};

json metrics_json(const MetricsReport& m) {
  return {{"abs_rel", m.abs_rel}, {"sq_rel", m.sq_rel},   {"rmse", m.rmse},    {"rmse_log", m.rmse_log},
          {"delta1", m.delta1},   {"delta2", m.delta2},   {"delta3", m.delta3}};
}

json loss_json(const LossReport& r) {
  return {{"lp", r.lp}, {"lc", r.lc}, {"ls", r.ls}, {"total", r.total}, {"mask_fraction", r.mask_fraction}};
}

void emit(const json& j, const std::string& out_path) {
  std::cout << j.dump(2) << std::endl;
  if (!out_path.empty()) io::write_json(out_path, j);
}

// synth ------------------------------------------------------------------------

struct SynthArgs {
  std::string scene = "static_lateral";
  std::string scene_file;
  std::string out;
  std::uint64_t seed = 0;
};

int run_synth(const SynthArgs& a) {
  const synth::SceneSetup setup = a.scene_file.empty()
                                      ? synth::preset(a.scene, a.seed)
                                      : synth::scene_from_json(io::parse_json(io::read_file(a.scene_file), "scene file"));
  const synth::Sequence seq = synth::make_sequence(setup.scene, setup.camera_motion, setup.intrinsics);
  fs::create_directories(a.out);
  io::write_json((fs::path(a.out) / "intrinsics.json").string(), io::intrinsics_to_json(setup.intrinsics));
  io::write_json((fs::path(a.out) / "scene.json").string(), synth::scene_to_json(setup));
  json mover = json::array();
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const auto& f = seq.frames[i];
    const int idx = static_cast<int>(i);
    io::write_ppm(indexed(a.out, "frame", idx, "ppm"), f.image);
    io::write_pfm(indexed(a.out, "depth", idx, "pfm"), f.depth_gt);
    io::write_json(indexed(a.out, "pose", idx, "json"), io::pose_to_json(f.pose));
    if (setup.scene.mover) {
      io::write_pfm(indexed(a.out, "mover", idx, "pfm"), io::mask_to_grid(f.mover));
      if (const auto fp = synth::mover_footprint(setup.scene, f.pose, setup.intrinsics, idx)) {
        mover.push_back({{"frame", idx}, {"footprint", {fp->u_min, fp->u_max, fp->v_min, fp->v_max}}});
      }
    }
  }
  json summary = {{"scene", setup.name}, {"frames", seq.frames.size()}, {"dir", a.out}};
  if (setup.scene.mover) {
    const Eigen::Vector3d& v = setup.scene.mover->velocity;
    json sidecar = {{"velocity", {v.x(), v.y(), v.z()}}, {"frames", mover}};
    io::write_json((fs::path(a.out) / "mover.json").string(), sidecar);
    summary["mover"] = "mover.json";
  }
  std::cout << summary.dump(2) << std::endl;
  return 0;
}

// depth / dump-cv / loss shared inputs -----------------------------------------

struct SweepArgs {
  std::string data;
  int target = 1;
  std::vector<int> sources;
  std::string features = "gradient";
  int scale = 4;
  int planes = 96;
  std::optional<double> d_min;
  std::optional<double> d_max;
  std::string adaptive_state;
  std::string spacing = "linear";
  bool zero_cv = false;
  double aug_p = 0.0;
  double aug_q = 0.0;
  std::uint64_t seed = 0;
  std::uint64_t sample_index = 0;
};

void add_sweep_options(CLI::App* cmd, SweepArgs& a) {
  cmd->add_option("--data", a.data, "Dataset directory (frame_/pose_ files, intrinsics.json)")->required();
  cmd->add_option("--target", a.target, "Target frame index");
  cmd->add_option("--sources", a.sources, "Source frame indices (default: target - 1)")->delimiter(',');
  cmd->add_option("--features", a.features, "Feature extractor")
      ->check(CLI::IsMember({"intensity", "rgb", "gradient"}));
  cmd->add_option("--scale", a.scale, "Feature downsample factor")->check(CLI::IsMember({1, 2, 4}));
  cmd->add_option("--planes", a.planes, "Number of depth planes")->check(CLI::Range(2, 4096));
  auto* lo = cmd->add_option("--d-min", a.d_min, "Nearest plane depth (default 1)");
  auto* hi = cmd->add_option("--d-max", a.d_max, "Farthest plane depth (default 10)");
  auto* st = cmd->add_option("--adaptive-state", a.adaptive_state, "JSON {d_min, d_max, momentum, frozen}");
  st->excludes(lo)->excludes(hi);
  cmd->add_option("--spacing", a.spacing, "Plane spacing")->check(CLI::IsMember({"linear", "inverse"}));
  cmd->add_flag("--zero-cv", a.zero_cv, "Replace the cost volume by zeros");
  cmd->add_option("--aug-p", a.aug_p, "Probability of a zeroed cost volume")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--aug-q", a.aug_q, "Probability of static-camera substitution")->check(CLI::Range(0.0, 1.0));
  cmd->add_option("--seed", a.seed, "Augmentation seed");
  cmd->add_option("--sample-index", a.sample_index, "Augmentation sample index");
}

AdaptiveRangeState read_adaptive_state(const std::string& path) {
  const json j = io::parse_json(io::read_file(path), "adaptive state");
  try {
    AdaptiveRangeState s;
    s.d_min = j.at("d_min").get<double>();
    s.d_max = j.at("d_max").get<double>();
    s.momentum = j.value("momentum", 0.99);
    s.frozen = j.value("frozen", false);
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::MalformedHeader, std::string("adaptive state: ") + e.what());
  }
}

struct PreparedSweep {
  Dataset dataset;
  Image target;
  std::vector<Image> source_images;
  std::vector<Pose> source_poses;
  DepthOptions options;
  Augmentation augmentation = Augmentation::None;
  std::optional<Image> substitute;
};

PreparedSweep prepare_sweep(const SweepArgs& a) {
  PreparedSweep p{Dataset(a.data), {}, {}, {}, {}};
  p.target = p.dataset.image(a.target);
  std::vector<int> sources = a.sources;
  if (sources.empty()) sources.push_back(a.target - 1);
  const Pose target_pose = p.dataset.pose(a.target);
  for (int s : sources) {
    p.source_images.push_back(p.dataset.image(s));
    p.source_poses.push_back(Pose::relative(target_pose, p.dataset.pose(s)));
  }
  p.options.features = parse_feature_kind(a.features);
  p.options.scale = a.scale;
  p.options.planes = a.planes;
  p.options.spacing = a.spacing == "inverse" ? PlaneSpacing::InverseDepth : PlaneSpacing::Linear;
  if (!a.adaptive_state.empty()) {
    const AdaptiveRangeState s = read_adaptive_state(a.adaptive_state);
    p.options.d_min = s.d_min;
    p.options.d_max = s.d_max;
  } else {
    p.options.d_min = a.d_min.value_or(1.0);
    p.options.d_max = a.d_max.value_or(10.0);
  }
  p.options.zero_cost_volume = a.zero_cv;

  if (a.aug_p > 0.0 || a.aug_q > 0.0) {
    AugmentConfig cfg;
    cfg.p = a.aug_p;
    cfg.q = a.aug_q;
    cfg.seed = a.seed;
    CounterRng rng(cfg.seed, a.sample_index);
    p.augmentation = draw_augmentation(cfg, rng);
    if (p.augmentation == Augmentation::ZeroVolume) {
      p.options.zero_cost_volume = true;
    } else if (p.augmentation == Augmentation::StaticSubstitute) {
      p.substitute = color_jitter(p.target, rng, cfg.jitter);
    }
  }
  return p;
}

/// Cost-volume inputs after augmentation: a static substitute replaces the
/// first source by a jittered copy of the target with no camera motion.
std::vector<SourceFrame> cost_volume_sources(const PreparedSweep& p) {
  std::vector<SourceFrame> out;
  for (std::size_t i = 0; i < p.source_images.size(); ++i) {
    if (i == 0 && p.substitute) {
      out.push_back({&*p.substitute, Pose::identity()});
    } else {
      out.push_back({&p.source_images[i], p.source_poses[i]});
    }
  }
  return out;
}

std::vector<SourceFrame> real_sources(const PreparedSweep& p) {
  std::vector<SourceFrame> out;
  for (std::size_t i = 0; i < p.source_images.size(); ++i) out.push_back({&p.source_images[i], p.source_poses[i]});
  return out;
}

json sweep_summary(const PreparedSweep& p, const DepthEstimate& est) {
  return {{"planes", est.planes.size()},
          {"d_min", est.planes.d_min},
          {"d_max", est.planes.d_max},
          {"feature_scale", p.options.scale},
          {"features", std::string(to_string(p.options.features))},
          {"zero_cost_volume", est.cost_volume.zeroed()},
          {"augmentation", std::string(to_string(p.augmentation))}};
}

DepthMap read_depth(const std::string& path) {
  Grid<double> g = io::read_pfm(path);
  if (g.channels() != 1) throw Error(ErrorCode::ShapeMismatch, "depth file '" + path + "' is not single-band");
  return g;
}

// depth --------------------------------------------------------------------------

struct DepthArgs {
  SweepArgs sweep;
  std::string out;
  std::string teacher;
  std::string mask_out;
  std::string dump_cv;
};

int run_depth(const DepthArgs& a) {
  const PreparedSweep p = prepare_sweep(a.sweep);
  const DepthEstimate est = estimate_depth(p.target, cost_volume_sources(p), p.dataset.intrinsics, p.options);
  io::write_pfm(a.out, est.depth);
  json summary = sweep_summary(p, est);
  summary["depth"] = a.out;
  if (!a.dump_cv.empty()) {
    io::write_file(a.dump_cv, io::encode_cost_volume(est.cost_volume, est.planes));
    summary["cost_volume"] = a.dump_cv;
  }
  if (!a.teacher.empty()) {
    const Mask m = consistency_mask(est.depth, read_depth(a.teacher));
    summary["mask_fraction"] = mask_fraction(m);
    if (!a.mask_out.empty()) {
      io::write_pfm(a.mask_out, io::mask_to_grid(m));
      summary["mask"] = a.mask_out;
    }
  }
  std::cout << summary.dump(2) << std::endl;
  return 0;
}

// dump-cv ------------------------------------------------------------------------

struct DumpArgs {
  SweepArgs sweep;
  std::string out;
};

int run_dump(const DumpArgs& a) {
  const PreparedSweep p = prepare_sweep(a.sweep);
  const DepthEstimate est = estimate_depth(p.target, cost_volume_sources(p), p.dataset.intrinsics, p.options);
  io::write_file(a.out, io::encode_cost_volume(est.cost_volume, est.planes));
  json summary = sweep_summary(p, est);
  summary["cost_volume"] = a.out;
  summary["height"] = est.cost_volume.height();
  summary["width"] = est.cost_volume.width();
  std::cout << summary.dump(2) << std::endl;
  return 0;
}

// loss ---------------------------------------------------------------------------

struct LossArgs {
  SweepArgs sweep;
  std::string student;
  std::string teacher;
  std::string cv_depth;
  double lambda_s = 1e-3;
  std::string out;
};

int run_loss(const LossArgs& a) {
  const PreparedSweep p = prepare_sweep(a.sweep);
  const DepthMap student = read_depth(a.student);
  const DepthMap teacher = read_depth(a.teacher);
  DepthMap cv_depth;
  if (!a.cv_depth.empty()) {
    cv_depth = read_depth(a.cv_depth);
  } else {
    cv_depth = estimate_depth(p.target, cost_volume_sources(p), p.dataset.intrinsics, p.options).depth;
  }
  const std::vector<SourceFrame> sources = real_sources(p);
  const auto views = synthesize_views(sources, student, p.dataset.intrinsics);
  LossWeights w;
  w.smoothness = a.lambda_s;
  const LossReport r = total_loss(p.target, views, student, teacher, cv_depth, p.target, w);
  emit(loss_json(r), a.out);
  return 0;
}

// eval ---------------------------------------------------------------------------

struct EvalArgs {
  std::string pred;
  std::string gt;
  double cap = kDefaultDepthCap;
  std::string crop = "none";
  bool median = false;
  std::string error_map;
  std::string heatmap;
  std::string out;
};

int run_eval(const EvalArgs& a) {
  const CropScheme scheme = parse_crop_scheme(a.crop);
  DepthMap pred = crop(read_depth(a.pred), scheme);
  const DepthMap gt = crop(read_depth(a.gt), scheme);
  require_same_extent(pred, gt, ErrorCode::ShapeMismatch, "prediction vs ground truth");
  if (a.median) pred = median_scale(pred, gt, evaluation_mask(gt, a.cap));
  const MetricsReport m = depth_metrics(pred, gt, a.cap);
  if (!a.error_map.empty() || !a.heatmap.empty()) {
    const ErrorMap err = abs_rel_error_map(pred, gt);
    if (!a.error_map.empty()) io::write_pfm(a.error_map, err.values);
    if (!a.heatmap.empty()) io::write_ppm(a.heatmap, error_heatmap(err));
  }
  emit(metrics_json(m), a.out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Plane-sweep multi-frame depth: synthetic data, cost volumes, masks, losses, evaluation"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Render a synthetic sequence into a dataset directory");
  synth_cmd->add_option("--scene", synth_args.scene, "Bundled scene preset")
      ->check(CLI::IsMember(synth::preset_names()));
  synth_cmd->add_option("--scene-file", synth_args.scene_file, "Scene description JSON");
  synth_cmd->add_option("--out", synth_args.out, "Output directory")->required();
  synth_cmd->add_option("--seed", synth_args.seed, "Texture seed");

  DepthArgs depth_args;
  auto* depth_cmd = app.add_subcommand("depth", "Cost-volume argmin depth for one target frame");
  add_sweep_options(depth_cmd, depth_args.sweep);
  depth_cmd->add_option("--out", depth_args.out, "Depth PFM output")->required();
  depth_cmd->add_option("--teacher", depth_args.teacher, "Teacher depth PFM for the consistency mask");
  depth_cmd->add_option("--mask-out", depth_args.mask_out, "Consistency mask PFM output");
  depth_cmd->add_option("--dump-cv", depth_args.dump_cv, "Cost-volume dump output");

  DumpArgs dump_args;
  auto* dump_cmd = app.add_subcommand("dump-cv", "Write the cost volume in SWPCV1 format");
  add_sweep_options(dump_cmd, dump_args.sweep);
  dump_cmd->add_option("--out", dump_args.out, "Dump output path")->required();

  LossArgs loss_args;
  auto* loss_cmd = app.add_subcommand("loss", "Loss report for a student depth against the real frames");
  add_sweep_options(loss_cmd, loss_args.sweep);
  loss_cmd->add_option("--student", loss_args.student, "Student depth PFM")->required();
  loss_cmd->add_option("--teacher", loss_args.teacher, "Teacher depth PFM")->required();
  loss_cmd->add_option("--cv-depth", loss_args.cv_depth, "Precomputed cost-volume depth PFM");
  loss_cmd->add_option("--lambda-s", loss_args.lambda_s, "Smoothness weight");
  loss_cmd->add_option("--json-out", loss_args.out, "Also write the report here");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Depth metrics against ground truth");
  eval_cmd->add_option("--pred", eval_args.pred, "Predicted depth PFM")->required();
  eval_cmd->add_option("--gt", eval_args.gt, "Ground-truth depth PFM")->required();
  eval_cmd->add_option("--cap", eval_args.cap, "Depth cap")->check(CLI::PositiveNumber);
  eval_cmd->add_option("--crop", eval_args.crop, "Crop scheme")
      ->check(CLI::IsMember({"none", "cityscapes_A", "cityscapes_B"}));
  eval_cmd->add_flag("--median-scale", eval_args.median, "Median-scale the prediction first");
  eval_cmd->add_option("--error-map", eval_args.error_map, "Abs-rel error map PFM output");
  eval_cmd->add_option("--heatmap", eval_args.heatmap, "Abs-rel heatmap PPM output");
  eval_cmd->add_option("--json-out", eval_args.out, "Also write the report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*synth_cmd) return run_synth(synth_args);
    if (*depth_cmd) return run_depth(depth_args);
    if (*dump_cmd) return run_dump(dump_args);
    if (*loss_cmd) return run_loss(loss_args);
    if (*eval_cmd) return run_eval(eval_args);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 1;
}
