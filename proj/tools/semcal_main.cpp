// Command-line surface for the calibration pipeline: scene synthesis,
// point-cloud reconstruction, debug rendering, single calibration runs,
// and the repeated-trial evaluation protocol.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "semcal/io.hpp"
#include "semcal/rng.hpp"

namespace fs = std::filesystem;
using namespace semcal;

namespace {

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::io_error: return 2;
    case ErrorCode::parse_error: return 3;
    case ErrorCode::unknown_class: return 4;
    case ErrorCode::invalid_argument: return 5;
    case ErrorCode::dimension_mismatch: return 6;
    case ErrorCode::no_valid_pixels: return 7;
    case ErrorCode::insufficient_overlap: return 8;
    case ErrorCode::degenerate_scene: return 9;
  }
  return 10;
}

bool quiet() {
  const char* v = std::getenv("SEMCAL_QUIET");
  return v != nullptr && v[0] != '\0' && v[0] != '0';
}

struct SeedOverride {
  bool set = false;
  std::uint64_t value = 0;
};

void add_seed_flag(CLI::App* cmd, SeedOverride& seed) {
  cmd->add_option_function<std::uint64_t>(
      "--seed",
      [&seed](std::uint64_t v) {
        seed.set = true;
        seed.value = v;
      },
      "Override the seed from the spec/config file");
}

int run_synth(const std::string& spec_path, const std::string& out_path,
              const SeedOverride& seed) {
  SceneSpec spec = load_scene_spec(spec_path);
  if (seed.set) spec.seed = seed.value;
  const LabeledPointCloud cloud = generate_scene(spec);
  write_cloud(cloud, out_path);
  if (!quiet()) std::printf("wrote %zu points to %s\n", cloud.size(), out_path.c_str());
  return 0;
}

int run_render(const std::string& cloud_path, const std::vector<double>& pose_v,
               const std::vector<double>& intr_v, const std::string& out_path,
               const RenderConfig& cfg, bool ascii) {
  const LabeledPointCloud cloud = read_cloud(cloud_path);
  const PoseParams pose{pose_v[0], pose_v[1], pose_v[2], pose_v[3], pose_v[4]};
  CameraIntrinsics cam;
  cam.fx = intr_v[0];
  cam.fy = intr_v[1];
  cam.cx = intr_v[2];
  cam.cy = intr_v[3];
  cam.width = static_cast<int>(intr_v[4]);
  cam.height = static_cast<int>(intr_v[5]);
  cam.validate();
  const SemanticImage view = render(cloud, pose, cam, cfg);
  write_label_image(view, out_path, !ascii);
  if (!quiet())
    std::printf("wrote %dx%d view to %s\n", view.width, view.height, out_path.c_str());
  return 0;
}

int run_reconstruct(const std::string& scans_dir, const std::string& poses_path,
                    const std::string& out_path, double d_max, const IcpParams& params) {
  const auto poses = read_pose_file(poses_path);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(scans_dir))
    if (entry.is_regular_file()) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (files.empty())
    throw_error(ErrorCode::invalid_argument, "no scan files in " + scans_dir);
  if (files.size() != poses.size())
    throw_error(ErrorCode::invalid_argument,
                "scan count (" + std::to_string(files.size()) + ") does not match pose count (" +
                    std::to_string(poses.size()) + ")");

  std::vector<Scan> scans;
  scans.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    Scan s;
    s.cloud = read_cloud(files[i]);
    s.timestamp = poses[i].first;
    s.vehicle_pose = poses[i].second;
    scans.push_back(filter_by_range(s, d_max));
  }
  const LabeledPointCloud merged = merge_recursive(scans, params);
  write_cloud(merged, out_path);
  if (!quiet())
    std::printf("merged %zu scans into %zu points at %s\n", scans.size(), merged.size(),
                out_path.c_str());
  return 0;
}

int run_calibrate(const std::string& cloud_path, const std::string& target_path,
                  const std::string& config_path, const std::string& out_path,
                  const SeedOverride& seed, bool with_trace) {
  RunConfig cfg = load_run_config(config_path);
  if (seed.set) cfg.seed = seed.value;

  LabeledPointCloud cloud = read_cloud(cloud_path);
  cloud = remove_dynamic(cloud, cfg.dynamic_classes);
  cloud = crop_radius(cloud, {cfg.guess.tx, cfg.guess.ty, cfg.guess.tz}, cfg.crop_radius);
  const SemanticImage target = read_label_image(target_path);

  const CalibrateOptions opts = cfg.calibrate_options();
  std::vector<TraceRecord> trace;
  CalibrateOptions traced = opts;
  if (with_trace)
    traced.trace = [&trace](const TraceRecord& rec) { trace.push_back(rec); };

  CalibrationResult result = calibrate(cloud, target, cfg.intrinsics, cfg.guess, traced);
  std::vector<CalibrationResult> verify_runs;
  if (cfg.verify_trials > 0)
    result = verify(result, cloud, target, cfg.intrinsics, cfg.guess, opts, cfg.verify_noise,
                    cfg.verify_trials, cfg.seed, &verify_runs, cfg.threads);

  write_calibration_report(result, cfg.term, verify_runs, out_path, trace);
  if (!quiet())
    std::printf("final_loss=%s pose=(%s, %s, %s, %s, %s) evals=%d\n",
              format_double(result.final_loss).c_str(), format_double(result.pose.tx).c_str(),
              format_double(result.pose.ty).c_str(), format_double(result.pose.tz).c_str(),
              format_double(result.pose.yaw_deg).c_str(),
              format_double(result.pose.pitch_deg).c_str(), result.eval_count);
  return 0;
}

int run_evaluate(const std::string& spec_path, const std::string& config_path,
                 const std::string& out_path, const SeedOverride& seed) {
  const SceneSpec spec = load_scene_spec(spec_path);
  RunConfig cfg = load_run_config(config_path);
  if (seed.set) cfg.seed = seed.value;

  LabeledPointCloud cloud = generate_scene(spec);
  cloud = remove_dynamic(cloud, cfg.dynamic_classes);
  cloud = crop_radius(cloud, {spec.camera.tx, spec.camera.ty, spec.camera.tz}, cfg.crop_radius);

  const SemanticImage target =
      render_ground_truth(cloud, spec.camera, cfg.intrinsics, cfg.render, cfg.label_flip_rate,
                          derive_seed(cfg.seed, 0x7a72676574ULL));
  const TrialReport report = run_protocol(cloud, target, cfg.intrinsics, spec.camera,
                                          cfg.protocol_options());
  write_trial_report(report, out_path);
  if (!quiet())
    std::printf("trials=%zu keep=%d mean_dt_cm=%s mean_dyaw_deg=%s mean_dpitch_deg=%s\n",
              report.trials.size(), report.keep, format_double(report.mean_dt_cm).c_str(),
              format_double(report.mean_dyaw_deg).c_str(),
              format_double(report.mean_dpitch_deg).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"semcal: semantic lidar-to-camera extrinsic calibration"};
  app.require_subcommand(1);

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled scene cloud");
  std::string synth_spec, synth_out;
  SeedOverride synth_seed;
  synth->add_option("--spec", synth_spec, "Scene spec file")->required();
  synth->add_option("--out", synth_out, "Output cloud (.ply or .xyz)")->required();
  add_seed_flag(synth, synth_seed);

  // render
  auto* render_cmd = app.add_subcommand("render", "Render a debug view of a labeled cloud");
  std::string render_cloud, render_out;
  std::vector<double> render_pose, render_intr;
  RenderConfig render_cfg;
  bool render_ascii = false;
  std::string render_background = "sky";
  render_cmd->add_option("--cloud", render_cloud, "Input cloud")->required();
  render_cmd->add_option("--pose", render_pose, "Camera pose: tx ty tz yaw pitch")
      ->expected(5)
      ->required();
  render_cmd
      ->add_option("--intrinsics", render_intr, "Camera intrinsics: fx fy cx cy width height")
      ->expected(6)
      ->required();
  render_cmd->add_option("--out", render_out, "Output PGM label image")->required();
  render_cmd->add_option("--lambda", render_cfg.lambda, "Splat scale (pixel-meters)");
  render_cmd->add_option("--min-radius", render_cfg.min_radius, "Minimum splat radius");
  render_cmd->add_option("--max-radius", render_cfg.max_radius, "Maximum splat radius");
  render_cmd->add_option("--background", render_background, "Background class name");
  render_cmd->add_flag("--ascii", render_ascii, "Write plain P2 instead of binary P5");

  // reconstruct
  auto* reconstruct =
      app.add_subcommand("reconstruct", "Merge lidar scans into one world-frame cloud");
  std::string rec_scans, rec_poses, rec_out;
  double rec_dmax = 75.0;
  IcpParams rec_params;
  reconstruct->add_option("--scans", rec_scans, "Directory of scan files")->required();
  reconstruct->add_option("--poses", rec_poses, "Pose file, one line per scan")->required();
  reconstruct->add_option("--out", rec_out, "Output merged cloud")->required();
  reconstruct->add_option("--d-max", rec_dmax, "Range filter per scan (m)");
  reconstruct->add_option("--voxel", rec_params.voxel_size, "Downsampling voxel size (m)");
  reconstruct->add_option("--max-corr", rec_params.max_correspondence_dist,
                          "ICP correspondence gate (m)");
  reconstruct->add_option("--max-iter", rec_params.max_iterations, "ICP iteration cap");
  reconstruct->add_option("--conv-delta", rec_params.convergence_delta,
                          "ICP RMS improvement threshold");

  // calibrate
  auto* calibrate_cmd =
      app.add_subcommand("calibrate", "Recover the camera pose against a label image");
  std::string cal_cloud, cal_target, cal_config, cal_out;
  SeedOverride cal_seed;
  bool cal_trace = false;
  calibrate_cmd->add_option("--cloud", cal_cloud, "Labeled environment cloud")->required();
  calibrate_cmd->add_option("--target", cal_target, "Target segmentation (PGM)")->required();
  calibrate_cmd->add_option("--config", cal_config, "Run configuration file")->required();
  calibrate_cmd->add_option("--out", cal_out, "Output report path")->required();
  calibrate_cmd->add_flag("--trace", cal_trace, "Record per-iteration optimizer trace rows");
  add_seed_flag(calibrate_cmd, cal_seed);

  // evaluate
  auto* evaluate =
      app.add_subcommand("evaluate", "Run the repeated-trial protocol on a synthetic scene");
  std::string eval_spec, eval_config, eval_out;
  SeedOverride eval_seed;
  evaluate->add_option("--scene-spec", eval_spec, "Scene spec file")->required();
  evaluate->add_option("--config", eval_config, "Run configuration file")->required();
  evaluate->add_option("--out", eval_out, "Output report path")->required();
  add_seed_flag(evaluate, eval_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return run_synth(synth_spec, synth_out, synth_seed);
    if (render_cmd->parsed()) {
      const auto background = class_from_name(render_background);
      if (!background)
        throw_error(ErrorCode::unknown_class, "unknown class '" + render_background + "'");
      render_cfg.background_class = *background;
      return run_render(render_cloud, render_pose, render_intr, render_out, render_cfg,
                        render_ascii);
    }
    if (reconstruct->parsed())
      return run_reconstruct(rec_scans, rec_poses, rec_out, rec_dmax, rec_params);
    if (calibrate_cmd->parsed())
      return run_calibrate(cal_cloud, cal_target, cal_config, cal_out, cal_seed, cal_trace);
    if (evaluate->parsed()) return run_evaluate(eval_spec, eval_config, eval_out, eval_seed);
  } catch (const Error& err) {
    std::cerr << "error (" << to_string(err.code()) << "): " << err.what() << "\n";
    return exit_code_for(err.code());
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 10;
  }
  return 0;
}
