// Acceptance suite: runs every acceptance criterion at its stated tolerance
// and prints one pass/fail line per criterion. Exit code is the number of
// failed criteria.
//
// Usage: acceptance [--cli /path/to/semcal] [--only N]

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "semcal/io.hpp"
#include "semcal/rng.hpp"
#include "../test_scenes.hpp"

namespace fs = std::filesystem;
using namespace semcal;

namespace {

struct Criterion {
  int id;
  std::string summary;
  std::function<bool(std::string&)> run;
};

bool check(bool ok, const std::string& what, std::string& detail) {
  if (!ok) detail += (detail.empty() ? "" : "; ") + what;
  return ok;
}

// ---------------------------------------------------------------------------
// Shared heavy artifacts for criteria 1, 2, and 8.

struct ProtocolArtifacts {
  SceneSpec spec;
  LabeledPointCloud cloud;
  CameraIntrinsics cam;
  TrialReport clean_report;
  TrialReport noisy_report;
  bool ready = false;
};

ProtocolArtifacts g_protocol;

void ensure_protocol_runs() {
  if (g_protocol.ready) return;
  g_protocol.spec = testing::street_scene(18.0, 1001);
  g_protocol.cloud = generate_scene(g_protocol.spec);
  g_protocol.cam = testing::street_camera();

  ProtocolOptions opts;
  opts.trials = 30;
  opts.keep = 10;
  opts.offset_pos = 2.5;
  opts.offset_ang = 5.0;
  opts.seed = 1;
  opts.calibrate.render_cfg = testing::street_render_config();

  const SemanticImage clean = render_ground_truth(
      g_protocol.cloud, g_protocol.spec.camera, g_protocol.cam, opts.calibrate.render_cfg);
  g_protocol.clean_report =
      run_protocol(g_protocol.cloud, clean, g_protocol.cam, g_protocol.spec.camera, opts);

  ProtocolOptions noisy_opts = opts;
  noisy_opts.seed = 2;
  const SemanticImage noisy =
      render_ground_truth(g_protocol.cloud, g_protocol.spec.camera, g_protocol.cam,
                          opts.calibrate.render_cfg, 0.05, 424242);
  g_protocol.noisy_report =
      run_protocol(g_protocol.cloud, noisy, g_protocol.cam, g_protocol.spec.camera, noisy_opts);
  g_protocol.ready = true;
}

// ---------------------------------------------------------------------------
// Criterion 1: self-consistent pose recovery on a dense synthetic scene.

bool criterion_pose_recovery(std::string& detail) {
  ensure_protocol_runs();
  const TrialReport& r = g_protocol.clean_report;

  std::set<ClassId> classes(g_protocol.cloud.labels.begin(), g_protocol.cloud.labels.end());
  bool ok = check(g_protocol.cloud.size() >= 200000,
                  "cloud has " + std::to_string(g_protocol.cloud.size()) + " < 200k points",
                  detail);
  ok &= check(classes.size() >= 4, "scene has fewer than 4 classes", detail);

  char buf[160];
  std::snprintf(buf, sizeof(buf), "mean_dt=%.3fcm mean_dyaw=%.4fdeg mean_dpitch=%.4fdeg",
                r.mean_dt_cm, r.mean_dyaw_deg, r.mean_dpitch_deg);
  detail += (detail.empty() ? "" : "; ") + std::string(buf);

  ok &= check(r.mean_dt_cm <= 10.0, "mean translation error above 10 cm", detail);
  ok &= check(r.mean_dyaw_deg <= 0.2, "mean yaw error above 0.2 deg", detail);
  ok &= check(r.mean_dpitch_deg <= 0.2, "mean pitch error above 0.2 deg", detail);
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 2: robustness to 5% label noise.

bool criterion_label_noise(std::string& detail) {
  ensure_protocol_runs();
  const TrialReport& r = g_protocol.noisy_report;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "mean_dt=%.3fcm mean_dyaw=%.4fdeg mean_dpitch=%.4fdeg",
                r.mean_dt_cm, r.mean_dyaw_deg, r.mean_dpitch_deg);
  detail += buf;

  bool ok = check(r.mean_dt_cm <= 30.0, "mean translation error above 30 cm", detail);
  ok &= check(r.mean_dyaw_deg <= 0.5, "mean yaw error above 0.5 deg", detail);
  ok &= check(r.mean_dpitch_deg <= 0.5, "mean pitch error above 0.5 deg", detail);
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 3: loss identity and normalization suite.

bool criterion_loss_identities(std::string& detail) {
  bool ok = true;
  Rng rng(33);

  // masked_loss(I, I) == 0 exactly.
  for (int round = 0; round < 25; ++round) {
    SemanticImage img(16, 12);
    for (auto& c : img.classes) c = static_cast<ClassId>(rng.uniform_int(1, 8));
    ok &= check(masked_loss(img, img, LossTerm::l2()) == 0.0, "identity loss not zero", detail);
    ok &= check(masked_loss(img, img, LossTerm::huber(0.3)) == 0.0,
                "identity huber loss not zero", detail);
  }

  // beta == numel / valid count, exactly, on constructed masks.
  for (const int valid : {1, 7, 50, 120}) {
    ValidityMask mask;
    mask.width = 12;
    mask.height = 10;
    mask.bits.assign(120, 0);
    for (int i = 0; i < valid; ++i) mask.bits[static_cast<std::size_t>(i)] = 1;
    ok &= check(beta(mask) == 120.0 / valid, "beta mismatch", detail);
  }

  // Huber == L2 / 2 below the threshold, exactly.
  const LossTerm huber = LossTerm::huber(0.3);
  int below = 0;
  while (below < 20000) {
    const Eigen::Vector3d a(rng.uniform(), rng.uniform(), rng.uniform());
    const Eigen::Vector3d b(rng.uniform(), rng.uniform(), rng.uniform());
    if ((a - b).norm() >= 0.3) continue;
    ++below;
    ok &= check(pixel_term(huber, a, b) == 0.5 * pixel_term(LossTerm::l2(), a, b),
                "huber is not exactly half of l2 below delta", detail);
  }

  // Flipping one valid agreeing pixel strictly increases the loss.
  SemanticImage a(8, 8, ClassId::road);
  SemanticImage b = a;
  const double base = masked_loss(a, b, LossTerm::l2());
  b.at(3, 4) = ClassId::sidewalk;
  ok &= check(masked_loss(a, b, LossTerm::l2()) > base, "flip did not increase loss", detail);
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 4: Nelder-Mead correctness on a 5-D convex quadratic.

bool criterion_nelder_mead(std::string& detail) {
  bool ok = true;
  int violations = 0;
  double worst_coord = 0.0;
  for (int run = 0; run < 100; ++run) {
    Rng rng(9000 + static_cast<std::uint64_t>(run));
    PoseParams x0;
    x0.tx = rng.uniform(-2.5, 2.5);
    x0.ty = rng.uniform(-2.5, 2.5);
    x0.tz = rng.uniform(-2.5, 2.5);
    x0.yaw_deg = rng.uniform(-5.0, 5.0);
    x0.pitch_deg = rng.uniform(-5.0, 5.0);
    ParamVector c = to_params(x0);
    for (int i = 0; i < 3; ++i) c[i] += rng.uniform(-1.5, 1.5);
    for (int i = 3; i < 5; ++i) c[i] += rng.uniform(-3.0, 3.0);

    const Objective quadratic = [&](const ParamVector& x) { return (x - c).squaredNorm(); };
    NmParams params;
    params.convergence_threshold = 1e-12;
    params.max_evals = 5000;
    double prev_best = std::numeric_limits<double>::infinity();
    const auto monitor = [&](int, double best, const ParamVector&) {
      if (best > prev_best) ++violations;
      prev_best = best;
    };
    const NmResult res =
        nelder_mead(quadratic, initial_simplex(x0, SearchBounds{2.5, 5.0}), params, monitor);
    for (int i = 0; i < 5; ++i) worst_coord = std::max(worst_coord, std::abs(res.x[i] - c[i]));
  }
  char buf[96];
  std::snprintf(buf, sizeof(buf), "worst_coord_err=%.2e monotonicity_violations=%d",
                worst_coord, violations);
  detail += buf;
  ok &= check(worst_coord < 1e-3, "convergence worse than 1e-3 per coordinate", detail);
  ok &= check(violations == 0, "best-vertex loss increased", detail);
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 5: ICP transform recovery and drift-compensating merge.

bool criterion_icp_and_merge(std::string& detail) {
  bool ok = true;

  // Known rigid transform within 0.5 m / 5 degrees on a noiseless cloud.
  Rng rng(55);
  LabeledPointCloud source;
  for (int i = 0; i < 3000; ++i) {
    const int kind = static_cast<int>(rng.uniform_int(0, 2));
    if (kind == 0)
      source.add({rng.uniform(-15, 15), rng.uniform(-15, 15), 0.0}, ClassId::terrain);
    else if (kind == 1)
      source.add({rng.uniform(-15, 15), 12.0, rng.uniform(0, 6)}, ClassId::building);
    else
      source.add({-10.0, rng.uniform(-15, 15), rng.uniform(0, 6)}, ClassId::fence);
  }
  RigidTransform truth = RigidTransform::Identity();
  truth.linear() =
      Eigen::AngleAxisd(deg_to_rad(4.5), Eigen::Vector3d::UnitZ()).toRotationMatrix();
  truth.translation() = Eigen::Vector3d(0.35, -0.25, 0.15);
  LabeledPointCloud target = source;
  for (auto& p : target.points) p = truth * p;

  IcpParams params;
  params.max_iterations = 200;
  params.convergence_delta = 1e-12;
  const IcpResult res = icp_align(source, target, RigidTransform::Identity(), params);
  const double t_err = (res.transform.translation() - truth.translation()).norm();
  const Eigen::Matrix3d r_rel = res.transform.linear() * truth.linear().transpose();
  const double ang_err =
      rad_to_deg(std::acos(std::clamp((r_rel.trace() - 1.0) / 2.0, -1.0, 1.0)));
  char buf[96];
  std::snprintf(buf, sizeof(buf), "icp_t_err=%.2em icp_ang_err=%.2edeg", t_err, ang_err);
  detail += buf;
  ok &= check(t_err < 1e-3, "icp translation error above 1e-3 m", detail);
  ok &= check(ang_err < 0.01, "icp rotation error above 0.01 deg", detail);

  // Nine drifting scans merge onto the true surfaces.
  const SceneSpec base_spec = testing::street_scene(3.0, 66);
  std::vector<Scan> scans;
  Rng drift(88);
  for (int i = 0; i < 9; ++i) {
    SceneSpec scan_spec = base_spec;
    scan_spec.seed = 900 + static_cast<std::uint64_t>(i);
    const LabeledPointCloud world = generate_scene(scan_spec);
    const RigidTransform pose = rigid_from_euler(0.0, -20.0 + 5.0 * i, 1.8, 90.0, 0.0, 0.0);
    Scan scan;
    scan.timestamp = i;
    scan.vehicle_pose = pose;
    scan.vehicle_pose.translation() += Eigen::Vector3d(
        drift.uniform(-0.05, 0.05), drift.uniform(-0.05, 0.05), drift.uniform(-0.02, 0.02));
    const RigidTransform into_sensor = pose.inverse();
    scan.cloud.reserve(world.size());
    for (std::size_t k = 0; k < world.size(); ++k)
      scan.cloud.add(into_sensor * world.points[k], world.labels[k]);
    scans.push_back(std::move(scan));
  }
  IcpParams merge_params;
  merge_params.voxel_size = 0.1;
  const LabeledPointCloud merged = merge_recursive(scans, merge_params);
  double worst = 0.0;
  for (const auto& p : merged.points)
    worst = std::max(worst, surface_distance(base_spec, p));
  std::snprintf(buf, sizeof(buf), " merge_worst_dist=%.3fm", worst);
  detail += buf;
  ok &= check(worst <= 2.0 * merge_params.voxel_size,
              "merged point farther than 2 voxel sizes from the surfaces", detail);
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 6: renderer equals the brute-force depth-min oracle, bit-exactly.

SemanticImage render_oracle(const LabeledPointCloud& cloud, const PoseParams& pose,
                            const CameraIntrinsics& K, const RenderConfig& cfg) {
  const ExtrinsicMatrix extrinsic = pose_to_extrinsic(pose);
  SemanticImage img(K.width, K.height, cfg.background_class);
  for (int y = 0; y < K.height; ++y)
    for (int x = 0; x < K.width; ++x) {
      double best_depth = std::numeric_limits<double>::infinity();
      ClassId best_class = cfg.background_class;
      for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (is_dynamic(cloud.labels[i])) continue;
        const auto proj = project(K, extrinsic, cloud.points[i]);
        if (!proj) continue;
        const double r = std::clamp(cfg.lambda / proj->depth, cfg.min_radius, cfg.max_radius);
        if (proj->u < -r || proj->u > (K.width - 1) + r || proj->v < -r ||
            proj->v > (K.height - 1) + r)
          continue;
        const double dx = x - std::lround(proj->u);
        const double dy = y - std::lround(proj->v);
        if (dx * dx + dy * dy >= r * r) continue;
        if (proj->depth < best_depth) {
          best_depth = proj->depth;
          best_class = cloud.labels[i];
        }
      }
      img.at(x, y) = best_class;
    }
  return img;
}

bool criterion_renderer_oracle(std::string& detail) {
  bool ok = true;
  for (int round = 0; round < 50; ++round) {
    Rng rng(7000 + static_cast<std::uint64_t>(round));
    LabeledPointCloud cloud;
    const int n = static_cast<int>(rng.uniform_int(20, 500));
    for (int i = 0; i < n; ++i)
      cloud.add({rng.uniform(-15, 15), rng.uniform(-5, 40), rng.uniform(-5, 8)},
                static_cast<ClassId>(rng.uniform_int(0, kClassCount - 1)));
    CameraIntrinsics cam;
    cam.width = static_cast<int>(rng.uniform_int(16, 64));
    cam.height = static_cast<int>(rng.uniform_int(16, 64));
    cam.fx = rng.uniform(10.0, 80.0);
    cam.fy = rng.uniform(10.0, 80.0);
    cam.cx = rng.uniform(1.0, cam.width - 1.0);
    cam.cy = rng.uniform(1.0, cam.height - 1.0);
    RenderConfig cfg;
    cfg.lambda = rng.uniform(2.0, 80.0);
    cfg.min_radius = rng.uniform(1.0, 3.0);
    cfg.max_radius = cfg.min_radius + rng.uniform(0.0, 20.0);
    cfg.background_class = rng.uniform() < 0.5 ? ClassId::sky : ClassId::invalid;
    const PoseParams pose{rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2),
                          rng.uniform(-15, 15), rng.uniform(-15, 15)};
    const SemanticImage fast = render(cloud, pose, cam, cfg);
    const SemanticImage slow = render_oracle(cloud, pose, cam, cfg);
    if (fast.classes != slow.classes) {
      ok = check(false, "mismatch in configuration " + std::to_string(round), detail);
      break;
    }
  }
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 7: byte-identical CLI reruns.

std::string g_cli_path;

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

bool run_cli(const std::string& args) {
  const std::string cmd = g_cli_path + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str()) == 0;
}

bool rerun_identical(const std::string& args_template, const fs::path& out_a,
                     const fs::path& out_b, std::string& detail, const std::string& label) {
  const auto substitute = [&](const fs::path& out) {
    std::string args = args_template;
    const auto pos = args.find("{out}");
    args.replace(pos, 5, out.string());
    return args;
  };
  if (!run_cli(substitute(out_a)) || !run_cli(substitute(out_b)))
    return check(false, label + " exited nonzero", detail);
  const std::string a = read_bytes(out_a);
  if (a.empty()) return check(false, label + " produced no output", detail);
  return check(a == read_bytes(out_b), label + " reruns differ", detail);
}

bool criterion_cli_determinism(std::string& detail) {
  if (g_cli_path.empty()) return check(false, "--cli path not provided", detail);

  const fs::path dir = fs::temp_directory_path() / "semcal_acceptance_cli";
  fs::remove_all(dir);
  fs::create_directories(dir);

  // Small scene spec and run config tuned for quick CLI runs.
  const fs::path scene_cfg = dir / "scene.cfg";
  {
    std::ofstream out(scene_cfg);
    out << "seed = 11\nextent = 20\ndensity = 3\nground_class = terrain\n"
        << "camera = 0 -10 4 0 -8\n"
        << "strip = road -3 -20 3 -20 3 20 -3 20\n"
        << "box = -8 0 2.5 4 7 building\n"
        << "box = 8 4 2.5 4 9 building\n"
        << "box = -8 10 2.5 4 8 building\n"
        << "pole = -4 0 4 0.2 pole\n"
        << "pole = 4 6 4 0.2 pole\n";
  }
  const fs::path run_cfg = dir / "run.cfg";
  {
    std::ofstream out(run_cfg);
    out << "fx = 120\nfy = 120\ncx = 120\ncy = 75\nwidth = 240\nheight = 150\n"
        << "guess_tx = 0.4\nguess_ty = -10.5\nguess_tz = 3.8\nguess_yaw = 1.5\n"
        << "guess_pitch = -7\nlambda = 35\nmax_radius = 20\nseed = 3\n"
        << "trials = 3\nkeep = 2\noffset_pos = 1.0\noffset_ang = 2.0\n"
        << "verify_trials = 2\nverify_pos_noise = 0.5\nverify_ang_noise = 1.0\n";
  }

  bool ok = true;
  const std::string spec = scene_cfg.string();
  ok &= rerun_identical("synth --spec " + spec + " --seed 11 --out {out}", dir / "a.ply",
                        dir / "b.ply", detail, "synth");
  ok &= check(run_cli("synth --spec " + spec + " --out " + (dir / "cloud.ply").string()),
              "synth for pipeline failed", detail);

  const std::string cloud = (dir / "cloud.ply").string();
  ok &= rerun_identical("render --cloud " + cloud +
                            " --pose 0 -10 4 0 -8 --intrinsics 120 120 120 75 240 150 "
                            "--lambda 35 --max-radius 20 --out {out}",
                        dir / "a.pgm", dir / "b.pgm", detail, "render");

  // Target for calibrate comes from the renderer at the true pose.
  ok &= check(run_cli("render --cloud " + cloud +
                      " --pose 0 -10 4 0 -8 --intrinsics 120 120 120 75 240 150 --lambda 35 "
                      "--max-radius 20 --out " +
                      (dir / "target.pgm").string()),
              "target render failed", detail);
  ok &= rerun_identical("calibrate --cloud " + cloud + " --target " +
                            (dir / "target.pgm").string() + " --config " + run_cfg.string() +
                            " --seed 3 --out {out}",
                        dir / "cal_a.txt", dir / "cal_b.txt", detail, "calibrate");

  // Scans directory: three noiseless sensor-frame slices with known poses.
  const fs::path scans = dir / "scans";
  fs::create_directories(scans);
  {
    SceneSpec spec_obj = load_scene_spec(scene_cfg);
    std::ofstream poses(dir / "poses.txt");
    for (int i = 0; i < 3; ++i) {
      SceneSpec per_scan = spec_obj;
      per_scan.seed = 600 + static_cast<std::uint64_t>(i);
      const LabeledPointCloud world = generate_scene(per_scan);
      const RigidTransform pose = rigid_from_euler(0.0, -6.0 + 6.0 * i, 1.5, 90.0, 0.0, 0.0);
      LabeledPointCloud sensor;
      sensor.reserve(world.size());
      const RigidTransform inv = pose.inverse();
      for (std::size_t k = 0; k < world.size(); ++k)
        sensor.add(inv * world.points[k], world.labels[k]);
      char name[32];
      std::snprintf(name, sizeof(name), "scan_%02d.ply", i);
      write_cloud(sensor, scans / name);
      poses << format_double(i) << " 0 " << format_double(-6.0 + 6.0 * i)
            << " 1.5 90 0 0\n";
    }
  }
  ok &= rerun_identical("reconstruct --scans " + scans.string() + " --poses " +
                            (dir / "poses.txt").string() + " --d-max 60 --voxel 0.2 --out {out}",
                        dir / "rec_a.ply", dir / "rec_b.ply", detail, "reconstruct");

  ok &= rerun_identical("evaluate --scene-spec " + spec + " --config " + run_cfg.string() +
                            " --seed 3 --out {out}",
                        dir / "eval_a.txt", dir / "eval_b.txt", detail, "evaluate");

  // Nonzero exit with an error category on a missing file.
  const int missing = std::system(
      (g_cli_path + " calibrate --cloud /nonexistent.ply --target " +
       (dir / "target.pgm").string() + " --config " + run_cfg.string() + " --out " +
       (dir / "x.txt").string() + " > /dev/null 2>&1")
          .c_str());
  ok &= check(missing != 0, "missing input did not fail", detail);

  // --help exits zero and mentions every subcommand.
  ok &= check(std::system((g_cli_path + " --help > " + (dir / "help.txt").string() + " 2>&1")
                              .c_str()) == 0,
              "--help failed", detail);
  const std::string help = read_bytes(dir / "help.txt");
  for (const char* sub : {"synth", "render", "reconstruct", "calibrate", "evaluate"})
    ok &= check(help.find(sub) != std::string::npos,
                std::string("--help does not list ") + sub, detail);
  return ok;
}

// ---------------------------------------------------------------------------
// Criterion 8: stage monotonicity across all acceptance calibrations.

bool criterion_stage_monotonicity(std::string& detail) {
  ensure_protocol_runs();
  int checked = 0;
  bool ok = true;
  for (const TrialReport* report : {&g_protocol.clean_report, &g_protocol.noisy_report}) {
    for (const auto& trial : report->trials) {
      const auto& history = trial.result.stage_history;
      if (history.size() != 3) {
        ok = check(false, "trial without 3 stages", detail);
        continue;
      }
      ++checked;
      if (!(history[0].loss >= history[1].loss && history[1].loss >= history[2].loss))
        ok = check(false, "stage losses increased in trial " + std::to_string(trial.index),
                   detail);
    }
  }
  detail += (detail.empty() ? "" : "; ") + std::to_string(checked) + " trials checked";
  return ok && checked == 60;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--cli" && i + 1 < argc) g_cli_path = argv[++i];
    else if (arg == "--only" && i + 1 < argc) only = std::atoi(argv[++i]);
  }

  const std::vector<Criterion> criteria = {
      {1, "self-consistent pose recovery (30 trials, keep 10, <=10cm, <=0.2deg)",
       criterion_pose_recovery},
      {2, "robustness to 5% label noise (<=30cm, <=0.5deg)", criterion_label_noise},
      {3, "loss identity and normalization suite", criterion_loss_identities},
      {4, "Nelder-Mead quadratic convergence and monotonicity", criterion_nelder_mead},
      {5, "ICP transform recovery and drift-compensating merge", criterion_icp_and_merge},
      {6, "renderer matches the brute-force depth oracle bit-exactly",
       criterion_renderer_oracle},
      {7, "CLI reruns are byte-identical", criterion_cli_determinism},
      {8, "stage losses are monotone across all protocol trials",
       criterion_stage_monotonicity},
  };

  int failures = 0;
  for (const auto& criterion : criteria) {
    if (only != 0 && criterion.id != only) continue;
    std::string detail;
    bool ok = false;
    try {
      ok = criterion.run(detail);
    } catch (const std::exception& err) {
      detail += std::string("exception: ") + err.what();
    }
    std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", criterion.id,
                criterion.summary.c_str(), detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
  }
  return failures;
}
