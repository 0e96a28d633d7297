#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "semcal/synth.hpp"

namespace semcal {

/// Reads "x y z class_id" text (# comments) or ASCII PLY with properties
/// x, y, z, label. Rejects non-finite coordinates and unknown class ids.
LabeledPointCloud read_cloud(const std::filesystem::path& path);

/// Writes ASCII PLY for .ply paths, the text format otherwise. Values
/// round-trip exactly through read_cloud.
void write_cloud(const LabeledPointCloud& cloud, const std::filesystem::path& path);

/// Reads plain (P2) or binary (P5) PGM where the pixel value is the class id.
SemanticImage read_label_image(const std::filesystem::path& path);

/// Canonical PGM writer; binary selects P5 over P2.
void write_label_image(const SemanticImage& img, const std::filesystem::path& path,
                       bool binary = true);

/// One "timestamp tx ty tz yaw pitch roll" line per scan (degrees).
std::vector<std::pair<double, RigidTransform>> read_pose_file(
    const std::filesystem::path& path);

/// Sensor-to-world transform from a 6-DOF pose, R = Rz(yaw) Ry(pitch) Rx(roll).
RigidTransform rigid_from_euler(double tx, double ty, double tz, double yaw_deg,
                                double pitch_deg, double roll_deg);

struct RunConfig {
  CameraIntrinsics intrinsics;
  PoseParams guess;
  SearchBounds bounds;
  RenderConfig render;
  LossTerm term = LossTerm::l2();
  bool sky_valid = false;
  double d_max = 75.0;
  double crop_radius = 75.0;
  std::set<ClassId> dynamic_classes = {ClassId::car, ClassId::pedestrian,
                                       ClassId::cyclist, ClassId::other_dynamic};
  int max_evals = 2000;
  int verify_trials = 0;
  SearchBounds verify_noise{1.0, 2.0};
  std::uint64_t seed = 0;
  int trials = 30;
  int keep = 10;
  double offset_pos = 2.5;
  double offset_ang = 5.0;
  double label_flip_rate = 0.0;
  int threads = 0;

  CalibrateOptions calibrate_options() const;
  ProtocolOptions protocol_options() const;
};

/// Key = value configuration; see docs/run-config keys in the README.
RunConfig load_run_config(const std::filesystem::path& path);

/// Scene description: scalar keys plus repeated box/pole/strip entries.
SceneSpec load_scene_spec(const std::filesystem::path& path);

/// Lossless, locale-independent double formatting used by every writer.
std::string format_double(double v);

void write_calibration_report(const CalibrationResult& result, const LossTerm& term,
                              const std::vector<CalibrationResult>& verify_runs,
                              const std::filesystem::path& path,
                              const std::vector<TraceRecord>& trace = {});

void write_trial_report(const TrialReport& report, const std::filesystem::path& path);

}  // namespace semcal
