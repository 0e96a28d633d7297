#pragma once

#include <cstdint>
#include <vector>

#include "semcal/optimizer.hpp"
#include "semcal/reconstruction.hpp"

namespace semcal {

/// Axis-aligned box standing on the ground plane; four walls plus a roof.
struct BoxSpec {
  double cx = 0.0, cy = 0.0;        // footprint center, meters
  double half_x = 1.0, half_y = 1.0;
  double height = 3.0;
  ClassId cls = ClassId::building;
};

/// Upright cylinder (lateral surface only).
struct PoleSpec {
  double x = 0.0, y = 0.0;
  double height = 4.0;
  double radius = 0.15;
  ClassId cls = ClassId::pole;
};

/// Ground-plane polygon painting ground points with its class.
struct StripSpec {
  ClassId cls = ClassId::road;
  Polygon2d polygon;
};

struct SceneSpec {
  double ground_half_extent = 40.0;  // meters; ground spans [-e, e]^2 at z = 0
  double density = 50.0;             // points per square meter
  double noise_sigma = 0.0;          // isotropic positional noise, meters
  std::uint64_t seed = 0;
  ClassId ground_class = ClassId::terrain;
  std::vector<BoxSpec> boxes;
  std::vector<PoleSpec> poles;
  std::vector<StripSpec> strips;
  PoseParams camera;                 // ground-truth pose for evaluation scenes

  void validate() const;
};

/// Samples surface points at the spec density with per-class labels and
/// isotropic Gaussian jitter. Deterministic for a fixed seed.
LabeledPointCloud generate_scene(const SceneSpec& spec);

/// Distance from p to the nearest generator surface (the noise-free oracle).
double surface_distance(const SceneSpec& spec, const Point3& p);

/// Renders the target segmentation at the ground-truth pose; a nonzero
/// label_flip_rate corrupts that fraction of pixels with a random other
/// class to emulate imperfect segmentation.
SemanticImage render_ground_truth(const LabeledPointCloud& cloud, const PoseParams& g,
                                  const CameraIntrinsics& K, const RenderConfig& cfg,
                                  double label_flip_rate = 0.0, std::uint64_t seed = 0);

struct TrialRecord {
  int index = 0;
  PoseParams start;
  ParamVector initial_offset = ParamVector::Zero();
  CalibrationResult result;
  double dt_cm = 0.0;       // translation error norm, centimeters
  double dyaw_deg = 0.0;    // absolute yaw error
  double dpitch_deg = 0.0;  // absolute pitch error
  bool accepted = false;
};

struct TrialReport {
  std::vector<TrialRecord> trials;  // in trial-index order
  int keep = 0;
  double mean_dt_cm = 0.0;          // over accepted trials
  double mean_dyaw_deg = 0.0;
  double mean_dpitch_deg = 0.0;
  double mean_dangle_deg = 0.0;     // both angles pooled
  double accepted_mean_loss = 0.0;
  double full_mean_loss = 0.0;
};

struct ProtocolOptions {
  int trials = 30;
  int keep = 10;
  double offset_pos = 2.5;  // uniform [-offset_pos, offset_pos] per axis, meters
  double offset_ang = 5.0;  // degrees, yaw and pitch
  std::uint64_t seed = 0;
  int threads = 0;          // 0 = hardware concurrency
  CalibrateOptions calibrate;
};

/// Repeated-calibration evaluation: each trial starts from the ground truth
/// plus a uniform random offset; the lowest-loss `keep` trials form the
/// accepted set for the error statistics.
TrialReport run_protocol(const LabeledPointCloud& cloud, const SemanticImage& target,
                         const CameraIntrinsics& K, const PoseParams& ground_truth,
                         const ProtocolOptions& opts);

}  // namespace semcal
