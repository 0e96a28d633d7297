#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "semcal/loss.hpp"
#include "semcal/renderer.hpp"

namespace semcal {

struct SearchBounds {
  double pos_half_range = 2.5;  // meters, each translation axis
  double ang_half_range = 5.0;  // degrees, yaw and pitch

  void validate() const;
};

/// Search vector layout: tx, ty, tz (meters), yaw, pitch (degrees).
using ParamVector = Eigen::Matrix<double, 5, 1>;

ParamVector to_params(const PoseParams& p);
PoseParams to_pose(const ParamVector& v);

struct Simplex {
  static constexpr int kVertexCount = 6;  // n + 1 for n = 5 parameters

  std::array<ParamVector, kVertexCount> vertices{};
  std::array<double, kVertexCount> values{};  // objective values, NaN until evaluated

  Simplex();
};

struct NmParams {
  double reflection = 1.0;   // alpha
  double expansion = 2.0;    // gamma
  double contraction = 0.5;  // rho
  double shrink = 0.5;       // sigma
  double convergence_threshold = 1e-4;  // loss spread across the simplex
  int max_evals = 2000;

  void validate() const;
};

struct NmResult {
  ParamVector x = ParamVector::Zero();
  double value = 0.0;
  int evals = 0;
  bool budget_exhausted = false;
};

using Objective = std::function<double(const ParamVector&)>;
using IterationCallback =
    std::function<void(int iteration, double best_value, const ParamVector& best)>;

/// Base vertex plus one single-coordinate offset per remaining vertex,
/// alternating +/- of the coordinate's half range.
Simplex initial_simplex(const PoseParams& x0, const SearchBounds& b);

/// Downhill simplex minimization. Vertices with non-NaN values in s0 are
/// not re-evaluated. Stops when the loss spread across the simplex falls
/// below the threshold or the evaluation budget runs out.
NmResult nelder_mead(const Objective& objective, Simplex s0, const NmParams& p,
                     const IterationCallback& on_iteration = nullptr);

struct StageRecord {
  int stage = 0;
  double loss = 0.0;
};

/// Per-iteration optimization trace for the report writer.
struct TraceRecord {
  int stage = 0;
  int iteration = 0;
  double best_loss = 0.0;
  PoseParams pose;
};

using TraceCallback = std::function<void(const TraceRecord&)>;

struct CalibrationResult {
  PoseParams pose;
  double final_loss = 0.0;
  int eval_count = 0;
  std::vector<StageRecord> stage_history;
  bool verified = false;
};

struct CalibrateOptions {
  SearchBounds bounds{};
  LossTerm term = LossTerm::l2();
  RenderConfig render_cfg{};
  int max_evals_per_stage = 2000;
  double stage_threshold = 1e-4;  // stages 1 and 2
  double final_threshold = 1e-6;  // stage 3
  bool sky_valid = false;
  TraceCallback trace;  // optional per-iteration trace sink
};

/// Registration objective used by calibrate: render the cloud at the
/// candidate pose, mask spurious sky against the target, crop both to the
/// lower half, and evaluate the masked loss. Total over any finite pose;
/// views without a single valid pixel score +infinity.
class RegistrationObjective {
 public:
  RegistrationObjective(const LabeledPointCloud& cloud, const SemanticImage& target,
                        const CameraIntrinsics& K, const LossTerm& term,
                        const RenderConfig& cfg, bool sky_valid);

  double operator()(const ParamVector& x) const;

 private:
  const LabeledPointCloud& cloud_;
  const SemanticImage& target_;
  SemanticImage target_cropped_;
  CameraIntrinsics intrinsics_;
  LossTerm term_;
  RenderConfig cfg_;
  bool sky_valid_;
};

/// Three-stage Nelder-Mead search: two runs at the stage threshold, then a
/// restart at the tightened final threshold, each seeded with the previous
/// best pose. Returns the lowest-loss pose seen across stages.
CalibrationResult calibrate(const LabeledPointCloud& cloud, const SemanticImage& target,
                            const CameraIntrinsics& K, const PoseParams& guess,
                            const CalibrateOptions& opts = {});

using CalibrateRunner = std::function<CalibrationResult(const PoseParams& start)>;

/// Reruns the calibration from noise-perturbed copies of the original guess
/// and keeps the lowest-loss outcome. The result is flagged verified when
/// its loss sits within 5% of the median over all runs. Trial seeds derive
/// from (seed, trial index), so results do not depend on scheduling.
CalibrationResult verify(const CalibrationResult& result, const PoseParams& original_guess,
                         const CalibrateRunner& run, const SearchBounds& noise_scale,
                         int trials, std::uint64_t seed,
                         std::vector<CalibrationResult>* trial_results = nullptr,
                         int threads = 0);

/// Convenience overload wiring the runner to calibrate() with fixed inputs.
CalibrationResult verify(const CalibrationResult& result, const LabeledPointCloud& cloud,
                         const SemanticImage& target, const CameraIntrinsics& K,
                         const PoseParams& original_guess, const CalibrateOptions& opts,
                         const SearchBounds& noise_scale, int trials, std::uint64_t seed,
                         std::vector<CalibrationResult>* trial_results = nullptr,
                         int threads = 0);

}  // namespace semcal
