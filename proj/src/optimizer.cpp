#include "semcal/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "semcal/parallel.hpp"
#include "semcal/rng.hpp"

namespace semcal {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();
}  // namespace

void SearchBounds::validate() const {
  if (!(pos_half_range > 0.0) || !(ang_half_range > 0.0))
    throw_error(ErrorCode::invalid_argument, "search bounds: half ranges must be positive");
}

ParamVector to_params(const PoseParams& p) {
  ParamVector v;
  v << p.tx, p.ty, p.tz, p.yaw_deg, p.pitch_deg;
  return v;
}

PoseParams to_pose(const ParamVector& v) {
  return PoseParams{v[0], v[1], v[2], v[3], v[4]};
}

Simplex::Simplex() { values.fill(kNaN); }

void NmParams::validate() const {
  if (!(reflection > 0.0) || !(expansion > 1.0) || !(contraction > 0.0) ||
      !(contraction < 1.0) || !(shrink > 0.0) || !(shrink < 1.0))
    throw_error(ErrorCode::invalid_argument, "nelder-mead: coefficients out of range");
  if (!(convergence_threshold > 0.0) || max_evals <= 0)
    throw_error(ErrorCode::invalid_argument, "nelder-mead: bad termination settings");
}

Simplex initial_simplex(const PoseParams& x0, const SearchBounds& b) {
  b.validate();
  Simplex s;
  s.vertices[0] = to_params(x0);
  for (int i = 1; i < Simplex::kVertexCount; ++i) {
    const int coord = i - 1;
    const double half = coord < 3 ? b.pos_half_range : b.ang_half_range;
    const double sign = (i % 2 == 1) ? 1.0 : -1.0;
    s.vertices[static_cast<std::size_t>(i)] = s.vertices[0];
    s.vertices[static_cast<std::size_t>(i)][coord] += sign * half;
  }
  return s;
}

NmResult nelder_mead(const Objective& objective, Simplex s0, const NmParams& p,
                     const IterationCallback& on_iteration) {
  p.validate();

  constexpr int n = 5;
  constexpr int m = Simplex::kVertexCount;

  NmResult result;
  bool out_of_budget = false;
  auto eval = [&](const ParamVector& x) -> double {
    if (result.evals >= p.max_evals) {
      out_of_budget = true;
      return kInf;  // never stored; iteration aborts right after
    }
    ++result.evals;
    return objective(x);
  };

  for (int i = 0; i < m && !out_of_budget; ++i)
    if (std::isnan(s0.values[static_cast<std::size_t>(i)]))
      s0.values[static_cast<std::size_t>(i)] = eval(s0.vertices[static_cast<std::size_t>(i)]);

  // Stable order: ties keep the lower slot, which pins the returned vertex
  // on constant objectives and makes runs reproducible.
  std::array<int, m> order{};
  std::iota(order.begin(), order.end(), 0);
  auto sort_order = [&] {
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return s0.values[static_cast<std::size_t>(a)] < s0.values[static_cast<std::size_t>(b)];
    });
  };
  sort_order();

  for (int iteration = 1; !out_of_budget; ++iteration) {
    // Converged once every vertex value sits within the threshold of the
    // best one (the spread can only shrink toward the plateau value).
    const double spread = s0.values[static_cast<std::size_t>(order[m - 1])] -
                          s0.values[static_cast<std::size_t>(order[0])];
    if (!(spread >= p.convergence_threshold)) break;

    const int best = order[0];
    const int worst = order[m - 1];
    const int second_worst = order[m - 2];

    ParamVector centroid = ParamVector::Zero();
    for (int i = 0; i < m - 1; ++i) centroid += s0.vertices[static_cast<std::size_t>(order[i])];
    centroid /= static_cast<double>(n);

    const ParamVector& x_worst = s0.vertices[static_cast<std::size_t>(worst)];
    const double f_best = s0.values[static_cast<std::size_t>(best)];
    const double f_second_worst = s0.values[static_cast<std::size_t>(second_worst)];
    const double f_worst = s0.values[static_cast<std::size_t>(worst)];

    const ParamVector x_reflect = centroid + p.reflection * (centroid - x_worst);
    const double f_reflect = eval(x_reflect);
    if (out_of_budget) break;

    auto replace_worst = [&](const ParamVector& x, double f) {
      s0.vertices[static_cast<std::size_t>(worst)] = x;
      s0.values[static_cast<std::size_t>(worst)] = f;
    };

    if (f_reflect < f_best) {
      const ParamVector x_expand = centroid + p.expansion * (x_reflect - centroid);
      const double f_expand = eval(x_expand);
      if (out_of_budget) break;
      if (f_expand < f_reflect)
        replace_worst(x_expand, f_expand);
      else
        replace_worst(x_reflect, f_reflect);
    } else if (f_reflect < f_second_worst) {
      replace_worst(x_reflect, f_reflect);
    } else {
      bool shrink = false;
      if (f_reflect < f_worst) {
        const ParamVector x_contract = centroid + p.contraction * (x_reflect - centroid);
        const double f_contract = eval(x_contract);
        if (out_of_budget) break;
        if (f_contract <= f_reflect)
          replace_worst(x_contract, f_contract);
        else
          shrink = true;
      } else {
        const ParamVector x_contract = centroid - p.contraction * (centroid - x_worst);
        const double f_contract = eval(x_contract);
        if (out_of_budget) break;
        if (f_contract < f_worst)
          replace_worst(x_contract, f_contract);
        else
          shrink = true;
      }
      if (shrink) {
        const ParamVector x_best = s0.vertices[static_cast<std::size_t>(best)];
        for (int i = 1; i < m && !out_of_budget; ++i) {
          const int slot = order[i];
          s0.vertices[static_cast<std::size_t>(slot)] =
              x_best + p.shrink * (s0.vertices[static_cast<std::size_t>(slot)] - x_best);
          s0.values[static_cast<std::size_t>(slot)] =
              eval(s0.vertices[static_cast<std::size_t>(slot)]);
        }
        if (out_of_budget) break;
      }
    }

    sort_order();
    if (on_iteration)
      on_iteration(iteration, s0.values[static_cast<std::size_t>(order[0])],
                   s0.vertices[static_cast<std::size_t>(order[0])]);
  }

  sort_order();
  result.x = s0.vertices[static_cast<std::size_t>(order[0])];
  result.value = s0.values[static_cast<std::size_t>(order[0])];
  result.budget_exhausted = out_of_budget;
  return result;
}

RegistrationObjective::RegistrationObjective(const LabeledPointCloud& cloud,
                                             const SemanticImage& target,
                                             const CameraIntrinsics& K, const LossTerm& term,
                                             const RenderConfig& cfg, bool sky_valid)
    : cloud_(cloud),
      target_(target),
      target_cropped_(crop_lower_half(target)),
      intrinsics_(K),
      term_(term),
      cfg_(cfg),
      sky_valid_(sky_valid) {
  if (target.width != K.width || target.height != K.height)
    throw_error(ErrorCode::dimension_mismatch,
                "calibrate: target image does not match the camera intrinsics");
}

double RegistrationObjective::operator()(const ParamVector& x) const {
  const SemanticImage rendered = render(cloud_, to_pose(x), intrinsics_, cfg_);
  const SemanticImage masked = mask_spurious_sky(rendered, target_);
  try {
    return masked_loss(crop_lower_half(masked), target_cropped_, term_, sky_valid_);
  } catch (const Error& err) {
    if (err.code() == ErrorCode::no_valid_pixels) return kInf;
    throw;
  }
}

CalibrationResult calibrate(const LabeledPointCloud& cloud, const SemanticImage& target,
                            const CameraIntrinsics& K, const PoseParams& guess,
                            const CalibrateOptions& opts) {
  opts.bounds.validate();
  const RegistrationObjective objective(cloud, target, K, opts.term, opts.render_cfg,
                                        opts.sky_valid);
  const std::array<double, 3> thresholds = {opts.stage_threshold, opts.stage_threshold,
                                            opts.final_threshold};

  CalibrationResult result;
  ParamVector current = to_params(guess);
  double best_value = kInf;
  ParamVector best_x = current;

  for (int stage = 1; stage <= 3; ++stage) {
    Simplex s = initial_simplex(to_pose(current), opts.bounds);
    if (stage == 1) {
      for (int i = 0; i < Simplex::kVertexCount; ++i) {
        s.values[static_cast<std::size_t>(i)] = objective(s.vertices[static_cast<std::size_t>(i)]);
        ++result.eval_count;
      }
      const auto [lo, hi] = std::minmax_element(s.values.begin(), s.values.end());
      if (*lo == *hi) {
        if (std::isinf(*lo))
          throw_error(ErrorCode::no_valid_pixels,
                      "calibrate: no candidate view shares valid pixels with the target");
        throw_error(ErrorCode::degenerate_scene,
                    "calibrate: objective is constant across the initial simplex");
      }
    }

    NmParams nm;
    nm.convergence_threshold = thresholds[static_cast<std::size_t>(stage - 1)];
    nm.max_evals = opts.max_evals_per_stage;
    IterationCallback monitor;
    if (opts.trace)
      monitor = [&opts, stage](int iteration, double best, const ParamVector& x) {
        opts.trace({stage, iteration, best, to_pose(x)});
      };
    const NmResult stage_result = nelder_mead(objective, s, nm, monitor);

    result.eval_count += stage_result.evals;
    result.stage_history.push_back({stage, stage_result.value});
    if (stage_result.value < best_value) {
      best_value = stage_result.value;
      best_x = stage_result.x;
    }
    current = stage_result.x;
  }

  result.pose = to_pose(best_x);
  result.final_loss = best_value;
  return result;
}

CalibrationResult verify(const CalibrationResult& result, const PoseParams& original_guess,
                         const CalibrateRunner& run, const SearchBounds& noise_scale,
                         int trials, std::uint64_t seed,
                         std::vector<CalibrationResult>* trial_results, int threads) {
  noise_scale.validate();
  if (trials < 1)
    throw_error(ErrorCode::invalid_argument, "verify: need at least one trial");

  std::vector<CalibrationResult> runs(static_cast<std::size_t>(trials));
  parallel_for(trials, threads, [&](int t) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    PoseParams start = original_guess;
    start.tx += rng.uniform(-noise_scale.pos_half_range, noise_scale.pos_half_range);
    start.ty += rng.uniform(-noise_scale.pos_half_range, noise_scale.pos_half_range);
    start.tz += rng.uniform(-noise_scale.pos_half_range, noise_scale.pos_half_range);
    start.yaw_deg += rng.uniform(-noise_scale.ang_half_range, noise_scale.ang_half_range);
    start.pitch_deg += rng.uniform(-noise_scale.ang_half_range, noise_scale.ang_half_range);
    runs[static_cast<std::size_t>(t)] = run(start);
  });

  CalibrationResult best = result;
  std::vector<double> losses;
  losses.reserve(runs.size() + 1);
  losses.push_back(result.final_loss);
  for (const auto& r : runs) {
    losses.push_back(r.final_loss);
    if (r.final_loss < best.final_loss) best = r;
  }

  std::sort(losses.begin(), losses.end());
  const std::size_t mid = losses.size() / 2;
  const double median = losses.size() % 2 == 1
                            ? losses[mid]
                            : 0.5 * (losses[mid - 1] + losses[mid]);
  best.verified = std::isfinite(median) && std::isfinite(best.final_loss) &&
                  median - best.final_loss <= 0.05 * median + 1e-12;
  if (trial_results) *trial_results = std::move(runs);
  return best;
}

CalibrationResult verify(const CalibrationResult& result, const LabeledPointCloud& cloud,
                         const SemanticImage& target, const CameraIntrinsics& K,
                         const PoseParams& original_guess, const CalibrateOptions& opts,
                         const SearchBounds& noise_scale, int trials, std::uint64_t seed,
                         std::vector<CalibrationResult>* trial_results, int threads) {
  return verify(
      result, original_guess,
      [&](const PoseParams& start) { return calibrate(cloud, target, K, start, opts); },
      noise_scale, trials, seed, trial_results, threads);
}

}  // namespace semcal
