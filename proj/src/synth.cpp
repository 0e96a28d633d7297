#include "semcal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "semcal/parallel.hpp"
#include "semcal/rng.hpp"

namespace semcal {

namespace {

/// Rectangle patch in 3D: corner plus two orthogonal edges.
struct RectPatch {
  Point3 corner;
  Point3 edge_u;
  Point3 edge_v;
  ClassId cls;

  double area() const { return edge_u.norm() * edge_v.norm(); }

  Point3 sample(double su, double sv) const { return corner + su * edge_u + sv * edge_v; }

  double distance(const Point3& p) const {
    const double len_u = edge_u.norm();
    const double len_v = edge_v.norm();
    const Point3 du = edge_u / len_u;
    const Point3 dv = edge_v / len_v;
    const Point3 rel = p - corner;
    const double su = std::clamp(rel.dot(du), 0.0, len_u);
    const double sv = std::clamp(rel.dot(dv), 0.0, len_v);
    return (p - (corner + su * du + sv * dv)).norm();
  }
};

std::vector<RectPatch> box_patches(const BoxSpec& b) {
  const Point3 ex(1, 0, 0), ey(0, 1, 0), ez(0, 0, 1);
  const double x0 = b.cx - b.half_x, x1 = b.cx + b.half_x;
  const double y0 = b.cy - b.half_y, y1 = b.cy + b.half_y;
  std::vector<RectPatch> patches;
  patches.push_back({{x0, y0, 0}, (y1 - y0) * ey, b.height * ez, b.cls});  // west wall
  patches.push_back({{x1, y0, 0}, (y1 - y0) * ey, b.height * ez, b.cls});  // east wall
  patches.push_back({{x0, y0, 0}, (x1 - x0) * ex, b.height * ez, b.cls});  // south wall
  patches.push_back({{x0, y1, 0}, (x1 - x0) * ex, b.height * ez, b.cls});  // north wall
  patches.push_back({{x0, y0, b.height}, (x1 - x0) * ex, (y1 - y0) * ey, b.cls});  // roof
  return patches;
}

double cylinder_distance(const PoleSpec& pole, const Point3& p) {
  const double radial = std::hypot(p.x() - pole.x, p.y() - pole.y) - pole.radius;
  const double dz = p.z() < 0.0 ? -p.z() : (p.z() > pole.height ? p.z() - pole.height : 0.0);
  return std::hypot(radial, dz);
}

}  // namespace

void SceneSpec::validate() const {
  if (!(ground_half_extent > 0.0))
    throw_error(ErrorCode::invalid_argument, "scene spec: ground extent must be positive");
  if (!(density > 0.0))
    throw_error(ErrorCode::invalid_argument, "scene spec: density must be positive");
  if (!(noise_sigma >= 0.0))
    throw_error(ErrorCode::invalid_argument, "scene spec: noise sigma must be non-negative");
  for (const auto& b : boxes)
    if (!(b.half_x > 0.0) || !(b.half_y > 0.0) || !(b.height > 0.0))
      throw_error(ErrorCode::invalid_argument, "scene spec: box dimensions must be positive");
  for (const auto& p : poles)
    if (!(p.height > 0.0) || !(p.radius > 0.0))
      throw_error(ErrorCode::invalid_argument, "scene spec: pole dimensions must be positive");
  for (const auto& s : strips)
    if (s.polygon.size() < 3)
      throw_error(ErrorCode::invalid_argument, "scene spec: strip polygons need 3+ vertices");
}

LabeledPointCloud generate_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  LabeledPointCloud cloud;

  auto jitter = [&](const Point3& p) -> Point3 {
    if (spec.noise_sigma == 0.0) return p;
    return p + Point3(rng.normal(0.0, spec.noise_sigma), rng.normal(0.0, spec.noise_sigma),
                      rng.normal(0.0, spec.noise_sigma));
  };

  // Ground: strip polygons paint the class, first match wins.
  const double e = spec.ground_half_extent;
  const auto ground_count = static_cast<std::size_t>(std::llround(4.0 * e * e * spec.density));
  cloud.reserve(ground_count);
  for (std::size_t i = 0; i < ground_count; ++i) {
    const double x = rng.uniform(-e, e);
    const double y = rng.uniform(-e, e);
    ClassId cls = spec.ground_class;
    for (const auto& strip : spec.strips) {
      if (point_in_polygon({x, y}, strip.polygon)) {
        cls = strip.cls;
        break;
      }
    }
    cloud.add(jitter({x, y, 0.0}), cls);
  }

  for (const auto& box : spec.boxes) {
    for (const auto& patch : box_patches(box)) {
      const auto n = static_cast<std::size_t>(std::llround(patch.area() * spec.density));
      for (std::size_t i = 0; i < n; ++i)
        cloud.add(jitter(patch.sample(rng.uniform(), rng.uniform())), patch.cls);
    }
  }

  for (const auto& pole : spec.poles) {
    const double area = 2.0 * std::numbers::pi * pole.radius * pole.height;
    const auto n = static_cast<std::size_t>(std::llround(area * spec.density));
    for (std::size_t i = 0; i < n; ++i) {
      const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const double z = rng.uniform(0.0, pole.height);
      cloud.add(jitter({pole.x + pole.radius * std::cos(theta),
                        pole.y + pole.radius * std::sin(theta), z}),
                pole.cls);
    }
  }

  return cloud;
}

double surface_distance(const SceneSpec& spec, const Point3& p) {
  const double e = spec.ground_half_extent;
  // Ground patch.
  const double gx = std::max({-e - p.x(), p.x() - e, 0.0});
  const double gy = std::max({-e - p.y(), p.y() - e, 0.0});
  double best = std::sqrt(gx * gx + gy * gy + p.z() * p.z());

  for (const auto& box : spec.boxes)
    for (const auto& patch : box_patches(box))
      best = std::min(best, patch.distance(p));
  for (const auto& pole : spec.poles) best = std::min(best, cylinder_distance(pole, p));
  return best;
}

SemanticImage render_ground_truth(const LabeledPointCloud& cloud, const PoseParams& g,
                                  const CameraIntrinsics& K, const RenderConfig& cfg,
                                  double label_flip_rate, std::uint64_t seed) {
  if (!(label_flip_rate >= 0.0 && label_flip_rate <= 1.0))
    throw_error(ErrorCode::invalid_argument, "render_ground_truth: flip rate must be in [0, 1]");
  SemanticImage img = render(cloud, g, K, cfg);
  if (label_flip_rate == 0.0) return img;

  Rng rng(seed);
  for (auto& cls : img.classes) {
    if (rng.uniform() >= label_flip_rate) continue;
    // Uniform over the non-invalid classes other than the current one.
    std::uint8_t pick;
    if (cls == ClassId::invalid) {
      pick = static_cast<std::uint8_t>(rng.uniform_int(1, kClassCount - 1));
    } else {
      pick = static_cast<std::uint8_t>(rng.uniform_int(1, kClassCount - 2));
      if (pick >= to_id(cls)) ++pick;
    }
    cls = static_cast<ClassId>(pick);
  }
  return img;
}

TrialReport run_protocol(const LabeledPointCloud& cloud, const SemanticImage& target,
                         const CameraIntrinsics& K, const PoseParams& ground_truth,
                         const ProtocolOptions& opts) {
  if (opts.trials < 1 || opts.keep < 1 || opts.keep > opts.trials)
    throw_error(ErrorCode::invalid_argument, "run_protocol: need trials >= keep >= 1");
  if (!(opts.offset_pos >= 0.0) || !(opts.offset_ang >= 0.0))
    throw_error(ErrorCode::invalid_argument, "run_protocol: offsets must be non-negative");

  TrialReport report;
  report.keep = opts.keep;
  report.trials.resize(static_cast<std::size_t>(opts.trials));

  parallel_for(opts.trials, opts.threads, [&](int t) {
    Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(t)));
    ParamVector offset;
    for (int c = 0; c < 5; ++c) {
      const double half = c < 3 ? opts.offset_pos : opts.offset_ang;
      offset[c] = rng.uniform(-half, half);
    }

    TrialRecord& rec = report.trials[static_cast<std::size_t>(t)];
    rec.index = t;
    rec.initial_offset = offset;
    rec.start = to_pose(to_params(ground_truth) + offset);
    rec.result = calibrate(cloud, target, K, rec.start, opts.calibrate);

    const PoseParams& est = rec.result.pose;
    rec.dt_cm = 100.0 * Point3(est.tx - ground_truth.tx, est.ty - ground_truth.ty,
                               est.tz - ground_truth.tz)
                            .norm();
    rec.dyaw_deg = std::abs(angle_diff_deg(est.yaw_deg, ground_truth.yaw_deg));
    rec.dpitch_deg = std::abs(angle_diff_deg(est.pitch_deg, ground_truth.pitch_deg));
  });

  // Accept the `keep` lowest-loss trials; ties keep the earlier trial.
  std::vector<int> by_loss(static_cast<std::size_t>(opts.trials));
  std::iota(by_loss.begin(), by_loss.end(), 0);
  std::stable_sort(by_loss.begin(), by_loss.end(), [&](int a, int b) {
    return report.trials[static_cast<std::size_t>(a)].result.final_loss <
           report.trials[static_cast<std::size_t>(b)].result.final_loss;
  });
  for (int i = 0; i < opts.keep; ++i)
    report.trials[static_cast<std::size_t>(by_loss[static_cast<std::size_t>(i)])].accepted = true;

  double dt = 0.0, dyaw = 0.0, dpitch = 0.0, loss_accepted = 0.0, loss_all = 0.0;
  for (const auto& rec : report.trials) {
    loss_all += rec.result.final_loss;
    if (!rec.accepted) continue;
    dt += rec.dt_cm;
    dyaw += rec.dyaw_deg;
    dpitch += rec.dpitch_deg;
    loss_accepted += rec.result.final_loss;
  }
  const double k = static_cast<double>(opts.keep);
  report.mean_dt_cm = dt / k;
  report.mean_dyaw_deg = dyaw / k;
  report.mean_dpitch_deg = dpitch / k;
  report.mean_dangle_deg = (dyaw + dpitch) / (2.0 * k);
  report.accepted_mean_loss = loss_accepted / k;
  report.full_mean_loss = loss_all / static_cast<double>(opts.trials);
  return report;
}

}  // namespace semcal
