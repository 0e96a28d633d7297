#include "semcal/reconstruction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <unordered_map>

#include <Eigen/Dense>

namespace semcal {

namespace {

std::int64_t pack_cell(std::int64_t x, std::int64_t y, std::int64_t z) {
  // 21 bits per axis, offset to keep coordinates positive.
  constexpr std::int64_t offset = 1 << 20;
  return ((x + offset) << 42) | ((y + offset) << 21) | (z + offset);
}

std::int64_t cell_coord(double v, double cell) {
  constexpr double bound = (1 << 20) - 2;
  return static_cast<std::int64_t>(std::clamp(std::floor(v / cell), -bound, bound));
}

/// Uniform hash grid over the target cloud. With cell size equal to the
/// correspondence gate, scanning the 27 surrounding cells yields the exact
/// nearest neighbor within the gate.
class GridIndex {
 public:
  GridIndex(const std::vector<Point3>& points, double cell) : points_(points), cell_(cell) {
    cells_.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
      const auto& p = points[i];
      cells_[pack_cell(cell_coord(p.x(), cell_), cell_coord(p.y(), cell_),
                       cell_coord(p.z(), cell_))]
          .push_back(static_cast<int>(i));
    }
  }

  /// Index of the nearest point within max_dist (inclusive gate), or -1.
  /// Ties go to the lowest point index.
  int nearest(const Point3& q, double max_dist) const {
    const std::int64_t cx = cell_coord(q.x(), cell_);
    const std::int64_t cy = cell_coord(q.y(), cell_);
    const std::int64_t cz = cell_coord(q.z(), cell_);
    const double gate_sq = max_dist * max_dist;
    int best = -1;
    double best_sq = std::numeric_limits<double>::infinity();
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = cells_.find(pack_cell(cx + dx, cy + dy, cz + dz));
          if (it == cells_.end()) continue;
          for (int idx : it->second) {
            const double d_sq = (points_[static_cast<std::size_t>(idx)] - q).squaredNorm();
            if (d_sq > gate_sq) continue;
            if (d_sq < best_sq || (d_sq == best_sq && idx < best)) {
              best_sq = d_sq;
              best = idx;
            }
          }
        }
    return best;
  }

 private:
  const std::vector<Point3>& points_;
  double cell_;
  std::unordered_map<std::int64_t, std::vector<int>> cells_;
};

/// Least-squares rigid transform mapping src onto dst (Kabsch/Umeyama).
RigidTransform best_fit_transform(const std::vector<Point3>& src,
                                  const std::vector<Point3>& dst) {
  Eigen::Vector3d c_src = Eigen::Vector3d::Zero();
  Eigen::Vector3d c_dst = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i) {
    c_src += src[i];
    c_dst += dst[i];
  }
  c_src /= static_cast<double>(src.size());
  c_dst /= static_cast<double>(dst.size());

  Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
  for (std::size_t i = 0; i < src.size(); ++i)
    h += (src[i] - c_src) * (dst[i] - c_dst).transpose();

  Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
  if ((svd.matrixV() * svd.matrixU().transpose()).determinant() < 0.0) d(2, 2) = -1.0;
  const Eigen::Matrix3d r = svd.matrixV() * d * svd.matrixU().transpose();

  RigidTransform t = RigidTransform::Identity();
  t.linear() = r;
  t.translation() = c_dst - r * c_src;
  return t;
}

}  // namespace

void IcpParams::validate() const {
  if (!(max_correspondence_dist > 0.0) || max_iterations <= 0 ||
      !(convergence_delta > 0.0) || !(voxel_size > 0.0))
    throw_error(ErrorCode::invalid_argument, "icp params: all fields must be strictly positive");
}

Scan filter_by_range(const Scan& s, double d_max) {
  if (!(d_max > 0.0))
    throw_error(ErrorCode::invalid_argument, "filter_by_range: d_max must be positive");
  Scan out;
  out.vehicle_pose = s.vehicle_pose;
  out.timestamp = s.timestamp;
  out.cloud.reserve(s.cloud.size());
  const bool ids = s.cloud.has_scan_ids();
  for (std::size_t i = 0; i < s.cloud.size(); ++i) {
    if (s.cloud.points[i].norm() <= d_max) {
      if (ids)
        out.cloud.add(s.cloud.points[i], s.cloud.labels[i], s.cloud.scan_ids[i]);
      else
        out.cloud.add(s.cloud.points[i], s.cloud.labels[i]);
    }
  }
  return out;
}

LabeledPointCloud to_world(const Scan& s) {
  LabeledPointCloud out = s.cloud;
  for (auto& p : out.points) p = s.vehicle_pose * p;
  return out;
}

IcpResult icp_align(const LabeledPointCloud& source, const LabeledPointCloud& target,
                    const RigidTransform& init, const IcpParams& params) {
  params.validate();
  if (source.empty() || target.empty())
    throw_error(ErrorCode::invalid_argument, "icp_align: clouds must be non-empty");

  const GridIndex index(target.points, params.max_correspondence_dist);

  IcpResult result;
  result.transform = init;
  RigidTransform prev_transform = init;
  double prev_rms = std::numeric_limits<double>::infinity();

  std::vector<Point3> matched_src, matched_dst;
  for (int iter = 0; iter < params.max_iterations; ++iter) {
    matched_src.clear();
    matched_dst.clear();
    double sq_sum = 0.0;
    for (const auto& p : source.points) {
      const Point3 moved = result.transform * p;
      const int j = index.nearest(moved, params.max_correspondence_dist);
      if (j < 0) continue;
      matched_src.push_back(moved);
      matched_dst.push_back(target.points[static_cast<std::size_t>(j)]);
      sq_sum += (moved - target.points[static_cast<std::size_t>(j)]).squaredNorm();
    }
    if (matched_src.size() < 10)
      throw_error(ErrorCode::insufficient_overlap,
                  "icp_align: fewer than 10 correspondences within " +
                      std::to_string(params.max_correspondence_dist) + " m");

    const double rms = std::sqrt(sq_sum / static_cast<double>(matched_src.size()));
    if (rms > prev_rms) {
      // Re-gating made things worse; keep the previous, better transform.
      result.transform = prev_transform;
      break;
    }
    result.rms_history.push_back(rms);
    result.iterations = iter + 1;
    if (prev_rms - rms < params.convergence_delta) {
      result.converged = true;
      break;
    }

    // Accept the least-squares update only if it improves the residual on
    // the current pairs; otherwise the transform is already optimal here.
    const RigidTransform step = best_fit_transform(matched_src, matched_dst);
    double cand_sq = 0.0;
    for (std::size_t i = 0; i < matched_src.size(); ++i)
      cand_sq += (step * matched_src[i] - matched_dst[i]).squaredNorm();
    const double cand_rms = std::sqrt(cand_sq / static_cast<double>(matched_src.size()));
    if (cand_rms >= rms) {
      result.converged = true;
      break;
    }
    prev_rms = rms;
    prev_transform = result.transform;
    result.transform = step * result.transform;
  }
  return result;
}

LabeledPointCloud voxel_downsample(const LabeledPointCloud& cloud, double voxel_size) {
  if (!(voxel_size > 0.0))
    throw_error(ErrorCode::invalid_argument, "voxel_downsample: voxel size must be positive");

  struct Accum {
    Eigen::Vector3d sum = Eigen::Vector3d::Zero();
    std::array<std::uint32_t, kClassCount> counts{};
    std::uint32_t n = 0;
  };

  std::unordered_map<std::int64_t, Accum> voxels;
  voxels.reserve(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const auto& p = cloud.points[i];
    auto& a = voxels[pack_cell(cell_coord(p.x(), voxel_size), cell_coord(p.y(), voxel_size),
                               cell_coord(p.z(), voxel_size))];
    a.sum += p;
    a.counts[to_id(cloud.labels[i])]++;
    a.n++;
  }

  // Emit in sorted key order so the result is independent of hash layout.
  std::vector<std::int64_t> keys;
  keys.reserve(voxels.size());
  for (const auto& [key, _] : voxels) keys.push_back(key);
  std::sort(keys.begin(), keys.end());

  LabeledPointCloud out;
  out.reserve(keys.size());
  for (const std::int64_t key : keys) {
    const Accum& a = voxels.at(key);
    int best_class = 0;
    std::uint32_t best_count = 0;
    for (int c = 0; c < kClassCount; ++c) {
      if (a.counts[static_cast<std::size_t>(c)] > best_count) {
        best_count = a.counts[static_cast<std::size_t>(c)];
        best_class = c;
      }
    }
    out.add(a.sum / static_cast<double>(a.n), static_cast<ClassId>(best_class));
  }
  return out;
}

LabeledPointCloud merge_recursive(const std::vector<Scan>& scans, const IcpParams& params) {
  params.validate();
  if (scans.empty())
    throw_error(ErrorCode::invalid_argument, "merge_recursive: need at least one scan");
  for (std::size_t i = 1; i < scans.size(); ++i)
    if (!(scans[i].timestamp > scans[i - 1].timestamp))
      throw_error(ErrorCode::invalid_argument,
                  "merge_recursive: scans must be sorted by strictly increasing timestamp");

  std::vector<LabeledPointCloud> level;
  level.reserve(scans.size());
  for (const auto& s : scans) level.push_back(to_world(s));

  if (level.size() == 1) return voxel_downsample(level.front(), params.voxel_size);

  while (level.size() > 1) {
    std::vector<LabeledPointCloud> next;
    next.reserve(level.size() / 3 + 1);
    for (std::size_t begin = 0; begin < level.size(); begin += 3) {
      const std::size_t end = std::min(begin + 3, level.size());
      const std::size_t group_size = end - begin;
      if (group_size == 1) {
        next.push_back(std::move(level[begin]));
        continue;
      }
      // Vehicle poses already seed the alignment: clouds share the world
      // frame, so the ICP initial guess inside a group is identity.
      const std::size_t middle = begin + group_size / 2;
      LabeledPointCloud merged;
      for (std::size_t i = begin; i < end; ++i) {
        if (i == middle) {
          merged.append(level[i]);
          continue;
        }
        IcpResult aligned;
        try {
          aligned = icp_align(level[i], level[middle], RigidTransform::Identity(), params);
        } catch (const Error& err) {
          if (err.code() == ErrorCode::insufficient_overlap)
            throw_error(ErrorCode::insufficient_overlap,
                        "merge_recursive: group starting at scan " + std::to_string(begin) +
                            ": " + err.what());
          throw;
        }
        LabeledPointCloud moved = level[i];
        for (auto& p : moved.points) p = aligned.transform * p;
        merged.append(moved);
      }
      next.push_back(voxel_downsample(merged, params.voxel_size));
    }
    level = std::move(next);
  }
  return std::move(level.front());
}

bool point_in_polygon(const Eigen::Vector2d& p, const Polygon2d& poly) {
  if (poly.size() < 3) return false;
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const auto& a = poly[i];
    const auto& b = poly[j];
    // Edge hit counts as inside.
    const double cross = (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    if (std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) &&
        std::min(a.y(), b.y()) <= p.y() && p.y() <= std::max(a.y(), b.y()) && cross == 0.0)
      return true;
    if ((a.y() > p.y()) != (b.y() > p.y())) {
      const double x_int = a.x() + (p.y() - a.y()) / (b.y() - a.y()) * (b.x() - a.x());
      if (x_int > p.x()) inside = !inside;
    }
  }
  return inside;
}

LabeledPointCloud remove_dynamic(const LabeledPointCloud& cloud,
                                 const std::set<ClassId>& dynamic_ids,
                                 const std::optional<Polygon2d>& region) {
  LabeledPointCloud out;
  out.reserve(cloud.size());
  const bool ids = cloud.has_scan_ids();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    bool drop = dynamic_ids.count(cloud.labels[i]) > 0;
    if (drop && region)
      drop = point_in_polygon(cloud.points[i].head<2>(), *region);
    if (drop) continue;
    if (ids)
      out.add(cloud.points[i], cloud.labels[i], cloud.scan_ids[i]);
    else
      out.add(cloud.points[i], cloud.labels[i]);
  }
  return out;
}

LabeledPointCloud crop_radius(const LabeledPointCloud& cloud, const Point3& center,
                              double radius) {
  if (!(radius > 0.0))
    throw_error(ErrorCode::invalid_argument, "crop_radius: radius must be positive");
  LabeledPointCloud out;
  out.reserve(cloud.size());
  const bool ids = cloud.has_scan_ids();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const double dx = cloud.points[i].x() - center.x();
    const double dy = cloud.points[i].y() - center.y();
    if (std::sqrt(dx * dx + dy * dy) <= radius) {
      if (ids)
        out.add(cloud.points[i], cloud.labels[i], cloud.scan_ids[i]);
      else
        out.add(cloud.points[i], cloud.labels[i]);
    }
  }
  return out;
}

}  // namespace semcal
