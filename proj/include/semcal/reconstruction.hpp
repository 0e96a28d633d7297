#pragma once

#include <optional>
#include <set>
#include <vector>

#include <Eigen/Geometry>

#include "semcal/types.hpp"

namespace semcal {

using RigidTransform = Eigen::Isometry3d;
using Polygon2d = std::vector<Eigen::Vector2d>;

/// One lidar capture: points in the sensor frame plus the sensor's 6-DOF
/// world pose at the capture time.
struct Scan {
  LabeledPointCloud cloud;
  RigidTransform vehicle_pose = RigidTransform::Identity();
  double timestamp = 0.0;  // seconds
};

struct IcpParams {
  double max_correspondence_dist = 1.0;  // meters
  int max_iterations = 50;
  double convergence_delta = 1e-6;       // RMS improvement threshold
  double voxel_size = 0.1;               // meters

  void validate() const;
};

struct IcpResult {
  RigidTransform transform = RigidTransform::Identity();
  std::vector<double> rms_history;  // per accepted iteration, non-increasing
  int iterations = 0;
  bool converged = false;
};

/// Keeps points whose sensor-frame distance is at most d_max.
Scan filter_by_range(const Scan& s, double d_max);

/// Applies the vehicle pose to every point.
LabeledPointCloud to_world(const Scan& s);

/// Point-to-point ICP aligning source onto target, seeded with init.
/// Throws insufficient_overlap when fewer than 10 pairs fall within
/// max_correspondence_dist.
IcpResult icp_align(const LabeledPointCloud& source,
                    const LabeledPointCloud& target,
                    const RigidTransform& init, const IcpParams& params);

/// One representative point (member centroid) per occupied voxel; the label
/// is the member majority, ties broken by the lowest class id.
LabeledPointCloud voxel_downsample(const LabeledPointCloud& cloud,
                                   double voxel_size);

/// Merges time-sorted scans by recursively registering consecutive groups
/// of three: group members are ICP-aligned to the middle cloud,
/// concatenated, and voxel-downsampled, until one cloud remains.
LabeledPointCloud merge_recursive(const std::vector<Scan>& scans,
                                  const IcpParams& params);

/// Even-odd ray casting; boundary points count as inside.
bool point_in_polygon(const Eigen::Vector2d& p, const Polygon2d& poly);

/// Drops points whose label is dynamic, optionally only inside a ground-plane
/// polygon region.
LabeledPointCloud remove_dynamic(
    const LabeledPointCloud& cloud, const std::set<ClassId>& dynamic_ids,
    const std::optional<Polygon2d>& region = std::nullopt);

/// Keeps points whose horizontal (x, y) distance to center is at most radius.
LabeledPointCloud crop_radius(const LabeledPointCloud& cloud,
                              const Point3& center, double radius);

}  // namespace semcal
