#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "semcal/errors.hpp"
#include "semcal/semantics.hpp"

namespace semcal {

/// World frame is right-handed with x east, y north, z up; units are meters.
using Point3 = Eigen::Vector3d;

struct CameraIntrinsics {
  double fx = 0.0, fy = 0.0;  // focal lengths, pixels
  double cx = 0.0, cy = 0.0;  // principal point, pixels
  int width = 0, height = 0;  // image size, pixels

  void validate() const;
};

/// 5-DOF extrinsic estimate. (tx, ty, tz) is the camera position in the
/// world frame; roll is fixed to zero. Positive yaw turns the camera
/// counterclockwise about world z (seen from above), positive pitch tilts
/// the optical axis above the horizon.
struct PoseParams {
  double tx = 0.0, ty = 0.0, tz = 0.0;  // meters
  double yaw_deg = 0.0;                 // (-180, 180]
  double pitch_deg = 0.0;               // (-90, 90)

  void validate() const;
};

struct LabeledPointCloud {
  std::vector<Point3> points;
  std::vector<ClassId> labels;
  std::vector<std::int32_t> scan_ids;  // optional; empty or one per point

  std::size_t size() const { return points.size(); }
  bool empty() const { return points.empty(); }
  bool has_scan_ids() const { return !scan_ids.empty(); }

  void reserve(std::size_t n);
  void add(const Point3& p, ClassId label);
  void add(const Point3& p, ClassId label, std::int32_t scan_id);
  void append(const LabeledPointCloud& other);

  /// Checks the points/labels lockstep invariant and finite coordinates.
  void validate() const;
};

/// Dense 2D grid of class ids with the palette used to color them.
struct SemanticImage {
  int width = 0;
  int height = 0;
  std::vector<ClassId> classes;  // row-major, classes[y * width + x]
  Palette palette = default_palette();

  SemanticImage() = default;
  SemanticImage(int w, int h, ClassId fill = ClassId::invalid);

  std::size_t pixel_count() const { return classes.size(); }
  ClassId at(int x, int y) const {
    return classes[static_cast<std::size_t>(y) * width + x];
  }
  ClassId& at(int x, int y) {
    return classes[static_cast<std::size_t>(y) * width + x];
  }

  void validate() const;
};

}  // namespace semcal
