#pragma once

#include <cmath>
#include <numbers>
#include <optional>

#include <Eigen/Core>

#include "semcal/types.hpp"

namespace semcal {

/// Points closer than this along the optical axis count as behind the camera.
inline constexpr double kZNear = 0.1;  // meters

constexpr double deg_to_rad(double deg) { return deg * std::numbers::pi / 180.0; }
constexpr double rad_to_deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// Wraps an angle to (-180, 180].
double wrap_angle_deg(double deg);

/// Smallest signed difference a - b on the circle, in (-180, 180].
double angle_diff_deg(double a, double b);

/// World-to-camera rigid map: a world point X lands at camera coordinates
/// R * X + t, with camera axes x right, y down, z optical forward.
struct ExtrinsicMatrix {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  Eigen::Vector3d to_camera(const Point3& x) const { return R * x + t; }
  void validate() const;
};

/// Composes the world-to-camera rotation as pitch about the camera lateral
/// axis applied after yaw about world z, both on top of the fixed axis
/// change (at zero yaw the camera looks along world +y).
ExtrinsicMatrix pose_to_extrinsic(const PoseParams& p);

/// Inverse of pose_to_extrinsic for zero-roll extrinsics.
PoseParams pose_from_extrinsic(const ExtrinsicMatrix& e);

struct Projection {
  double u = 0.0;      // pixels
  double v = 0.0;      // pixels
  double depth = 0.0;  // meters along the optical axis
};

/// Pinhole projection; empty result means the point is behind the camera.
inline std::optional<Projection> project(const CameraIntrinsics& K,
                                         const ExtrinsicMatrix& E,
                                         const Point3& x) {
  const Eigen::Vector3d xc = E.R * x + E.t;
  if (!(xc.z() > kZNear)) return std::nullopt;
  const double inv_z = 1.0 / xc.z();
  return Projection{K.fx * xc.x() * inv_z + K.cx,
                    K.fy * xc.y() * inv_z + K.cy, xc.z()};
}

}  // namespace semcal
