#include "semcal/geometry.hpp"

#include <Eigen/LU>

namespace semcal {

namespace {

Eigen::Matrix3d rot_x(double rad) {
  const double c = std::cos(rad), s = std::sin(rad);
  Eigen::Matrix3d m;
  m << 1, 0, 0, 0, c, -s, 0, s, c;
  return m;
}

Eigen::Matrix3d rot_z(double rad) {
  const double c = std::cos(rad), s = std::sin(rad);
  Eigen::Matrix3d m;
  m << c, -s, 0, s, c, 0, 0, 0, 1;
  return m;
}

// World (x east, y north, z up) to camera (x right, y down, z forward)
// at zero yaw and pitch; the camera looks north.
Eigen::Matrix3d axis_change() {
  Eigen::Matrix3d a;
  a << 1, 0, 0, 0, 0, -1, 0, 1, 0;
  return a;
}

}  // namespace

double wrap_angle_deg(double deg) {
  double w = std::fmod(deg, 360.0);
  if (w <= -180.0) w += 360.0;
  if (w > 180.0) w -= 360.0;
  return w;
}

double angle_diff_deg(double a, double b) { return wrap_angle_deg(a - b); }

void ExtrinsicMatrix::validate() const {
  const Eigen::Matrix3d gram = R.transpose() * R;
  if ((gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-9)
    throw_error(ErrorCode::invalid_argument, "extrinsic: rotation is not orthonormal");
  if (std::abs(R.determinant() - 1.0) > 1e-9)
    throw_error(ErrorCode::invalid_argument, "extrinsic: rotation determinant is not +1");
  if (!t.allFinite())
    throw_error(ErrorCode::invalid_argument, "extrinsic: non-finite translation");
}

ExtrinsicMatrix pose_to_extrinsic(const PoseParams& p) {
  ExtrinsicMatrix e;
  e.R = rot_x(-deg_to_rad(p.pitch_deg)) * axis_change() * rot_z(-deg_to_rad(p.yaw_deg));
  e.t = -(e.R * Eigen::Vector3d(p.tx, p.ty, p.tz));
  return e;
}

PoseParams pose_from_extrinsic(const ExtrinsicMatrix& e) {
  // Camera forward axis expressed in world coordinates:
  // f = (-sin(yaw) cos(pitch), cos(yaw) cos(pitch), sin(pitch)).
  const Eigen::Vector3d f = e.R.transpose() * Eigen::Vector3d(0, 0, 1);
  const Eigen::Vector3d pos = -(e.R.transpose() * e.t);
  PoseParams p;
  p.tx = pos.x();
  p.ty = pos.y();
  p.tz = pos.z();
  p.pitch_deg = rad_to_deg(std::asin(std::clamp(f.z(), -1.0, 1.0)));
  p.yaw_deg = wrap_angle_deg(rad_to_deg(std::atan2(-f.x(), f.y())));
  return p;
}

}  // namespace semcal
