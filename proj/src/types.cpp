#include "semcal/types.hpp"

#include <cmath>

namespace semcal {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0))
    throw_error(ErrorCode::invalid_argument, "intrinsics: focal lengths must be positive");
  if (width <= 0 || height <= 0)
    throw_error(ErrorCode::invalid_argument, "intrinsics: image dimensions must be positive");
  if (!(cx > 0.0 && cx < width) || !(cy > 0.0 && cy < height))
    throw_error(ErrorCode::invalid_argument, "intrinsics: principal point must lie inside the image");
}

void PoseParams::validate() const {
  for (double v : {tx, ty, tz, yaw_deg, pitch_deg})
    if (!std::isfinite(v))
      throw_error(ErrorCode::invalid_argument, "pose: all parameters must be finite");
  if (!(yaw_deg > -180.0 && yaw_deg <= 180.0))
    throw_error(ErrorCode::invalid_argument, "pose: yaw must lie in (-180, 180]");
  if (!(pitch_deg > -90.0 && pitch_deg < 90.0))
    throw_error(ErrorCode::invalid_argument, "pose: pitch must lie in (-90, 90)");
}

void LabeledPointCloud::reserve(std::size_t n) {
  points.reserve(n);
  labels.reserve(n);
}

void LabeledPointCloud::add(const Point3& p, ClassId label) {
  points.push_back(p);
  labels.push_back(label);
}

void LabeledPointCloud::add(const Point3& p, ClassId label, std::int32_t scan_id) {
  if (scan_ids.size() != points.size())
    throw_error(ErrorCode::invalid_argument, "cloud: scan ids must be tracked from the first point");
  points.push_back(p);
  labels.push_back(label);
  scan_ids.push_back(scan_id);
}

void LabeledPointCloud::append(const LabeledPointCloud& other) {
  points.insert(points.end(), other.points.begin(), other.points.end());
  labels.insert(labels.end(), other.labels.begin(), other.labels.end());
  if (has_scan_ids() && other.has_scan_ids()) {
    scan_ids.insert(scan_ids.end(), other.scan_ids.begin(), other.scan_ids.end());
  } else {
    scan_ids.clear();
  }
}

void LabeledPointCloud::validate() const {
  if (points.size() != labels.size())
    throw_error(ErrorCode::invalid_argument, "cloud: points and labels out of lockstep");
  if (!scan_ids.empty() && scan_ids.size() != points.size())
    throw_error(ErrorCode::invalid_argument, "cloud: scan ids out of lockstep");
  for (const auto& p : points)
    if (!p.allFinite())
      throw_error(ErrorCode::invalid_argument, "cloud: non-finite point coordinates");
}

SemanticImage::SemanticImage(int w, int h, ClassId fill)
    : width(w),
      height(h),
      classes(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill) {
  if (w <= 0 || h <= 0)
    throw_error(ErrorCode::invalid_argument, "image: dimensions must be positive");
}

void SemanticImage::validate() const {
  if (classes.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
    throw_error(ErrorCode::invalid_argument, "image: grid size does not match dimensions");
}

}  // namespace semcal
