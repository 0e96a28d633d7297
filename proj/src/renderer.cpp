#include "semcal/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace semcal {

void RenderConfig::validate() const {
  if (!(lambda > 0.0))
    throw_error(ErrorCode::invalid_argument, "render config: lambda must be positive");
  if (!(min_radius >= 1.0) || !(max_radius >= min_radius))
    throw_error(ErrorCode::invalid_argument,
                "render config: need 1 <= min_radius <= max_radius");
}

SemanticImage render(const LabeledPointCloud& cloud, const PoseParams& pose,
                     const CameraIntrinsics& K, const RenderConfig& cfg) {
  K.validate();
  cfg.validate();

  const ExtrinsicMatrix extrinsic = pose_to_extrinsic(pose);
  const int w = K.width;
  const int h = K.height;
  SemanticImage img(w, h, cfg.background_class);
  std::vector<double> depth_buf(static_cast<std::size_t>(w) * h,
                                std::numeric_limits<double>::infinity());

  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const ClassId label = cloud.labels[i];
    if (is_dynamic(label)) continue;

    const auto proj = project(K, extrinsic, cloud.points[i]);
    if (!proj) continue;

    const double r = std::clamp(cfg.lambda / proj->depth, cfg.min_radius, cfg.max_radius);
    if (proj->u < -r || proj->u > (w - 1) + r || proj->v < -r || proj->v > (h - 1) + r)
      continue;

    const int cu = static_cast<int>(std::lround(proj->u));
    const int cv = static_cast<int>(std::lround(proj->v));
    const double r_sq = r * r;
    const int reach = static_cast<int>(std::ceil(r)) - 1;

    const int y0 = std::max(cv - reach, 0);
    const int y1 = std::min(cv + reach, h - 1);
    const int x0 = std::max(cu - reach, 0);
    const int x1 = std::min(cu + reach, w - 1);
    for (int y = y0; y <= y1; ++y) {
      const double dy_sq = static_cast<double>(y - cv) * (y - cv);
      const std::size_t row = static_cast<std::size_t>(y) * w;
      for (int x = x0; x <= x1; ++x) {
        const double dx = x - cu;
        if (dx * dx + dy_sq >= r_sq) continue;
        const std::size_t idx = row + x;
        if (proj->depth < depth_buf[idx]) {
          depth_buf[idx] = proj->depth;
          img.classes[idx] = label;
        }
      }
    }
  }
  return img;
}

SemanticImage mask_spurious_sky(const SemanticImage& rendered, const SemanticImage& target) {
  if (rendered.width != target.width || rendered.height != target.height)
    throw_error(ErrorCode::dimension_mismatch, "mask_spurious_sky: image dimensions differ");
  SemanticImage out = rendered;
  for (std::size_t i = 0; i < out.classes.size(); ++i) {
    if (out.classes[i] == ClassId::sky && target.classes[i] != ClassId::sky)
      out.classes[i] = ClassId::invalid;
  }
  return out;
}

SemanticImage crop_lower_half(const SemanticImage& img) {
  if (img.height < 2)
    throw_error(ErrorCode::invalid_argument, "crop_lower_half: image height must be at least 2");
  const int top = img.height / 2;
  SemanticImage out(img.width, img.height - top, ClassId::invalid);
  out.palette = img.palette;
  std::copy(img.classes.begin() + static_cast<std::ptrdiff_t>(top) * img.width,
            img.classes.end(), out.classes.begin());
  return out;
}

}  // namespace semcal
