#pragma once

#include "semcal/geometry.hpp"
#include "semcal/types.hpp"

namespace semcal {

struct RenderConfig {
  double lambda = 600.0;     // splat scale, pixel-meters: radius = lambda / depth
  double min_radius = 1.0;   // pixels
  double max_radius = 50.0;  // pixels
  ClassId background_class = ClassId::sky;

  void validate() const;
};

/// Rasterizes the cloud from the candidate pose: every non-dynamic point in
/// front of the camera becomes a filled disc of radius clamp(lambda/depth,
/// min_radius, max_radius) centered on its rounded projection, depth-tested
/// per pixel with the splat center depth. A pixel belongs to the disc when
/// its squared integer offset from the center is strictly below radius^2,
/// so a radius-1 splat covers exactly one pixel. Equal-depth conflicts keep
/// the lower point index. Uncovered pixels hold background_class.
SemanticImage render(const LabeledPointCloud& cloud, const PoseParams& pose,
                     const CameraIntrinsics& K, const RenderConfig& cfg);

/// Invalidates rendered sky pixels where the target disagrees; such pixels
/// come from cloud sparsity, not geometry, and must not feed the loss.
SemanticImage mask_spurious_sky(const SemanticImage& rendered,
                                const SemanticImage& target);

/// Returns rows [h/2, h).
SemanticImage crop_lower_half(const SemanticImage& img);

}  // namespace semcal
