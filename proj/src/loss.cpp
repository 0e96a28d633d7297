#include "semcal/loss.hpp"

#include <cmath>
#include <numeric>

namespace semcal {

std::size_t ValidityMask::count_valid() const {
  return static_cast<std::size_t>(
      std::accumulate(bits.begin(), bits.end(), std::uint64_t{0}));
}

void LossTerm::validate() const {
  if (kind == Kind::huber && !(delta > 0.0))
    throw_error(ErrorCode::invalid_argument, "loss term: Huber delta must be positive");
}

ValidityMask validity_mask(const SemanticImage& a, const SemanticImage& b, bool sky_valid) {
  if (a.width != b.width || a.height != b.height)
    throw_error(ErrorCode::dimension_mismatch, "validity_mask: image dimensions differ");
  ValidityMask mask;
  mask.width = a.width;
  mask.height = a.height;
  mask.bits.resize(a.classes.size());
  for (std::size_t i = 0; i < a.classes.size(); ++i)
    mask.bits[i] = !is_loss_excluded(a.classes[i], sky_valid) &&
                           !is_loss_excluded(b.classes[i], sky_valid)
                       ? 1
                       : 0;
  return mask;
}

double beta(const ValidityMask& mask) {
  const std::size_t valid = mask.count_valid();
  if (valid == 0)
    throw_error(ErrorCode::no_valid_pixels, "beta: validity mask is all zero");
  return static_cast<double>(mask.bits.size()) / static_cast<double>(valid);
}

double pixel_term(const LossTerm& term, const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  const double sq = (a - b).squaredNorm();
  if (term.kind == LossTerm::Kind::l2) return sq;
  const double norm = std::sqrt(sq);
  if (norm < term.delta) return 0.5 * sq;
  return term.delta * (norm - 0.5 * term.delta);
}

double masked_loss(const SemanticImage& rendered, const SemanticImage& target,
                   const LossTerm& term, bool sky_valid) {
  term.validate();
  if (!(rendered.palette == target.palette))
    throw_error(ErrorCode::invalid_argument, "masked_loss: images use different palettes");
  const ValidityMask mask = validity_mask(rendered, target, sky_valid);
  const double norm = beta(mask);

  const Palette& palette = rendered.palette;
  double sum = 0.0;
  for (std::size_t i = 0; i < mask.bits.size(); ++i) {
    if (!mask.bits[i]) continue;
    const ClassId ca = rendered.classes[i];
    const ClassId cb = target.classes[i];
    if (ca == cb) continue;  // identical colors contribute exactly zero
    sum += pixel_term(term, palette.color(ca), palette.color(cb));
  }
  return norm * sum;
}

}  // namespace semcal
