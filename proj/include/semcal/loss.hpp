#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "semcal/types.hpp"

namespace semcal {

/// Per-pixel loss contribution indicator (V). Zero where either image holds
/// a class the loss must ignore.
struct ValidityMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // row-major

  std::size_t count_valid() const;
};

/// Pixel distance term: plain squared L2 or Huber with threshold delta.
struct LossTerm {
  enum class Kind { l2, huber };

  Kind kind = Kind::l2;
  double delta = 0.3;  // Huber threshold, color-space units

  static LossTerm l2() { return {Kind::l2, 0.0}; }
  static LossTerm huber(double delta) { return {Kind::huber, delta}; }
  void validate() const;
};

ValidityMask validity_mask(const SemanticImage& a, const SemanticImage& b,
                           bool sky_valid = false);

/// Normalization factor: total pixels over valid pixels.
double beta(const ValidityMask& mask);

double pixel_term(const LossTerm& term, const Eigen::Vector3d& a,
                  const Eigen::Vector3d& b);

/// Masked, normalized registration loss between a rendered view and the
/// target segmentation: beta * sum over valid pixels of the color-space
/// pixel term.
double masked_loss(const SemanticImage& rendered, const SemanticImage& target,
                   const LossTerm& term, bool sky_valid = false);

}  // namespace semcal
