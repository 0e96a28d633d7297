#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include <Eigen/Core>

namespace semcal {

/// Canonical semantic classes shared by point clouds and label images.
/// Ids >= 10 are dynamic; invalid and sky never contribute to the loss.
enum class ClassId : std::uint8_t {
  invalid = 0,
  road = 1,
  sidewalk = 2,
  building = 3,
  fence = 4,
  pole = 5,
  traffic_sign = 6,
  vegetation = 7,
  terrain = 8,
  sky = 9,
  car = 10,
  pedestrian = 11,
  cyclist = 12,
  other_dynamic = 13,
};

inline constexpr int kClassCount = 14;
inline constexpr std::uint8_t kFirstDynamicId = 10;

constexpr std::uint8_t to_id(ClassId c) { return static_cast<std::uint8_t>(c); }

constexpr bool is_dynamic(ClassId c) { return to_id(c) >= kFirstDynamicId; }

/// True when the class is ignored by the registration loss. Sky can be
/// declared a valid contributor for scenes with reliable sky labels.
constexpr bool is_loss_excluded(ClassId c, bool sky_valid = false) {
  return c == ClassId::invalid || (!sky_valid && c == ClassId::sky) ||
         is_dynamic(c);
}

std::optional<ClassId> class_from_id(long id);
std::optional<ClassId> class_from_name(std::string_view name);
std::string_view class_name(ClassId c);

/// Color per class, components in [0,1]. Must be injective over the
/// non-invalid classes so distinct labels keep a nonzero loss distance.
struct Palette {
  std::array<Eigen::Vector3d, kClassCount> colors{};

  const Eigen::Vector3d& color(ClassId c) const { return colors[to_id(c)]; }
  bool injective_over_valid() const;
  bool operator==(const Palette& other) const;
};

const Palette& default_palette();

}  // namespace semcal
