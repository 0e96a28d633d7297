#include "semcal/semantics.hpp"

namespace semcal {

namespace {

constexpr std::array<std::string_view, kClassCount> kClassNames = {
    "invalid",    "road",       "sidewalk", "building",
    "fence",      "pole",       "traffic_sign", "vegetation",
    "terrain",    "sky",        "car",      "pedestrian",
    "cyclist",    "other_dynamic"};

Palette make_default_palette() {
  // Cityscapes-style colors scaled to [0,1].
  auto rgb = [](int r, int g, int b) {
    return Eigen::Vector3d(r / 255.0, g / 255.0, b / 255.0);
  };
  Palette p;
  p.colors[to_id(ClassId::invalid)] = rgb(0, 0, 0);
  p.colors[to_id(ClassId::road)] = rgb(128, 64, 128);
  p.colors[to_id(ClassId::sidewalk)] = rgb(244, 35, 232);
  p.colors[to_id(ClassId::building)] = rgb(70, 70, 70);
  p.colors[to_id(ClassId::fence)] = rgb(190, 153, 153);
  p.colors[to_id(ClassId::pole)] = rgb(153, 153, 153);
  p.colors[to_id(ClassId::traffic_sign)] = rgb(220, 220, 0);
  p.colors[to_id(ClassId::vegetation)] = rgb(107, 142, 35);
  p.colors[to_id(ClassId::terrain)] = rgb(152, 251, 152);
  p.colors[to_id(ClassId::sky)] = rgb(70, 130, 180);
  p.colors[to_id(ClassId::car)] = rgb(0, 0, 142);
  p.colors[to_id(ClassId::pedestrian)] = rgb(220, 20, 60);
  p.colors[to_id(ClassId::cyclist)] = rgb(119, 11, 32);
  p.colors[to_id(ClassId::other_dynamic)] = rgb(111, 74, 0);
  return p;
}

}  // namespace

std::optional<ClassId> class_from_id(long id) {
  if (id < 0 || id >= kClassCount) return std::nullopt;
  return static_cast<ClassId>(id);
}

std::optional<ClassId> class_from_name(std::string_view name) {
  for (int i = 0; i < kClassCount; ++i) {
    if (kClassNames[static_cast<std::size_t>(i)] == name)
      return static_cast<ClassId>(i);
  }
  return std::nullopt;
}

std::string_view class_name(ClassId c) { return kClassNames[to_id(c)]; }

bool Palette::injective_over_valid() const {
  for (int i = 1; i < kClassCount; ++i)
    for (int j = i + 1; j < kClassCount; ++j)
      if (colors[static_cast<std::size_t>(i)] ==
          colors[static_cast<std::size_t>(j)])
        return false;
  return true;
}

bool Palette::operator==(const Palette& other) const {
  for (int i = 0; i < kClassCount; ++i)
    if (colors[static_cast<std::size_t>(i)] !=
        other.colors[static_cast<std::size_t>(i)])
      return false;
  return true;
}

const Palette& default_palette() {
  static const Palette palette = make_default_palette();
  return palette;
}

}  // namespace semcal
