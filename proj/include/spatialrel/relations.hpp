#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spatialrel/geometry.hpp"

namespace spatialrel {

enum class RelationCategory : std::uint8_t {
  ObjectPosition,
  SizeComparison,
  TwoObjectPositional,
};

enum class SpatialRelation : std::uint8_t {
  // Object position in the image.
  TopLeft,
  BottomLeft,
  Left,
  TopRight,
  BottomRight,
  Right,
  Top,
  Bottom,
  Center,
  // Size comparison.
  Wider,
  Narrower,
  Taller,
  Shorter,
  Larger,
  Smaller,
  // Two-object positional.
  Surrounding,
  Inside,
  LeftOf,
  Above,
  RightOf,
  Below,
  Overlapping,
  Separated,
};

inline constexpr std::size_t kRelationCount = 23;

class ArityError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

namespace detail {

struct RelationInfo {
  SpatialRelation relation;
  RelationCategory category;
  std::string_view name;
};

inline constexpr std::array<RelationInfo, kRelationCount> kRelations{{
    {SpatialRelation::TopLeft, RelationCategory::ObjectPosition, "top left"},
    {SpatialRelation::BottomLeft, RelationCategory::ObjectPosition, "bottom left"},
    {SpatialRelation::Left, RelationCategory::ObjectPosition, "left"},
    {SpatialRelation::TopRight, RelationCategory::ObjectPosition, "top right"},
    {SpatialRelation::BottomRight, RelationCategory::ObjectPosition, "bottom right"},
    {SpatialRelation::Right, RelationCategory::ObjectPosition, "right"},
    {SpatialRelation::Top, RelationCategory::ObjectPosition, "top"},
    {SpatialRelation::Bottom, RelationCategory::ObjectPosition, "bottom"},
    {SpatialRelation::Center, RelationCategory::ObjectPosition, "center"},
    {SpatialRelation::Wider, RelationCategory::SizeComparison, "wider"},
    {SpatialRelation::Narrower, RelationCategory::SizeComparison, "narrower"},
    {SpatialRelation::Taller, RelationCategory::SizeComparison, "taller"},
    {SpatialRelation::Shorter, RelationCategory::SizeComparison, "shorter"},
    {SpatialRelation::Larger, RelationCategory::SizeComparison, "larger"},
    {SpatialRelation::Smaller, RelationCategory::SizeComparison, "smaller"},
    {SpatialRelation::Surrounding, RelationCategory::TwoObjectPositional, "surrounding"},
    {SpatialRelation::Inside, RelationCategory::TwoObjectPositional, "inside"},
    {SpatialRelation::LeftOf, RelationCategory::TwoObjectPositional, "left of"},
    {SpatialRelation::Above, RelationCategory::TwoObjectPositional, "above"},
    {SpatialRelation::RightOf, RelationCategory::TwoObjectPositional, "right of"},
    {SpatialRelation::Below, RelationCategory::TwoObjectPositional, "below"},
    {SpatialRelation::Overlapping, RelationCategory::TwoObjectPositional, "overlapping"},
    {SpatialRelation::Separated, RelationCategory::TwoObjectPositional, "separated"},
}};

constexpr const RelationInfo& info(SpatialRelation r) { return kRelations[static_cast<std::size_t>(r)]; }

struct Region {
  SpatialRelation relation;
  double x0, y0, x1, y1;
};

// Quadrants are tried before halves; the first inscribing region wins.
inline constexpr std::array<Region, 8> kRegions{{
    {SpatialRelation::TopLeft, 0.0, 0.0, 0.5, 0.5},
    {SpatialRelation::TopRight, 0.5, 0.0, 1.0, 0.5},
    {SpatialRelation::BottomLeft, 0.0, 0.5, 0.5, 1.0},
    {SpatialRelation::BottomRight, 0.5, 0.5, 1.0, 1.0},
    {SpatialRelation::Top, 0.0, 0.0, 1.0, 0.5},
    {SpatialRelation::Bottom, 0.0, 0.5, 1.0, 1.0},
    {SpatialRelation::Left, 0.0, 0.0, 0.5, 1.0},
    {SpatialRelation::Right, 0.5, 0.0, 1.0, 1.0},
}};

}  // namespace detail

constexpr RelationCategory category_of(SpatialRelation r) { return detail::info(r).category; }
constexpr std::string_view to_string(SpatialRelation r) { return detail::info(r).name; }

constexpr int arity(RelationCategory c) { return c == RelationCategory::ObjectPosition ? 1 : 2; }
constexpr int arity(SpatialRelation r) { return arity(category_of(r)); }

constexpr std::string_view to_string(RelationCategory c) {
  switch (c) {
    case RelationCategory::ObjectPosition:
      return "object_position";
    case RelationCategory::SizeComparison:
      return "size_comparison";
    case RelationCategory::TwoObjectPositional:
      return "two_object_positional";
  }
  return "";
}

inline std::optional<SpatialRelation> relation_from_string(std::string_view name) {
  for (const auto& entry : detail::kRelations) {
    if (entry.name == name) return entry.relation;
  }
  return std::nullopt;
}

inline std::optional<RelationCategory> category_from_string(std::string_view name) {
  for (auto c : {RelationCategory::ObjectPosition, RelationCategory::SizeComparison,
                 RelationCategory::TwoObjectPositional}) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

/// All relations of a category in canonical order.
inline std::vector<SpatialRelation> relations_in(RelationCategory c) {
  std::vector<SpatialRelation> out;
  for (const auto& entry : detail::kRelations) {
    if (entry.category == c) out.push_back(entry.relation);
  }
  return out;
}

/// Region of the unit square holding the box: a quadrant, else a half,
/// else the center.
inline SpatialRelation position_in_image(const NormalizedBox& nbox) {
  for (const auto& reg : detail::kRegions) {
    if (inscribed(nbox, NormalizedBox{reg.x0, reg.y0, reg.x1, reg.y1})) return reg.relation;
  }
  return SpatialRelation::Center;
}

/// Which of left of / right of / above / below the subject center falls in,
/// relative to the object center. Sectors are quarter planes split on the
/// diagonals, lower angle bound inclusive:
///   right of [-pi/4, pi/4), below [pi/4, 3pi/4), above [-3pi/4, -pi/4),
///   left of everything else.
/// Decided on exact center offsets so that swapping the boxes flips the
/// sector without rounding drift.
inline SpatialRelation direction_sector(const NormalizedBox& subject, const NormalizedBox& object) {
  const double dx = subject.center_x() - object.center_x();
  const double dy = subject.center_y() - object.center_y();
  if (dx == 0.0 && dy == 0.0) throw DegenerateAngleError("boxes share the same center");
  if (dx > 0.0 && -dx <= dy && dy < dx) return SpatialRelation::RightOf;
  if (dy > 0.0 && -dy < dx && dx <= dy) return SpatialRelation::Below;
  if (dy < 0.0 && dy <= dx && dx < -dy) return SpatialRelation::Above;
  return SpatialRelation::LeftOf;
}

inline bool holds(SpatialRelation rel, const NormalizedBox& subject, const std::optional<NormalizedBox>& object) {
  const bool binary = arity(rel) == 2;
  if (binary != object.has_value()) {
    throw ArityError("relation '" + std::string(to_string(rel)) + "' takes " + std::to_string(arity(rel)) +
                     " object(s)");
  }
  if (!binary) return position_in_image(subject) == rel;

  const NormalizedBox& other = *object;
  const auto ms = measures(subject);
  const auto mo = measures(other);
  switch (rel) {
    case SpatialRelation::Wider:
      return ms.width > mo.width;
    case SpatialRelation::Narrower:
      return ms.width < mo.width;
    case SpatialRelation::Taller:
      return ms.height > mo.height;
    case SpatialRelation::Shorter:
      return ms.height < mo.height;
    case SpatialRelation::Larger:
      return ms.area > mo.area;
    case SpatialRelation::Smaller:
      return ms.area < mo.area;
    case SpatialRelation::Inside:
      return inscribed(subject, other);
    case SpatialRelation::Surrounding:
      return inscribed(other, subject);
    case SpatialRelation::Overlapping:
      return iou(subject, other) > 0.0;
    case SpatialRelation::Separated:
      return iou(subject, other) == 0.0;
    case SpatialRelation::LeftOf:
    case SpatialRelation::RightOf:
    case SpatialRelation::Above:
    case SpatialRelation::Below:
      return direction_sector(subject, other) == rel;
    default:
      break;
  }
  throw ArityError("unhandled relation '" + std::string(to_string(rel)) + "'");
}

inline bool holds(SpatialRelation rel, const NormalizedBox& subject) { return holds(rel, subject, std::nullopt); }
inline bool holds(SpatialRelation rel, const NormalizedBox& subject, const NormalizedBox& object) {
  return holds(rel, subject, std::optional<NormalizedBox>{object});
}

inline std::vector<SpatialRelation> true_relations(RelationCategory category, const NormalizedBox& subject,
                                                   const std::optional<NormalizedBox>& object) {
  std::vector<SpatialRelation> out;
  for (auto rel : relations_in(category)) {
    if (holds(rel, subject, object)) out.push_back(rel);
  }
  return out;
}

inline std::vector<SpatialRelation> false_relations(RelationCategory category, const NormalizedBox& subject,
                                                    const std::optional<NormalizedBox>& object) {
  std::vector<SpatialRelation> out;
  for (auto rel : relations_in(category)) {
    if (!holds(rel, subject, object)) out.push_back(rel);
  }
  return out;
}

}  // namespace spatialrel
