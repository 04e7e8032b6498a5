#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace spatialrel {

class GeometryError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Raised when two boxes share a center and no direction can be defined.
class DegenerateAngleError : public GeometryError {
 public:
  using GeometryError::GeometryError;
};

/// Pixel-space box as emitted by a detector: top-left corner plus extent.
struct BoundingBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double w = 0.0;
  double h = 0.0;

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Corner-form box on the unit square, y growing downward.
struct NormalizedBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  NormalizedBox() = default;
  NormalizedBox(double x0_, double y0_, double x1_, double y1_) : x0(x0_), y0(y0_), x1(x1_), y1(y1_) {
    if (!(0.0 <= x0 && x0 <= x1 && x1 <= 1.0 && 0.0 <= y0 && y0 <= y1 && y1 <= 1.0)) {
      throw GeometryError("normalized box out of range: (" + std::to_string(x0) + ", " + std::to_string(y0) +
                          ", " + std::to_string(x1) + ", " + std::to_string(y1) + ")");
    }
  }

  double center_x() const noexcept { return (x0 + x1) / 2.0; }
  double center_y() const noexcept { return (y0 + y1) / 2.0; }

  friend bool operator==(const NormalizedBox&, const NormalizedBox&) = default;
};

/// Discrete grid coordinates of a box's two corners.
struct LocationTokens {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  friend bool operator==(const LocationTokens&, const LocationTokens&) = default;
};

/// Grid resolution G. Defaults to the 32x32 grid used for all experiments.
class GridConfig {
 public:
  static constexpr int kDefaultSize = 32;

  constexpr GridConfig() = default;
  explicit GridConfig(int size) : size_(size) {
    if (size < 1) throw GeometryError("grid size must be >= 1, got " + std::to_string(size));
  }

  constexpr int size() const noexcept { return size_; }

 private:
  int size_ = kDefaultSize;
};

struct BoxMeasures {
  double width = 0.0;
  double height = 0.0;
  double area = 0.0;
};

/// Divides the corner form of `box` by the image size. Overhang past the
/// image border is clamped; a box with no area left inside the image is
/// rejected.
inline NormalizedBox normalize(const BoundingBox& box, double image_w, double image_h) {
  if (!(image_w > 0.0) || !(image_h > 0.0)) {
    throw GeometryError("image dimensions must be positive, got " + std::to_string(image_w) + "x" +
                        std::to_string(image_h));
  }
  if (!(box.w > 0.0) || !(box.h > 0.0)) {
    throw GeometryError("box extent must be positive, got w=" + std::to_string(box.w) +
                        " h=" + std::to_string(box.h));
  }
  auto unit = [](double v) { return std::clamp(v, 0.0, 1.0); };
  const double x0 = unit(box.x0 / image_w);
  const double y0 = unit(box.y0 / image_h);
  const double x1 = unit((box.x0 + box.w) / image_w);
  const double y1 = unit((box.y0 + box.h) / image_h);
  if (!(x1 > x0) || !(y1 > y0)) {
    throw GeometryError("box lies outside the image");
  }
  return {x0, y0, x1, y1};
}

/// Grid cell of one unit coordinate: floor(c * G), with c = 1 mapped to G - 1.
inline int grid_cell(double coord, const GridConfig& grid) noexcept {
  const int g = grid.size();
  const auto cell = static_cast<int>(std::floor(coord * g));
  return std::clamp(cell, 0, g - 1);
}

inline LocationTokens to_location_tokens(const NormalizedBox& nbox, const GridConfig& grid) noexcept {
  return {grid_cell(nbox.x0, grid), grid_cell(nbox.y0, grid), grid_cell(nbox.x1, grid), grid_cell(nbox.y1, grid)};
}

inline BoxMeasures measures(const NormalizedBox& b) noexcept {
  const double width = b.x1 - b.x0;
  const double height = b.y1 - b.y0;
  return {width, height, width * height};
}

/// Intersection over union. Edge-touching boxes have zero intersection.
inline double iou(const NormalizedBox& a, const NormalizedBox& b) noexcept {
  const double iw = std::max(0.0, std::min(a.x1, b.x1) - std::max(a.x0, b.x0));
  const double ih = std::max(0.0, std::min(a.y1, b.y1) - std::max(a.y0, b.y0));
  const double inter = iw * ih;
  const double uni = measures(a).area + measures(b).area - inter;
  if (uni <= 0.0) return a == b ? 1.0 : 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

/// True when `inner` lies within `outer`, boundaries included.
inline bool inscribed(const NormalizedBox& inner, const NormalizedBox& outer) noexcept {
  return inner.x0 >= outer.x0 && inner.y0 >= outer.y0 && inner.x1 <= outer.x1 && inner.y1 <= outer.y1;
}

/// Direction of the subject center seen from the reference center, in
/// image coordinates: 0 points right, -pi/2 points up.
inline double center_angle(const NormalizedBox& subject, const NormalizedBox& reference) {
  const double dx = subject.center_x() - reference.center_x();
  const double dy = subject.center_y() - reference.center_y();
  if (dx == 0.0 && dy == 0.0) throw DegenerateAngleError("boxes share the same center");
  const double theta = std::atan2(dy, dx);
  // atan2 returns -pi for (-0.0, negative dx); fold onto the closed end.
  return theta == -std::numbers::pi ? std::numbers::pi : theta;
}

}  // namespace spatialrel
