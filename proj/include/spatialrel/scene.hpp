#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spatialrel/geometry.hpp"

namespace spatialrel {

using ImageId = std::int64_t;

/// Malformed or schema-violating input data.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DetectedObject {
  std::string label;
  std::vector<std::string> attributes;
  BoundingBox box;
  std::optional<double> confidence;

  friend bool operator==(const DetectedObject&, const DetectedObject&) = default;
};

/// One image and its detections, in detector order.
struct Scene {
  ImageId image_id = 0;
  double width = 0.0;
  double height = 0.0;
  std::vector<DetectedObject> objects;

  NormalizedBox normalized(std::size_t index) const { return normalize(objects.at(index).box, width, height); }

  friend bool operator==(const Scene&, const Scene&) = default;
};

/// One benchmark caption with its truth label.
struct VSRInstance {
  std::string image_ref;
  std::string image_link;
  std::string caption;
  bool label = false;
  std::string relation;
  // False when `relation` is not in the loaded relation lexicon.
  bool relation_known = true;
};

}  // namespace spatialrel
