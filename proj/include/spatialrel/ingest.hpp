#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "spatialrel/geometry.hpp"
#include "spatialrel/scene.hpp"
#include "spatialrel/vsr_lexicon.hpp"

namespace spatialrel {

namespace detail {

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open file");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline std::size_t line_of_offset(std::string_view text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
}

}  // namespace detail

/// Trailing integer of a COCO-style file name ("COCO_val2014_000000397133.jpg"
/// -> 397133), or a bare integer.
inline ImageId image_id_from_name(std::string_view name) {
  std::string_view stem = name;
  if (const auto slash = stem.find_last_of("/\\"); slash != std::string_view::npos) stem.remove_prefix(slash + 1);
  if (const auto dot = stem.find_last_of('.'); dot != std::string_view::npos && dot > 0) stem = stem.substr(0, dot);
  std::size_t begin = stem.size();
  while (begin > 0 && std::isdigit(static_cast<unsigned char>(stem[begin - 1]))) --begin;
  if (begin == stem.size()) throw DataError("no image id in '" + std::string(name) + "'");
  auto digits = stem.substr(begin);
  while (digits.size() > 1 && digits.front() == '0') digits.remove_prefix(1);
  if (digits.size() > 18) throw DataError("image id too long in '" + std::string(name) + "'");
  return std::stoll(std::string(digits));
}

struct DetectionParseOptions {
  // Objects with a confidence below this are dropped; objects without one are kept.
  double min_confidence = 0.0;
};

/// Parses the detection schema:
///   [{"image_id": int|string, "width": w, "height": h,
///     "objects": [{"label": str, "attributes": [str...], "bbox": [x, y, w, h],
///                  "confidence": c?}]}]
inline std::vector<Scene> parse_detections_text(std::string_view text, std::string_view source = "<memory>",
                                                const DetectionParseOptions& opts = {}) {
  using nlohmann::json;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string(source) + ":" + std::to_string(detail::line_of_offset(text, e.byte)) +
                    ": malformed JSON: " + e.what());
  }
  if (!doc.is_array()) throw DataError(std::string(source) + ": top level must be an array of images");

  std::vector<Scene> scenes;
  scenes.reserve(doc.size());
  for (std::size_t i = 0; i < doc.size(); ++i) {
    const auto& entry = doc[i];
    std::string where = std::string(source) + ": entry " + std::to_string(i);
    try {
      if (!entry.is_object()) throw DataError("entry is not an object");
      Scene scene;
      const auto& id = entry.at("image_id");
      scene.image_id = id.is_string() ? image_id_from_name(id.get<std::string>()) : id.get<ImageId>();
      where += " (image " + std::to_string(scene.image_id) + ")";
      scene.width = entry.at("width").get<double>();
      scene.height = entry.at("height").get<double>();
      if (!(scene.width > 0.0) || !(scene.height > 0.0)) {
        throw DataError("non-positive image size " + std::to_string(scene.width) + "x" +
                        std::to_string(scene.height));
      }
      const auto& objects = entry.at("objects");
      if (!objects.is_array()) throw DataError("'objects' must be an array");
      for (std::size_t k = 0; k < objects.size(); ++k) {
        const auto& o = objects[k];
        try {
          DetectedObject obj;
          obj.label = o.at("label").get<std::string>();
          if (obj.label.empty()) throw DataError("empty label");
          if (auto it = o.find("attributes"); it != o.end() && !it->is_null()) {
            obj.attributes = it->get<std::vector<std::string>>();
          }
          const auto bbox = o.at("bbox").get<std::vector<double>>();
          if (bbox.size() != 4) throw DataError("bbox must have 4 numbers");
          obj.box = {bbox[0], bbox[1], bbox[2], bbox[3]};
          if (obj.box.x0 < 0.0 || obj.box.y0 < 0.0) throw DataError("bbox has a negative corner");
          normalize(obj.box, scene.width, scene.height);
          if (auto it = o.find("confidence"); it != o.end() && !it->is_null()) {
            obj.confidence = it->get<double>();
          }
          if (obj.confidence && *obj.confidence < opts.min_confidence) continue;
          scene.objects.push_back(std::move(obj));
        } catch (const std::exception& e) {
          throw DataError("object " + std::to_string(k) + ": " + e.what());
        }
      }
      scenes.push_back(std::move(scene));
    } catch (const std::exception& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return scenes;
}

inline std::vector<Scene> parse_detections(const std::filesystem::path& path, const DetectionParseOptions& opts = {}) {
  return parse_detections_text(detail::read_file(path), path.string(), opts);
}

inline nlohmann::ordered_json scenes_to_json(const std::vector<Scene>& scenes) {
  auto doc = nlohmann::ordered_json::array();
  for (const auto& scene : scenes) {
    nlohmann::ordered_json entry;
    entry["image_id"] = scene.image_id;
    entry["width"] = scene.width;
    entry["height"] = scene.height;
    entry["objects"] = nlohmann::ordered_json::array();
    for (const auto& obj : scene.objects) {
      nlohmann::ordered_json o;
      o["label"] = obj.label;
      o["attributes"] = obj.attributes;
      o["bbox"] = {obj.box.x0, obj.box.y0, obj.box.w, obj.box.h};
      if (obj.confidence) o["confidence"] = *obj.confidence;
      entry["objects"].push_back(std::move(o));
    }
    doc.push_back(std::move(entry));
  }
  return doc;
}

inline constexpr int kDetectionSchemaVersion = 1;

/// Adapter from some detector's raw dump to scenes. Implement this to feed
/// another detector's output; NativeDetections reads the documented schema.
class DetectionConverter {
 public:
  virtual ~DetectionConverter() = default;
  virtual std::vector<Scene> convert(const std::filesystem::path& path, const DetectionParseOptions& opts) const = 0;
};

class NativeDetections final : public DetectionConverter {
 public:
  std::vector<Scene> convert(const std::filesystem::path& path, const DetectionParseOptions& opts) const override {
    return parse_detections(path, opts);
  }
};

struct VsrFile {
  std::vector<VSRInstance> instances;
  std::vector<std::string> warnings;
};

/// Parses benchmark JSON lines with keys image, image_link, caption, label,
/// relation. Row errors are collected and reported together.
inline VsrFile parse_vsr_text(std::string_view text, std::string_view source = "<memory>",
                              const VsrLexicon& lexicon = VsrLexicon::builtin()) {
  using nlohmann::json;
  VsrFile out;
  std::vector<std::string> errors;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.remove_suffix(1);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    const std::string where = std::string(source) + ":" + std::to_string(line_no);
    try {
      const auto row = json::parse(line);
      VSRInstance inst;
      inst.image_ref = row.at("image").get<std::string>();
      if (auto it = row.find("image_link"); it != row.end() && it->is_string()) inst.image_link = it->get<std::string>();
      inst.caption = row.at("caption").get<std::string>();
      const auto& label = row.at("label");
      if (label.is_boolean()) {
        inst.label = label.get<bool>();
      } else {
        const auto v = label.get<int>();
        if (v != 0 && v != 1) throw DataError("label must be 0 or 1");
        inst.label = v == 1;
      }
      inst.relation = row.at("relation").get<std::string>();
      inst.relation_known = lexicon.contains(inst.relation);
      if (!inst.relation_known) out.warnings.push_back(where + ": unknown relation '" + inst.relation + "'");
      out.instances.push_back(std::move(inst));
    } catch (const std::exception& e) {
      errors.push_back(where + ": " + e.what());
    }
    if (end == text.size()) break;
  }
  if (!errors.empty()) {
    std::ostringstream msg;
    msg << errors.size() << " malformed row(s):";
    for (const auto& e : errors) msg << "\n  " << e;
    throw DataError(msg.str());
  }
  return out;
}

inline VsrFile parse_vsr(const std::filesystem::path& path, const VsrLexicon& lexicon = VsrLexicon::builtin()) {
  return parse_vsr_text(detail::read_file(path), path.string(), lexicon);
}

}  // namespace spatialrel
