#pragma once

#include <charconv>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "spatialrel/geometry.hpp"
#include "spatialrel/relations.hpp"
#include "spatialrel/scene.hpp"

namespace spatialrel {

struct VerbalizeOptions {
  bool locations = true;
  bool attributes = false;
  std::string separator = " . ";
};

/// Space-separated tokens for one object: "x0 y0 x1 y1 [attrs...] name".
struct ObjectPhrase {
  std::vector<std::string> tokens;

  std::string text() const {
    std::string out;
    for (const auto& t : tokens) {
      if (!out.empty()) out += ' ';
      out += t;
    }
    return out;
  }
};

struct SceneDescription {
  std::string text;
  std::size_t object_count = 0;
};

class EmptySceneError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class PhraseParseError : public std::runtime_error {
 public:
  PhraseParseError(const std::string& what, std::size_t position)
      : std::runtime_error(what + " at offset " + std::to_string(position)), position_(position) {}
  std::size_t position() const noexcept { return position_; }

 private:
  std::size_t position_;
};

/// Result of reading a phrase back: location tokens (when present) and the
/// remaining words as the name.
struct ParsedPhrase {
  std::optional<LocationTokens> tokens;
  std::string name;
};

namespace detail {

inline void split_words(std::string_view text, std::vector<std::string>& out) {
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) out.emplace_back(text.substr(i, j - i));
    i = j;
  }
}

}  // namespace detail

inline ObjectPhrase object_phrase(const DetectedObject& obj, double image_w, double image_h, const GridConfig& grid,
                                  const VerbalizeOptions& opts = {}) {
  if (obj.label.empty()) throw std::invalid_argument("object label is empty");
  ObjectPhrase phrase;
  if (opts.locations) {
    const auto t = to_location_tokens(normalize(obj.box, image_w, image_h), grid);
    for (int v : {t.x0, t.y0, t.x1, t.y1}) phrase.tokens.push_back(std::to_string(v));
  }
  if (opts.attributes) {
    for (const auto& a : obj.attributes) detail::split_words(a, phrase.tokens);
  }
  detail::split_words(obj.label, phrase.tokens);
  return phrase;
}

inline SceneDescription scene_description(const Scene& scene, const GridConfig& grid,
                                          const VerbalizeOptions& opts = {}) {
  if (scene.objects.empty()) {
    throw EmptySceneError("image " + std::to_string(scene.image_id) + " has no detected objects");
  }
  SceneDescription out;
  for (const auto& obj : scene.objects) {
    if (out.object_count > 0) out.text += opts.separator;
    out.text += object_phrase(obj, scene.width, scene.height, grid, opts).text();
    ++out.object_count;
  }
  return out;
}

/// Question for a relation, from the fixed per-category templates.
inline std::string render_question(SpatialRelation rel, std::string_view subject,
                                   std::optional<std::string_view> object = std::nullopt) {
  const bool binary = arity(rel) == 2;
  if (binary != object.has_value()) {
    throw ArityError("relation '" + std::string(to_string(rel)) + "' takes " + std::to_string(arity(rel)) +
                     " object(s)");
  }
  const std::string s(subject);
  const std::string r(to_string(rel));
  switch (category_of(rel)) {
    case RelationCategory::ObjectPosition:
      return "is " + s + " in " + r + " region?";
    case RelationCategory::SizeComparison:
      return "is " + s + " " + r + " than " + std::string(*object) + "?";
    case RelationCategory::TwoObjectPositional:
      if (rel == SpatialRelation::Separated) return "are " + s + " and " + std::string(*object) + " separated?";
      return "is " + s + " " + r + " " + std::string(*object) + "?";
  }
  return {};
}

/// Reads a phrase produced by object_phrase. With locations expected, the
/// first four words must be grid indices; everything after them is the name.
inline ParsedPhrase parse_object_phrase(std::string_view text, const GridConfig& grid, bool expect_locations = true) {
  struct Word {
    std::string_view text;
    std::size_t offset;
  };
  std::vector<Word> words;
  for (std::size_t i = 0; i < text.size();) {
    while (i < text.size() && text[i] == ' ') ++i;
    std::size_t j = i;
    while (j < text.size() && text[j] != ' ') ++j;
    if (j > i) words.push_back({text.substr(i, j - i), i});
    i = j;
  }

  ParsedPhrase out;
  std::size_t first_name_word = 0;
  if (expect_locations) {
    if (words.size() < 5) {
      throw PhraseParseError("expected four location tokens and a name", words.empty() ? 0 : words.back().offset);
    }
    int v[4];
    for (int k = 0; k < 4; ++k) {
      const auto& w = words[k];
      auto [ptr, ec] = std::from_chars(w.text.data(), w.text.data() + w.text.size(), v[k]);
      if (ec != std::errc{} || ptr != w.text.data() + w.text.size()) {
        throw PhraseParseError("location token '" + std::string(w.text) + "' is not an integer", w.offset);
      }
      if (v[k] < 0 || v[k] >= grid.size()) {
        throw PhraseParseError("location token " + std::to_string(v[k]) + " outside grid of size " +
                                   std::to_string(grid.size()),
                               w.offset);
      }
    }
    if (v[0] > v[2] || v[1] > v[3]) throw PhraseParseError("location corners out of order", words[0].offset);
    out.tokens = LocationTokens{v[0], v[1], v[2], v[3]};
    first_name_word = 4;
  } else if (words.empty()) {
    throw PhraseParseError("empty phrase", 0);
  }

  for (std::size_t k = first_name_word; k < words.size(); ++k) {
    if (!out.name.empty()) out.name += ' ';
    out.name += words[k].text;
  }
  return out;
}

/// Splits a scene description back into its phrases.
inline std::vector<std::string> split_scene_description(std::string_view text, std::string_view separator = " . ") {
  std::vector<std::string> out;
  if (text.empty()) return out;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(separator, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(text.substr(start));
      break;
    }
    out.emplace_back(text.substr(start, pos - start));
    start = pos + separator.size();
  }
  return out;
}

}  // namespace spatialrel
