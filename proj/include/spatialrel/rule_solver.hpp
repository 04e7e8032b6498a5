#pragma once

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "spatialrel/random.hpp"
#include "spatialrel/relations.hpp"
#include "spatialrel/scene.hpp"
#include "spatialrel/vsr_lexicon.hpp"

namespace spatialrel {

/// Benchmark relation phrase -> geometric relation, for the 17 phrases the
/// box rules can decide.
class RelationMapping {
 public:
  RelationMapping() = default;
  explicit RelationMapping(std::vector<std::pair<std::string, SpatialRelation>> table) : table_(std::move(table)) {}

  static const RelationMapping& builtin() {
    static const RelationMapping mapping({
        {"at the right side of", SpatialRelation::RightOf},
        {"at the left side of", SpatialRelation::LeftOf},
        {"around", SpatialRelation::Surrounding},
        {"into", SpatialRelation::Inside},
        {"on top of", SpatialRelation::Above},
        {"beneath", SpatialRelation::Below},
        {"left of", SpatialRelation::LeftOf},
        {"right of", SpatialRelation::RightOf},
        {"under", SpatialRelation::Below},
        {"below", SpatialRelation::Below},
        {"above", SpatialRelation::Above},
        {"over", SpatialRelation::Above},
        {"contains", SpatialRelation::Surrounding},
        {"within", SpatialRelation::Inside},
        {"surrounding", SpatialRelation::Surrounding},
        {"inside", SpatialRelation::Inside},
        {"outside", SpatialRelation::Separated},
    });
    return mapping;
  }

  /// Reads "benchmark relation<TAB>geometric relation" lines; '#' starts a comment.
  static RelationMapping load_tsv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path.string() + ": cannot open file");
    std::vector<std::pair<std::string, SpatialRelation>> table;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty() || line.front() == '#') continue;
      const auto tab = line.find('\t');
      const auto where = path.string() + ":" + std::to_string(line_no);
      if (tab == std::string::npos) throw DataError(where + ": expected two tab-separated columns");
      const auto rel = relation_from_string(line.substr(tab + 1));
      if (!rel) throw DataError(where + ": unknown relation '" + line.substr(tab + 1) + "'");
      table.emplace_back(line.substr(0, tab), *rel);
    }
    return RelationMapping(std::move(table));
  }

  std::optional<SpatialRelation> lookup(std::string_view vsr_relation) const {
    for (const auto& [phrase, rel] : table_) {
      if (phrase == vsr_relation) return rel;
    }
    return std::nullopt;
  }

  const std::vector<std::pair<std::string, SpatialRelation>>& table() const noexcept { return table_; }
  std::size_t size() const noexcept { return table_.size(); }

 private:
  std::vector<std::pair<std::string, SpatialRelation>> table_;
};

inline std::optional<SpatialRelation> map_relation(std::string_view vsr_relation,
                                                   const RelationMapping& mapping = RelationMapping::builtin()) {
  return mapping.lookup(vsr_relation);
}

struct ParsedCaption {
  std::string subject;
  std::string relation;
  std::string object;

  friend bool operator==(const ParsedCaption&, const ParsedCaption&) = default;
};

namespace detail {

inline std::vector<std::string> caption_words(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isspace(u)) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += static_cast<char>(std::tolower(u));
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  // Sentence punctuation hangs off the last word.
  while (!words.empty()) {
    auto& last = words.back();
    while (!last.empty() && (last.back() == '.' || last.back() == '!' || last.back() == '?')) last.pop_back();
    if (!last.empty()) break;
    words.pop_back();
  }
  return words;
}

inline bool is_article(std::string_view w) { return w == "the" || w == "a" || w == "an"; }
inline bool is_copula(std::string_view w) { return w == "is" || w == "are"; }

inline std::string join_words(const std::vector<std::string>& words, std::size_t begin, std::size_t end) {
  std::string out;
  for (std::size_t i = begin; i < end; ++i) {
    if (!out.empty()) out += ' ';
    out += words[i];
  }
  return out;
}

/// Lowercased words with leading articles removed.
inline std::string normalize_phrase(std::string_view text) {
  auto words = caption_words(text);
  std::size_t begin = 0;
  while (begin < words.size() && is_article(words[begin])) ++begin;
  return join_words(words, begin, words.size());
}

inline bool contains_words(std::string_view haystack, std::string_view needle) {
  if (needle.empty() || needle.size() > haystack.size()) return false;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + 1)) {
    const bool left_ok = pos == 0 || haystack[pos - 1] == ' ';
    const std::size_t end = pos + needle.size();
    const bool right_ok = end == haystack.size() || haystack[end] == ' ';
    if (left_ok && right_ok) return true;
  }
  return false;
}

}  // namespace detail

/// Splits "The <subject> is <relation> the <object>." around the longest
/// lexicon phrase found in the caption (earliest on equal length).
inline std::optional<ParsedCaption> parse_caption(std::string_view caption, const std::vector<std::string>& lexicon) {
  const auto words = detail::caption_words(caption);
  std::size_t best_pos = 0;
  std::size_t best_len = 0;
  std::size_t best_chars = 0;
  for (const auto& phrase : lexicon) {
    const auto rel_words = detail::caption_words(phrase);
    if (rel_words.empty() || rel_words.size() > words.size()) continue;
    for (std::size_t pos = 0; pos + rel_words.size() <= words.size(); ++pos) {
      if (!std::equal(rel_words.begin(), rel_words.end(), words.begin() + static_cast<std::ptrdiff_t>(pos))) continue;
      const bool longer = phrase.size() > best_chars;
      const bool earlier = phrase.size() == best_chars && pos < best_pos;
      if (best_len == 0 || longer || earlier) {
        best_pos = pos;
        best_len = rel_words.size();
        best_chars = phrase.size();
      }
      break;
    }
  }
  if (best_len == 0) return std::nullopt;

  std::size_t s_begin = 0;
  std::size_t s_end = best_pos;
  while (s_begin < s_end && detail::is_article(words[s_begin])) ++s_begin;
  while (s_end > s_begin && detail::is_copula(words[s_end - 1])) --s_end;
  std::size_t o_begin = best_pos + best_len;
  while (o_begin < words.size() && detail::is_article(words[o_begin])) ++o_begin;

  ParsedCaption out{detail::join_words(words, s_begin, s_end), detail::join_words(words, best_pos, best_pos + best_len),
                    detail::join_words(words, o_begin, words.size())};
  if (out.subject.empty() || out.object.empty()) return std::nullopt;
  return out;
}

inline std::optional<ParsedCaption> parse_caption(std::string_view caption,
                                                  const VsrLexicon& lexicon = VsrLexicon::builtin()) {
  return parse_caption(caption, lexicon.relations());
}

/// Finds the detection a caption phrase refers to: exact label match first,
/// then whole-word containment in either direction. Several hits resolve to
/// the largest box.
inline std::optional<std::size_t> match_object(std::string_view phrase, const Scene& scene,
                                               std::optional<std::size_t> exclude = std::nullopt) {
  const auto needle = detail::normalize_phrase(phrase);
  if (needle.empty()) return std::nullopt;

  auto best_of = [&](auto&& accept) -> std::optional<std::size_t> {
    std::optional<std::size_t> best;
    double best_area = -1.0;
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
      if (exclude && *exclude == i) continue;
      const auto label = detail::normalize_phrase(scene.objects[i].label);
      if (!accept(label)) continue;
      const double area = scene.objects[i].box.w * scene.objects[i].box.h;
      if (area > best_area) {
        best = i;
        best_area = area;
      }
    }
    return best;
  };

  if (auto hit = best_of([&](const std::string& label) { return label == needle; })) return hit;
  return best_of([&](const std::string& label) {
    return detail::contains_words(label, needle) || detail::contains_words(needle, label);
  });
}

enum class SolveMethod : std::uint8_t { Rule, Random };

enum class FailureReason : std::uint8_t {
  UnmappedRelation,
  CaptionParse,
  SubjectUnmatched,
  ObjectUnmatched,
  MissingScene,
  DegenerateGeometry,
};

inline constexpr std::string_view to_string(SolveMethod m) { return m == SolveMethod::Rule ? "rule" : "random"; }

inline constexpr std::string_view to_string(FailureReason r) {
  switch (r) {
    case FailureReason::UnmappedRelation:
      return "unmapped_relation";
    case FailureReason::CaptionParse:
      return "caption_parse";
    case FailureReason::SubjectUnmatched:
      return "subject_unmatched";
    case FailureReason::ObjectUnmatched:
      return "object_unmatched";
    case FailureReason::MissingScene:
      return "missing_scene";
    case FailureReason::DegenerateGeometry:
      return "degenerate_geometry";
  }
  return "";
}

inline constexpr FailureReason kAllFailureReasons[] = {
    FailureReason::UnmappedRelation, FailureReason::CaptionParse,  FailureReason::SubjectUnmatched,
    FailureReason::ObjectUnmatched,  FailureReason::MissingScene,  FailureReason::DegenerateGeometry,
};

inline std::optional<FailureReason> failure_reason_from_string(std::string_view s) {
  for (auto r : kAllFailureReasons) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

struct Prediction {
  std::size_t index = 0;
  bool answer = false;
  // Absent for predictions from sources that do not report how they decided.
  std::optional<SolveMethod> method;
  std::optional<FailureReason> failure_reason;

  friend bool operator==(const Prediction&, const Prediction&) = default;
};

struct SolverContext {
  const RelationMapping* mapping = &RelationMapping::builtin();
  const VsrLexicon* lexicon = &VsrLexicon::builtin();
};

/// Decides one caption by box geometry when its relation maps and both
/// objects are found; otherwise a fair coin from `rng`.
inline Prediction solve(const VSRInstance& instance, const Scene* scene, Rng& rng, const SolverContext& ctx = {},
                        std::size_t index = 0) {
  Prediction p;
  p.index = index;
  auto random = [&](FailureReason why) {
    p.method = SolveMethod::Random;
    p.failure_reason = why;
    p.answer = rng.bernoulli(0.5);
    return p;
  };

  const auto rel = ctx.mapping->lookup(instance.relation);
  if (!rel) return random(FailureReason::UnmappedRelation);
  if (!scene) return random(FailureReason::MissingScene);
  const auto parsed = parse_caption(instance.caption, *ctx.lexicon);
  if (!parsed) return random(FailureReason::CaptionParse);
  const auto subject = match_object(parsed->subject, *scene);
  if (!subject) return random(FailureReason::SubjectUnmatched);
  const auto object = match_object(parsed->object, *scene, subject);
  if (!object) return random(FailureReason::ObjectUnmatched);

  try {
    p.answer = holds(*rel, scene->normalized(*subject), scene->normalized(*object));
  } catch (const DegenerateAngleError&) {
    return random(FailureReason::DegenerateGeometry);
  }
  p.method = SolveMethod::Rule;
  p.failure_reason.reset();
  return p;
}

inline nlohmann::ordered_json to_json(const Prediction& p) {
  nlohmann::ordered_json j;
  j["index"] = p.index;
  j["answer"] = p.answer;
  j["method"] = p.method ? nlohmann::ordered_json(std::string(to_string(*p.method))) : nlohmann::ordered_json();
  j["failure_reason"] =
      p.failure_reason ? nlohmann::ordered_json(std::string(to_string(*p.failure_reason))) : nlohmann::ordered_json();
  return j;
}

inline Prediction prediction_from_json(const nlohmann::json& j) {
  Prediction p;
  p.index = j.at("index").get<std::size_t>();
  p.answer = j.at("answer").get<bool>();
  if (auto it = j.find("method"); it != j.end() && !it->is_null()) {
    const auto method = it->get<std::string>();
    if (method == "rule") {
      p.method = SolveMethod::Rule;
    } else if (method == "random") {
      p.method = SolveMethod::Random;
    } else {
      throw DataError("unknown method '" + method + "'");
    }
  }
  if (auto it = j.find("failure_reason"); it != j.end() && !it->is_null()) {
    const auto s = it->get<std::string>();
    p.failure_reason = failure_reason_from_string(s);
    if (!p.failure_reason) throw DataError("unknown failure_reason '" + s + "'");
  }
  if (p.method == SolveMethod::Rule && p.failure_reason) throw DataError("rule prediction carries a failure_reason");
  return p;
}

}  // namespace spatialrel
