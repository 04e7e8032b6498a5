#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "spatialrel/ingest.hpp"
#include "spatialrel/random.hpp"
#include "spatialrel/relations.hpp"
#include "spatialrel/scene.hpp"
#include "spatialrel/verbalizer.hpp"

namespace spatialrel {

/// One synthetic question / scene description / answer triple.
struct SyntheticExample {
  std::string question;
  std::string description;
  bool answer = false;
  ImageId image_id = 0;
  SpatialRelation relation = SpatialRelation::Center;
  RelationCategory category = RelationCategory::ObjectPosition;
  std::string subject_name;
  std::optional<std::string> object_name;
  // Detection indices within the source scene; not serialized.
  std::size_t subject_index = 0;
  std::optional<std::size_t> object_index;
};

struct GeneratorConfig {
  GridConfig grid;
  double p_two_object = 0.7;
  double p_negative = 0.5;
  int examples_per_image = 1;
  VerbalizeOptions verbalize;
  std::uint64_t seed = 0;
  int max_retries = 8;

  void validate() const {
    auto prob = [](double p, const char* name) {
      if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument(std::string(name) + " must be in [0, 1]");
    };
    prob(p_two_object, "p_two_object");
    prob(p_negative, "p_negative");
    if (examples_per_image < 0) throw std::invalid_argument("examples_per_image must be >= 0");
    if (max_retries < 0) throw std::invalid_argument("max_retries must be >= 0");
  }
};

/// Image ids that must never contribute training examples.
class ExclusionSet {
 public:
  ExclusionSet() = default;
  explicit ExclusionSet(std::unordered_set<ImageId> ids) : ids_(std::move(ids)) {}

  void insert(ImageId id) { ids_.insert(id); }
  bool contains(ImageId id) const { return ids_.contains(id); }
  std::size_t size() const noexcept { return ids_.size(); }
  bool empty() const noexcept { return ids_.empty(); }
  const std::unordered_set<ImageId>& ids() const noexcept { return ids_; }

 private:
  std::unordered_set<ImageId> ids_;
};

/// Union of the image ids referenced by the dev and test splits.
inline ExclusionSet build_exclusion_set(std::span<const VSRInstance> dev, std::span<const VSRInstance> test) {
  ExclusionSet out;
  std::vector<std::string> bad;
  auto absorb = [&](std::span<const VSRInstance> split, const char* name) {
    for (std::size_t i = 0; i < split.size(); ++i) {
      try {
        out.insert(image_id_from_name(split[i].image_ref));
      } catch (const DataError&) {
        bad.push_back(std::string(name) + " row " + std::to_string(i) + ": '" + split[i].image_ref + "'");
      }
    }
  };
  absorb(dev, "dev");
  absorb(test, "test");
  if (!bad.empty()) {
    std::string msg = "unresolvable image references:";
    for (const auto& b : bad) msg += "\n  " + b;
    throw DataError(msg);
  }
  return out;
}

namespace detail {

inline std::optional<SyntheticExample> sample_with_description(const Scene& scene,
                                                               std::span<const NormalizedBox> boxes,
                                                               const std::string& description, Rng& rng,
                                                               const GeneratorConfig& cfg) {
  const std::size_t n = scene.objects.size();
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    RelationCategory category = RelationCategory::ObjectPosition;
    if (n >= 2 && rng.bernoulli(cfg.p_two_object)) {
      category = rng.bernoulli(0.5) ? RelationCategory::SizeComparison : RelationCategory::TwoObjectPositional;
    }

    const std::size_t subject = rng.index(n);
    std::optional<std::size_t> object;
    if (arity(category) == 2) {
      std::size_t other = rng.index(n - 1);
      if (other >= subject) ++other;
      object = other;
    }
    const std::optional<NormalizedBox> object_box =
        object ? std::optional<NormalizedBox>{boxes[*object]} : std::nullopt;

    const bool negative = rng.bernoulli(cfg.p_negative);
    std::vector<SpatialRelation> candidates;
    try {
      candidates = negative ? false_relations(category, boxes[subject], object_box)
                            : true_relations(category, boxes[subject], object_box);
    } catch (const DegenerateAngleError&) {
      continue;
    }
    if (candidates.empty()) continue;

    SyntheticExample ex;
    ex.relation = candidates[rng.index(candidates.size())];
    ex.category = category;
    ex.answer = !negative;
    ex.image_id = scene.image_id;
    ex.subject_index = subject;
    ex.object_index = object;
    ex.subject_name = scene.objects[subject].label;
    if (object) ex.object_name = scene.objects[*object].label;
    ex.question = render_question(ex.relation, ex.subject_name,
                                  ex.object_name ? std::optional<std::string_view>{*ex.object_name} : std::nullopt);
    ex.description = description;
    return ex;
  }
  return std::nullopt;
}

inline std::vector<NormalizedBox> normalized_boxes(const Scene& scene) {
  std::vector<NormalizedBox> boxes;
  boxes.reserve(scene.objects.size());
  for (std::size_t i = 0; i < scene.objects.size(); ++i) boxes.push_back(scene.normalized(i));
  return boxes;
}

}  // namespace detail

/// Draws one example: category, objects, polarity, then relation. Returns
/// nullopt when every retry hit an empty relation set or coincident centers;
/// the caller should skip the image.
inline std::optional<SyntheticExample> sample_example(const Scene& scene, Rng& rng, const GeneratorConfig& cfg) {
  const auto description = scene_description(scene, cfg.grid, cfg.verbalize);
  const auto boxes = detail::normalized_boxes(scene);
  return detail::sample_with_description(scene, boxes, description.text, rng, cfg);
}

struct EpochResult {
  std::vector<SyntheticExample> examples;
  std::vector<ImageId> skipped;  // images that could not yield a verifiable example
  std::size_t excluded = 0;
};

/// Examples for one epoch, ordered by image id. Each image draws from its own
/// stream keyed on (seed, epoch, image id), so the output does not depend on
/// `workers`.
inline EpochResult generate_epoch(std::span<const Scene> corpus, const ExclusionSet& exclusion,
                                  const GeneratorConfig& cfg, std::uint64_t epoch, unsigned workers = 1) {
  cfg.validate();
  EpochResult result;
  std::vector<std::size_t> order;
  order.reserve(corpus.size());
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    if (exclusion.contains(corpus[i].image_id)) {
      ++result.excluded;
    } else {
      order.push_back(i);
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return corpus[a].image_id < corpus[b].image_id; });

  struct Slot {
    std::vector<SyntheticExample> examples;
    bool skipped = false;
  };
  std::vector<Slot> slots(order.size());

  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      const Scene& scene = corpus[order[k]];
      Slot& slot = slots[k];
      if (scene.objects.empty()) {
        slot.skipped = true;
        continue;
      }
      Rng rng(derive_seed(cfg.seed, epoch, scene.image_id));
      const auto description = scene_description(scene, cfg.grid, cfg.verbalize);
      const auto boxes = detail::normalized_boxes(scene);
      for (int e = 0; e < cfg.examples_per_image; ++e) {
        auto ex = detail::sample_with_description(scene, boxes, description.text, rng, cfg);
        if (!ex) {
          slot.skipped = true;
          break;
        }
        slot.examples.push_back(std::move(*ex));
      }
    }
  };

  workers = std::max(1u, workers);
  if (workers == 1 || order.size() < 2) {
    run(0, order.size());
  } else {
    const std::size_t chunk = (order.size() + workers - 1) / workers;
    std::vector<std::jthread> pool;
    for (std::size_t begin = 0; begin < order.size(); begin += chunk) {
      pool.emplace_back(run, begin, std::min(order.size(), begin + chunk));
    }
  }

  for (std::size_t k = 0; k < slots.size(); ++k) {
    if (slots[k].skipped) result.skipped.push_back(corpus[order[k]].image_id);
    for (auto& ex : slots[k].examples) result.examples.push_back(std::move(ex));
  }
  return result;
}

inline nlohmann::ordered_json to_json(const SyntheticExample& ex) {
  nlohmann::ordered_json j;
  j["question"] = ex.question;
  j["description"] = ex.description;
  j["answer"] = ex.answer ? "yes" : "no";
  j["image_id"] = ex.image_id;
  j["relation"] = std::string(to_string(ex.relation));
  j["category"] = std::string(to_string(ex.category));
  j["subject"] = ex.subject_name;
  j["object"] = ex.object_name ? nlohmann::ordered_json(*ex.object_name) : nlohmann::ordered_json(nullptr);
  return j;
}

/// Reads one serialized example. Detection indices are not recoverable.
inline SyntheticExample example_from_json(const nlohmann::json& j) {
  SyntheticExample ex;
  ex.question = j.at("question").get<std::string>();
  ex.description = j.at("description").get<std::string>();
  const auto answer = j.at("answer").get<std::string>();
  if (answer != "yes" && answer != "no") throw DataError("answer must be 'yes' or 'no', got '" + answer + "'");
  ex.answer = answer == "yes";
  ex.image_id = j.at("image_id").get<ImageId>();
  const auto rel = j.at("relation").get<std::string>();
  const auto parsed_rel = relation_from_string(rel);
  if (!parsed_rel) throw DataError("unknown relation '" + rel + "'");
  ex.relation = *parsed_rel;
  const auto cat = j.at("category").get<std::string>();
  const auto parsed_cat = category_from_string(cat);
  if (!parsed_cat) throw DataError("unknown category '" + cat + "'");
  ex.category = *parsed_cat;
  ex.subject_name = j.at("subject").get<std::string>();
  if (const auto& o = j.at("object"); !o.is_null()) ex.object_name = o.get<std::string>();
  return ex;
}

inline void write_jsonl(std::ostream& out, std::span<const SyntheticExample> examples) {
  for (const auto& ex : examples) out << to_json(ex).dump() << '\n';
}

/// Yes share and category mix of a batch of examples.
struct ExampleStats {
  std::size_t total = 0;
  std::size_t yes = 0;
  std::size_t per_category[3] = {0, 0, 0};

  void add(const SyntheticExample& ex) {
    ++total;
    if (ex.answer) ++yes;
    ++per_category[static_cast<std::size_t>(ex.category)];
  }
  double yes_fraction() const { return total ? static_cast<double>(yes) / static_cast<double>(total) : 0.0; }
  double two_object_fraction() const {
    if (!total) return 0.0;
    return static_cast<double>(total - per_category[0]) / static_cast<double>(total);
  }
};

}  // namespace spatialrel
