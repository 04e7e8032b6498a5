#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "spatialrel/generator.hpp"
#include "support/oracles.hpp"

namespace spatialrel {
namespace {

using C = RelationCategory;

std::vector<Scene> corpus(std::size_t n, std::uint64_t seed, int max_objects = 8) {
  std::mt19937_64 gen(seed);
  std::uniform_int_distribution<int> count(1, max_objects);
  std::vector<Scene> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back(testing::random_scene(gen, static_cast<ImageId>(100 + 3 * i), count(gen),
                                        {"dog", "person", "bench", "potted plant", "kite"}));
  }
  return out;
}

std::string dump(const std::vector<SyntheticExample>& v) {
  std::ostringstream out;
  write_jsonl(out, v);
  return out.str();
}

TEST(SampleExample, OneObjectSceneAsksAboutPosition) {
  std::mt19937_64 gen(1);
  GeneratorConfig cfg;
  cfg.p_two_object = 1.0;
  for (int i = 0; i < 200; ++i) {
    const auto s = testing::random_scene(gen, i, 1, {"horse"});
    Rng rng(derive_seed(3, i));
    const auto ex = sample_example(s, rng, cfg);
    ASSERT_TRUE(ex);
    EXPECT_EQ(ex->category, C::ObjectPosition);
    EXPECT_FALSE(ex->object_name);
    EXPECT_EQ(ex->description, scene_description(s, cfg.grid).text);
  }
}

TEST(SampleExample, AnswersAgreeWithGeometry) {
  GeneratorConfig cfg;
  std::size_t checked = 0;
  for (const auto& s : corpus(2000, 7)) {
    Rng rng(derive_seed(11, s.image_id));
    const auto ex = sample_example(s, rng, cfg);
    if (!ex) continue;
    const auto subject = s.normalized(ex->subject_index);
    const std::optional<NormalizedBox> object =
        ex->object_index ? std::optional<NormalizedBox>{s.normalized(*ex->object_index)} : std::nullopt;
    EXPECT_EQ(holds(ex->relation, subject, object), ex->answer);
    EXPECT_EQ(category_of(ex->relation), ex->category);
    EXPECT_EQ(ex->subject_name, s.objects[ex->subject_index].label);
    if (ex->object_index) {
      EXPECT_NE(*ex->object_index, ex->subject_index);
      EXPECT_EQ(ex->object_name, s.objects[*ex->object_index].label);
    }
    ++checked;
  }
  EXPECT_GT(checked, 1990u);
}

TEST(SampleExample, NoRetriesLeftSkips) {
  // Identical boxes: no size relation holds and the direction sector is
  // undefined, so every two-object draw with a true answer fails.
  Scene s{1, 100, 100, {{"a", {}, {10, 10, 20, 20}, {}}, {"b", {}, {10, 10, 20, 20}, {}}}};
  GeneratorConfig cfg;
  cfg.p_two_object = 1.0;
  cfg.p_negative = 0.0;
  for (int i = 0; i < 50; ++i) {
    Rng rng(derive_seed(5, i));
    EXPECT_FALSE(sample_example(s, rng, cfg));
  }
  cfg.p_two_object = 0.0;
  Rng rng(1);
  EXPECT_TRUE(sample_example(s, rng, cfg));
}

TEST(GenerateEpoch, DeterministicAndWorkerInvariant) {
  const auto scenes = corpus(300, 2);
  GeneratorConfig cfg;
  cfg.seed = 99;
  const auto a = generate_epoch(scenes, {}, cfg, 0, 1);
  const auto b = generate_epoch(scenes, {}, cfg, 0, 1);
  const auto c = generate_epoch(scenes, {}, cfg, 0, 4);
  EXPECT_EQ(dump(a.examples), dump(b.examples));
  EXPECT_EQ(dump(a.examples), dump(c.examples));
  EXPECT_EQ(a.skipped, c.skipped);
}

TEST(GenerateEpoch, EpochsAndSeedsDiffer) {
  const auto scenes = corpus(300, 2);
  GeneratorConfig cfg;
  const auto e0 = generate_epoch(scenes, {}, cfg, 0);
  const auto e1 = generate_epoch(scenes, {}, cfg, 1);
  EXPECT_NE(dump(e0.examples), dump(e1.examples));
  cfg.seed = 1;
  EXPECT_NE(dump(e0.examples), dump(generate_epoch(scenes, {}, cfg, 0).examples));
}

TEST(GenerateEpoch, OrderedByImageId) {
  auto scenes = corpus(200, 6);
  std::shuffle(scenes.begin(), scenes.end(), std::mt19937_64(1));
  const auto r = generate_epoch(scenes, {}, GeneratorConfig{}, 0, 3);
  for (std::size_t i = 1; i < r.examples.size(); ++i) EXPECT_LE(r.examples[i - 1].image_id, r.examples[i].image_id);
}

TEST(GenerateEpoch, ExcludedImagesNeverAppear) {
  const auto scenes = corpus(100, 3);
  ExclusionSet ex;
  for (std::size_t i : {5u, 50u, 99u}) ex.insert(scenes[i].image_id);
  const auto r = generate_epoch(scenes, ex, GeneratorConfig{}, 0);
  EXPECT_EQ(r.excluded, 3u);
  EXPECT_EQ(r.examples.size() + r.skipped.size(), 97u);
  for (const auto& e : r.examples) EXPECT_FALSE(ex.contains(e.image_id));
}

TEST(GenerateEpoch, ExamplesPerImageAndEmptyScenes) {
  auto scenes = corpus(50, 4);
  scenes.push_back(Scene{1, 10, 10, {}});
  GeneratorConfig cfg;
  cfg.examples_per_image = 3;
  const auto r = generate_epoch(scenes, {}, cfg, 0);
  EXPECT_NE(std::find(r.skipped.begin(), r.skipped.end(), 1), r.skipped.end());
  std::map<ImageId, int> per_image;
  for (const auto& e : r.examples) ++per_image[e.image_id];
  for (const auto& [id, n] : per_image) EXPECT_EQ(n, 3) << id;
}

TEST(GenerateEpoch, BalanceAndMix) {
  const auto scenes = corpus(20000, 12, 10);
  GeneratorConfig cfg;
  cfg.seed = 4;
  ExampleStats st;
  for (const auto& e : generate_epoch(scenes, {}, cfg, 0).examples) st.add(e);
  EXPECT_NEAR(st.yes_fraction(), 0.5, 0.02);
  // Scenes have 1..10 objects, so a tenth are forced to one-object questions.
  EXPECT_NEAR(st.two_object_fraction(), 0.7 * 0.9, 0.03);
}

TEST(GeneratorConfig, RejectsBadProbabilities) {
  GeneratorConfig cfg;
  cfg.p_negative = 1.5;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = {};
  cfg.p_two_object = -0.1;
  EXPECT_THROW(generate_epoch({}, {}, cfg, 0), std::invalid_argument);
}

TEST(ExclusionSet, UnionOfSplits) {
  std::vector<VSRInstance> dev(2), test(2);
  dev[0].image_ref = "COCO_val2014_000000000009.jpg";
  dev[1].image_ref = "000000000010.jpg";
  test[0].image_ref = "000000000010.jpg";
  test[1].image_ref = "000000397133.jpg";
  const auto ex = build_exclusion_set(dev, test);
  EXPECT_EQ(ex.ids(), (std::unordered_set<ImageId>{9, 10, 397133}));
  EXPECT_TRUE(build_exclusion_set({}, {}).empty());
  test[1].image_ref = "no-digits.jpg";
  EXPECT_THROW(build_exclusion_set(dev, test), DataError);
}

TEST(Serialization, JsonlKeysAndRoundTrip) {
  const auto r = generate_epoch(corpus(100, 8), {}, GeneratorConfig{}, 0);
  bool saw_null_object = false;
  for (const auto& ex : r.examples) {
    const auto j = to_json(ex);
    std::vector<std::string> keys;
    for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
    EXPECT_EQ(keys, (std::vector<std::string>{"question", "description", "answer", "image_id", "relation",
                                              "category", "subject", "object"}));
    saw_null_object |= j["object"].is_null();
    const auto back = example_from_json(nlohmann::json::parse(j.dump()));
    EXPECT_EQ(to_json(back).dump(), j.dump());
  }
  EXPECT_TRUE(saw_null_object);
  EXPECT_THROW(example_from_json(nlohmann::json::parse(
                   R"({"question":"q","description":"d","answer":"maybe","image_id":1,"relation":"left of",
                       "category":"two_object_positional","subject":"a","object":"b"})")),
               DataError);
}

TEST(Rng, IndexIsUniformAndBounded) {
  Rng rng(17);
  std::vector<int> hist(7, 0);
  for (int i = 0; i < 70000; ++i) ++hist[rng.index(7)];
  for (int h : hist) EXPECT_NEAR(h, 10000, 500);
  EXPECT_NE(derive_seed(1, 2, 3), derive_seed(1, 3, 2));
}

}  // namespace
}  // namespace spatialrel
