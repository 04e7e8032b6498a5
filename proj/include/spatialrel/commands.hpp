#pragma once

// Library side of the command-line workflows. Each command reads its inputs,
// writes its outputs and returns a summary; argument parsing lives in tools/.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "spatialrel/evaluator.hpp"
#include "spatialrel/generator.hpp"
#include "spatialrel/ingest.hpp"
#include "spatialrel/rule_solver.hpp"
#include "spatialrel/verbalizer.hpp"
#include "spatialrel/vsr_lexicon.hpp"

namespace spatialrel::commands {

namespace fs = std::filesystem;

inline std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  return out;
}

// ---------------------------------------------------------------- verbalize

struct VerbalizeArgs {
  fs::path detections;
  fs::path out;
  GridConfig grid;
  VerbalizeOptions verbalize;
  double min_confidence = 0.0;
};

/// One {"image_id", "description"} line per image, in file order. Images
/// without detections get an empty description.
inline std::size_t verbalize(const VerbalizeArgs& args) {
  const auto scenes = parse_detections(args.detections, {args.min_confidence});
  auto out = open_output(args.out);
  for (const auto& scene : scenes) {
    nlohmann::ordered_json j;
    j["image_id"] = scene.image_id;
    j["description"] = scene.objects.empty() ? std::string() : scene_description(scene, args.grid, args.verbalize).text;
    out << j.dump() << '\n';
  }
  return scenes.size();
}

// ----------------------------------------------------------------- generate

struct GenerateArgs {
  fs::path detections;
  std::vector<fs::path> exclude;  // benchmark JSONL splits whose images are held out
  fs::path out_dir;
  GeneratorConfig config;
  int epochs = 1;
  std::uint64_t first_epoch = 0;
  unsigned workers = 1;
  double min_confidence = 0.0;
};

struct EpochSummary {
  std::uint64_t epoch = 0;
  fs::path file;
  ExampleStats stats;
  std::size_t skipped = 0;
  std::size_t excluded = 0;
};

inline fs::path epoch_file(const fs::path& dir, std::uint64_t epoch) {
  char name[32];
  std::snprintf(name, sizeof name, "epoch_%03llu.jsonl", static_cast<unsigned long long>(epoch));
  return dir / name;
}

inline ExclusionSet load_exclusions(const std::vector<fs::path>& files) {
  ExclusionSet out;
  for (const auto& f : files) {
    const auto split = parse_vsr(f);
    const auto ids = build_exclusion_set(split.instances, {});
    for (auto id : ids.ids()) out.insert(id);
  }
  return out;
}

inline std::vector<EpochSummary> generate(const GenerateArgs& args) {
  args.config.validate();
  if (args.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  const auto scenes = parse_detections(args.detections, {args.min_confidence});
  if (scenes.empty()) throw DataError(args.detections.string() + ": no images");
  const auto exclusion = load_exclusions(args.exclude);

  std::vector<EpochSummary> summaries;
  for (int e = 0; e < args.epochs; ++e) {
    const std::uint64_t epoch = args.first_epoch + static_cast<std::uint64_t>(e);
    const auto result = generate_epoch(scenes, exclusion, args.config, epoch, args.workers);
    EpochSummary s;
    s.epoch = epoch;
    s.file = epoch_file(args.out_dir, epoch);
    s.skipped = result.skipped.size();
    s.excluded = result.excluded;
    for (const auto& ex : result.examples) s.stats.add(ex);
    auto out = open_output(s.file);
    write_jsonl(out, result.examples);
    summaries.push_back(std::move(s));
  }
  return summaries;
}

// -------------------------------------------------------------------- solve

struct SolveArgs {
  fs::path vsr;
  fs::path detections;
  std::optional<fs::path> mapping;
  std::optional<fs::path> lexicon;
  std::uint64_t seed = 0;
  fs::path out;
  unsigned workers = 1;
  double min_confidence = 0.0;
};

struct SolveSummary {
  EvalReport report;
  std::size_t instances = 0;
  std::vector<std::string> warnings;
};

/// Predictions for every instance, in input order. Instance i draws its
/// fallback coin from a stream keyed on (seed, i).
inline std::vector<Prediction> solve_all(std::span<const VSRInstance> instances, std::span<const Scene> scenes,
                                         const SolverContext& ctx, std::uint64_t seed, unsigned workers = 1) {
  std::unordered_map<ImageId, const Scene*> by_id;
  for (const auto& s : scenes) by_id.emplace(s.image_id, &s);

  std::vector<Prediction> preds(instances.size());
  auto run = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Scene* scene = nullptr;
      try {
        if (auto it = by_id.find(image_id_from_name(instances[i].image_ref)); it != by_id.end()) scene = it->second;
      } catch (const DataError&) {
      }
      Rng rng(derive_seed(seed, i));
      preds[i] = solve(instances[i], scene, rng, ctx, i);
    }
  };
  workers = std::max(1u, workers);
  if (workers == 1 || instances.size() < 2) {
    run(0, instances.size());
  } else {
    const std::size_t chunk = (instances.size() + workers - 1) / workers;
    std::vector<std::jthread> pool;
    for (std::size_t b = 0; b < instances.size(); b += chunk) pool.emplace_back(run, b, std::min(instances.size(), b + chunk));
  }
  return preds;
}

inline SolveSummary solve(const SolveArgs& args) {
  const VsrLexicon lexicon = args.lexicon ? VsrLexicon::load_tsv(*args.lexicon) : VsrLexicon::builtin();
  const RelationMapping mapping = args.mapping ? RelationMapping::load_tsv(*args.mapping) : RelationMapping::builtin();
  auto vsr = parse_vsr(args.vsr, lexicon);
  const auto scenes = parse_detections(args.detections, {args.min_confidence});

  const SolverContext ctx{&mapping, &lexicon};
  const auto preds = solve_all(vsr.instances, scenes, ctx, args.seed, args.workers);
  auto out = open_output(args.out);
  for (const auto& p : preds) out << to_json(p).dump() << '\n';

  SolveSummary summary;
  summary.instances = vsr.instances.size();
  summary.report = evaluate(preds, vsr.instances, lexicon);
  summary.warnings = std::move(vsr.warnings);
  return summary;
}

// --------------------------------------------------------------------- eval

/// Reads prediction JSON lines and orders them by index; indices must cover
/// 0..n-1 exactly once.
inline std::vector<Prediction> read_predictions(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open file");
  std::vector<Prediction> preds;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      preds.push_back(prediction_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::sort(preds.begin(), preds.end(), [](const Prediction& a, const Prediction& b) { return a.index < b.index; });
  for (std::size_t i = 0; i < preds.size(); ++i) {
    if (preds[i].index != i) throw DataError(path.string() + ": prediction indices must be 0..n-1 without gaps");
  }
  return preds;
}

enum class OutputFormat { Json, Csv, Both };

struct EvalArgs {
  std::vector<fs::path> predictions;  // one file per run
  fs::path gold;
  fs::path out_dir;
  std::optional<fs::path> lexicon;
  OutputFormat format = OutputFormat::Both;
  std::size_t threshold = 15;
};

struct EvalSummary {
  std::vector<EvalReport> reports;
  std::map<std::string, RunAggregate> aggregate;
  std::vector<fs::path> written;
};

/// Writes report.json / relations.csv / categories.csv per run (run_<k>_
/// prefixed when several runs are given) and aggregate.{json,csv}.
inline EvalSummary eval(const EvalArgs& args) {
  if (args.predictions.empty()) throw std::invalid_argument("at least one predictions file is required");
  const VsrLexicon lexicon = args.lexicon ? VsrLexicon::load_tsv(*args.lexicon) : VsrLexicon::builtin();
  const auto gold = parse_vsr(args.gold, lexicon);

  EvalSummary summary;
  const bool json = args.format != OutputFormat::Csv;
  const bool csv = args.format != OutputFormat::Json;
  for (std::size_t k = 0; k < args.predictions.size(); ++k) {
    const auto preds = read_predictions(args.predictions[k]);
    if (preds.size() != gold.instances.size()) {
      throw DataError(args.predictions[k].string() + ": " + std::to_string(preds.size()) + " predictions for " +
                      std::to_string(gold.instances.size()) + " gold instances");
    }
    auto report = evaluate(preds, gold.instances, lexicon);
    const std::string prefix = args.predictions.size() > 1 ? "run_" + std::to_string(k) + "_" : "";
    if (json) {
      const auto path = args.out_dir / (prefix + "report.json");
      auto out = open_output(path);
      write_report(out, report, ReportFormat::Json);
      summary.written.push_back(path);
    }
    if (csv) {
      for (auto table : {ReportTable::Relations, ReportTable::Categories}) {
        const auto path = args.out_dir / (prefix + (table == ReportTable::Relations ? "relations.csv" : "categories.csv"));
        auto out = open_output(path);
        // The frequency filter applies to the per-relation table only.
        write_report(out, report, ReportFormat::Csv,
                     {table, table == ReportTable::Relations ? args.threshold : std::size_t{0}});
        summary.written.push_back(path);
      }
    }
    summary.reports.push_back(std::move(report));
  }
  summary.aggregate = aggregate_runs(summary.reports);
  if (json) {
    const auto path = args.out_dir / "aggregate.json";
    auto out = open_output(path);
    out << to_json(summary.aggregate).dump(2) << '\n';
    summary.written.push_back(path);
  }
  if (csv) {
    const auto path = args.out_dir / "aggregate.csv";
    auto out = open_output(path);
    write_aggregate_csv(out, summary.aggregate);
    summary.written.push_back(path);
  }
  return summary;
}

// -------------------------------------------------------------------- stats

struct DatasetStats {
  ExampleStats overall;
  std::map<std::string, std::size_t> per_relation;
  std::size_t images = 0;
};

/// Summary of a generated example file.
inline DatasetStats stats(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError(path.string() + ": cannot open file");
  DatasetStats s;
  std::vector<ImageId> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto ex = example_from_json(nlohmann::json::parse(line));
      s.overall.add(ex);
      ++s.per_relation[std::string(to_string(ex.relation))];
      ids.push_back(ex.image_id);
    } catch (const std::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::sort(ids.begin(), ids.end());
  s.images = static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
  return s;
}

}  // namespace spatialrel::commands
