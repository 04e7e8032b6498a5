#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "spatialrel/commands.hpp"

namespace {

namespace cmd = spatialrel::commands;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct Common {
  int grid = spatialrel::GridConfig::kDefaultSize;
  bool no_locations = false;
  bool attributes = false;
  double min_confidence = 0.0;
};

void add_verbalize_flags(CLI::App* sub, Common& c) {
  sub->add_option("--grid", c.grid, "Grid resolution G")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_flag("--no-locations", c.no_locations, "Describe objects by name only");
  sub->add_flag("--attributes", c.attributes, "Put detector attributes before each name");
  sub->add_option("--min-confidence", c.min_confidence, "Drop detections below this confidence")
      ->capture_default_str();
}

spatialrel::VerbalizeOptions verbalize_options(const Common& c) {
  spatialrel::VerbalizeOptions o;
  o.locations = !c.no_locations;
  o.attributes = c.attributes;
  return o;
}

cmd::OutputFormat parse_format(const std::string& s) {
  if (s == "json") return cmd::OutputFormat::Json;
  if (s == "csv") return cmd::OutputFormat::Csv;
  return cmd::OutputFormat::Both;
}

void print_coverage(const spatialrel::EvalReport& r) {
  std::printf("instances:        %zu\n", r.total);
  if (r.rule_coverage) {
    const auto& c = *r.rule_coverage;
    std::printf("mappable:         %.2f%%\n", 100.0 * c.mappable_fraction);
    std::printf("solved by rules:  %.2f%% (%zu)\n", 100.0 * c.solved_fraction, c.solved);
    std::printf("rule accuracy:    %.2f\n", 100.0 * c.solved_accuracy);
    for (const auto& [reason, n] : c.failures) std::printf("  random/%-20s %zu\n", reason.c_str(), n);
  }
  std::printf("overall accuracy: %.2f\n", 100.0 * r.overall_accuracy);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Location-token scene descriptions, synthetic spatial QA generation and rule-based solving"};
  app.require_subcommand(1);

  Common common;
  unsigned workers = std::max(1u, std::thread::hardware_concurrency());

  // verbalize
  cmd::VerbalizeArgs vargs;
  auto* verbalize = app.add_subcommand("verbalize", "Write one scene description per image");
  verbalize->add_option("detections", vargs.detections, "Detection JSON file")->required()->check(CLI::ExistingFile);
  verbalize->add_option("-o,--out", vargs.out, "Output JSONL")->required();
  add_verbalize_flags(verbalize, common);

  // generate
  cmd::GenerateArgs gargs;
  auto* generate = app.add_subcommand("generate", "Generate synthetic spatial QA examples, one file per epoch");
  generate->add_option("detections", gargs.detections, "Detection JSON file")->required()->check(CLI::ExistingFile);
  generate->add_option("-o,--out", gargs.out_dir, "Output directory")->required();
  generate->add_option("--exclude", gargs.exclude, "Benchmark JSONL split whose images are held out (repeatable)")
      ->check(CLI::ExistingFile);
  generate->add_option("--seed", gargs.config.seed, "Random seed")->capture_default_str();
  generate->add_option("--epochs", gargs.epochs, "Number of epochs")->capture_default_str()->check(CLI::PositiveNumber);
  generate->add_option("--first-epoch", gargs.first_epoch, "Index of the first epoch")->capture_default_str();
  generate->add_option("--per-image", gargs.config.examples_per_image, "Examples per image per epoch")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  generate->add_option("--p-two-object", gargs.config.p_two_object, "Probability of a two-object relation")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  generate->add_option("--p-negative", gargs.config.p_negative, "Probability of a negative question")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  generate->add_option("--workers", workers, "Worker threads (output does not depend on it)")->capture_default_str();
  add_verbalize_flags(generate, common);

  // solve
  cmd::SolveArgs sargs;
  std::string mapping_path;
  std::string lexicon_path;
  auto* solve = app.add_subcommand("solve", "Answer benchmark captions with the geometric rules");
  solve->add_option("vsr", sargs.vsr, "Benchmark JSONL")->required()->check(CLI::ExistingFile);
  solve->add_option("detections", sargs.detections, "Detection JSON file")->required()->check(CLI::ExistingFile);
  solve->add_option("-o,--out", sargs.out, "Predictions JSONL")->required();
  solve->add_option("--mapping", mapping_path, "Relation mapping TSV (default: built-in table)")
      ->check(CLI::ExistingFile);
  solve->add_option("--lexicon", lexicon_path, "Relation lexicon TSV (default: built-in)")->check(CLI::ExistingFile);
  solve->add_option("--seed", sargs.seed, "Seed for the random fallback")->capture_default_str();
  solve->add_option("--min-confidence", sargs.min_confidence, "Drop detections below this confidence")
      ->capture_default_str();
  solve->add_option("--workers", workers, "Worker threads (output does not depend on it)")->capture_default_str();

  // eval
  cmd::EvalArgs eargs;
  std::string format = "both";
  std::string eval_lexicon;
  std::vector<std::filesystem::path> extra_runs;
  auto* eval = app.add_subcommand("eval", "Accuracy report per relation and category");
  eval->add_option("predictions", eargs.predictions, "Predictions JSONL")->check(CLI::ExistingFile);
  eval->add_option("--runs", extra_runs, "Additional prediction files, one per run")->check(CLI::ExistingFile);
  eval->add_option("--gold", eargs.gold, "Benchmark JSONL with gold labels")->required()->check(CLI::ExistingFile);
  eval->add_option("-o,--out", eargs.out_dir, "Output directory")->required();
  eval->add_option("--format", format, "json, csv or both")
      ->capture_default_str()
      ->check(CLI::IsMember({"json", "csv", "both"}));
  eval->add_option("--threshold", eargs.threshold, "Per-relation CSV keeps relations with n above this")
      ->capture_default_str();
  eval->add_option("--lexicon", eval_lexicon, "Relation lexicon TSV (default: built-in)")->check(CLI::ExistingFile);

  // stats
  std::string stats_path;
  auto* stats = app.add_subcommand("stats", "Summarize a generated example file");
  stats->add_option("examples", stats_path, "Generated JSONL")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*verbalize) {
      vargs.grid = spatialrel::GridConfig(common.grid);
      vargs.verbalize = verbalize_options(common);
      vargs.min_confidence = common.min_confidence;
      const auto n = cmd::verbalize(vargs);
      std::printf("wrote %zu descriptions to %s\n", n, vargs.out.string().c_str());
    } else if (*generate) {
      gargs.config.grid = spatialrel::GridConfig(common.grid);
      gargs.config.verbalize = verbalize_options(common);
      gargs.min_confidence = common.min_confidence;
      gargs.workers = workers;
      for (const auto& s : cmd::generate(gargs)) {
        std::printf("epoch %llu: %zu examples -> %s\n", static_cast<unsigned long long>(s.epoch), s.stats.total,
                    s.file.string().c_str());
        std::printf("  yes fraction %.4f, two-object share %.4f, excluded images %zu, skipped images %zu\n",
                    s.stats.yes_fraction(), s.stats.two_object_fraction(), s.excluded, s.skipped);
      }
    } else if (*solve) {
      if (!mapping_path.empty()) sargs.mapping = mapping_path;
      if (!lexicon_path.empty()) sargs.lexicon = lexicon_path;
      sargs.workers = workers;
      const auto summary = cmd::solve(sargs);
      for (const auto& w : summary.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
      print_coverage(summary.report);
    } else if (*eval) {
      eargs.predictions.insert(eargs.predictions.end(), extra_runs.begin(), extra_runs.end());
      if (eargs.predictions.empty()) throw CLI::RequiredError("predictions");
      eargs.format = parse_format(format);
      if (!eval_lexicon.empty()) eargs.lexicon = eval_lexicon;
      const auto summary = cmd::eval(eargs);
      for (const auto& [name, a] : summary.aggregate) {
        if (name == "overall_accuracy" || name.starts_with("coverage/")) {
          std::printf("%-28s mean %.4f std %.4f (runs %zu)\n", name.c_str(), a.mean, a.stddev, a.runs);
        }
      }
      for (const auto& p : summary.written) std::printf("wrote %s\n", p.string().c_str());
    } else if (*stats) {
      const auto s = cmd::stats(stats_path);
      std::printf("examples: %zu over %zu images\n", s.overall.total, s.images);
      std::printf("yes fraction: %.4f\n", s.overall.yes_fraction());
      std::printf("two-object share: %.4f\n", s.overall.two_object_fraction());
      for (const auto& [rel, n] : s.per_relation) std::printf("  %-14s %zu\n", rel.c_str(), n);
    }
  } catch (const CLI::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitOk;
}
