#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "spatialrel/rule_solver.hpp"
#include "spatialrel/scene.hpp"
#include "spatialrel/vsr_lexicon.hpp"

namespace spatialrel {

inline constexpr std::string_view kUncategorized = "uncategorized";

struct GroupAccuracy {
  std::size_t n = 0;
  std::size_t correct = 0;

  double accuracy() const { return n ? static_cast<double>(correct) / static_cast<double>(n) : 0.0; }
  friend bool operator==(const GroupAccuracy&, const GroupAccuracy&) = default;
};

struct RuleCoverage {
  double mappable_fraction = 0.0;
  double solved_fraction = 0.0;
  double solved_accuracy = 0.0;
  std::size_t solved = 0;
  std::map<std::string, std::size_t> failures;  // keyed by failure reason

  friend bool operator==(const RuleCoverage&, const RuleCoverage&) = default;
};

struct EvalReport {
  std::size_t total = 0;
  std::size_t correct = 0;
  double overall_accuracy = 0.0;
  std::map<std::string, GroupAccuracy> per_relation;
  std::map<std::string, GroupAccuracy> per_category;
  std::optional<RuleCoverage> rule_coverage;

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

/// Mean and population standard deviation of one metric across runs.
struct RunAggregate {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t runs = 0;
};

/// Scores aligned predictions against gold labels. Coverage figures are
/// filled only when every prediction reports its method.
inline EvalReport evaluate(std::span<const Prediction> predictions, std::span<const VSRInstance> gold,
                           const VsrLexicon& lexicon = VsrLexicon::builtin()) {
  if (predictions.size() != gold.size()) {
    throw std::invalid_argument("prediction count " + std::to_string(predictions.size()) +
                                " does not match gold count " + std::to_string(gold.size()));
  }
  EvalReport report;
  report.total = gold.size();
  const bool has_methods =
      std::all_of(predictions.begin(), predictions.end(), [](const Prediction& p) { return p.method.has_value(); });
  RuleCoverage cov;
  std::size_t mappable = 0;
  std::size_t solved_correct = 0;

  for (std::size_t i = 0; i < gold.size(); ++i) {
    const bool ok = predictions[i].answer == gold[i].label;
    report.correct += ok;
    auto& rel = report.per_relation[gold[i].relation];
    ++rel.n;
    rel.correct += ok;
    auto& cat = report.per_category[lexicon.category(gold[i].relation).value_or(std::string(kUncategorized))];
    ++cat.n;
    cat.correct += ok;

    if (has_methods) {
      const auto& p = predictions[i];
      if (p.failure_reason != FailureReason::UnmappedRelation) ++mappable;
      if (p.method == SolveMethod::Rule) {
        ++cov.solved;
        solved_correct += ok;
      } else if (p.failure_reason) {
        ++cov.failures[std::string(to_string(*p.failure_reason))];
      }
    }
  }
  const auto total = static_cast<double>(report.total);
  report.overall_accuracy = report.total ? static_cast<double>(report.correct) / total : 0.0;
  if (has_methods) {
    cov.mappable_fraction = report.total ? static_cast<double>(mappable) / total : 0.0;
    cov.solved_fraction = report.total ? static_cast<double>(cov.solved) / total : 0.0;
    cov.solved_accuracy = cov.solved ? static_cast<double>(solved_correct) / static_cast<double>(cov.solved) : 0.0;
    report.rule_coverage = std::move(cov);
  }
  return report;
}

/// Metric name -> value for one report, as used by aggregate_runs.
inline std::map<std::string, double> report_metrics(const EvalReport& r) {
  std::map<std::string, double> m;
  m["overall_accuracy"] = r.overall_accuracy;
  for (const auto& [name, g] : r.per_relation) m["relation/" + name] = g.accuracy();
  for (const auto& [name, g] : r.per_category) m["category/" + name] = g.accuracy();
  if (r.rule_coverage) {
    m["coverage/mappable_fraction"] = r.rule_coverage->mappable_fraction;
    m["coverage/solved_fraction"] = r.rule_coverage->solved_fraction;
    m["coverage/solved_accuracy"] = r.rule_coverage->solved_accuracy;
  }
  return m;
}

inline RunAggregate aggregate_values(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("aggregate over zero runs");
  RunAggregate agg;
  agg.runs = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  agg.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - agg.mean) * (v - agg.mean);
  agg.stddev = std::sqrt(ss / static_cast<double>(values.size()));
  return agg;
}

/// Per-metric mean and population std over runs. A metric missing from some
/// runs is aggregated over the runs that have it.
inline std::map<std::string, RunAggregate> aggregate_runs(std::span<const EvalReport> reports) {
  if (reports.empty()) throw std::invalid_argument("aggregate over zero runs");
  std::map<std::string, std::vector<double>> values;
  for (const auto& r : reports) {
    for (const auto& [name, v] : report_metrics(r)) values[name].push_back(v);
  }
  std::map<std::string, RunAggregate> out;
  for (const auto& [name, vs] : values) out[name] = aggregate_values(vs);
  return out;
}

enum class ReportFormat { Json, Csv };

enum class ReportTable { Relations, Categories };

struct CsvOptions {
  ReportTable table = ReportTable::Relations;
  // Rows with n <= min_count are left out; presentation only.
  std::size_t min_count = 0;
};

namespace detail {

inline std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

inline nlohmann::ordered_json groups_to_json(const std::map<std::string, GroupAccuracy>& groups) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, g] : groups) j[name] = {{"n", g.n}, {"correct", g.correct}, {"accuracy", g.accuracy()}};
  return j;
}

inline std::map<std::string, GroupAccuracy> groups_from_json(const nlohmann::json& j) {
  std::map<std::string, GroupAccuracy> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    out[it.key()] = {it->at("n").get<std::size_t>(), it->at("correct").get<std::size_t>()};
  }
  return out;
}

}  // namespace detail

inline nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["total"] = r.total;
  j["correct"] = r.correct;
  j["overall_accuracy"] = r.overall_accuracy;
  j["per_relation"] = detail::groups_to_json(r.per_relation);
  j["per_category"] = detail::groups_to_json(r.per_category);
  if (r.rule_coverage) {
    const auto& c = *r.rule_coverage;
    nlohmann::ordered_json cj;
    cj["mappable_fraction"] = c.mappable_fraction;
    cj["solved_fraction"] = c.solved_fraction;
    cj["solved_accuracy"] = c.solved_accuracy;
    cj["solved"] = c.solved;
    cj["failures"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : c.failures) cj["failures"][k] = v;
    j["rule_coverage"] = std::move(cj);
  } else {
    j["rule_coverage"] = nullptr;
  }
  return j;
}

inline EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.total = j.at("total").get<std::size_t>();
  r.correct = j.at("correct").get<std::size_t>();
  r.overall_accuracy = j.at("overall_accuracy").get<double>();
  r.per_relation = detail::groups_from_json(j.at("per_relation"));
  r.per_category = detail::groups_from_json(j.at("per_category"));
  if (auto it = j.find("rule_coverage"); it != j.end() && !it->is_null()) {
    RuleCoverage c;
    c.mappable_fraction = it->at("mappable_fraction").get<double>();
    c.solved_fraction = it->at("solved_fraction").get<double>();
    c.solved_accuracy = it->at("solved_accuracy").get<double>();
    c.solved = it->at("solved").get<std::size_t>();
    c.failures = it->at("failures").get<std::map<std::string, std::size_t>>();
    r.rule_coverage = std::move(c);
  }
  return r;
}

/// Rows ordered by descending n, then by name.
inline void write_csv(std::ostream& out, const EvalReport& r, const CsvOptions& opts = {}) {
  const auto& groups = opts.table == ReportTable::Relations ? r.per_relation : r.per_category;
  std::vector<std::pair<std::string, GroupAccuracy>> rows(groups.begin(), groups.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.second.n > b.second.n; });
  out << (opts.table == ReportTable::Relations ? "relation" : "category") << ",n,accuracy\n";
  for (const auto& [name, g] : rows) {
    if (g.n <= opts.min_count) continue;
    out << detail::csv_field(name) << ',' << g.n << ',' << detail::fixed6(g.accuracy()) << '\n';
  }
}

inline void write_report(std::ostream& out, const EvalReport& r, ReportFormat format, const CsvOptions& opts = {}) {
  if (format == ReportFormat::Json) {
    out << to_json(r).dump(2) << '\n';
  } else {
    write_csv(out, r, opts);
  }
}

inline void write_aggregate_csv(std::ostream& out, const std::map<std::string, RunAggregate>& agg) {
  out << "metric,runs,mean,std\n";
  for (const auto& [name, a] : agg) {
    out << detail::csv_field(name) << ',' << a.runs << ',' << detail::fixed6(a.mean) << ',' << detail::fixed6(a.stddev)
        << '\n';
  }
}

inline nlohmann::ordered_json to_json(const std::map<std::string, RunAggregate>& agg) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [name, a] : agg) j[name] = {{"mean", a.mean}, {"std", a.stddev}, {"runs", a.runs}};
  return j;
}

}  // namespace spatialrel
