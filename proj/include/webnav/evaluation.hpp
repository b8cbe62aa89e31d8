#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "webnav/policy.hpp"
#include "webnav/strategies.hpp"

namespace webnav {

struct EvalInput {
  std::string task;
  std::optional<std::string> gold;
  std::string start_url;
};

SlotValues eval_slots(const EvalInput& input, const RunTrace& trace);

// Backend failures and replies that stay unparseable after one re-ask yield
// nullopt: the trace counts as missing and is left out of the aggregates.
std::optional<EvalResult> evaluate_trace(const EvalInput& input, const RunTrace& trace, const PolicyModules& modules,
                                         Warnings* warnings = nullptr);

struct ScoredTrace {
  RunTrace trace;
  std::optional<EvalResult> eval;
};

struct StrategyMetrics {
  std::string strategy;
  std::size_t n = 0;         // traces with an evaluation
  std::size_t excluded = 0;  // traces whose evaluation is missing
  std::size_t failed = 0;    // episodes that ended on an environment or backend error
  double full_pct = 0.0;
  double partial_pct = 0.0;
  double mean_steps = 0.0;
  double mean_switches = 0.0;
  double struggle_ratio = 0.0;

  bool operator==(const StrategyMetrics&) const = default;
};

struct MetricsReport {
  std::vector<StrategyMetrics> strategies;  // oneway, bestfirst, rollback, then others by name
  bool operator==(const MetricsReport&) const = default;
  const StrategyMetrics* find(const std::string& strategy) const;
};

// Throws ContractViolation on empty input.
MetricsReport aggregate(const std::vector<ScoredTrace>& results);

struct Dispersion {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation; 0 for a single repeat
  bool operator==(const Dispersion&) const = default;
};

Dispersion mean_and_sd(const std::vector<double>& values);

struct ReplicatedMetrics {
  std::string strategy;
  std::size_t repeats = 0;
  Dispersion full_pct, partial_pct, mean_steps, mean_switches, struggle_ratio;
  bool operator==(const ReplicatedMetrics&) const = default;
};

struct ReplicatedReport {
  std::vector<MetricsReport> per_repeat;
  std::vector<ReplicatedMetrics> summary;
  bool operator==(const ReplicatedReport&) const = default;
};

// Throws ContractViolation when `per_repeat` is empty.
ReplicatedReport summarize_repeats(std::vector<MetricsReport> per_repeat);

nlohmann::ordered_json to_json(const MetricsReport& report);
MetricsReport metrics_report_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const ReplicatedReport& report);
ReplicatedReport replicated_report_from_json(const nlohmann::json& j);

// Plain-text table with Full%, Partial%, Step and Switch columns plus the
// struggle ratio; "mean±sd" cells when there is more than one repeat.
std::string format_table(const ReplicatedReport& report);

}  // namespace webnav
