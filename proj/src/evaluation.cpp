#include "webnav/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "webnav/errors.hpp"

namespace webnav {

using nlohmann::json;
using nlohmann::ordered_json;

SlotValues eval_slots(const EvalInput& input, const RunTrace& trace) {
  return {{"orig_query", input.task},
          {"str_trajectory", render_trace_review(trace.trajectory)},
          {"pred_answer", trace.final_answer.empty() ? std::string(kNotAvailable) : trace.final_answer},
          {"gold_info", input.gold && !input.gold->empty() ? *input.gold : std::string(kNotAvailable)},
          {"target_url", input.start_url}};
}

std::optional<EvalResult> evaluate_trace(const EvalInput& input, const RunTrace& trace, const PolicyModules& modules,
                                         Warnings* warnings) {
  const std::string prompt = render_prompt(eval_template(), eval_slots(input, trace));
  std::string problem;
  for (int attempt = 0; attempt < 2; ++attempt) {
    std::string reply;
    try {
      reply = modules.ask(Role::kEval, attempt == 0 ? prompt : prompt + format_reminder(Role::kEval, problem));
    } catch (const BackendError& e) {
      if (warnings) warnings->push_back(std::string("evaluation unavailable: ") + e.what());
      return std::nullopt;
    }
    auto parsed = parse_eval(reply, warnings);
    if (parsed) return std::move(*parsed);
    problem = parsed.error().message;
  }
  if (warnings) warnings->push_back("evaluation reply unparseable twice (" + problem + ")");
  return std::nullopt;
}

namespace {

int strategy_rank(const std::string& name) {
  if (auto k = strategy_from_string(name)) return static_cast<int>(*k);
  return 100;
}

bool strategy_before(const std::string& a, const std::string& b) {
  auto ra = strategy_rank(a), rb = strategy_rank(b);
  return ra != rb ? ra < rb : a < b;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

}  // namespace

const StrategyMetrics* MetricsReport::find(const std::string& strategy) const {
  for (const auto& m : strategies) {
    if (m.strategy == strategy) return &m;
  }
  return nullptr;
}

MetricsReport aggregate(const std::vector<ScoredTrace>& results) {
  if (results.empty()) throw ContractViolation("cannot aggregate an empty result set");
  struct Acc {
    std::size_t excluded = 0, failed = 0;
    std::vector<double> scores, steps, switches, struggles;
  };
  std::map<std::string, Acc> by_strategy;
  for (const auto& r : results) {
    auto& acc = by_strategy[r.trace.strategy];
    if (r.trace.failed) ++acc.failed;
    if (!r.eval) {
      ++acc.excluded;
      continue;
    }
    acc.scores.push_back(r.eval->score);
    acc.steps.push_back(static_cast<double>(r.trace.counters.steps_used));
    acc.switches.push_back(static_cast<double>(r.trace.counters.switches));
    acc.struggles.push_back(detect_struggle(r.trace) ? 1.0 : 0.0);
  }
  MetricsReport report;
  for (const auto& [name, acc] : by_strategy) {
    StrategyMetrics m;
    m.strategy = name;
    m.n = acc.scores.size();
    m.excluded = acc.excluded;
    m.failed = acc.failed;
    if (m.n > 0) {
      auto full = std::count_if(acc.scores.begin(), acc.scores.end(), [](double s) { return s == 1.0; });
      m.full_pct = 100.0 * static_cast<double>(full) / static_cast<double>(m.n);
      m.partial_pct = 100.0 * mean(acc.scores);
      m.mean_steps = mean(acc.steps);
      m.mean_switches = mean(acc.switches);
      m.struggle_ratio = mean(acc.struggles);
    }
    report.strategies.push_back(std::move(m));
  }
  std::sort(report.strategies.begin(), report.strategies.end(),
            [](const auto& a, const auto& b) { return strategy_before(a.strategy, b.strategy); });
  return report;
}

Dispersion mean_and_sd(const std::vector<double>& values) {
  Dispersion d;
  d.mean = mean(values);
  if (values.size() > 1) {
    double ss = 0.0;
    for (double x : values) ss += (x - d.mean) * (x - d.mean);
    d.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return d;
}

ReplicatedReport summarize_repeats(std::vector<MetricsReport> per_repeat) {
  if (per_repeat.empty()) throw ContractViolation("at least one repeat is required");
  std::vector<std::string> names;
  for (const auto& rep : per_repeat) {
    for (const auto& m : rep.strategies) {
      if (std::find(names.begin(), names.end(), m.strategy) == names.end()) names.push_back(m.strategy);
    }
  }
  std::sort(names.begin(), names.end(), strategy_before);
  ReplicatedReport out;
  for (const auto& name : names) {
    std::vector<double> full, partial, steps, switches, struggle;
    for (const auto& rep : per_repeat) {
      const auto* m = rep.find(name);
      if (!m) continue;
      full.push_back(m->full_pct);
      partial.push_back(m->partial_pct);
      steps.push_back(m->mean_steps);
      switches.push_back(m->mean_switches);
      struggle.push_back(m->struggle_ratio);
    }
    out.summary.push_back(ReplicatedMetrics{name, full.size(), mean_and_sd(full), mean_and_sd(partial),
                                            mean_and_sd(steps), mean_and_sd(switches), mean_and_sd(struggle)});
  }
  out.per_repeat = std::move(per_repeat);
  return out;
}

ordered_json to_json(const MetricsReport& report) {
  ordered_json arr = ordered_json::array();
  for (const auto& m : report.strategies) {
    arr.push_back({{"strategy", m.strategy},
                   {"n", m.n},
                   {"excluded", m.excluded},
                   {"failed", m.failed},
                   {"full_pct", m.full_pct},
                   {"partial_pct", m.partial_pct},
                   {"mean_steps", m.mean_steps},
                   {"mean_switches", m.mean_switches},
                   {"struggle_ratio", m.struggle_ratio}});
  }
  return {{"strategies", arr}};
}

MetricsReport metrics_report_from_json(const json& j) {
  try {
    MetricsReport report;
    for (const auto& e : j.at("strategies")) {
      StrategyMetrics m;
      m.strategy = e.at("strategy").get<std::string>();
      m.n = e.at("n").get<std::size_t>();
      m.excluded = e.at("excluded").get<std::size_t>();
      m.failed = e.value("failed", std::size_t{0});
      m.full_pct = e.at("full_pct").get<double>();
      m.partial_pct = e.at("partial_pct").get<double>();
      m.mean_steps = e.at("mean_steps").get<double>();
      m.mean_switches = e.at("mean_switches").get<double>();
      m.struggle_ratio = e.at("struggle_ratio").get<double>();
      report.strategies.push_back(std::move(m));
    }
    return report;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed metrics report: ") + e.what());
  }
}

namespace {

ordered_json dispersion_json(const Dispersion& d) { return {{"mean", d.mean}, {"sd", d.sd}}; }

Dispersion dispersion_from(const json& j) { return {j.at("mean").get<double>(), j.at("sd").get<double>()}; }

}  // namespace

ordered_json to_json(const ReplicatedReport& report) {
  ordered_json per = ordered_json::array();
  for (const auto& r : report.per_repeat) per.push_back(to_json(r));
  ordered_json summary = ordered_json::array();
  for (const auto& s : report.summary) {
    summary.push_back({{"strategy", s.strategy},
                       {"repeats", s.repeats},
                       {"full_pct", dispersion_json(s.full_pct)},
                       {"partial_pct", dispersion_json(s.partial_pct)},
                       {"mean_steps", dispersion_json(s.mean_steps)},
                       {"mean_switches", dispersion_json(s.mean_switches)},
                       {"struggle_ratio", dispersion_json(s.struggle_ratio)}});
  }
  return {{"summary", summary}, {"per_repeat", per}};
}

ReplicatedReport replicated_report_from_json(const json& j) {
  try {
    ReplicatedReport report;
    for (const auto& r : j.at("per_repeat")) report.per_repeat.push_back(metrics_report_from_json(r));
    for (const auto& s : j.at("summary")) {
      report.summary.push_back(ReplicatedMetrics{
          s.at("strategy").get<std::string>(), s.at("repeats").get<std::size_t>(), dispersion_from(s.at("full_pct")),
          dispersion_from(s.at("partial_pct")), dispersion_from(s.at("mean_steps")),
          dispersion_from(s.at("mean_switches")), dispersion_from(s.at("struggle_ratio"))});
    }
    return report;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed report: ") + e.what());
  }
}

std::string format_table(const ReplicatedReport& report) {
  const bool spread = report.per_repeat.size() > 1;
  auto cell = [&](const Dispersion& d, int precision) {
    char buf[64];
    if (spread) {
      std::snprintf(buf, sizeof buf, "%.*f±%.*f", precision, d.mean, precision, d.sd);
    } else {
      std::snprintf(buf, sizeof buf, "%.*f", precision, d.mean);
    }
    return std::string(buf);
  };
  auto pad = [](std::string s, std::size_t width) {
    // Counts code points so the ± sign occupies one column.
    std::size_t cols = 0;
    for (unsigned char c : s) cols += (c & 0xC0) != 0x80;
    if (cols < width) s.insert(0, width - cols, ' ');
    return s;
  };
  const std::size_t w = spread ? 16 : 10;
  std::string out = "Strategy  " + pad("Full%", w) + pad("Partial%", w) + pad("Step", w) + pad("Switch", w) +
                    pad("Struggle", w) + "\n";
  const MetricsReport* last = report.per_repeat.empty() ? nullptr : &report.per_repeat.back();
  for (const auto& s : report.summary) {
    std::string name = s.strategy;
    name.resize(std::max<std::size_t>(name.size(), 10), ' ');
    out += name + pad(cell(s.full_pct, 2), w) + pad(cell(s.partial_pct, 2), w) + pad(cell(s.mean_steps, 2), w) +
           pad(cell(s.mean_switches, 2), w) + pad(cell(s.struggle_ratio, 3), w);
    if (const auto* m = last ? last->find(s.strategy) : nullptr) {
      out += "  (n=" + std::to_string(m->n);
      if (m->excluded) out += ", excluded " + std::to_string(m->excluded);
      if (m->failed) out += ", failed " + std::to_string(m->failed);
      out += ")";
    }
    out += "\n";
  }
  return out;
}

}  // namespace webnav
