#include "webnav/trace_io.hpp"

#include <fstream>
#include <sstream>

#include "text_util.hpp"
#include "webnav/errors.hpp"

namespace webnav {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

Action action_from_string(const std::string& text) {
  auto parsed = parse_action(text);
  if (!parsed) throw ConfigError("stored action '" + text + "' does not parse: " + parsed.error().message);
  return std::move(*parsed);
}

std::string file_stem(const std::string& task_id) {
  std::string out;
  for (char c : task_id) {
    const bool safe = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
    out += safe ? c : '_';
  }
  if (out.empty() || out.front() == '.') out.insert(0, "task");
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ordered_json to_json(const NavState& s) {
  ordered_json tried = ordered_json::array();
  for (const auto& a : s.tried_actions) tried.push_back(a);
  return {{"index", s.index},
          {"url", s.url},
          {"obs_digest", s.obs_digest},
          {"action", s.action_taken ? ordered_json(serialize_action(*s.action_taken)) : ordered_json(nullptr)},
          {"checkpoint", s.checkpoint},
          {"tried_actions", tried}};
}

ordered_json to_json(const Trajectory& traj) {
  ordered_json states = ordered_json::array();
  for (const auto& s : traj.states()) states.push_back(to_json(s));
  ordered_json exps = ordered_json::array();
  for (const auto& e : traj.experiences()) {
    exps.push_back({{"created_at_step", e.created_at_step}, {"returned_to_index", e.returned_to_index}, {"text", e.text}});
  }
  return {{"states", states}, {"experiences", exps}};
}

ordered_json to_json(const CritiqueVerdict& v) {
  return {{"observation", v.observation},
          {"details", v.details},
          {"critic", v.critic},
          {"score", v.score},
          {"decision", std::string(to_string(v.decision))}};
}

ordered_json to_json(const EvalResult& e) {
  return {{"summary", e.summary}, {"thought", e.thought}, {"criteria", e.criteria}, {"score", e.score}};
}

ordered_json to_json(const StepRecord& step) {
  ordered_json rollback = nullptr;
  if (step.rollback) {
    rollback = {{"analysis", step.rollback->analysis},
                {"back_idx", step.rollback->back_idx},
                {"experience", step.rollback->experience},
                {"applied", step.switched}};
  }
  return {{"t", step.t},
          {"thought", step.thought},
          {"action", serialize_action(step.action)},
          {"critique", step.critique ? to_json(*step.critique) : ordered_json(nullptr)},
          {"rollback", rollback},
          {"url", step.url}};
}

Trajectory trajectory_from_json(const json& j) {
  try {
    Trajectory traj;
    for (const auto& js : j.at("states")) {
      NavState s;
      s.index = js.at("index").get<std::size_t>();
      s.url = js.at("url").get<std::string>();
      s.obs_digest = js.at("obs_digest").get<std::string>();
      if (!js.at("action").is_null()) s.action_taken = action_from_string(js["action"].get<std::string>());
      s.checkpoint = js.at("checkpoint").get<bool>();
      for (const auto& a : js.at("tried_actions")) s.tried_actions.insert(a.get<std::string>());
      traj.append_state(std::move(s));
    }
    for (const auto& je : j.at("experiences")) {
      traj.add_experience(ExperienceNote{je.at("created_at_step").get<std::size_t>(),
                                         je.at("returned_to_index").get<std::size_t>(), je.at("text").get<std::string>()});
    }
    return traj;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed trajectory: ") + e.what());
  } catch (const ContractViolation& e) {
    throw ConfigError(std::string("inconsistent trajectory: ") + e.what());
  }
}

CritiqueVerdict critique_from_json(const json& j) {
  try {
    CritiqueVerdict v;
    v.observation = j.at("observation").get<std::string>();
    v.details = j.at("details").get<std::string>();
    v.critic = j.at("critic").get<std::string>();
    v.score = j.at("score").get<double>();
    const auto d = j.at("decision").get<std::string>();
    if (d != "continue" && d != "back") throw ConfigError("unknown decision '" + d + "'");
    v.decision = d == "back" ? Decision::kBack : Decision::kContinue;
    return v;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed critique: ") + e.what());
  }
}

EvalResult eval_result_from_json(const json& j) {
  try {
    return EvalResult{j.at("summary").get<std::string>(), j.at("thought").get<std::string>(),
                      j.at("criteria").get<std::string>(), j.at("score").get<double>()};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed evaluation: ") + e.what());
  }
}

StepRecord step_from_json(const json& j) {
  try {
    StepRecord s;
    s.t = j.at("t").get<std::size_t>();
    s.thought = j.at("thought").get<std::string>();
    s.action = action_from_string(j.at("action").get<std::string>());
    if (!j.at("critique").is_null()) s.critique = critique_from_json(j["critique"]);
    if (!j.at("rollback").is_null()) {
      const auto& r = j["rollback"];
      s.rollback = RollbackDecision{r.at("analysis").get<std::string>(), r.at("back_idx").get<int>(),
                                    r.at("experience").get<std::string>()};
      s.switched = r.at("applied").get<bool>();
    }
    s.url = j.at("url").get<std::string>();
    return s;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed trace line: ") + e.what());
  }
}

ordered_json run_summary_json(const RunTrace& trace, const std::optional<EvalResult>& eval) {
  ordered_json warnings = ordered_json::array();
  for (const auto& w : trace.warnings) warnings.push_back(w);
  return {{"task_id", trace.task_id},
          {"strategy", trace.strategy},
          {"counters",
           {{"steps_used", trace.counters.steps_used},
            {"switches", trace.counters.switches},
            {"stopped", trace.counters.stopped}}},
          {"final_answer", trace.final_answer},
          {"failed", trace.failed},
          {"error", trace.error},
          {"goal_reached", trace.goal_reached ? ordered_json(*trace.goal_reached) : ordered_json(nullptr)},
          {"warnings", warnings},
          {"trajectory", to_json(trace.trajectory)},
          {"eval", eval ? to_json(*eval) : ordered_json(nullptr)}};
}

void write_trace_jsonl(std::ostream& out, const RunTrace& trace) {
  for (const auto& s : trace.steps) out << to_json(s).dump() << '\n';
}

std::vector<StepRecord> read_trace_jsonl(std::istream& in) {
  std::vector<StepRecord> steps;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) throw ConfigError("trace line " + std::to_string(line_no) + " is not JSON");
    steps.push_back(step_from_json(j));
  }
  return steps;
}

EpisodePaths episode_paths(const std::filesystem::path& strategy_dir, const std::string& task_id) {
  const auto stem = file_stem(task_id);
  return {strategy_dir / (stem + ".trace.jsonl"), strategy_dir / (stem + ".run.json"),
          strategy_dir / (stem + ".transcript.jsonl")};
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write " + tmp.string());
    out << content;
    if (!out) throw ConfigError("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

void persist_episode(const EpisodePaths& paths, const RunTrace& trace, const std::optional<EvalResult>& eval,
                     const std::vector<TranscriptEntry>& transcript) {
  std::ostringstream trace_out;
  write_trace_jsonl(trace_out, trace);
  write_file_atomic(paths.trace, trace_out.str());
  std::ostringstream transcript_out;
  write_transcript_jsonl(transcript_out, transcript);
  write_file_atomic(paths.transcript, transcript_out.str());
  write_file_atomic(paths.run, run_summary_json(trace, eval).dump(2) + "\n");
}

std::optional<StoredEpisode> load_episode(const EpisodePaths& paths) {
  if (!std::filesystem::exists(paths.run)) return std::nullopt;
  json run = json::parse(read_file(paths.run), nullptr, /*allow_exceptions=*/false);
  if (run.is_discarded()) throw ConfigError(paths.run.string() + " is not JSON");
  StoredEpisode ep;
  try {
    auto& t = ep.trace;
    t.task_id = run.at("task_id").get<std::string>();
    t.strategy = run.at("strategy").get<std::string>();
    const auto& c = run.at("counters");
    t.counters = RunCounters{c.at("steps_used").get<std::size_t>(), c.at("switches").get<std::size_t>(),
                             c.at("stopped").get<bool>()};
    t.final_answer = run.at("final_answer").get<std::string>();
    t.failed = run.at("failed").get<bool>();
    t.error = run.at("error").get<std::string>();
    if (!run.at("goal_reached").is_null()) t.goal_reached = run["goal_reached"].get<bool>();
    for (const auto& w : run.at("warnings")) t.warnings.push_back(w.get<std::string>());
    t.trajectory = trajectory_from_json(run.at("trajectory"));
    if (!run.at("eval").is_null()) ep.eval = eval_result_from_json(run["eval"]);
  } catch (const json::exception& e) {
    throw ConfigError(paths.run.string() + ": " + e.what());
  }
  std::istringstream trace_in(read_file(paths.trace));
  ep.trace.steps = read_trace_jsonl(trace_in);
  if (ep.trace.steps.size() != ep.trace.counters.steps_used) {
    throw ConfigError(paths.trace.string() + " does not match the step count in " + paths.run.string());
  }
  return ep;
}

}  // namespace webnav
