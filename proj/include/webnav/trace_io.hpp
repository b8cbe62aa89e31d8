#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "webnav/backend.hpp"
#include "webnav/evaluation.hpp"
#include "webnav/strategies.hpp"

namespace webnav {

nlohmann::ordered_json to_json(const NavState& s);
nlohmann::ordered_json to_json(const Trajectory& traj);
nlohmann::ordered_json to_json(const CritiqueVerdict& v);
nlohmann::ordered_json to_json(const EvalResult& e);
// One trace line: exactly t, thought, action, critique, rollback, url.
nlohmann::ordered_json to_json(const StepRecord& step);

// All throw ConfigError on malformed input.
Trajectory trajectory_from_json(const nlohmann::json& j);
CritiqueVerdict critique_from_json(const nlohmann::json& j);
EvalResult eval_result_from_json(const nlohmann::json& j);
StepRecord step_from_json(const nlohmann::json& j);

// Everything about an episode except its steps, plus the evaluation.
nlohmann::ordered_json run_summary_json(const RunTrace& trace, const std::optional<EvalResult>& eval);

void write_trace_jsonl(std::ostream& out, const RunTrace& trace);
std::vector<StepRecord> read_trace_jsonl(std::istream& in);

// Files of one episode inside a strategy directory.
struct EpisodePaths {
  std::filesystem::path trace;       // <task>.trace.jsonl
  std::filesystem::path run;         // <task>.run.json, written last
  std::filesystem::path transcript;  // <task>.transcript.jsonl
};
EpisodePaths episode_paths(const std::filesystem::path& strategy_dir, const std::string& task_id);

// Writes trace and transcript first and the run summary last, each through a
// temporary file, so an existing run file marks a complete episode.
void persist_episode(const EpisodePaths& paths, const RunTrace& trace, const std::optional<EvalResult>& eval,
                     const std::vector<TranscriptEntry>& transcript);

struct StoredEpisode {
  RunTrace trace;
  std::optional<EvalResult> eval;
};
// nullopt when the run file is absent.
std::optional<StoredEpisode> load_episode(const EpisodePaths& paths);

// Writes `content` to `path` via a sibling temporary file and rename.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

}  // namespace webnav
