#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "webnav/backend.hpp"
#include "webnav/environment.hpp"

namespace webnav {

// A dead-end side branch hanging off one stage of the main path.
struct TrapBranch {
  std::size_t attach_stage = 0;
  int entry_id = 0;                  // link on the stage page leading into the branch
  std::vector<std::string> urls;     // branch pages; the last one has no links
  std::vector<int> forward_ids;      // forward_ids[j] links urls[j] -> urls[j+1]
};

// Seeded site: stage pages 0..depth form the only route to the answer page,
// and each branch is a trap (the goal is unreachable from it).
struct TrapSite {
  std::uint64_t seed = 0;
  std::string tag;
  std::shared_ptr<const SiteGraph> graph;
  std::vector<std::string> stage_urls;       // depth + 1 entries
  std::vector<std::string> stage_titles;     // depth + 1 entries
  std::vector<int> goal_link_ids;            // goal_link_ids[k] links stage k -> k+1
  std::vector<std::string> goal_link_labels;
  std::vector<TrapBranch> branches;          // sorted by attach_stage
  std::vector<std::string> branch_titles;    // flattened, branch-major
  std::string answer;

  std::size_t depth() const { return stage_urls.size() - 1; }
  std::string task_text() const;
  // "stage k of d." as written into critique details.
  std::string stage_marker(std::size_t k) const;
};

// Throws ConfigError when depth < 2 or trap_count > depth. The tag names the
// site in URLs, titles and the task text; it defaults to "trap-<seed>".
TrapSite generate_trap_site(std::uint64_t seed, std::size_t depth, std::size_t trap_count, std::string tag = {});
SiteGraph generate_trap_graph(std::uint64_t seed, std::size_t depth, std::size_t trap_count);

// Shape used by generated suites: depth in [3, 5], one or two traps.
struct TrapParams {
  std::size_t depth = 3;
  std::size_t trap_count = 1;
};
TrapParams trap_params_for_seed(std::uint64_t seed);

// Rules that play a consistent agent, critic, reverter and evaluator on one
// site. The agent is drawn into every trap first and then recovers using only
// what the prompts show it. All rules are scoped to the site tag.
std::vector<PlaybookRule> oracle_rules(const TrapSite& site);
ScriptedPlaybook oracle_playbook(const std::vector<TrapSite>& sites);

}  // namespace webnav
