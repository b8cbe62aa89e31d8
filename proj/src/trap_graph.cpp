#include "webnav/trap_graph.hpp"

#include <algorithm>
#include <cstdio>
#include <random>

#include "webnav/errors.hpp"
#include "webnav/prompts.hpp"

namespace webnav {

namespace {

constexpr const char* kGoalLabels[] = {"Continue", "Next section", "Proceed", "Details"};
constexpr const char* kTrapLabels[] = {"Special offers", "Top deals", "Recommended for you", "Sponsored picks"};

std::string click_text(int id, const std::string& label) {
  return "click [" + std::to_string(id) + "] {" + label + "}";
}

// Prefix that identifies a click on `id` regardless of its label.
std::string click_prefix(int id) { return "click [" + std::to_string(id) + "] {"; }

std::string root_marker(const std::string& title) { return "RootWebArea '" + title + "'"; }

}  // namespace

std::string TrapSite::task_text() const {
  return "Find the answer code shown on the final page of the main path (site " + tag + ")";
}

std::string TrapSite::stage_marker(std::size_t k) const {
  return "stage " + std::to_string(k) + " of " + std::to_string(depth()) + ".";
}

TrapParams trap_params_for_seed(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  TrapParams p;
  p.depth = 3 + rng() % 3;
  p.trap_count = 1 + rng() % 2;
  return p;
}

TrapSite generate_trap_site(std::uint64_t seed, std::size_t depth, std::size_t trap_count, std::string tag) {
  if (depth < 2) throw ConfigError("trap site depth must be at least 2");
  if (trap_count > depth) throw ConfigError("trap count cannot exceed depth");

  std::mt19937_64 rng(seed);
  TrapSite site;
  site.seed = seed;
  site.tag = tag.empty() ? "trap-" + std::to_string(seed) : std::move(tag);
  const std::string base = "http://" + site.tag + ".sim";

  std::vector<std::size_t> stages(depth);
  for (std::size_t i = 0; i < depth; ++i) stages[i] = i;
  for (std::size_t i = 0; i < trap_count; ++i) {
    std::size_t j = i + rng() % (depth - i);
    std::swap(stages[i], stages[j]);
  }
  std::vector<std::size_t> attach(stages.begin(), stages.begin() + static_cast<std::ptrdiff_t>(trap_count));
  std::sort(attach.begin(), attach.end());

  site.branches.resize(trap_count);
  for (std::size_t b = 0; b < trap_count; ++b) {
    auto& br = site.branches[b];
    br.attach_stage = attach[b];
    std::size_t len = 2 + rng() % 2;
    for (std::size_t j = 1; j <= len; ++j) {
      br.urls.push_back(base + "/branch/" + std::to_string(b) + "/" + std::to_string(j));
      site.branch_titles.push_back(site.tag + " offers " + std::to_string(b) + "." + std::to_string(j));
    }
  }

  char hex[16];
  std::snprintf(hex, sizeof hex, "%06llx", static_cast<unsigned long long>(rng() & 0xffffffULL));
  site.answer = "ANS-" + std::to_string(seed) + "-" + hex;

  int next_id = 1;
  auto add = [&](Page& page, ElementKind kind, std::string label, std::optional<Transition> tr = std::nullopt) {
    int id = next_id++;
    page.elements[id] = Element{id, kind, std::move(label), 0, std::move(tr)};
    return id;
  };

  std::vector<Page> pages;
  for (std::size_t k = 0; k <= depth; ++k) {
    site.stage_urls.push_back(base + "/stage/" + std::to_string(k));
    site.stage_titles.push_back(site.tag + " stage " + std::to_string(k));
  }
  for (std::size_t k = 0; k <= depth; ++k) {
    Page page{site.stage_urls[k], site.stage_titles[k], {}, {}};
    if (k == 0) add(page, ElementKind::kTextbox, "Search");
    if (k == depth) {
      add(page, ElementKind::kStatic, "Answer: " + site.answer);
    } else {
      add(page, ElementKind::kStatic, "Section " + std::to_string(k + 1) + " overview");
      std::string goal_label = kGoalLabels[rng() % 4];
      Transition to_next{Transition::On::kClick, site.stage_urls[k + 1]};
      auto branch = std::find_if(site.branches.begin(), site.branches.end(),
                                 [&](const TrapBranch& br) { return br.attach_stage == k; });
      if (branch == site.branches.end()) {
        site.goal_link_ids.push_back(add(page, ElementKind::kLink, goal_label, to_next));
      } else {
        std::string trap_label = kTrapLabels[rng() % 4];
        Transition to_trap{Transition::On::kClick, branch->urls.front()};
        if (rng() % 2 == 0) {
          branch->entry_id = add(page, ElementKind::kLink, trap_label, to_trap);
          site.goal_link_ids.push_back(add(page, ElementKind::kLink, goal_label, to_next));
        } else {
          site.goal_link_ids.push_back(add(page, ElementKind::kLink, goal_label, to_next));
          branch->entry_id = add(page, ElementKind::kLink, trap_label, to_trap);
        }
      }
      site.goal_link_labels.push_back(goal_label);
    }
    page.windows = {render_window(page, 0)};
    pages.push_back(std::move(page));
  }

  std::set<std::string> traps;
  std::size_t title_idx = 0;
  for (auto& br : site.branches) {
    for (std::size_t j = 0; j < br.urls.size(); ++j) {
      Page page{br.urls[j], site.branch_titles[title_idx++], {}, {}};
      if (j + 1 < br.urls.size()) {
        add(page, ElementKind::kStatic, "Limited time offers");
        br.forward_ids.push_back(
            add(page, ElementKind::kLink, "More offers", Transition{Transition::On::kClick, br.urls[j + 1]}));
      } else {
        add(page, ElementKind::kStatic, "No offers available");
      }
      page.windows = {render_window(page, 0)};
      traps.insert(br.urls[j]);
      pages.push_back(std::move(page));
    }
  }

  Goal goal;
  goal.urls = {site.stage_urls.back()};
  site.graph = std::make_shared<const SiteGraph>(std::move(pages), site.stage_urls.front(), std::move(goal),
                                                 std::move(traps));
  return site;
}

SiteGraph generate_trap_graph(std::uint64_t seed, std::size_t depth, std::size_t trap_count) {
  return *generate_trap_site(seed, depth, trap_count).graph;
}

std::vector<PlaybookRule> oracle_rules(const TrapSite& site) {
  using H = std::string;
  const std::string scope = "(site " + site.tag + ")";
  const std::size_t d = site.depth();
  std::vector<PlaybookRule> rules;

  auto rule = [&](Role role, std::vector<MatchCondition> when, std::string response) {
    H scope_header(role == Role::kEval ? headers::kEvalTask : headers::kTask);
    when.insert(when.begin(), MatchCondition{scope_header, scope});
    rules.push_back(PlaybookRule{role, std::move(when), std::move(response)});
  };
  auto on_page = [](std::string_view header, const std::string& title) {
    return MatchCondition{H(header), root_marker(title)};
  };
  auto anywhere = [](std::string text) { return MatchCondition{std::nullopt, std::move(text)}; };
  auto tried = [](std::string text) { return MatchCondition{H(headers::kTryings), std::move(text)}; };
  auto act = [](const std::string& thought, const std::string& action) {
    return "FirstThought: " + thought + "\nSecondThought: Checked the trace and tryings.\nThought: " + thought +
           "\nAction: " + action;
  };
  const std::string give_up = "stop [N/A] (explored the offers pages and could not find the answer)";

  // Action module.
  rule(Role::kAction, {on_page(headers::kAxtree, site.stage_titles[d])},
       act("The answer code is on this page.",
           "stop [" + site.answer + "] (followed the main path links to the final page)"));
  std::size_t title_idx = 0;
  for (const auto& br : site.branches) {
    for (std::size_t j = 0; j < br.urls.size(); ++j) {
      const auto& title = site.branch_titles[title_idx++];
      const auto page = on_page(headers::kAxtree, title);
      rule(Role::kAction, {page, tried("restart")}, act("Nothing left to try here.", give_up));
      if (j + 1 < br.urls.size()) {
        const int fwd = br.forward_ids[j];
        rule(Role::kAction, {page, anywhere(click_prefix(fwd)), tried("goback")},
             act("These offers lead nowhere, start over.", "restart"));
        rule(Role::kAction, {page, anywhere(click_prefix(fwd))}, act("Already followed these offers.", "goback"));
        rule(Role::kAction, {page}, act("More offers might contain the code.", click_text(fwd, "More offers")));
      } else {
        rule(Role::kAction, {page, tried("goback")}, act("Going back did not help, start over.", "restart"));
        rule(Role::kAction, {page}, act("Dead end, go back.", "goback"));
      }
    }
  }
  for (std::size_t k = 0; k < d; ++k) {
    const auto page = on_page(headers::kAxtree, site.stage_titles[k]);
    const auto goal_click = click_text(site.goal_link_ids[k], site.goal_link_labels[k]);
    auto branch = std::find_if(site.branches.begin(), site.branches.end(),
                               [&](const TrapBranch& br) { return br.attach_stage == k; });
    if (branch != site.branches.end()) {
      rule(Role::kAction, {page, anywhere(click_prefix(branch->entry_id))},
           act("The offers were already explored, use the main link.", goal_click));
      const auto& entry_label = site.graph->page(site.stage_urls[k]).elements.at(branch->entry_id).label;
      rule(Role::kAction, {page}, act("The offers look promising.", click_text(branch->entry_id, entry_label)));
    }
    rule(Role::kAction, {page}, act("Follow the main link.", goal_click));
  }

  // Critique module.
  auto verdict = [](const std::string& details, double score, bool back) {
    char buf[8];
    std::snprintf(buf, sizeof buf, "%.1f", score);
    return "Observation: The page changed.\nDetails: " + details + "\nCritic: " +
           (back ? "This state is not promising." : "Reasonable progress.") + "\nScore: " + buf +
           "\nAction: " + (back ? "back" : "continue");
  };
  for (std::size_t k = 0; k <= d; ++k) {
    rule(Role::kCritique, {on_page(headers::kNewObservation, site.stage_titles[k])},
         verdict("Now at " + site.stage_marker(k) + (k == d ? " The answer code is shown." : ""), k == d ? 5.0 : 3.0,
                 false));
  }
  title_idx = 0;
  for (const auto& br : site.branches) {
    for (std::size_t j = 0; j < br.urls.size(); ++j) {
      const auto page = on_page(headers::kNewObservation, site.branch_titles[title_idx++]);
      if (j + 1 < br.urls.size()) {
        rule(Role::kCritique, {page, MatchCondition{H(headers::kActionToEvaluate), "goback"}},
             verdict("Back on an offers page that was already explored.", 1.0, true));
        rule(Role::kCritique, {page}, verdict("An offers page with more offers.", 4.0, false));
      } else {
        rule(Role::kCritique, {page}, verdict("No useful information", 1.0, true));
      }
    }
  }

  // Rollback module.
  for (const auto& br : site.branches) {
    const int last_fwd = br.forward_ids.back();
    rule(Role::kRollback, {MatchCondition{H(headers::kRecentAction), click_prefix(last_fwd)}},
         "Analysis: The offers branch ended without the answer.\nBackIdx: <" + std::to_string(br.attach_stage) +
             ">\nExperience: The offers from stage " + std::to_string(br.attach_stage) +
             " end in a dead end; the main path link leads on.");
  }

  // Evaluator.
  rule(Role::kEval, {MatchCondition{H(headers::kEvalResponse), site.answer}},
       "Summary: Reached the final page.\nThought: The answer matches.\nCriteria: answer code found (met)\nScore: 1.0");
  rule(Role::kEval, {MatchCondition{H(headers::kEvalTrajectory), site.stage_marker(d - 1)}},
       "Summary: Got close to the final page.\nThought: Partial progress.\nCriteria: answer code found (not met)\n"
       "Score: 0.5");
  rule(Role::kEval, {},
       "Summary: Little progress.\nThought: No answer.\nCriteria: answer code found (not met)\nScore: 0.0");
  return rules;
}

ScriptedPlaybook oracle_playbook(const std::vector<TrapSite>& sites) {
  std::vector<PlaybookRule> rules;
  for (const auto& site : sites) {
    auto r = oracle_rules(site);
    rules.insert(rules.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
  }
  return ScriptedPlaybook(std::move(rules), ScriptedPlaybook::standard_defaults());
}

}  // namespace webnav
