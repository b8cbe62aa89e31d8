#pragma once

// Fixed inputs for the prompt golden files. Rendering them through the real
// slot builders keeps the goldens honest about section layout.

#include <string>

#include "webnav/evaluation.hpp"
#include "webnav/policy.hpp"
#include "webnav/prompts.hpp"

namespace webnav::testing {

inline const char* kGoldenTask = "Find the opening hours of the central library";

inline Trajectory golden_trajectory() {
  Trajectory t;
  NavState s0;
  s0.index = 0;
  s0.url = "http://library.example/";
  s0.obs_digest = "Home page with a search box and a Visit link";
  s0.checkpoint = true;
  s0.tried_actions = {"click [4] {Events}"};
  t.append_state(s0);
  NavState s1;
  s1.index = 1;
  s1.url = "http://library.example/visit";
  s1.obs_digest = "Visit page listing branches";
  s1.action_taken = Click{7, "Visit"};
  s1.checkpoint = true;
  s1.tried_actions = {"scroll down"};
  t.append_state(s1);
  t.add_experience({2, 0, "The Events page lists programs only, not opening hours."});
  return t;
}

inline Observation golden_observation(std::string url, std::string tree) {
  Observation obs;
  obs.url = std::move(url);
  obs.axtree = std::move(tree);
  return obs;
}

inline std::string golden_render(Role role) {
  const auto traj = golden_trajectory();
  const auto prev = golden_observation("http://library.example/visit",
                                       "RootWebArea 'Visit'\n[12] link 'Central Library'\n[13] link 'North Branch'");
  const auto next = golden_observation("http://library.example/branches/north",
                                       "RootWebArea 'North Branch'\n[21] StaticText 'Mon-Fri 10:00-18:00'");
  const Action action = Click{13, "North Branch"};
  switch (role) {
    case Role::kAction:
      return render_prompt(action_template(), action_slots(kGoldenTask, traj, prev));
    case Role::kCritique:
      return render_prompt(critique_template(), critique_slots(kGoldenTask, traj, prev, action, next));
    case Role::kRollback: {
      CritiqueVerdict verdict;
      verdict.critic = "This is the North Branch, not the central library.";
      verdict.score = 1.0;
      verdict.decision = Decision::kBack;
      return render_prompt(rollback_template(), rollback_slots(kGoldenTask, traj, action, verdict));
    }
    case Role::kEval: {
      RunTrace trace;
      trace.trajectory = traj;
      trace.final_answer = "Mon-Fri 09:00-20:00";
      trace.steps.push_back({0, "go to visit", Click{7, "Visit"}, std::nullopt, std::nullopt, false, ""});
      trace.steps.push_back({1, "done", Stop{"Mon-Fri 09:00-20:00", "read the hours"}, std::nullopt, std::nullopt,
                             false, ""});
      EvalInput input{kGoldenTask, std::nullopt, "http://library.example/"};
      return render_prompt(eval_template(), eval_slots(input, trace));
    }
  }
  return {};
}

inline std::string golden_name(Role role) { return std::string(to_string(role)) + ".txt"; }

}  // namespace webnav::testing
