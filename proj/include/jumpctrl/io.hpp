#pragma once

#include <string>

#include "jumpctrl/bounds.hpp"
#include "jumpctrl/feedback.hpp"
#include "jumpctrl/hybrid.hpp"
#include "jumpctrl/odelimit.hpp"
#include "jumpctrl/openloop.hpp"
#include "jumpctrl/simulate.hpp"

namespace jumpctrl {

// shortest round-trippable decimal form
std::string csv_number(double v);

std::string policy_string(const std::vector<int>& policy);
std::vector<int> parse_policy_string(const std::string& text);

// time,species...,control_index; one row per event plus the initial row
std::string trajectory_csv(const Trajectory& traj, const JumpModel& model,
                           const StagedHorizon& horizon);

// dense ODE output: time,z_1,...,z_n,control_index
std::string ode_path_csv(const OdePath& path, const JumpModel& model);

// rank,policy,cost,stderr,method,M
std::string ranking_csv(const PolicyRanking& ranking);

// stage,state_components...,value,argmin_control (argmin blank at stage K)
std::string value_table_csv(const ValueTable& table, const JumpModel& model);

// stage,state_components...
std::string stage_sets_csv(const StageStateSets& sets, const JumpModel& model);

// header comments carry the fallback policy, eps_near and scaling;
// rows are stage,state_components...,control_index
std::string hybrid_policy_csv(const HybridPolicy& policy, const JumpModel& model);
HybridPolicy parse_hybrid_policy_csv(const std::string& text, const JumpModel& model);

// feedback policy with its hypercube in header comments
std::string feedback_policy_csv(const FeedbackPolicy& policy, const JumpModel& model);
FeedbackPolicy parse_feedback_policy_csv(const std::string& text, const JumpModel& model);

// N,C_TN,empirical_sup_err,bound,slope_window
std::string bounds_csv(const KurtzReport& report);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

}  // namespace jumpctrl
