#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jumpctrl/model_text.hpp"

namespace jumpctrl {

// One experiment = one model + one kind + parameters. Parsed from a
// key = value config file; CLI flags override individual keys.
struct ExperimentConfig {
  std::string kind;       // simulate | rank-openloop | solve-feedback | solve-hybrid
                          // | solve-discounted | verify-bounds | evaluate
  std::string model_ref;  // file path or builtin:<name>
  std::vector<std::int64_t> scalings;  // N sweep; empty = model's own N

  int num_paths = 100;    // M: paths for simulate/rank/bounds, DP backups for solves
  int rank_paths = 3000;  // M_rank: pipeline ranking paths (solve-hybrid)
  int eval_paths = 10000; // M_eval: policy evaluation paths
  int set_paths = 5000;   // M_ol: trajectories per good policy for the stage sets
  int stat_paths = 5000;  // M_stat: trajectories per good policy for statistics

  int n_ol = 3;
  double eps_ol = 0.05;
  double zeta = 3.0;
  double eps_near = 0.0;
  double eps_tau = 0.03;
  double alpha = 2.0;

  std::optional<std::uint64_t> seed;  // required; no wall-clock default
  int workers = 0;
  std::string method = "ssa";  // ssa | tau | ode
  std::string out_dir = "results";

  std::vector<double> z0;          // overrides the model's init
  std::vector<int> policy;         // open-loop policy (simulate / evaluate / verify-bounds)
  std::string policy_file;         // evaluate: a solve's policy CSV
  std::string policy_kind;         // "hybrid" or "feedback" for policy_file
  std::vector<double> box_low;     // density bounds of the DP hypercube
  std::vector<double> box_high;
  std::optional<double> beta;      // discount override (solve-discounted)
  double stage_width = 1.0;        // h for solve-discounted
  double vi_tol = 1e-6;
  int dump_trajectories = 0;

  void validate() const;
};

ExperimentConfig parse_experiment_config(const std::string& text);
void apply_override(ExperimentConfig& config, const std::string& key, const std::string& value);

struct ExperimentResult {
  std::string summary_json;            // pretty-printed summary document
  std::vector<std::string> files;      // paths written (summary included)
};

// Runs the configured experiment, writes CSV outputs and the summary
// into out_dir, and returns the summary. Output CSV bytes depend only on
// (config, seed), never on the worker count.
ExperimentResult run_experiment(const ExperimentConfig& config);

// Plot-ready CSV families assembled from the summaries found in
// results_dir: cost-vs-N curves, per-stage mean/std time series, and
// stage-set occupancy grids (2-species models).
std::vector<std::string> emit_figure_data(const std::string& results_dir,
                                          const std::string& out_dir);

}  // namespace jumpctrl
