#include "jumpctrl/experiment.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <json.hpp>
#include <sstream>

#include "jumpctrl/builtin.hpp"
#include "jumpctrl/hybrid.hpp"
#include "jumpctrl/io.hpp"

namespace jumpctrl {

using nlohmann::json;

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<double> parse_number_list(const std::string& raw) {
  std::vector<double> out;
  std::string cur;
  for (char c : raw + ",") {
    if (c == '[' || c == ']' || c == '(' || c == ')' || std::isspace(static_cast<unsigned char>(c)))
      continue;
    if (c == ',') {
      if (!cur.empty()) out.push_back(std::stod(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  return out;
}

double parse_double(const std::string& raw, const std::string& key) {
  try {
    return std::stod(trim(raw));
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + raw + "'");
  }
}

int parse_int(const std::string& raw, const std::string& key) {
  const double v = parse_double(raw, key);
  if (v != std::floor(v)) throw ConfigError("config key '" + key + "': expected an integer");
  return static_cast<int>(v);
}

}  // namespace

void ExperimentConfig::validate() const {
  static const std::vector<std::string> kinds = {
      "simulate",      "rank-openloop",    "solve-feedback", "solve-hybrid",
      "solve-discounted", "verify-bounds", "evaluate"};
  if (std::find(kinds.begin(), kinds.end(), kind) == kinds.end())
    throw ConfigError("unknown experiment kind: '" + kind + "'");
  if (model_ref.empty()) throw ConfigError("config is missing 'model'");
  if (!seed.has_value()) throw ConfigError("config is missing 'seed' (no wall-clock default)");
  if (method != "ssa" && method != "tau" && method != "ode")
    throw ConfigError("method must be ssa, tau or ode");
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ConfigError(std::string(name) + " must be positive");
  };
  positive(num_paths, "M");
  positive(rank_paths, "M_rank");
  positive(eval_paths, "M_eval");
  positive(set_paths, "M_ol");
  positive(stat_paths, "M_stat");
  positive(n_ol, "n_ol");
  if (eps_ol < 0 || eps_near < 0 || eps_tau <= 0 || zeta <= 0)
    throw ConfigError("eps_ol/eps_near must be >= 0, eps_tau/zeta > 0");
  if (workers < 0) throw ConfigError("workers must be >= 0");
}

void apply_override(ExperimentConfig& c, const std::string& key, const std::string& raw) {
  const std::string value = trim(raw);
  if (key == "kind") c.kind = value;
  else if (key == "model") c.model_ref = value;
  else if (key == "N") {
    c.scalings.clear();
    for (double v : parse_number_list(value)) c.scalings.push_back(static_cast<std::int64_t>(v));
  } else if (key == "M") c.num_paths = parse_int(value, key);
  else if (key == "M_rank") c.rank_paths = parse_int(value, key);
  else if (key == "M_eval") c.eval_paths = parse_int(value, key);
  else if (key == "M_ol") c.set_paths = parse_int(value, key);
  else if (key == "M_stat") c.stat_paths = parse_int(value, key);
  else if (key == "n_ol") c.n_ol = parse_int(value, key);
  else if (key == "eps_ol") c.eps_ol = parse_double(value, key);
  else if (key == "zeta") c.zeta = parse_double(value, key);
  else if (key == "eps_near") c.eps_near = parse_double(value, key);
  else if (key == "eps_tau") c.eps_tau = parse_double(value, key);
  else if (key == "alpha") c.alpha = parse_double(value, key);
  else if (key == "seed") c.seed = static_cast<std::uint64_t>(std::stoull(value));
  else if (key == "workers") c.workers = parse_int(value, key);
  else if (key == "method") c.method = value;
  else if (key == "out") c.out_dir = value;
  else if (key == "z0") c.z0 = parse_number_list(value);
  else if (key == "policy") c.policy = parse_policy_string(value);
  else if (key == "policy_file") c.policy_file = value;
  else if (key == "policy_kind") c.policy_kind = value;
  else if (key == "box_low") c.box_low = parse_number_list(value);
  else if (key == "box_high") c.box_high = parse_number_list(value);
  else if (key == "beta") c.beta = parse_double(value, key);
  else if (key == "h") c.stage_width = parse_double(value, key);
  else if (key == "vi_tol") c.vi_tol = parse_double(value, key);
  else if (key == "dump_trajectories") c.dump_trajectories = parse_int(value, key);
  else throw ConfigError("unknown config key: '" + key + "'");
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    try {
      apply_override(config, trim(line.substr(0, eq)), line.substr(eq + 1));
    } catch (const ConfigError& err) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + err.what());
    }
  }
  return config;
}

namespace {

struct LoadedModel {
  ParsedModel parsed;
  std::string name;
};

LoadedModel load_model(const ExperimentConfig& config) {
  static const std::string builtin_prefix = "builtin:";
  LoadedModel out{config.model_ref.rfind(builtin_prefix, 0) == 0
                      ? builtin_model(config.model_ref.substr(builtin_prefix.size()))
                      : parse_model(read_text_file(config.model_ref)),
                  ""};
  out.name = out.parsed.model.name();
  return out;
}

std::vector<double> initial_density(const ExperimentConfig& config, const ParsedModel& parsed) {
  if (!config.z0.empty()) return config.z0;
  if (parsed.init_density) return *parsed.init_density;
  throw ConfigError("no initial density: set z0 in the config or init: in the model");
}

SimMethod sim_method(const ExperimentConfig& config) {
  if (config.method == "tau") return SimMethod::TauLeap;
  return SimMethod::Ssa;
}

RankMethod rank_method(const ExperimentConfig& config) {
  if (config.method == "tau") return RankMethod::McTauLeap;
  if (config.method == "ode") return RankMethod::Ode;
  return RankMethod::McSsa;
}

double seconds_since(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string iso_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
  return buf;
}

TruncatedSpace config_space(const ExperimentConfig& config, const JumpModel& model) {
  if (config.box_low.empty() || config.box_high.empty())
    throw ConfigError("this experiment needs box_low/box_high density bounds");
  return TruncatedSpace::from_density(model, config.box_low, config.box_high);
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const auto wall0 = std::chrono::steady_clock::now();
  LoadedModel loaded = load_model(config);
  const StagedHorizon& horizon = loaded.parsed.horizon;
  const CostSpec& cost = loaded.parsed.cost;
  const std::uint64_t seed = *config.seed;

  std::vector<std::int64_t> scalings = config.scalings;
  if (scalings.empty()) scalings.push_back(loaded.parsed.model.scaling());

  ExperimentResult result;
  json summary;
  summary["kind"] = config.kind;
  summary["model"] = loaded.name;
  summary["seed"] = seed;
  summary["method"] = config.method;
  json results = json::object();
  json runtimes = json::object();

  const std::filesystem::path out_dir(config.out_dir);
  auto emit = [&](const std::string& name, const std::string& content) {
    const std::string path = (out_dir / name).string();
    write_text_file(path, content);
    result.files.push_back(path);
  };

  for (std::int64_t N : scalings) {
    const auto t0 = std::chrono::steady_clock::now();
    const JumpModel model = loaded.parsed.model.with_scaling(N);
    const std::vector<double> z0 = initial_density(config, loaded.parsed);
    const std::string tag = "N=" + std::to_string(N);
    json r;

    if (config.kind == "simulate") {
      if (config.policy.empty()) throw ConfigError("simulate needs an open-loop policy");
      const Policy policy = OpenLoopPolicy{config.policy};
      const McEstimate est = mc_cost_estimate(model, policy, cost, horizon, z0, config.num_paths,
                                              seed, sim_method(config), config.eps_tau,
                                              config.workers);
      r["cost_mean"] = est.mean;
      r["cost_stderr"] = est.stderr_;
      r["mean_step"] = est.time_simulated / static_cast<double>(est.total_steps);
      r["steps"] = est.total_steps;
      for (int d = 0; d < config.dump_trajectories; ++d) {
        RngStream rng(seed, stream_index(phase::kSimulate, static_cast<std::uint64_t>(N),
                                         static_cast<std::uint64_t>(d)));
        const Trajectory traj =
            sim_method(config) == SimMethod::Ssa
                ? simulate_ssa(model, policy, horizon, z0, rng)
                : simulate_tau_leap(model, policy, horizon, z0, rng, config.eps_tau);
        emit("trajectory_N" + std::to_string(N) + "_" + std::to_string(d) + ".csv",
             trajectory_csv(traj, model, horizon));
      }
      // per-stage density statistics for figure data
      std::vector<RankedPolicy> self = {{config.policy, est.mean, est.stderr_}};
      const StageStatistics stats =
          stage_statistics(model, self, horizon, z0, std::max(2, config.num_paths), seed,
                           sim_method(config), config.eps_tau, config.workers);
      json stages = json::array();
      for (int j = 0; j < horizon.num_stages(); ++j) {
        json s;
        s["t"] = horizon.stage_times[static_cast<std::size_t>(j)];
        s["mean"] = stats.policies[0].mean[static_cast<std::size_t>(j)];
        s["std"] = stats.policies[0].stddev[static_cast<std::size_t>(j)];
        stages.push_back(s);
      }
      r["stage_stats"] = stages;
    } else if (config.kind == "rank-openloop") {
      const PolicyRanking ranking =
          rank_policies(model, horizon, cost, z0, config.num_paths, seed, rank_method(config),
                        config.eps_tau, config.workers);
      emit("ranking_N" + std::to_string(N) + ".csv", ranking_csv(ranking));
      r["best_policy"] = policy_string(ranking.best().policy);
      r["best_cost"] = ranking.best().cost;
      r["best_stderr"] = ranking.best().stderr_;
      r["policies"] = ranking.entries.size();
    } else if (config.kind == "solve-feedback") {
      const TruncatedSpace space = config_space(config, model);
      FeedbackSolveOptions options;
      options.num_paths = config.num_paths;
      options.seed = seed;
      options.method = sim_method(config);
      options.eps_tau = config.eps_tau;
      options.workers = config.workers;
      const FeedbackSolution sol = solve_feedback_dp(model, horizon, cost, space, options);
      emit("value_table_N" + std::to_string(N) + ".csv", value_table_csv(sol.table, model));
      emit("feedback_policy_N" + std::to_string(N) + ".csv",
           feedback_policy_csv(sol.policy, model));
      const McEstimate est =
          mc_cost_estimate(model, Policy{sol.policy}, cost, horizon, z0, config.eval_paths, seed,
                           sim_method(config), config.eps_tau, config.workers, 1);
      r["cost_mean"] = est.mean;
      r["cost_stderr"] = est.stderr_;
      r["capped_backups"] = sol.capped_backups;
      r["regenerated_paths"] = sol.regenerated_paths;
      r["states"] = space.size();
      r["value_at_start"] = sol.table.values[0][space.rank(state_from_density(model, z0))];
    } else if (config.kind == "solve-hybrid") {
      const PolicyRanking ranking =
          rank_policies(model, horizon, cost, z0, config.rank_paths, seed, rank_method(config),
                        config.eps_tau, config.workers);
      emit("ranking_N" + std::to_string(N) + ".csv", ranking_csv(ranking));
      const std::vector<RankedPolicy> good = good_policies(ranking, config.n_ol, config.eps_ol);
      const StageStatistics stats =
          stage_statistics(model, good, horizon, z0, config.stat_paths, seed, sim_method(config),
                           config.eps_tau, config.workers);
      auto sets = std::make_shared<StageStateSets>(
          build_stage_sets(model, good, stats, horizon, z0, config.set_paths, config.zeta, seed,
                           sim_method(config), config.eps_tau, config.workers));
      emit("stage_sets_N" + std::to_string(N) + ".csv", stage_sets_csv(*sets, model));
      HybridSolveOptions options;
      options.num_paths = config.num_paths;
      options.eps_near = config.eps_near;
      options.seed = seed;
      options.method = sim_method(config);
      options.eps_tau = config.eps_tau;
      options.workers = config.workers;
      const HybridSolution sol = solve_hybrid_dp(model, horizon, cost, sets,
                                                 OpenLoopPolicy{ranking.best().policy}, options);
      emit("hybrid_policy_N" + std::to_string(N) + ".csv", hybrid_policy_csv(sol.policy, model));
      const HybridEvaluation eval =
          evaluate_hybrid(model, sol.policy, horizon, cost, z0, config.eval_paths, seed,
                          sim_method(config), config.eps_tau, config.workers);
      r["cost_mean"] = eval.cost_mean;
      r["cost_stderr"] = eval.cost_stderr;
      r["r_ol"] = eval.r_openloop;
      r["r_near"] = eval.r_near;
      r["eps_near"] = config.eps_near;
      r["good_policies"] = good.size();
      r["fallback"] = policy_string(ranking.best().policy);
      std::size_t min_set = 0, max_set = 0;
      for (int j = 1; j < sets->num_stages(); ++j) {
        const std::size_t sz = sets->stages[static_cast<std::size_t>(j)].size();
        if (j == 1 || sz < min_set) min_set = sz;
        if (j == 1 || sz > max_set) max_set = sz;
      }
      r["min_set_size"] = min_set;
      r["max_set_size"] = max_set;
    } else if (config.kind == "solve-discounted") {
      const TruncatedSpace space = config_space(config, model);
      CostSpec discounted = cost;
      if (config.beta) discounted.discount = *config.beta;
      DiscountedSolveOptions options;
      options.num_paths = config.num_paths;
      options.seed = seed;
      options.method = sim_method(config);
      options.eps_tau = config.eps_tau;
      options.workers = config.workers;
      options.tol = config.vi_tol;
      const DiscountedSolution sol =
          solve_discounted_vi(model, discounted, config.stage_width, space, options);
      std::ostringstream os;
      os << "state_components...,value,control\n";
      for (std::size_t s = 0; s < space.size(); ++s) {
        const State x = space.state(s);
        for (std::size_t i = 0; i < x.size(); ++i) os << (i ? "," : "") << x[i];
        os << "," << csv_number(sol.values[s]) << "," << sol.policy[s] << "\n";
      }
      emit("discounted_policy_N" + std::to_string(N) + ".csv", os.str());
      r["sweeps"] = sol.sweeps;
      r["final_change"] = sol.sweep_changes.back();
      r["value_at_start"] = sol.values[space.rank(space.clamp(state_from_density(model, z0)))];
    } else if (config.kind == "verify-bounds") {
      if (config.policy.empty()) throw ConfigError("verify-bounds needs an open-loop policy");
      const KurtzReport report = verify_kurtz(model, config.policy, horizon, z0, scalings,
                                              config.num_paths, seed, config.alpha,
                                              config.workers);
      emit("bounds.csv", bounds_csv(report));
      const MartingaleCheck mart = verify_martingale(model, config.policy, horizon, z0,
                                                     config.num_paths, seed, config.workers);
      json rows = json::array();
      bool all_below = true;
      for (const KurtzRow& row : report.rows) {
        json jr;
        jr["N"] = row.scaling;
        jr["empirical"] = row.empirical_sup_error;
        jr["bound"] = row.bound;
        jr["C_TN"] = row.c_tn;
        jr["exit_probability"] = row.exit_probability;
        jr["exit_bound"] = row.exit_bound;
        all_below = all_below && row.empirical_sup_error <= row.bound;
        rows.push_back(jr);
      }
      r["rows"] = rows;
      r["slope"] = report.slope;
      r["bound_satisfied"] = all_below;
      json mj;
      mj["mean"] = mart.mean;
      mj["stderr"] = mart.stderr_;
      r["martingale"] = mj;
      results[tag] = r;
      runtimes[tag] = seconds_since(t0);
      break;  // the N sweep happens inside verify_kurtz
    } else if (config.kind == "evaluate") {
      Policy policy;
      std::string kind_label;
      if (!config.policy_file.empty()) {
        const std::string text = read_text_file(config.policy_file);
        if (config.policy_kind == "feedback") {
          policy = parse_feedback_policy_csv(text, model);
          kind_label = "feedback";
        } else {
          policy = parse_hybrid_policy_csv(text, model);
          kind_label = "hybrid";
        }
      } else if (!config.policy.empty()) {
        policy = OpenLoopPolicy{config.policy};
        kind_label = "openloop";
      } else {
        throw ConfigError("evaluate needs policy or policy_file");
      }
      const McEstimate est = mc_cost_estimate(model, policy, cost, horizon, z0, config.eval_paths,
                                              seed, sim_method(config), config.eps_tau,
                                              config.workers);
      r["cost_mean"] = est.mean;
      r["cost_stderr"] = est.stderr_;
      r["policy_kind"] = kind_label;
      const double decisions =
          static_cast<double>(horizon.num_stages()) * static_cast<double>(config.eval_paths);
      r["r_ol"] = static_cast<double>(est.tag_counts[2]) / decisions;
      r["r_near"] = static_cast<double>(est.tag_counts[1]) / decisions;
    }

    results[tag] = r;
    runtimes[tag] = seconds_since(t0);
  }

  summary["results"] = results;
  summary["runtime_seconds"] = runtimes;
  summary["runtime_total"] = seconds_since(wall0);
  summary["generated_at"] = iso_timestamp();
  result.summary_json = summary.dump(2) + "\n";
  const std::string summary_path = (out_dir / "summary.json").string();
  write_text_file(summary_path, result.summary_json);
  result.files.push_back(summary_path);
  return result;
}

std::vector<std::string> emit_figure_data(const std::string& results_dir,
                                          const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  std::vector<fs::path> summaries;
  std::vector<fs::path> set_csvs;
  if (fs::exists(results_dir)) {
    for (const auto& entry : fs::recursive_directory_iterator(results_dir)) {
      if (!entry.is_regular_file()) continue;
      const std::string name = entry.path().filename().string();
      if (name == "summary.json") summaries.push_back(entry.path());
      if (name.rfind("stage_sets_", 0) == 0) set_csvs.push_back(entry.path());
    }
  }
  std::sort(summaries.begin(), summaries.end());
  std::sort(set_csvs.begin(), set_csvs.end());

  // cost vs N
  std::ostringstream cost_csv;
  cost_csv << "N,policy_kind,cost,stderr\n";
  std::ostringstream series_csv;
  series_csv << "t,species,mean,std,N,policy_kind\n";
  for (const fs::path& path : summaries) {
    json doc = json::parse(read_text_file(path.string()));
    const std::string kind = doc.value("kind", "");
    if (!doc.contains("results")) continue;
    for (const auto& [tag, r] : doc["results"].items()) {
      if (tag.rfind("N=", 0) != 0) continue;
      const std::string N = tag.substr(2);
      std::string label = kind;
      if (kind == "solve-hybrid")
        label = "hybrid_eps" + csv_number(r.value("eps_near", 0.0));
      else if (kind == "rank-openloop")
        label = "openloop_best";
      else if (kind == "solve-feedback")
        label = "feedback";
      else if (kind == "evaluate")
        label = "evaluate_" + r.value("policy_kind", "");
      if (r.contains("cost_mean"))
        cost_csv << N << "," << label << "," << csv_number(r["cost_mean"].get<double>()) << ","
                 << csv_number(r.value("cost_stderr", 0.0)) << "\n";
      else if (r.contains("best_cost"))
        cost_csv << N << "," << label << "," << csv_number(r["best_cost"].get<double>()) << ","
                 << csv_number(r.value("best_stderr", 0.0)) << "\n";
      if (r.contains("stage_stats")) {
        for (const auto& s : r["stage_stats"]) {
          const auto& mean = s["mean"];
          const auto& stddev = s["std"];
          for (std::size_t i = 0; i < mean.size(); ++i)
            series_csv << csv_number(s["t"].get<double>()) << "," << i << ","
                       << csv_number(mean[i].get<double>()) << ","
                       << csv_number(stddev[i].get<double>()) << "," << N << "," << label << "\n";
        }
      }
    }
  }
  const fs::path out(out_dir);
  write_text_file((out / "cost_vs_N.csv").string(), cost_csv.str());
  files.push_back((out / "cost_vs_N.csv").string());
  write_text_file((out / "mean_std_vs_time.csv").string(), series_csv.str());
  files.push_back((out / "mean_std_vs_time.csv").string());

  // stage-set occupancy grid (two-species models): how many sets S_j
  // contain each state
  std::ostringstream occ;
  occ << "x1,x2,count_of_sets_containing\n";
  for (const fs::path& set_path : set_csvs) {
    std::map<std::pair<std::int64_t, std::int64_t>, int> counts;
    std::istringstream in(read_text_file(set_path.string()));
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
      long stage = 0, x1 = 0, x2 = 0;
      if (std::sscanf(line.c_str(), "%ld,%ld,%ld", &stage, &x1, &x2) == 3)
        counts[{x1, x2}] += 1;
    }
    if (counts.empty()) continue;  // not a two-species dump
    for (const auto& [xy, count] : counts)
      occ << xy.first << "," << xy.second << "," << count << "\n";
    break;
  }
  write_text_file((out / "occupancy.csv").string(), occ.str());
  files.push_back((out / "occupancy.csv").string());
  return files;
}

}  // namespace jumpctrl
