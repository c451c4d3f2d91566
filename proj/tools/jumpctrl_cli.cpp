#include <CLI11.hpp>
#include <iostream>
#include <string>
#include <vector>

#include "jumpctrl/builtin.hpp"
#include "jumpctrl/experiment.hpp"
#include "jumpctrl/io.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitResourceCap = 3;
constexpr int kExitNumerical = 4;

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::string model;
  std::string out;
  std::string method;
  std::string n_list;
  std::string policy;
  long long seed = -1;
  int workers = -1;
  int num_paths = -1;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("-c,--config", args.config_path, "experiment config file");
  cmd->add_option("--set", args.overrides, "override a config key (key=value), repeatable");
  cmd->add_option("--model", args.model, "model file or builtin:<name>");
  cmd->add_option("--out", args.out, "output directory");
  cmd->add_option("--method", args.method, "ssa | tau | ode");
  cmd->add_option("--N", args.n_list, "scaling list, e.g. [100,500]");
  cmd->add_option("--policy", args.policy, "open-loop policy, e.g. (1,1,0)");
  cmd->add_option("--seed", args.seed, "RNG seed (required somewhere: flag or config)");
  cmd->add_option("--workers", args.workers, "worker threads (0 = all cores)");
  cmd->add_option("-M,--paths", args.num_paths, "paths / DP backups (meaning depends on kind)");
}

jumpctrl::ExperimentConfig build_config(const std::string& kind, const CommonArgs& args) {
  jumpctrl::ExperimentConfig config;
  if (!args.config_path.empty())
    config = jumpctrl::parse_experiment_config(jumpctrl::read_text_file(args.config_path));
  config.kind = kind;
  if (!args.model.empty()) jumpctrl::apply_override(config, "model", args.model);
  if (!args.out.empty()) jumpctrl::apply_override(config, "out", args.out);
  if (!args.method.empty()) jumpctrl::apply_override(config, "method", args.method);
  if (!args.n_list.empty()) jumpctrl::apply_override(config, "N", args.n_list);
  if (!args.policy.empty()) jumpctrl::apply_override(config, "policy", args.policy);
  if (args.seed >= 0) jumpctrl::apply_override(config, "seed", std::to_string(args.seed));
  if (args.workers >= 0) jumpctrl::apply_override(config, "workers", std::to_string(args.workers));
  if (args.num_paths >= 0) jumpctrl::apply_override(config, "M", std::to_string(args.num_paths));
  for (const std::string& kv : args.overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos) throw jumpctrl::ConfigError("--set expects key=value, got " + kv);
    jumpctrl::apply_override(config, kv.substr(0, eq), kv.substr(eq + 1));
  }
  return config;
}

int run_kind(const std::string& kind, const CommonArgs& args) {
  const jumpctrl::ExperimentConfig config = build_config(kind, args);
  const jumpctrl::ExperimentResult result = jumpctrl::run_experiment(config);
  std::cout << result.summary_json;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"controlled Markov jump processes: simulation, open-loop/feedback/hybrid policies, convergence checks"};
  app.require_subcommand(1);

  const std::vector<std::string> kinds = {"simulate",       "rank-openloop",  "solve-feedback",
                                          "solve-hybrid",   "solve-discounted", "verify-bounds",
                                          "evaluate"};
  std::vector<CommonArgs> args(kinds.size());
  for (std::size_t i = 0; i < kinds.size(); ++i)
    add_common(app.add_subcommand(kinds[i], "run a " + kinds[i] + " experiment"), args[i]);

  std::string fig_in, fig_out;
  CLI::App* figures = app.add_subcommand("emit-figures", "assemble plot-ready CSVs from results");
  figures->add_option("--results", fig_in, "directory with experiment outputs")->required();
  figures->add_option("--out", fig_out, "output directory")->required();

  CLI::App* models = app.add_subcommand("list-models", "list builtin models");

  try {
    app.parse(argc, argv);
    if (figures->parsed()) {
      for (const std::string& f : jumpctrl::emit_figure_data(fig_in, fig_out))
        std::cout << f << "\n";
      return kExitOk;
    }
    if (models->parsed()) {
      for (const std::string& name : jumpctrl::builtin_model_names()) std::cout << name << "\n";
      return kExitOk;
    }
    for (std::size_t i = 0; i < kinds.size(); ++i)
      if (app.get_subcommand(kinds[i])->parsed()) return run_kind(kinds[i], args[i]);
    return kExitConfig;
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const jumpctrl::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const jumpctrl::ResourceCapError& e) {
    std::cerr << "resource cap: " << e.what() << "\n";
    return kExitResourceCap;
  } catch (const jumpctrl::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
}
