#include <doctest.h>

#include <cstdlib>
#include <filesystem>

#include "jumpctrl/experiment.hpp"
#include "jumpctrl/io.hpp"

using namespace jumpctrl;
namespace fs = std::filesystem;

namespace {

std::string tmp_dir(const std::string& leaf) {
  const fs::path p = fs::temp_directory_path() / "jumpctrl_tests" / leaf;
  fs::remove_all(p);
  fs::create_directories(p);
  return p.string();
}

ExperimentConfig tiny_rank_config(const std::string& out) {
  ExperimentConfig c;
  c.kind = "rank-openloop";
  c.model_ref = "builtin:birth_death_A1";
  c.scalings = {40};
  c.num_paths = 300;
  c.seed = 777;
  c.out_dir = out;
  return c;
}

}  // namespace

TEST_CASE("experiment config: parsing and validation") {
  const ExperimentConfig c = parse_experiment_config(
      "kind = rank-openloop\nmodel = builtin:birth_death_A1\nN = [40, 100]\n"
      "M = 500\nseed = 9\nout = /tmp/x\nmethod = tau\neps_near = 0.02\n");
  CHECK(c.kind == "rank-openloop");
  CHECK(c.scalings == std::vector<std::int64_t>{40, 100});
  CHECK(c.num_paths == 500);
  CHECK(c.method == "tau");
  CHECK(c.eps_near == 0.02);
  c.validate();

  // missing seed is a validation error
  ExperimentConfig no_seed = c;
  no_seed.seed.reset();
  CHECK_THROWS_AS(no_seed.validate(), ConfigError);
  // unknown keys and kinds
  CHECK_THROWS_AS(parse_experiment_config("bogus = 1\n"), ConfigError);
  ExperimentConfig bad_kind = c;
  bad_kind.kind = "optimize";
  CHECK_THROWS_AS(bad_kind.validate(), ConfigError);
  ExperimentConfig bad_m = c;
  bad_m.num_paths = 0;
  CHECK_THROWS_AS(bad_m.validate(), ConfigError);
}

TEST_CASE("run_experiment: byte-identical CSVs across reruns and worker counts") {
  const std::string out1 = tmp_dir("det1");
  const std::string out2 = tmp_dir("det2");
  const std::string out3 = tmp_dir("det3");
  ExperimentConfig c1 = tiny_rank_config(out1);
  c1.workers = 1;
  ExperimentConfig c2 = tiny_rank_config(out2);
  c2.workers = 2;
  ExperimentConfig c3 = tiny_rank_config(out3);
  c3.workers = 2;
  run_experiment(c1);
  run_experiment(c2);
  run_experiment(c3);
  const std::string a = read_text_file(out1 + "/ranking_N40.csv");
  const std::string b = read_text_file(out2 + "/ranking_N40.csv");
  const std::string c = read_text_file(out3 + "/ranking_N40.csv");
  CHECK(a == b);  // worker-count invariance
  CHECK(b == c);  // rerun determinism
  CHECK(a.rfind("rank,policy,cost,stderr,method,M\n", 0) == 0);
}

TEST_CASE("run_experiment: builtin birth-death ranking finds (1,1,0) at N=100") {
  const std::string out = tmp_dir("bd_rank");
  ExperimentConfig c = tiny_rank_config(out);
  c.scalings = {100};
  c.num_paths = 2000;
  const ExperimentResult res = run_experiment(c);
  const std::string csv = read_text_file(out + "/ranking_N100.csv");
  CHECK(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')) == 9);  // header + 8
  CHECK(csv.find("0,\"(1,1,0)\"") != std::string::npos);
  CHECK(res.summary_json.find("\"best_policy\": \"(1,1,0)\"") != std::string::npos);
}

TEST_CASE("run_experiment: simulate and evaluate kinds") {
  const std::string out = tmp_dir("sim");
  ExperimentConfig c;
  c.kind = "simulate";
  c.model_ref = "builtin:birth_death_A1";
  c.scalings = {50};
  c.num_paths = 200;
  c.policy = {1, 1, 0};
  c.dump_trajectories = 2;
  c.seed = 5;
  c.out_dir = out;
  run_experiment(c);
  CHECK(fs::exists(out + "/trajectory_N50_0.csv"));
  CHECK(fs::exists(out + "/trajectory_N50_1.csv"));
  CHECK(fs::exists(out + "/summary.json"));

  ExperimentConfig e;
  e.kind = "evaluate";
  e.model_ref = "builtin:birth_death_A1";
  e.scalings = {50};
  e.eval_paths = 300;
  e.policy = {1, 1, 0};
  e.seed = 6;
  e.out_dir = tmp_dir("eval");
  const ExperimentResult res = run_experiment(e);
  CHECK(res.summary_json.find("cost_mean") != std::string::npos);
}

TEST_CASE("emit_figure_data: empty result set yields headers") {
  const std::string empty = tmp_dir("empty_results");
  const std::string out = tmp_dir("figs");
  emit_figure_data(empty, out);
  CHECK(read_text_file(out + "/cost_vs_N.csv") == "N,policy_kind,cost,stderr\n");
  CHECK(read_text_file(out + "/occupancy.csv") == "x1,x2,count_of_sets_containing\n");
}

TEST_CASE("emit_figure_data: collects cost rows from summaries") {
  const std::string results = tmp_dir("results_tree");
  ExperimentConfig c = tiny_rank_config(results + "/rank");
  run_experiment(c);
  const std::string out = tmp_dir("figs2");
  emit_figure_data(results, out);
  const std::string csv = read_text_file(out + "/cost_vs_N.csv");
  CHECK(csv.find("40,openloop_best,") != std::string::npos);
}

#ifdef JUMPCTRL_CLI_PATH
TEST_CASE("CLI exit codes") {
  const std::string cli = JUMPCTRL_CLI_PATH;
  // config error: missing seed
  const int config_err = std::system(
      (cli + " rank-openloop --model builtin:birth_death_A1 --out " + tmp_dir("cli1") +
       " >/dev/null 2>&1")
          .c_str());
  CHECK(WEXITSTATUS(config_err) == 2);
  // success path
  const int ok = std::system((cli + " list-models >/dev/null 2>&1").c_str());
  CHECK(WEXITSTATUS(ok) == 0);
  const int ok2 = std::system(
      (cli + " rank-openloop --model builtin:birth_death_A1 --N [40] -M 64 --seed 3 --out " +
       tmp_dir("cli2") + " >/dev/null 2>&1")
          .c_str());
  CHECK(WEXITSTATUS(ok2) == 0);
}
#endif
