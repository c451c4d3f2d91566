#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "jumpctrl/builtin.hpp"
#include "jumpctrl/bounds.hpp"
#include "jumpctrl/experiment.hpp"
#include "jumpctrl/hybrid.hpp"
#include "jumpctrl/io.hpp"

namespace py = pybind11;
using namespace jumpctrl;

namespace {

ParsedModel load(const std::string& ref) {
  if (ref.rfind("builtin:", 0) == 0) return builtin_model(ref.substr(8));
  return parse_model(read_text_file(ref));
}

py::dict trajectory_dict(const Trajectory& traj) {
  py::dict out;
  out["initial"] = traj.initial;
  out["times"] = traj.times;
  py::list states;
  for (std::size_t e = 0; e < traj.num_events(); ++e) states.append(traj.state_at_event(e));
  out["states"] = states;
  out["controls_applied"] = traj.controls_applied;
  out["exact"] = traj.exact;
  out["steps"] = traj.step_count;
  return out;
}

}  // namespace

PYBIND11_MODULE(_jumpctrl, m) {
  m.doc() = "controlled Markov jump processes: simulation and policy optimization";

  py::register_exception<ConfigError>(m, "ConfigError");
  py::register_exception<ResourceCapError>(m, "ResourceCapError");
  py::register_exception<NumericalError>(m, "NumericalError");

  py::class_<JumpModel>(m, "JumpModel")
      .def_property_readonly("name", &JumpModel::name)
      .def_property_readonly("num_species", &JumpModel::num_species)
      .def_property_readonly("num_reactions", &JumpModel::num_reactions)
      .def_property_readonly("num_controls", &JumpModel::num_controls)
      .def_property_readonly("scaling", &JumpModel::scaling)
      .def("species_names",
           [](const JumpModel& model) {
             std::vector<std::string> names;
             for (const Species& s : model.species()) names.push_back(s.name);
             return names;
           })
      .def("with_scaling", &JumpModel::with_scaling)
      .def("propensity", &JumpModel::propensity, py::arg("control"), py::arg("state"),
           py::arg("reaction"))
      .def("jump_rate_table",
           [](const JumpModel& model, int control, const State& x) {
             py::list out;
             for (const auto& e : jump_rate_table(model, control, x))
               out.append(py::make_tuple(e.jump, e.rate));
             return out;
           })
      .def("density_rate", &density_rate, py::arg("control"), py::arg("z"),
           py::arg("scaled_jump"));

  py::class_<StagedHorizon>(m, "StagedHorizon")
      .def_property_readonly("stage_times",
                             [](const StagedHorizon& h) { return h.stage_times; })
      .def_property_readonly("num_stages", &StagedHorizon::num_stages)
      .def_property_readonly("total_time", &StagedHorizon::total_time);

  py::class_<ParsedModel>(m, "ParsedModel")
      .def_readonly("model", &ParsedModel::model)
      .def_readonly("horizon", &ParsedModel::horizon)
      .def_property_readonly("init_density",
                             [](const ParsedModel& p) {
                               return p.init_density ? py::cast(*p.init_density)
                                                     : py::object(py::none());
                             })
      .def("format", [](const ParsedModel& p) { return format_model(p); });

  m.def("parse_model_text", &parse_model, py::arg("text"));
  m.def("load_model", &load, py::arg("ref"), "load a model file, or builtin:<name>");
  m.def("builtin_model_names", &builtin_model_names);

  m.def(
      "vector_field",
      [](const ParsedModel& p, int control, const std::vector<double>& z) {
        return vector_field(p.model, control, z);
      },
      py::arg("parsed"), py::arg("control"), py::arg("z"));

  m.def(
      "integrate_ode",
      [](const ParsedModel& p, const std::vector<int>& policy, const std::vector<double>& z0,
         double dt) {
        const OdePath path = integrate_piecewise(p.model, policy, z0, p.horizon, dt);
        py::dict out;
        std::vector<double> times;
        py::list values;
        for (const auto& stage : path.stages)
          for (std::size_t i = 0; i < stage.times.size(); ++i) {
            times.push_back(stage.times[i]);
            values.append(stage.values[i]);
          }
        out["times"] = times;
        out["values"] = values;
        out["cost"] = ode_cost(path, p.model, p.cost, p.horizon);
        return out;
      },
      py::arg("parsed"), py::arg("policy"), py::arg("z0"), py::arg("dt") = 1e-3);

  m.def(
      "simulate",
      [](const ParsedModel& p, const std::vector<int>& policy, const std::vector<double>& z0,
         std::uint64_t seed, std::uint64_t stream, const std::string& method, double eps_tau) {
        const Policy pol = OpenLoopPolicy{policy};
        const Trajectory traj =
            method == "tau"
                ? simulate_tau_leap(p.model, pol, p.horizon, z0, RngStream(seed, stream), eps_tau)
                : simulate_ssa(p.model, pol, p.horizon, z0, RngStream(seed, stream));
        py::dict out = trajectory_dict(traj);
        out["cost"] = path_cost(traj, p.model, p.cost, p.horizon);
        return out;
      },
      py::arg("parsed"), py::arg("policy"), py::arg("z0"), py::arg("seed"),
      py::arg("stream") = 0, py::arg("method") = "ssa", py::arg("eps_tau") = kDefaultEpsTau);

  m.def(
      "mc_cost",
      [](const ParsedModel& p, const std::vector<int>& policy, const std::vector<double>& z0,
         int paths, std::uint64_t seed, const std::string& method, int workers) {
        const McEstimate est = mc_cost_estimate(
            p.model, Policy{OpenLoopPolicy{policy}}, p.cost, p.horizon, z0, paths, seed,
            method == "tau" ? SimMethod::TauLeap : SimMethod::Ssa, kDefaultEpsTau, workers);
        return py::make_tuple(est.mean, est.stderr_);
      },
      py::arg("parsed"), py::arg("policy"), py::arg("z0"), py::arg("paths"), py::arg("seed"),
      py::arg("method") = "ssa", py::arg("workers") = 0);

  m.def(
      "rank_policies",
      [](const ParsedModel& p, const std::vector<double>& z0, int paths, std::uint64_t seed,
         const std::string& method, int workers) {
        const RankMethod rm = method == "ode"   ? RankMethod::Ode
                              : method == "tau" ? RankMethod::McTauLeap
                                                : RankMethod::McSsa;
        const PolicyRanking ranking = rank_policies(p.model, p.horizon, p.cost, z0, paths, seed,
                                                    rm, kDefaultEpsTau, workers);
        py::list out;
        for (const RankedPolicy& e : ranking.entries)
          out.append(py::make_tuple(e.policy, e.cost, e.stderr_));
        return out;
      },
      py::arg("parsed"), py::arg("z0"), py::arg("paths"), py::arg("seed"),
      py::arg("method") = "ssa", py::arg("workers") = 0);

  m.def(
      "solve_feedback",
      [](const ParsedModel& p, const std::vector<double>& box_low,
         const std::vector<double>& box_high, int backups, std::uint64_t seed, int workers) {
        FeedbackSolveOptions options;
        options.num_paths = backups;
        options.seed = seed;
        options.workers = workers;
        const TruncatedSpace space = TruncatedSpace::from_density(p.model, box_low, box_high);
        const FeedbackSolution sol = solve_feedback_dp(p.model, p.horizon, p.cost, space, options);
        py::dict out;
        py::list values;
        for (const auto& slice : sol.table.values) values.append(slice);
        out["values"] = values;
        py::list argmin;
        for (const auto& slice : sol.table.argmin) argmin.append(slice);
        out["argmin"] = argmin;
        out["space_lo"] = space.lo;
        out["space_hi"] = space.hi;
        return out;
      },
      py::arg("parsed"), py::arg("box_low"), py::arg("box_high"), py::arg("backups") = 100,
      py::arg("seed") = 0, py::arg("workers") = 0);

  m.def(
      "nearest_neighbor",
      [](const std::vector<State>& points, const State& query) {
        std::vector<State> pts = points;
        std::sort(pts.begin(), pts.end());
        pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
        const KdTree tree(pts);
        const auto res = tree.nearest(query);
        if (!res) throw ConfigError("empty point set");
        return py::make_tuple(tree.points()[res->index],
                              std::sqrt(static_cast<double>(res->dist2)));
      },
      py::arg("points"), py::arg("query"));

  m.def(
      "derive_constants",
      [](const ParsedModel& p, double alpha) {
        const AssumptionConstants c = derive_constants(p.model, p.cost, alpha);
        py::dict out;
        out["alpha"] = c.alpha;
        out["M_N_alpha"] = c.m_n_alpha;
        out["omega_N"] = c.omega_n;
        out["L_F"] = c.lf;
        out["L_r"] = c.l_r;
        out["L_phi"] = c.l_phi;
        out["L_psi"] = c.l_psi;
        out["M_r"] = c.m_r;
        out["M_phi"] = c.m_phi;
        out["M_psi"] = c.m_psi;
        out["C_TN"] = c_tn(c, p.horizon.total_time());
        return out;
      },
      py::arg("parsed"), py::arg("alpha") = 2.0);

  m.def(
      "lemma1_check",
      [](const std::vector<double>& z, const std::vector<double>& w, double alpha) {
        const Lemma1Result res = lemma1_check(z, w, alpha);
        return py::make_tuple(res.middle, res.bound);
      },
      py::arg("z"), py::arg("w"), py::arg("alpha"));

  m.def(
      "run_experiment",
      [](const std::string& config_text,
         const std::vector<std::pair<std::string, std::string>>& overrides) {
        ExperimentConfig config = parse_experiment_config(config_text);
        for (const auto& [k, v] : overrides) apply_override(config, k, v);
        return run_experiment(config).summary_json;
      },
      py::arg("config_text"),
      py::arg("overrides") = std::vector<std::pair<std::string, std::string>>{});
}
