#include "jumpctrl/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace jumpctrl {

std::string csv_number(double v) {
  char buf[40];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string policy_string(const std::vector<int>& policy) {
  std::string out = "(";
  for (std::size_t j = 0; j < policy.size(); ++j) {
    if (j) out += ",";
    out += std::to_string(policy[j]);
  }
  return out + ")";
}

std::vector<int> parse_policy_string(const std::string& text) {
  std::vector<int> out;
  std::string cur;
  for (char c : text) {
    if (std::isdigit(static_cast<unsigned char>(c))) {
      cur += c;
    } else if (!cur.empty()) {
      out.push_back(std::stoi(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::stoi(cur));
  if (out.empty()) throw ConfigError("empty policy string: " + text);
  return out;
}

std::string trajectory_csv(const Trajectory& traj, const JumpModel& model,
                           const StagedHorizon& horizon) {
  std::ostringstream os;
  os << "time";
  for (const Species& s : model.species()) os << "," << s.name;
  os << ",control_index\n";
  auto row = [&](double t, const State& x) {
    os << csv_number(t);
    for (std::int64_t v : x) os << "," << v;
    os << "," << traj.controls_applied[static_cast<std::size_t>(horizon.stage_at(t))] << "\n";
  };
  row(0.0, traj.initial);
  for (std::size_t e = 0; e < traj.num_events(); ++e) row(traj.times[e], traj.state_at_event(e));
  return os.str();
}

std::string ode_path_csv(const OdePath& path, const JumpModel& model) {
  std::ostringstream os;
  os << "time";
  for (const Species& s : model.species()) os << ",z_" << s.name;
  os << ",control_index\n";
  for (std::size_t j = 0; j < path.stages.size(); ++j) {
    const auto& stage = path.stages[j];
    // stage boundaries belong to the later stage's first row
    const std::size_t first = j == 0 ? 0 : 1;
    for (std::size_t i = first; i < stage.times.size(); ++i) {
      os << csv_number(stage.times[i]);
      for (double z : stage.values[i]) os << "," << csv_number(z);
      os << "," << stage.control << "\n";
    }
  }
  return os.str();
}

std::string ranking_csv(const PolicyRanking& ranking) {
  std::ostringstream os;
  os << "rank,policy,cost,stderr,method,M\n";
  for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
    const RankedPolicy& e = ranking.entries[i];
    os << i << ",\"" << policy_string(e.policy) << "\"," << csv_number(e.cost) << ","
       << csv_number(e.stderr_) << "," << rank_method_name(ranking.method) << ","
       << ranking.num_paths << "\n";
  }
  return os.str();
}

std::string value_table_csv(const ValueTable& table, const JumpModel& model) {
  std::ostringstream os;
  os << "stage";
  for (const Species& s : model.species()) os << "," << s.name;
  os << ",value,argmin_control\n";
  const std::size_t S = table.space.size();
  for (std::size_t k = 0; k < table.values.size(); ++k) {
    for (std::size_t s = 0; s < S; ++s) {
      os << k;
      const State x = table.space.state(s);
      for (std::int64_t v : x) os << "," << v;
      os << "," << csv_number(table.values[k][s]) << ",";
      if (k < table.argmin.size()) os << table.argmin[k][s];
      os << "\n";
    }
  }
  return os.str();
}

std::string stage_sets_csv(const StageStateSets& sets, const JumpModel& model) {
  std::ostringstream os;
  os << "stage";
  for (const Species& s : model.species()) os << "," << s.name;
  os << "\n";
  for (int j = 0; j < sets.num_stages(); ++j) {
    for (const State& x : sets.stages[static_cast<std::size_t>(j)].states()) {
      os << j;
      for (std::int64_t v : x) os << "," << v;
      os << "\n";
    }
  }
  return os.str();
}

std::string hybrid_policy_csv(const HybridPolicy& policy, const JumpModel& model) {
  std::ostringstream os;
  os << "# fallback=" << policy_string(policy.fallback.controls) << "\n";
  os << "# eps_near=" << csv_number(policy.eps_near) << "\n";
  os << "# scaling=" << policy.scaling << "\n";
  os << "stage";
  for (const Species& s : model.species()) os << "," << s.name;
  os << ",control_index\n";
  for (int j = 0; j < policy.sets->num_stages(); ++j) {
    const auto& states = policy.sets->stages[static_cast<std::size_t>(j)].states();
    for (std::size_t s = 0; s < states.size(); ++s) {
      os << j;
      for (std::int64_t v : states[s]) os << "," << v;
      os << "," << policy.stage_controls[static_cast<std::size_t>(j)][s] << "\n";
    }
  }
  return os.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (char c : line) {
    if (c == '"') {
      quoted = !quoted;
    } else if (c == ',' && !quoted) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

HybridPolicy parse_hybrid_policy_csv(const std::string& text, const JumpModel& model) {
  const int n = model.num_species();
  HybridPolicy policy;
  policy.scaling = model.scaling();
  std::istringstream in(text);
  std::string line;
  std::vector<std::vector<State>> states;
  std::vector<std::vector<std::int32_t>> controls;
  bool saw_header = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(1, eq - 1);
      const std::string value = line.substr(eq + 1);
      if (key.find("fallback") != std::string::npos)
        policy.fallback.controls = parse_policy_string(value);
      else if (key.find("eps_near") != std::string::npos)
        policy.eps_near = std::stod(value);
      else if (key.find("scaling") != std::string::npos)
        policy.scaling = std::stoll(value);
      continue;
    }
    if (!saw_header) {  // column header
      saw_header = true;
      continue;
    }
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != n + 2) throw ConfigError("hybrid policy CSV: bad row");
    const std::size_t stage = static_cast<std::size_t>(std::stoul(cells[0]));
    if (states.size() <= stage) {
      states.resize(stage + 1);
      controls.resize(stage + 1);
    }
    State x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = std::stoll(cells[static_cast<std::size_t>(i) + 1]);
    states[stage].push_back(std::move(x));
    controls[stage].push_back(static_cast<std::int32_t>(std::stoi(cells.back())));
  }
  if (policy.fallback.controls.empty()) throw ConfigError("hybrid policy CSV: missing fallback header");
  auto sets = std::make_shared<StageStateSets>();
  sets->stages.resize(states.size());
  policy.stage_controls.resize(states.size());
  for (std::size_t j = 0; j < states.size(); ++j) {
    // rows are written in sorted set order; rebuild and remap the controls
    std::vector<std::pair<State, std::int32_t>> rows(states[j].size());
    for (std::size_t s = 0; s < states[j].size(); ++s) rows[s] = {states[j][s], controls[j][s]};
    std::sort(rows.begin(), rows.end());
    std::vector<State> pts;
    pts.reserve(rows.size());
    policy.stage_controls[j].clear();
    for (auto& [x, c] : rows) {
      pts.push_back(x);
      policy.stage_controls[j].push_back(c);
    }
    sets->stages[j] = make_stage_set(std::move(pts));
  }
  policy.sets = std::move(sets);
  return policy;
}

std::string feedback_policy_csv(const FeedbackPolicy& policy, const JumpModel& model) {
  std::ostringstream os;
  os << "# space_lo=";
  for (std::size_t i = 0; i < policy.space.lo.size(); ++i)
    os << (i ? ";" : "") << policy.space.lo[i];
  os << "\n# space_hi=";
  for (std::size_t i = 0; i < policy.space.hi.size(); ++i)
    os << (i ? ";" : "") << policy.space.hi[i];
  os << "\nstage";
  for (const Species& s : model.species()) os << "," << s.name;
  os << ",control_index\n";
  const std::size_t S = policy.space.size();
  for (std::size_t k = 0; k < policy.stage_controls.size(); ++k) {
    for (std::size_t s = 0; s < S; ++s) {
      os << k;
      for (std::int64_t v : policy.space.state(s)) os << "," << v;
      os << "," << policy.stage_controls[k][s] << "\n";
    }
  }
  return os.str();
}

FeedbackPolicy parse_feedback_policy_csv(const std::string& text, const JumpModel& model) {
  FeedbackPolicy policy;
  std::istringstream in(text);
  std::string line;
  bool saw_header = false;
  auto parse_bounds = [](const std::string& value) {
    std::vector<std::int64_t> out;
    std::string cur;
    for (char c : value + ";") {
      if (c == ';') {
        if (!cur.empty()) out.push_back(std::stoll(cur));
        cur.clear();
      } else {
        cur += c;
      }
    }
    return out;
  };
  std::vector<std::vector<std::pair<std::size_t, std::int32_t>>> rows;
  const int n = model.num_species();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(1, eq - 1);
      if (key.find("space_lo") != std::string::npos) policy.space.lo = parse_bounds(line.substr(eq + 1));
      if (key.find("space_hi") != std::string::npos) policy.space.hi = parse_bounds(line.substr(eq + 1));
      continue;
    }
    if (!saw_header) {
      saw_header = true;
      continue;
    }
    const auto cells = split_csv_line(line);
    if (static_cast<int>(cells.size()) != n + 2) throw ConfigError("feedback policy CSV: bad row");
    const std::size_t stage = static_cast<std::size_t>(std::stoul(cells[0]));
    State x(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) x[static_cast<std::size_t>(i)] = std::stoll(cells[static_cast<std::size_t>(i) + 1]);
    if (rows.size() <= stage) rows.resize(stage + 1);
    rows[stage].emplace_back(policy.space.rank(x), static_cast<std::int32_t>(std::stoi(cells.back())));
  }
  if (policy.space.lo.empty()) throw ConfigError("feedback policy CSV: missing space header");
  policy.space.validate();
  policy.stage_controls.assign(rows.size(), std::vector<std::int32_t>(policy.space.size(), 0));
  for (std::size_t k = 0; k < rows.size(); ++k)
    for (const auto& [rank, c] : rows[k]) policy.stage_controls[k][rank] = c;
  return policy;
}

std::string bounds_csv(const KurtzReport& report) {
  std::ostringstream os;
  os << "N,C_TN,empirical_sup_err,bound,slope_window\n";
  for (const KurtzRow& row : report.rows) {
    os << row.scaling << "," << csv_number(row.c_tn) << ","
       << csv_number(row.empirical_sup_error) << "," << csv_number(row.bound) << ","
       << csv_number(report.slope) << "\n";
  }
  return os.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  out << content;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace jumpctrl
