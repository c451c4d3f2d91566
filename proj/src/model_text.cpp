#include "jumpctrl/model_text.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

namespace jumpctrl {

namespace {

struct LineCursor {
  const std::string& text;
  int line_no;
  std::size_t pos = 0;

  void skip_ws() {
    while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }
  bool at_end() {
    skip_ws();
    return pos >= text.size();
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("line " + std::to_string(line_no) + ", col " +
                      std::to_string(pos + 1) + ": " + msg);
  }
  bool peek_char(char c) {
    skip_ws();
    return pos < text.size() && text[pos] == c;
  }
  bool try_char(char c) {
    if (peek_char(c)) {
      ++pos;
      return true;
    }
    return false;
  }
  void expect_char(char c) {
    if (!try_char(c)) fail(std::string("expected '") + c + "'");
  }
  bool try_word(const std::string& w) {
    skip_ws();
    if (text.compare(pos, w.size(), w) != 0) return false;
    const std::size_t after = pos + w.size();
    if (after < text.size() && (std::isalnum(static_cast<unsigned char>(text[after])) || text[after] == '_'))
      return false;
    pos = after;
    return true;
  }
  std::string ident() {
    skip_ws();
    std::size_t start = pos;
    while (pos < text.size() && (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
      ++pos;
    if (pos == start) fail("expected identifier");
    return text.substr(start, pos - start);
  }
  bool peek_number() {
    skip_ws();
    if (pos >= text.size()) return false;
    char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return true;
    if ((c == '+' || c == '-') && pos + 1 < text.size()) {
      char d = text[pos + 1];
      return std::isdigit(static_cast<unsigned char>(d)) || d == '.';
    }
    return false;
  }
  double number() {
    skip_ws();
    std::size_t consumed = 0;
    double v = 0.0;
    try {
      v = std::stod(text.substr(pos), &consumed);
    } catch (const std::exception&) {
      fail("expected number");
    }
    pos += consumed;
    return v;
  }
  std::int64_t integer() {
    const double v = number();
    if (v != std::floor(v)) fail("expected integer");
    return static_cast<std::int64_t>(v);
  }
  std::vector<double> number_list() {
    expect_char('[');
    std::vector<double> out;
    if (!try_char(']')) {
      out.push_back(number());
      while (try_char(',')) out.push_back(number());
      expect_char(']');
    }
    return out;
  }
};

struct Builder {
  std::string model_name;
  std::int64_t scaling = -1;
  std::vector<Species> species;
  std::vector<Reaction> reactions;
  ControlSet controls;
  std::optional<DomainBox> domain;
  std::vector<double> stage_times;
  CostSpec cost = zero_cost_spec();
  bool has_cost = false;
  std::optional<std::vector<double>> init;

  int species_index(const std::string& name, LineCursor& c) const {
    for (const Species& s : species)
      if (s.name == name) return s.index;
    c.fail("unknown species '" + name + "'");
  }
};

// reactant or product complex: `0` or `[count] NAME (+ [count] NAME)*`
std::vector<std::int64_t> parse_complex(LineCursor& c, const Builder& b) {
  std::vector<std::int64_t> stoich(b.species.size(), 0);
  if (c.peek_number()) {
    // a leading "0" denotes the empty complex
    std::size_t save = c.pos;
    if (c.integer() == 0) return stoich;
    c.pos = save;
  }
  for (;;) {
    std::int64_t count = 1;
    if (c.peek_number()) count = c.integer();
    const std::string name = c.ident();
    const int idx = b.species_index(name, c);
    if (count < 0) c.fail("stoichiometric coefficients must be non-negative");
    stoich[idx] += count;
    if (!c.try_char('+')) break;
  }
  return stoich;
}

PropensityForm parse_form(LineCursor& c, const Builder& b) {
  PropensityForm form;
  if (c.try_word("zero")) {
    form.kind = PropensityKind::ZeroOrder;
    return form;
  }
  if (c.try_word("unary")) {
    form.kind = PropensityKind::Unary;
    c.expect_char('(');
    form.species_i = b.species_index(c.ident(), c);
    c.expect_char(')');
    return form;
  }
  if (c.try_word("binary_self")) {
    form.kind = PropensityKind::BinarySelf;
    c.expect_char('(');
    form.species_i = b.species_index(c.ident(), c);
    c.expect_char(')');
    return form;
  }
  if (c.try_word("binary_pair")) {
    form.kind = PropensityKind::BinaryPair;
    c.expect_char('(');
    form.species_i = b.species_index(c.ident(), c);
    c.expect_char(',');
    form.species_j = b.species_index(c.ident(), c);
    c.expect_char(')');
    return form;
  }
  c.fail("expected propensity annotation (zero | unary | binary_self | binary_pair)");
}

// linear functional inside abs()/sq(): items NUM, NUM*z_S or z_S joined by +/-
void parse_linear(LineCursor& c, const Builder& b, std::vector<double>& coeffs, double& offset) {
  coeffs.assign(b.species.size(), 0.0);
  offset = 0.0;
  double sign = 1.0;
  if (c.try_char('-')) sign = -1.0;
  else c.try_char('+');
  for (;;) {
    if (c.peek_number()) {
      double v = c.number();
      if (c.try_char('*')) {
        const std::string z = c.ident();
        if (z.rfind("z_", 0) != 0) c.fail("expected z_<species>");
        coeffs[static_cast<std::size_t>(b.species_index(z.substr(2), c))] += sign * v;
      } else {
        offset -= sign * v;  // stored as a.z - c
      }
    } else {
      const std::string z = c.ident();
      if (z.rfind("z_", 0) != 0) c.fail("expected z_<species>");
      coeffs[static_cast<std::size_t>(b.species_index(z.substr(2), c))] += sign;
    }
    if (c.try_char('+')) sign = 1.0;
    else if (c.try_char('-')) sign = -1.0;
    else break;
  }
}

CostFunction parse_cost_expr(LineCursor& c, const Builder& b) {
  CostFunction f;
  for (;;) {
    CostTerm term;
    term.weight = 1.0;
    bool saw_weight = false;
    if (c.peek_number()) {
      term.weight = c.number();
      saw_weight = true;
      if (!c.try_char('*')) {
        term.kind = CostTermKind::Constant;
        f.terms.push_back(term);
        if (c.try_char('+')) continue;
        break;
      }
    }
    if (c.try_word("abs"))
      term.kind = CostTermKind::AbsDeviation;
    else if (c.try_word("sq"))
      term.kind = CostTermKind::SquaredDeviation;
    else if (saw_weight)
      c.fail("expected abs(...) or sq(...) after weight");
    else
      c.fail("expected cost term (number, abs(...) or sq(...))");
    c.expect_char('(');
    parse_linear(c, b, term.coeffs, term.offset);
    c.expect_char(')');
    f.terms.push_back(term);
    if (!c.try_char('+')) break;
  }
  if (f.terms.empty()) f = zero_cost();
  return f;
}

void parse_cost_line(LineCursor& c, Builder& b) {
  b.has_cost = true;
  b.cost = zero_cost_spec();
  b.cost.stage_cost.assign(1, zero_cost());
  b.cost.running_cost.assign(1, zero_cost());
  for (;;) {
    if (c.at_end()) break;
    const std::string key = c.ident();
    int control = -1;  // -1 = shared
    if (c.try_char('[')) {
      const std::string ctrl = c.ident();
      control = -2;
      for (int i = 0; i < b.controls.size(); ++i)
        if (b.controls.controls[static_cast<std::size_t>(i)].name == ctrl) control = i;
      if (control == -2) c.fail("unknown control '" + ctrl + "'");
      c.expect_char(']');
    }
    c.expect_char('=');
    auto assign = [&](std::vector<CostFunction>& table, const CostFunction& f) {
      if (control < 0) {
        table.assign(1, f);
      } else {
        if (table.size() != static_cast<std::size_t>(b.controls.size())) {
          const CostFunction fill = table.empty() ? zero_cost() : table[0];
          table.resize(static_cast<std::size_t>(b.controls.size()), fill);
        }
        table[static_cast<std::size_t>(control)] = f;
      }
    };
    if (key == "r") {
      assign(b.cost.stage_cost, parse_cost_expr(c, b));
    } else if (key == "phi") {
      assign(b.cost.running_cost, parse_cost_expr(c, b));
    } else if (key == "psi") {
      if (control >= 0) c.fail("psi cannot be per-control");
      b.cost.terminal_cost = parse_cost_expr(c, b);
    } else if (key == "beta") {
      if (control >= 0) c.fail("beta cannot be per-control");
      b.cost.discount = c.number();
    } else {
      c.fail("unknown cost key '" + key + "'");
    }
    if (!c.try_char(';')) break;
  }
}

}  // namespace

ParsedModel parse_model(const std::string& text) {
  Builder b;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  bool in_controls = false;
  std::vector<std::pair<int, std::string>> control_lines;

  std::vector<std::pair<int, std::string>> lines;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::size_t hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    bool blank = true;
    for (char ch : raw)
      if (ch != ' ' && ch != '\t' && ch != '\r') blank = false;
    if (blank) continue;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    lines.emplace_back(line_no, raw);
  }

  for (const auto& [no, line] : lines) {
    LineCursor c{line, no};
    if (c.try_word("model")) {
      in_controls = false;
      b.model_name = c.ident();
    } else if (c.try_word("scaling")) {
      in_controls = false;
      if (!c.try_word("N")) c.fail("expected 'N'");
      c.expect_char('=');
      b.scaling = c.integer();
      if (b.scaling < 1) c.fail("scaling N must be positive");
    } else if (c.try_word("species")) {
      in_controls = false;
      Species s;
      s.name = c.ident();
      s.index = static_cast<int>(b.species.size());
      b.species.push_back(s);
    } else if (c.try_word("reaction")) {
      in_controls = false;
      Reaction r;
      r.name = c.ident();
      c.expect_char(':');
      r.reactants = parse_complex(c, b);
      c.expect_char('-');
      c.expect_char('>');
      r.products = parse_complex(c, b);
      r.form = parse_form(c, b);
      r.jump.resize(b.species.size());
      for (std::size_t i = 0; i < b.species.size(); ++i) r.jump[i] = r.products[i] - r.reactants[i];
      b.reactions.push_back(std::move(r));
    } else if (c.try_word("controls")) {
      c.expect_char(':');
      in_controls = true;
    } else if (c.try_word("stages")) {
      in_controls = false;
      c.expect_char(':');
      if (!c.try_word("t")) c.fail("expected 't'");
      c.expect_char('=');
      b.stage_times = c.number_list();
    } else if (c.try_word("cost")) {
      in_controls = false;
      c.expect_char(':');
      parse_cost_line(c, b);
    } else if (c.try_word("init")) {
      in_controls = false;
      c.expect_char(':');
      if (!c.try_word("z")) c.fail("expected 'z'");
      c.expect_char('=');
      b.init = c.number_list();
    } else if (c.try_word("domain")) {
      in_controls = false;
      c.expect_char(':');
      DomainBox box;
      box.low.assign(b.species.size(), 0.0);
      box.high.assign(b.species.size(), 10.0);
      for (;;) {
        const int idx = b.species_index(c.ident(), c);
        if (!c.try_word("in")) c.fail("expected 'in'");
        c.expect_char('[');
        box.low[static_cast<std::size_t>(idx)] = c.number();
        c.expect_char(',');
        box.high[static_cast<std::size_t>(idx)] = c.number();
        c.expect_char(')');
        if (!c.try_char(',')) break;
      }
      b.domain = box;
    } else if (in_controls) {
      control_lines.emplace_back(no, line);
    } else {
      c.fail("unrecognized directive");
    }
  }

  if (b.model_name.empty()) throw ConfigError("missing 'model' line");
  if (b.scaling < 1) throw ConfigError("missing or invalid 'scaling N = ...' line");
  if (b.stage_times.empty()) throw ConfigError("missing 'stages: t = [...]' line");

  // control lines: `name: reaction = kappa, reaction = kappa, ...`
  for (const auto& [no, line] : control_lines) {
    LineCursor c{line, no};
    Control ctrl;
    ctrl.name = c.ident();
    c.expect_char(':');
    std::map<std::string, double> assigned;
    for (;;) {
      const std::string rname = c.ident();
      c.expect_char('=');
      const double kappa = c.number();
      if (kappa < 0.0) c.fail("rate constants must be >= 0");
      if (!assigned.emplace(rname, kappa).second) c.fail("reaction '" + rname + "' assigned twice");
      if (!c.try_char(',')) break;
    }
    ctrl.rate_constants.resize(b.reactions.size());
    for (std::size_t k = 0; k < b.reactions.size(); ++k) {
      auto it = assigned.find(b.reactions[k].name);
      if (it == assigned.end())
        c.fail("control '" + ctrl.name + "' missing rate for reaction '" + b.reactions[k].name + "'");
      ctrl.rate_constants[k] = it->second;
      assigned.erase(it);
    }
    if (!assigned.empty()) c.fail("unknown reaction '" + assigned.begin()->first + "'");
    b.controls.controls.push_back(std::move(ctrl));
  }

  JumpModel model(b.model_name, b.species, b.reactions, b.controls, b.scaling, b.domain);
  StagedHorizon horizon{b.stage_times};
  horizon.validate();
  b.cost.validate(model.num_species(), model.num_controls());
  if (b.init && static_cast<int>(b.init->size()) != model.num_species())
    throw ConfigError("init density dimension mismatch");
  return ParsedModel{std::move(model), std::move(horizon), std::move(b.cost), std::move(b.init)};
}

namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

std::string fmt_complex(const std::vector<std::int64_t>& stoich, const std::vector<Species>& species) {
  std::string out;
  for (std::size_t i = 0; i < stoich.size(); ++i) {
    if (stoich[i] <= 0) continue;
    if (!out.empty()) out += " + ";
    if (stoich[i] != 1) out += std::to_string(stoich[i]) + " ";
    out += species[i].name;
  }
  return out.empty() ? "0" : out;
}

std::string fmt_linear(const CostTerm& t, const std::vector<Species>& species) {
  std::string out;
  for (std::size_t i = 0; i < t.coeffs.size(); ++i) {
    const double a = t.coeffs[i];
    if (a == 0.0) continue;
    if (out.empty()) {
      if (a == 1.0)
        out += "z_" + species[i].name;
      else if (a == -1.0)
        out += "-z_" + species[i].name;
      else
        out += fmt_num(a) + "*z_" + species[i].name;
    } else {
      out += a > 0 ? " + " : " - ";
      const double mag = std::abs(a);
      if (mag != 1.0) out += fmt_num(mag) + "*";
      out += "z_" + species[i].name;
    }
  }
  if (t.offset != 0.0 || out.empty()) {
    if (out.empty()) {
      out += fmt_num(-t.offset);
    } else {
      out += t.offset > 0 ? " - " : " + ";
      out += fmt_num(std::abs(t.offset));
    }
  }
  return out;
}

std::string fmt_cost_fun(const CostFunction& f, const std::vector<Species>& species) {
  if (f.terms.empty()) return "0";
  std::string out;
  for (const CostTerm& t : f.terms) {
    if (!out.empty()) out += " + ";
    if (t.kind == CostTermKind::Constant) {
      out += fmt_num(t.weight);
      continue;
    }
    if (t.weight != 1.0) out += fmt_num(t.weight) + "*";
    out += (t.kind == CostTermKind::AbsDeviation ? "abs(" : "sq(");
    out += fmt_linear(t, species);
    out += ")";
  }
  return out;
}

}  // namespace

std::string format_model(const ParsedModel& parsed) {
  const JumpModel& m = parsed.model;
  std::ostringstream os;
  os << "model " << m.name() << "\n";
  os << "scaling N = " << m.scaling() << "\n";
  for (const Species& s : m.species()) os << "species " << s.name << "\n";
  for (std::size_t k = 0; k < m.reactions().size(); ++k) {
    const Reaction& r = m.reactions()[k];
    os << "reaction " << r.name << ": " << fmt_complex(r.reactants, m.species()) << " -> "
       << fmt_complex(r.products, m.species()) << "  ";
    switch (r.form.kind) {
      case PropensityKind::ZeroOrder: os << "zero"; break;
      case PropensityKind::Unary: os << "unary(" << m.species()[r.form.species_i].name << ")"; break;
      case PropensityKind::BinarySelf: os << "binary_self(" << m.species()[r.form.species_i].name << ")"; break;
      case PropensityKind::BinaryPair:
        os << "binary_pair(" << m.species()[r.form.species_i].name << ", "
           << m.species()[r.form.species_j].name << ")";
        break;
    }
    os << "\n";
  }
  os << "controls:\n";
  for (const Control& c : m.control_set().controls) {
    os << "  " << c.name << ": ";
    for (std::size_t k = 0; k < c.rate_constants.size(); ++k) {
      if (k) os << ", ";
      os << m.reactions()[k].name << " = " << fmt_num(c.rate_constants[k]);
    }
    os << "\n";
  }
  os << "stages: t = [";
  for (std::size_t j = 0; j < parsed.horizon.stage_times.size(); ++j) {
    if (j) os << ", ";
    os << fmt_num(parsed.horizon.stage_times[j]);
  }
  os << "]\n";
  if (!m.domain_is_default()) {
    os << "domain: ";
    for (int i = 0; i < m.num_species(); ++i) {
      if (i) os << ", ";
      os << m.species()[i].name << " in [" << fmt_num(m.domain().low[i]) << ", "
         << fmt_num(m.domain().high[i]) << ")";
    }
    os << "\n";
  }
  os << "cost: ";
  bool first = true;
  auto emit = [&](const std::string& text) {
    if (!first) os << "; ";
    os << text;
    first = false;
  };
  const auto& species = m.species();
  if (parsed.cost.stage_cost.size() == 1) {
    emit("r = " + fmt_cost_fun(parsed.cost.stage_cost[0], species));
  } else {
    for (int v = 0; v < m.num_controls(); ++v)
      emit("r[" + m.control_set().controls[static_cast<std::size_t>(v)].name + "] = " +
           fmt_cost_fun(parsed.cost.stage_cost[static_cast<std::size_t>(v)], species));
  }
  if (parsed.cost.running_cost.size() == 1) {
    emit("phi = " + fmt_cost_fun(parsed.cost.running_cost[0], species));
  } else {
    for (int v = 0; v < m.num_controls(); ++v)
      emit("phi[" + m.control_set().controls[static_cast<std::size_t>(v)].name + "] = " +
           fmt_cost_fun(parsed.cost.running_cost[static_cast<std::size_t>(v)], species));
  }
  emit("psi = " + fmt_cost_fun(parsed.cost.terminal_cost, species));
  emit("beta = " + fmt_num(parsed.cost.discount));
  os << "\n";
  if (parsed.init_density) {
    os << "init: z = [";
    for (std::size_t i = 0; i < parsed.init_density->size(); ++i) {
      if (i) os << ", ";
      os << fmt_num((*parsed.init_density)[i]);
    }
    os << "]\n";
  }
  return os.str();
}

}  // namespace jumpctrl
