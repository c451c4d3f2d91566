#include "jumpctrl/model.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace jumpctrl {

double StagedHorizon::max_stage_width() const {
  double h = 0.0;
  for (std::size_t j = 0; j + 1 < stage_times.size(); ++j)
    h = std::max(h, stage_times[j + 1] - stage_times[j]);
  return h;
}

int StagedHorizon::stage_at(double t) const {
  const int K = num_stages();
  for (int j = 0; j < K; ++j)
    if (t < stage_times[j + 1]) return j;
  return K - 1;
}

void StagedHorizon::validate() const {
  if (stage_times.size() < 2) throw ConfigError("horizon needs at least one stage");
  if (stage_times.front() != 0.0) throw ConfigError("horizon must start at t = 0");
  for (std::size_t j = 0; j + 1 < stage_times.size(); ++j)
    if (!(stage_times[j] < stage_times[j + 1]))
      throw ConfigError("stage times must be strictly increasing");
}

JumpModel::JumpModel(std::string name, std::vector<Species> species,
                     std::vector<Reaction> reactions, ControlSet controls,
                     std::int64_t scaling, std::optional<DomainBox> domain)
    : name_(std::move(name)),
      species_(std::move(species)),
      reactions_(std::move(reactions)),
      controls_(std::move(controls)),
      scaling_(scaling) {
  if (domain.has_value()) {
    domain_ = std::move(*domain);
  } else {
    domain_.low.assign(species_.size(), 0.0);
    domain_.high.assign(species_.size(), 10.0);
    domain_is_default_ = true;
  }
  validate();
  compile();
}

int JumpModel::species_index(const std::string& name) const {
  for (const Species& s : species_)
    if (s.name == name) return s.index;
  return -1;
}

JumpModel JumpModel::with_scaling(std::int64_t scaling) const {
  return JumpModel(name_, species_, reactions_, controls_, scaling,
                   domain_is_default_ ? std::optional<DomainBox>{} : std::optional<DomainBox>{domain_});
}

void JumpModel::validate() const {
  const int n = num_species();
  if (n == 0) throw ConfigError("model has no species");
  if (scaling_ < 1) throw ConfigError("scaling N must be >= 1");
  std::set<std::string> names;
  for (const Species& s : species_) {
    if (!names.insert(s.name).second)
      throw ConfigError("duplicate species name: " + s.name);
    if (s.index < 0 || s.index >= n) throw ConfigError("bad species index");
  }
  if (reactions_.empty()) throw ConfigError("model has no reactions");
  for (const Reaction& r : reactions_) {
    if (static_cast<int>(r.reactants.size()) != n || static_cast<int>(r.products.size()) != n ||
        static_cast<int>(r.jump.size()) != n)
      throw ConfigError("reaction '" + r.name + "': stoichiometry length mismatch");
    bool all_zero = true;
    for (int i = 0; i < n; ++i) {
      if (r.reactants[i] < 0 || r.products[i] < 0)
        throw ConfigError("reaction '" + r.name + "': negative stoichiometry");
      if (r.jump[i] != r.products[i] - r.reactants[i])
        throw ConfigError("reaction '" + r.name + "': jump vector inconsistent");
      if (r.jump[i] != 0) all_zero = false;
    }
    if (all_zero) throw ConfigError("reaction '" + r.name + "': jump vector is zero");
    auto expect = [&](bool ok, const char* what) {
      if (!ok) throw ConfigError("reaction '" + r.name + "': propensity form inconsistent with reactants (" + what + ")");
    };
    std::int64_t reactant_total = 0;
    for (int i = 0; i < n; ++i) reactant_total += r.reactants[i];
    switch (r.form.kind) {
      case PropensityKind::ZeroOrder:
        expect(reactant_total == 0, "expected empty reactant complex");
        break;
      case PropensityKind::Unary:
        expect(r.form.species_i >= 0 && r.form.species_i < n, "species index");
        expect(reactant_total == 1 && r.reactants[r.form.species_i] == 1, "expected single reactant molecule");
        break;
      case PropensityKind::BinarySelf:
        expect(r.form.species_i >= 0 && r.form.species_i < n, "species index");
        expect(reactant_total == 2 && r.reactants[r.form.species_i] == 2, "expected two molecules of one species");
        break;
      case PropensityKind::BinaryPair:
        expect(r.form.species_i >= 0 && r.form.species_i < n, "species index");
        expect(r.form.species_j >= 0 && r.form.species_j < n, "species index");
        expect(r.form.species_i != r.form.species_j, "pair species must differ");
        expect(reactant_total == 2 && r.reactants[r.form.species_i] == 1 && r.reactants[r.form.species_j] == 1,
               "expected one molecule of each species");
        break;
    }
  }
  if (controls_.controls.empty()) throw ConfigError("control set is empty");
  for (const Control& c : controls_.controls) {
    if (c.rate_constants.size() != reactions_.size())
      throw ConfigError("control '" + c.name + "': needs one rate constant per reaction");
    for (double k : c.rate_constants)
      if (!(k >= 0.0)) throw ConfigError("control '" + c.name + "': rate constants must be >= 0");
  }
  if (domain_.low.size() != species_.size() || domain_.high.size() != species_.size())
    throw ConfigError("domain box dimension mismatch");
  for (std::size_t i = 0; i < domain_.low.size(); ++i)
    if (!(domain_.low[i] < domain_.high[i]))
      throw ConfigError("domain box bounds must satisfy low < high");
}

void JumpModel::compile() {
  const double N = static_cast<double>(scaling_);
  compiled_.clear();
  compiled_.reserve(static_cast<std::size_t>(num_controls()) * reactions_.size());
  for (const Control& c : controls_.controls) {
    for (std::size_t k = 0; k < reactions_.size(); ++k) {
      const Reaction& r = reactions_[k];
      CompiledRate cr;
      const double kappa = c.rate_constants[k];
      switch (r.form.kind) {
        case PropensityKind::ZeroOrder:
          cr.coef = kappa * N;
          break;
        case PropensityKind::Unary:
          cr.coef = kappa;
          cr.ia = r.form.species_i;
          break;
        case PropensityKind::BinarySelf:
          cr.coef = kappa / N;
          cr.ia = r.form.species_i;
          cr.ib = r.form.species_i;
          cr.sub = 1.0;
          break;
        case PropensityKind::BinaryPair:
          cr.coef = kappa / N;
          cr.ia = r.form.species_i;
          cr.ib = r.form.species_j;
          break;
      }
      compiled_.push_back(cr);
    }
  }
  jumps_flat_.clear();
  for (const Reaction& r : reactions_)
    jumps_flat_.insert(jumps_flat_.end(), r.jump.begin(), r.jump.end());
}

std::vector<JumpRateEntry> jump_rate_table(const JumpModel& model, int control, const State& x) {
  std::vector<JumpRateEntry> table;
  for (int k = 0; k < model.num_reactions(); ++k) {
    const double rate = model.propensity(control, x, k);
    if (rate <= 0.0) continue;
    const auto& jump = model.reactions()[k].jump;
    auto it = std::find_if(table.begin(), table.end(),
                           [&](const JumpRateEntry& e) { return e.jump == jump; });
    if (it != table.end())
      it->rate += rate;
    else
      table.push_back({jump, rate});
  }
  return table;
}

double total_jump_rate(const JumpModel& model, int control, const State& x) {
  double total = 0.0;
  for (int k = 0; k < model.num_reactions(); ++k) total += model.propensity(control, x, k);
  return total;
}

double density_rate(const JumpModel& model, int control, const std::vector<double>& z,
                    const std::vector<double>& scaled_jump) {
  const double N = static_cast<double>(model.scaling());
  State x(z.size());
  std::vector<std::int64_t> jump(scaled_jump.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double xi = z[i] * N;
    const double xr = std::round(xi);
    if (std::abs(xi - xr) > 1e-9 * std::max(1.0, std::abs(xi)))
      throw ConfigError("density_rate: N*z is not an integer state");
    x[i] = static_cast<std::int64_t>(xr);
    jump[i] = static_cast<std::int64_t>(std::llround(scaled_jump[i] * N));
  }
  for (const JumpRateEntry& e : jump_rate_table(model, control, x))
    if (e.jump == jump) return e.rate;
  return 0.0;
}

}  // namespace jumpctrl
