#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "jumpctrl/errors.hpp"

namespace jumpctrl {

using State = std::vector<std::int64_t>;

struct Species {
  std::string name;
  int index = 0;

  bool operator==(const Species&) const = default;
};

enum class PropensityKind { ZeroOrder, Unary, BinarySelf, BinaryPair };

// One of the four mass-action propensity classes under classical scaling:
//   ZeroOrder        rate = kappa * N
//   Unary(i)         rate = kappa * x_i
//   BinarySelf(i)    rate = (kappa / N) * x_i * (x_i - 1)
//   BinaryPair(i,j)  rate = (kappa / N) * x_i * x_j,  i != j
struct PropensityForm {
  PropensityKind kind = PropensityKind::ZeroOrder;
  int species_i = -1;
  int species_j = -1;

  bool operator==(const PropensityForm&) const = default;
};

struct Reaction {
  std::string name;
  std::vector<std::int64_t> reactants;  // stoichiometry, one entry per species
  std::vector<std::int64_t> products;
  PropensityForm form;
  std::vector<std::int64_t> jump;  // products - reactants, never all-zero

  bool operator==(const Reaction&) const = default;
};

struct Control {
  std::string name;
  std::vector<double> rate_constants;  // kappa_k, one per reaction

  bool operator==(const Control&) const = default;
};

struct ControlSet {
  std::vector<Control> controls;

  int size() const { return static_cast<int>(controls.size()); }
  bool operator==(const ControlSet&) const = default;
};

// Open per-species density box [low_i, high_i); supremum constants in the
// bounds module are taken over it.
struct DomainBox {
  std::vector<double> low;
  std::vector<double> high;

  bool operator==(const DomainBox&) const = default;
};

struct StagedHorizon {
  std::vector<double> stage_times;  // t_0 = 0 < t_1 < ... < t_K = T

  int num_stages() const { return static_cast<int>(stage_times.size()) - 1; }
  double total_time() const { return stage_times.back(); }
  double max_stage_width() const;
  // index j with t in [t_j, t_{j+1}); the final stage is right-closed
  int stage_at(double t) const;
  void validate() const;

  bool operator==(const StagedHorizon&) const = default;
};

// Flattened per-(control, reaction) rate evaluation: coef premultiplied
// by the scaling, factor indices resolved, so the hot loop runs
//   rate = coef * x[ia] * (x[ib] - sub)
// with ia/ib = -1 meaning the factor is absent.
struct CompiledRate {
  double coef = 0.0;
  std::int32_t ia = -1;
  std::int32_t ib = -1;
  double sub = 0.0;
};

inline double compiled_rate(const CompiledRate& r, const std::int64_t* x) {
  double rate = r.coef;
  if (r.ia >= 0) rate *= static_cast<double>(x[r.ia]);
  if (r.ib >= 0) rate *= static_cast<double>(x[r.ib]) - r.sub;
  return rate;
}

class JumpModel {
 public:
  JumpModel(std::string name, std::vector<Species> species,
            std::vector<Reaction> reactions, ControlSet controls,
            std::int64_t scaling, std::optional<DomainBox> domain = {});

  const std::string& name() const { return name_; }
  const std::vector<Species>& species() const { return species_; }
  const std::vector<Reaction>& reactions() const { return reactions_; }
  const ControlSet& control_set() const { return controls_; }
  std::int64_t scaling() const { return scaling_; }
  const DomainBox& domain() const { return domain_; }
  bool domain_is_default() const { return domain_is_default_; }

  int num_species() const { return static_cast<int>(species_.size()); }
  int num_reactions() const { return static_cast<int>(reactions_.size()); }
  int num_controls() const { return controls_.size(); }

  int species_index(const std::string& name) const;  // -1 if unknown

  // Same network under a different scaling N.
  JumpModel with_scaling(std::int64_t scaling) const;

  double propensity(int control, const State& x, int reaction) const {
    return compiled_rate(
        compiled_[static_cast<std::size_t>(control) * reactions_.size() + static_cast<std::size_t>(reaction)],
        x.data());
  }

  // fills rates[k] for all reactions, returns the total rate
  double propensities(int control, const State& x, std::vector<double>& rates) const {
    rates.resize(reactions_.size());
    const CompiledRate* cr = compiled_rates(control);
    double total = 0.0;
    for (std::size_t k = 0; k < reactions_.size(); ++k) {
      const double r = compiled_rate(cr[k], x.data());
      rates[k] = r;
      total += r;
    }
    return total;
  }

  const CompiledRate* compiled_rates(int control) const {
    return compiled_.data() + static_cast<std::size_t>(control) * reactions_.size();
  }
  // jump vectors flattened as [reaction * n + species]
  const std::int64_t* jumps_flat() const { return jumps_flat_.data(); }

  bool operator==(const JumpModel& other) const {
    return name_ == other.name_ && species_ == other.species_ &&
           reactions_ == other.reactions_ && controls_ == other.controls_ &&
           scaling_ == other.scaling_ && domain_ == other.domain_;
  }

 private:
  void validate() const;
  void compile();

  std::string name_;
  std::vector<Species> species_;
  std::vector<Reaction> reactions_;
  ControlSet controls_;
  std::int64_t scaling_;
  DomainBox domain_;
  bool domain_is_default_ = false;
  std::vector<CompiledRate> compiled_;    // [control * m + reaction]
  std::vector<std::int64_t> jumps_flat_;  // [reaction * n + species]
};

// Aggregated jump-rate table at a state: one entry per distinct jump
// vector, rates summed across reactions sharing it, zero-rate entries
// omitted. Entries ordered by first-contributing reaction.
struct JumpRateEntry {
  std::vector<std::int64_t> jump;
  double rate;
};

std::vector<JumpRateEntry> jump_rate_table(const JumpModel& model, int control, const State& x);

double total_jump_rate(const JumpModel& model, int control, const State& x);

// Rate of the density process for moving by scaled jump l (= integer jump / N)
// from density z (N*z must be integral).
double density_rate(const JumpModel& model, int control, const std::vector<double>& z,
                    const std::vector<double>& scaled_jump);

}  // namespace jumpctrl
