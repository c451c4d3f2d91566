#include "jumpctrl/odelimit.hpp"

#include <algorithm>
#include <cmath>

namespace jumpctrl {

namespace {

double eta(const JumpModel& model, int control, const std::vector<double>& z, int reaction,
           bool finite_n) {
  const Reaction& r = model.reactions()[static_cast<std::size_t>(reaction)];
  const double kappa = model.control_set().controls[static_cast<std::size_t>(control)].rate_constants[static_cast<std::size_t>(reaction)];
  switch (r.form.kind) {
    case PropensityKind::ZeroOrder:
      return kappa;
    case PropensityKind::Unary:
      return kappa * z[r.form.species_i];
    case PropensityKind::BinarySelf: {
      const double zi = z[r.form.species_i];
      if (finite_n) return kappa * zi * (zi - 1.0 / static_cast<double>(model.scaling()));
      return kappa * zi * zi;
    }
    case PropensityKind::BinaryPair:
      return kappa * z[r.form.species_i] * z[r.form.species_j];
  }
  return 0.0;
}

std::vector<double> field(const JumpModel& model, int control, const std::vector<double>& z,
                          bool finite_n) {
  std::vector<double> F(z.size(), 0.0);
  for (int k = 0; k < model.num_reactions(); ++k) {
    const double rate = eta(model, control, z, k, finite_n);
    if (rate == 0.0) continue;
    const auto& jump = model.reactions()[static_cast<std::size_t>(k)].jump;
    for (std::size_t i = 0; i < F.size(); ++i) F[i] += rate * static_cast<double>(jump[i]);
  }
  return F;
}

void rk4_step(const JumpModel& model, int control, std::vector<double>& z, double h) {
  const std::size_t n = z.size();
  std::vector<double> k1 = field(model, control, z, false);
  std::vector<double> tmp(n);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * h * k1[i];
  std::vector<double> k2 = field(model, control, tmp, false);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * h * k2[i];
  std::vector<double> k3 = field(model, control, tmp, false);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + h * k3[i];
  std::vector<double> k4 = field(model, control, tmp, false);
  for (std::size_t i = 0; i < n; ++i)
    z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

bool inside(const DomainBox& box, const std::vector<double>& z) {
  for (std::size_t i = 0; i < z.size(); ++i)
    if (z[i] < box.low[i] || z[i] >= box.high[i]) return false;
  return true;
}

// cubic Hermite value on [0,1] given endpoint values and derivatives
double hermite(double s, double za, double zb, double da, double db, double h) {
  const double s2 = s * s;
  const double s3 = s2 * s;
  return za * (2 * s3 - 3 * s2 + 1) + h * da * (s3 - 2 * s2 + s) + zb * (-2 * s3 + 3 * s2) +
         h * db * (s3 - s2);
}

}  // namespace

std::vector<double> vector_field(const JumpModel& model, int control, const std::vector<double>& z) {
  return field(model, control, z, false);
}

std::vector<double> vector_field_finite(const JumpModel& model, int control,
                                        const std::vector<double>& z) {
  return field(model, control, z, true);
}

OdePath integrate_piecewise(const JumpModel& model, const std::vector<int>& open_loop,
                            const std::vector<double>& z0, const StagedHorizon& horizon,
                            double dt, const DomainBox* guard_box) {
  if (dt <= 0.0) throw ConfigError("integration step must be positive");
  if (static_cast<int>(open_loop.size()) != horizon.num_stages())
    throw ConfigError("open-loop policy length must equal the number of stages");
  OdePath path;
  path.step = dt;
  std::vector<double> z = z0;
  if (guard_box && !inside(*guard_box, z))
    throw NumericalError("initial density outside the guard box");
  for (int j = 0; j < horizon.num_stages(); ++j) {
    OdePath::Stage stage;
    stage.control = open_loop[static_cast<std::size_t>(j)];
    const double t0 = horizon.stage_times[static_cast<std::size_t>(j)];
    const double t1 = horizon.stage_times[static_cast<std::size_t>(j) + 1];
    stage.times.push_back(t0);
    stage.values.push_back(z);
    const long steps = std::max<long>(1, static_cast<long>(std::ceil((t1 - t0) / dt - 1e-12)));
    double t = t0;
    for (long i = 1; i <= steps; ++i) {
      const double t_next = (i == steps) ? t1 : t0 + static_cast<double>(i) * dt;
      rk4_step(model, stage.control, z, t_next - t);
      t = t_next;
      stage.times.push_back(t);
      stage.values.push_back(z);
      if (guard_box && !inside(*guard_box, z))
        throw NumericalError("ODE path left the guard box at t = " + std::to_string(t));
    }
    path.stages.push_back(std::move(stage));
  }
  return path;
}

std::vector<double> OdePath::at(const JumpModel& model, double t) const {
  const OdePath::Stage* stage = &stages.back();
  for (const auto& s : stages) {
    if (t <= s.times.back()) {
      stage = &s;
      break;
    }
  }
  const auto& times = stage->times;
  auto it = std::upper_bound(times.begin(), times.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - times.begin());
  if (hi == 0) return stage->values.front();
  if (hi >= times.size()) return stage->values.back();
  const std::size_t lo = hi - 1;
  const double h = times[hi] - times[lo];
  const double s = (t - times[lo]) / h;
  const std::vector<double> Fa = field(model, stage->control, stage->values[lo], false);
  const std::vector<double> Fb = field(model, stage->control, stage->values[hi], false);
  std::vector<double> out(Fa.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = hermite(s, stage->values[lo][i], stage->values[hi][i], Fa[i], Fb[i], h);
  return out;
}

namespace {

// running-cost integral over one grid interval via the Hermite cubic;
// intervals where an abs argument changes sign get split 4x
double interval_phi_integral(const JumpModel& model, const CostFunction& phi, int control,
                             const std::vector<double>& za, const std::vector<double>& zb,
                             double h) {
  const std::vector<double> Fa = field(model, control, za, false);
  const std::vector<double> Fb = field(model, control, zb, false);
  const std::size_t n = za.size();
  std::vector<double> zs(n);
  auto value_at = [&](double s) {
    for (std::size_t i = 0; i < n; ++i) zs[i] = hermite(s, za[i], zb[i], Fa[i], Fb[i], h);
    return phi.eval(zs);
  };
  bool kink = false;
  for (const CostTerm& t : phi.terms) {
    if (t.kind != CostTermKind::AbsDeviation) continue;
    auto lin = [&](const std::vector<double>& z) {
      double v = -t.offset;
      for (std::size_t i = 0; i < n; ++i) v += t.coeffs[i] * z[i];
      return v;
    };
    if (lin(za) * lin(zb) <= 0.0) kink = true;
  }
  if (!kink) {
    return h / 6.0 * (phi.eval(za) + 4.0 * value_at(0.5) + phi.eval(zb));
  }
  double total = 0.0;
  for (int q = 0; q < 4; ++q) {
    const double s0 = q / 4.0;
    const double s1 = (q + 1) / 4.0;
    total += (s1 - s0) * h / 6.0 *
             (value_at(s0) + 4.0 * value_at(0.5 * (s0 + s1)) + value_at(s1));
  }
  return total;
}

}  // namespace

double ode_cost(const OdePath& path, const JumpModel& model, const CostSpec& spec,
                const StagedHorizon& horizon) {
  double total = 0.0;
  for (int j = 0; j < horizon.num_stages(); ++j) {
    const OdePath::Stage& stage = path.stages[static_cast<std::size_t>(j)];
    const int control = stage.control;
    total += spec.r(control).eval(stage.values.front());
    const CostFunction& phi = spec.phi(control);
    if (!phi.is_zero()) {
      for (std::size_t i = 0; i + 1 < stage.times.size(); ++i) {
        const double h = stage.times[i + 1] - stage.times[i];
        total += interval_phi_integral(model, phi, control, stage.values[i], stage.values[i + 1], h);
      }
    }
  }
  total += spec.psi().eval(path.final_value());
  return total;
}

}  // namespace jumpctrl
