#include "jumpctrl/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "jumpctrl/openloop.hpp"
#include "jumpctrl/parallel.hpp"
#include "jumpctrl/simulate.hpp"

namespace jumpctrl {

namespace {

double jump_norm(const std::vector<std::int64_t>& jump) {
  double s = 0.0;
  for (std::int64_t l : jump) s += static_cast<double>(l) * static_cast<double>(l);
  return std::sqrt(s);
}

// propensity of reaction k at a real-valued state (used for suprema at
// box corners, where N*z need not be integral)
double propensity_real(const JumpModel& model, int control, const std::vector<double>& x, int k) {
  const Reaction& r = model.reactions()[static_cast<std::size_t>(k)];
  const double kappa =
      model.control_set().controls[static_cast<std::size_t>(control)].rate_constants[static_cast<std::size_t>(k)];
  const double N = static_cast<double>(model.scaling());
  switch (r.form.kind) {
    case PropensityKind::ZeroOrder: return kappa * N;
    case PropensityKind::Unary: return kappa * x[static_cast<std::size_t>(r.form.species_i)];
    case PropensityKind::BinarySelf: {
      const double xi = x[static_cast<std::size_t>(r.form.species_i)];
      return kappa / N * xi * std::max(0.0, xi - 1.0);
    }
    case PropensityKind::BinaryPair:
      return kappa / N * x[static_cast<std::size_t>(r.form.species_i)] *
             x[static_cast<std::size_t>(r.form.species_j)];
  }
  return 0.0;
}

double moment_at_density(const JumpModel& model, double alpha, const std::vector<double>& z) {
  const double N = static_cast<double>(model.scaling());
  std::vector<double> x(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) x[i] = z[i] * N;
  double worst = 0.0;
  for (int v = 0; v < model.num_controls(); ++v) {
    double total = 0.0;
    for (int k = 0; k < model.num_reactions(); ++k) {
      const double norm = jump_norm(model.reactions()[static_cast<std::size_t>(k)].jump);
      total += std::pow(norm, alpha) * propensity_real(model, v, x, k);
    }
    worst = std::max(worst, total);
  }
  return worst * std::pow(N, -alpha);
}

// Entrywise bound on the Jacobian of the limit fields over the box: each
// cell of J(z) is affine in z, so its extremes over the box sit at
// corners; take max |J_ij| over all (control, corner) pairs.
std::vector<std::vector<double>> jacobian_bound(const JumpModel& model, const DomainBox& box) {
  const int n = model.num_species();
  std::vector<std::vector<double>> bound(static_cast<std::size_t>(n),
                                         std::vector<double>(static_cast<std::size_t>(n), 0.0));
  std::vector<std::vector<double>> J(static_cast<std::size_t>(n),
                                     std::vector<double>(static_cast<std::size_t>(n), 0.0));
  const std::size_t corners = static_cast<std::size_t>(1) << n;
  for (int v = 0; v < model.num_controls(); ++v) {
    for (std::size_t c = 0; c < corners; ++c) {
      std::vector<double> z(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i)
        z[static_cast<std::size_t>(i)] =
            (c >> i) & 1 ? box.high[static_cast<std::size_t>(i)] : box.low[static_cast<std::size_t>(i)];
      for (auto& row : J) std::fill(row.begin(), row.end(), 0.0);
      for (int k = 0; k < model.num_reactions(); ++k) {
        const Reaction& r = model.reactions()[static_cast<std::size_t>(k)];
        const double kappa =
            model.control_set().controls[static_cast<std::size_t>(v)].rate_constants[static_cast<std::size_t>(k)];
        auto add = [&](int dcol, double dval) {
          for (int i = 0; i < n; ++i) {
            const double li = static_cast<double>(r.jump[static_cast<std::size_t>(i)]);
            if (li != 0.0) J[static_cast<std::size_t>(i)][static_cast<std::size_t>(dcol)] += li * dval;
          }
        };
        switch (r.form.kind) {
          case PropensityKind::ZeroOrder:
            break;
          case PropensityKind::Unary:
            add(r.form.species_i, kappa);
            break;
          case PropensityKind::BinarySelf:
            add(r.form.species_i, 2.0 * kappa * z[static_cast<std::size_t>(r.form.species_i)]);
            break;
          case PropensityKind::BinaryPair:
            add(r.form.species_i, kappa * z[static_cast<std::size_t>(r.form.species_j)]);
            add(r.form.species_j, kappa * z[static_cast<std::size_t>(r.form.species_i)]);
            break;
        }
      }
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          bound[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
              std::max(bound[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)],
                       std::abs(J[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]));
    }
  }
  return bound;
}

double spectral_norm(const std::vector<std::vector<double>>& m) {
  const std::size_t n = m.size();
  if (n == 1) return std::abs(m[0][0]);
  std::vector<double> v(n, 1.0 / std::sqrt(static_cast<double>(n)));
  std::vector<double> mv(n), mtmv(n);
  double norm2 = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      mv[i] = 0.0;
      for (std::size_t j = 0; j < n; ++j) mv[i] += m[i][j] * v[j];
    }
    for (std::size_t j = 0; j < n; ++j) {
      mtmv[j] = 0.0;
      for (std::size_t i = 0; i < n; ++i) mtmv[j] += m[i][j] * mv[i];
    }
    double len = 0.0;
    for (double x : mtmv) len += x * x;
    len = std::sqrt(len);
    if (len == 0.0) return 0.0;
    norm2 = 0.0;
    for (double x : mv) norm2 += x * x;
    for (std::size_t j = 0; j < n; ++j) v[j] = mtmv[j] / len;
  }
  return std::sqrt(norm2);
}

}  // namespace

AssumptionConstants derive_constants(const JumpModel& model, const CostSpec& spec, double alpha) {
  return derive_constants(model, spec, alpha, model.domain());
}

AssumptionConstants derive_constants(const JumpModel& model, const CostSpec& spec, double alpha,
                                     const DomainBox& box) {
  if (!(alpha > 1.0 && alpha <= 2.0)) throw ConfigError("alpha must lie in (1, 2]");
  for (std::size_t i = 0; i < box.low.size(); ++i)
    if (!std::isfinite(box.low[i]) || !std::isfinite(box.high[i]))
      throw ConfigError("constants require a bounded box");
  AssumptionConstants c;
  c.alpha = alpha;
  c.box = box;
  const double N = static_cast<double>(model.scaling());

  // rates are sums of monomials with non-negative coefficients, so the
  // supremum over the box sits at the upper corner
  c.m_n_alpha = moment_at_density(model, alpha, box.high);

  for (int v = 0; v < model.num_controls(); ++v) {
    double mismatch = 0.0;
    for (int k = 0; k < model.num_reactions(); ++k) {
      const Reaction& r = model.reactions()[static_cast<std::size_t>(k)];
      if (r.form.kind != PropensityKind::BinarySelf) continue;
      const double kappa =
          model.control_set().controls[static_cast<std::size_t>(v)].rate_constants[static_cast<std::size_t>(k)];
      mismatch += jump_norm(r.jump) * kappa * box.high[static_cast<std::size_t>(r.form.species_i)] / N;
    }
    c.omega_n = std::max(c.omega_n, mismatch);
  }

  c.lf = spectral_norm(jacobian_bound(model, box));

  for (int v = 0; v < model.num_controls(); ++v) {
    c.l_r = std::max(c.l_r, spec.r(v).lipschitz_on(box));
    c.l_phi = std::max(c.l_phi, spec.phi(v).lipschitz_on(box));
    c.m_r = std::max(c.m_r, spec.r(v).bound_on(box));
    c.m_phi = std::max(c.m_phi, spec.phi(v).bound_on(box));
  }
  c.l_psi = spec.psi().lipschitz_on(box);
  c.m_psi = spec.psi().bound_on(box);
  return c;
}

double moment_supremum_grid(const JumpModel& model, double alpha, const DomainBox& box,
                            int points_per_axis) {
  const int n = model.num_species();
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  double worst = 0.0;
  for (;;) {
    std::vector<double> z(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double f = points_per_axis == 1
                           ? 0.0
                           : static_cast<double>(idx[static_cast<std::size_t>(i)]) /
                                 static_cast<double>(points_per_axis - 1);
      z[static_cast<std::size_t>(i)] = box.low[static_cast<std::size_t>(i)] +
                                       f * (box.high[static_cast<std::size_t>(i)] -
                                            box.low[static_cast<std::size_t>(i)]);
    }
    worst = std::max(worst, moment_at_density(model, alpha, z));
    int i = 0;
    for (; i < n; ++i) {
      if (++idx[static_cast<std::size_t>(i)] < points_per_axis) break;
      idx[static_cast<std::size_t>(i)] = 0;
    }
    if (i == n) break;
  }
  return worst;
}

double lipschitz_grid(const JumpModel& model, const DomainBox& box, int points_per_axis) {
  const int n = model.num_species();
  double worst = 0.0;
  std::vector<int> idx(static_cast<std::size_t>(n), 0);
  for (;;) {
    std::vector<double> z(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double f = points_per_axis == 1
                           ? 0.0
                           : static_cast<double>(idx[static_cast<std::size_t>(i)]) /
                                 static_cast<double>(points_per_axis - 1);
      z[static_cast<std::size_t>(i)] = box.low[static_cast<std::size_t>(i)] +
                                       f * (box.high[static_cast<std::size_t>(i)] -
                                            box.low[static_cast<std::size_t>(i)]);
    }
    // finite-difference Jacobian norm at z
    const double h = 1e-6;
    for (int v = 0; v < model.num_controls(); ++v) {
      std::vector<std::vector<double>> J(static_cast<std::size_t>(n),
                                         std::vector<double>(static_cast<std::size_t>(n)));
      for (int j = 0; j < n; ++j) {
        std::vector<double> zp = z, zm = z;
        zp[static_cast<std::size_t>(j)] += h;
        zm[static_cast<std::size_t>(j)] -= h;
        const auto fp = vector_field(model, v, zp);
        const auto fm = vector_field(model, v, zm);
        for (int i = 0; i < n; ++i)
          J[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
              (fp[static_cast<std::size_t>(i)] - fm[static_cast<std::size_t>(i)]) / (2.0 * h);
      }
      worst = std::max(worst, spectral_norm(J));
    }
    int i = 0;
    for (; i < n; ++i) {
      if (++idx[static_cast<std::size_t>(i)] < points_per_axis) break;
      idx[static_cast<std::size_t>(i)] = 0;
    }
    if (i == n) break;
  }
  return worst;
}

double derive_gamma(const JumpModel& model, const StagedHorizon& horizon,
                    const std::vector<double>& z0, const DomainBox& box, double dt) {
  const auto policies = enumerate_policies(model.num_controls(), horizon.num_stages());
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& policy : policies) {
    const OdePath path = integrate_piecewise(model, policy, z0, horizon, dt);
    for (const auto& stage : path.stages) {
      for (const auto& z : stage.values) {
        for (std::size_t i = 0; i < z.size(); ++i) {
          margin = std::min(margin, z[i] - box.low[i]);
          margin = std::min(margin, box.high[i] - z[i]);
        }
      }
    }
  }
  if (!(margin > 0.0))
    throw ConfigError("ODE tube leaves the box; enlarge the domain before deriving gamma");
  return margin / 2.0;
}

double c_tn(double alpha, double omega_n, double m_n_alpha, double total_time) {
  return total_time * omega_n +
         alpha / (2.0 * (alpha - 1.0)) *
             std::pow(4.0 * total_time * m_n_alpha / (alpha - 1.0), 1.0 / alpha);
}

double c_tn(const AssumptionConstants& c, double total_time) {
  return c_tn(c.alpha, c.omega_n, c.m_n_alpha, total_time);
}

double m_overline(const AssumptionConstants& c, int num_stages, double total_time) {
  if (!(c.gamma > 0.0)) throw ConfigError("gamma must be positive (run derive_gamma)");
  return 6.0 / c.gamma *
         (static_cast<double>(num_stages) * c.m_r + total_time * c.m_phi + c.m_psi);
}

double cost_gap_factor(const AssumptionConstants& c, int num_stages, double total_time) {
  const double expLT = std::exp(c.lf * total_time);
  const double phi_factor = c.lf == 0.0 ? total_time : (expLT - 1.0) / c.lf;
  return c.l_phi * phi_factor +
         (static_cast<double>(num_stages) * c.l_r + c.l_psi + m_overline(c, num_stages, total_time)) *
             expLT;
}

ValueErrorSequences ak_bk(const AssumptionConstants& c, const StagedHorizon& horizon,
                          double c_h_n) {
  const int K = horizon.num_stages();
  const double h = horizon.max_stage_width();
  const double T = horizon.total_time();
  const double e = std::exp(c.lf * h);
  const double mbar = m_overline(c, K, T);
  ValueErrorSequences seq;
  seq.a.assign(static_cast<std::size_t>(K + 1), 0.0);
  seq.b.assign(static_cast<std::size_t>(K + 1), 0.0);
  seq.a[static_cast<std::size_t>(K)] = c.l_psi;
  seq.b[static_cast<std::size_t>(K)] = 0.0;
  for (int k = K - 1; k >= 0; --k) {
    const double width = horizon.stage_times[static_cast<std::size_t>(k) + 1] -
                         horizon.stage_times[static_cast<std::size_t>(k)];
    seq.a[static_cast<std::size_t>(k)] =
        c.l_r + c.l_phi * e * h + mbar * e + seq.a[static_cast<std::size_t>(k) + 1] * e;
    seq.b[static_cast<std::size_t>(k)] = c.l_phi * c_h_n * e * width + 2.0 * mbar * c_h_n * e +
                                         seq.a[static_cast<std::size_t>(k) + 1] * c_h_n * e +
                                         seq.b[static_cast<std::size_t>(k) + 1];
  }
  return seq;
}

ValueErrorSequences ak_bk_closed_form(const AssumptionConstants& c, const StagedHorizon& horizon,
                                      double c_h_n) {
  const int K = horizon.num_stages();
  const double h = horizon.max_stage_width();
  const double T = horizon.total_time();
  for (int j = 0; j < K; ++j) {
    const double width = horizon.stage_times[static_cast<std::size_t>(j) + 1] -
                         horizon.stage_times[static_cast<std::size_t>(j)];
    if (std::abs(width - h) > 1e-12 * std::max(1.0, h))
      throw ConfigError("closed-form a_k/b_k requires uniform stage widths");
  }
  const double e = std::exp(c.lf * h);
  const double mbar = m_overline(c, K, T);
  const double A = c.l_r + c.l_phi * e * h + mbar * e;
  // (e^{L_F h m} - 1) / (e^{L_F h} - 1), with the m limit at L_F = 0
  auto geom = [&](int m) {
    if (c.lf * h == 0.0) return static_cast<double>(m);
    return std::expm1(c.lf * h * static_cast<double>(m)) / std::expm1(c.lf * h);
  };
  ValueErrorSequences seq;
  seq.a.assign(static_cast<std::size_t>(K + 1), 0.0);
  seq.b.assign(static_cast<std::size_t>(K + 1), 0.0);
  for (int k = 0; k <= K; ++k) {
    const int m = K - k;
    seq.a[static_cast<std::size_t>(k)] =
        A * geom(m) + c.l_psi * std::exp(c.lf * h * static_cast<double>(m));
    double inner;
    if (c.lf * h == 0.0) {
      // lim (geom(m) - m) / (e^{L_F h} - 1) = m (m - 1) / 2
      inner = A * static_cast<double>(m) * static_cast<double>(m - 1) / 2.0 + c.l_psi * geom(m);
    } else {
      inner = A / std::expm1(c.lf * h) * (geom(m) - static_cast<double>(m)) + c.l_psi * geom(m);
    }
    seq.b[static_cast<std::size_t>(k)] =
        c_h_n * e *
        (c.l_phi * (T - horizon.stage_times[static_cast<std::size_t>(k)]) + inner +
         2.0 * mbar * static_cast<double>(m));
  }
  return seq;
}

// ---- empirical checks -------------------------------------------------------

namespace {

// flattened dense ODE output with linear interpolation
struct DensePath {
  std::vector<double> times;
  std::vector<double> values;  // n per point
  int n = 0;

  void fill(const OdePath& path) {
    for (const auto& stage : path.stages) {
      for (std::size_t i = 0; i < stage.times.size(); ++i) {
        if (!times.empty() && stage.times[i] <= times.back()) continue;
        times.push_back(stage.times[i]);
        values.insert(values.end(), stage.values[i].begin(), stage.values[i].end());
      }
    }
    n = static_cast<int>(values.size() / times.size());
  }
  void value_at(double t, std::size_t& cursor, double* out) const {
    while (cursor + 1 < times.size() && times[cursor + 1] < t) ++cursor;
    std::size_t lo = cursor;
    if (lo + 1 >= times.size()) lo = times.size() - 2;
    const double span = times[lo + 1] - times[lo];
    const double s = span > 0.0 ? std::clamp((t - times[lo]) / span, 0.0, 1.0) : 0.0;
    for (int i = 0; i < n; ++i)
      out[i] = (1.0 - s) * values[lo * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] +
               s * values[(lo + 1) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)];
  }
};

struct SupDeviationObserver {
  const DensePath* ode;
  double scaling;
  std::size_t cursor = 0;
  double sup = 0.0;
  double buf[8] = {};

  double deviation(const State& x, const double* ref) const {
    double d2 = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double d = static_cast<double>(x[i]) / scaling - ref[i];
      d2 += d * d;
    }
    return std::sqrt(d2);
  }
  void probe(const State& x, double t) {
    std::size_t c = cursor;
    ode->value_at(t, c, buf);
    sup = std::max(sup, deviation(x, buf));
  }
  void hold(const State& x, double a, double b) {
    probe(x, a);
    // grid points inside (a, b)
    std::size_t c = cursor;
    while (c + 1 < ode->times.size() && ode->times[c + 1] < b) {
      ++c;
      if (ode->times[c] > a) {
        const double* v = ode->values.data() + c * static_cast<std::size_t>(ode->n);
        sup = std::max(sup, deviation(x, v));
      }
    }
    cursor = c;
    probe(x, b);
  }
  void jump(double, const State&) {}
};

}  // namespace

KurtzReport verify_kurtz(const JumpModel& model, const std::vector<int>& policy,
                         const StagedHorizon& horizon, const std::vector<double>& z0,
                         const std::vector<std::int64_t>& scalings, int num_paths,
                         std::uint64_t seed, double alpha, int workers, double ode_dt) {
  KurtzReport report;
  const OdePath ode = integrate_piecewise(model, policy, z0, horizon, ode_dt);
  DensePath dense;
  dense.fill(ode);
  // tube radius for this policy: half the margin between its ODE path and
  // the model box (0 when the tube is not contained)
  double gamma = std::numeric_limits<double>::infinity();
  for (const auto& stage : ode.stages)
    for (const auto& z : stage.values)
      for (std::size_t i = 0; i < z.size(); ++i) {
        gamma = std::min(gamma, z[i] - model.domain().low[i]);
        gamma = std::min(gamma, model.domain().high[i] - z[i]);
      }
  gamma = std::max(0.0, gamma / 2.0);
  const CostSpec no_cost = zero_cost_spec();
  for (std::size_t ni = 0; ni < scalings.size(); ++ni) {
    const JumpModel scaled = model.with_scaling(scalings[ni]);
    const double N = static_cast<double>(scalings[ni]);
    // z^N(0): nearest lattice state to z0
    State x0(z0.size());
    double init_gap2 = 0.0;
    for (std::size_t i = 0; i < z0.size(); ++i) {
      x0[i] = static_cast<std::int64_t>(std::llround(z0[i] * N));
      const double d = static_cast<double>(x0[i]) / N - z0[i];
      init_gap2 += d * d;
    }
    const double init_gap = std::sqrt(init_gap2);
    std::vector<double> sups(static_cast<std::size_t>(num_paths));
    const int nw = resolve_workers(workers);
    std::vector<SimScratch> scratch(static_cast<std::size_t>(nw));
    parallel_for(static_cast<std::size_t>(num_paths), nw, [&](std::size_t p, std::size_t w) {
      RngStream rng(seed, stream_index(phase::kBounds, ni, p));
      SupDeviationObserver obs{&dense, N};
      State x = x0;
      for (int j = 0; j < horizon.num_stages(); ++j)
        ssa_segment(scaled, policy[static_cast<std::size_t>(j)], x,
                    horizon.stage_times[static_cast<std::size_t>(j)],
                    horizon.stage_times[static_cast<std::size_t>(j) + 1], rng, scratch[w], obs);
      sups[p] = obs.sup;
    });
    double mean = 0.0;
    for (double s : sups) mean += s;
    mean /= static_cast<double>(num_paths);
    const AssumptionConstants consts = derive_constants(scaled, no_cost, alpha);
    const double ctn = c_tn(consts, horizon.total_time());
    KurtzRow row;
    row.scaling = scalings[ni];
    row.empirical_sup_error = mean;
    row.c_tn = ctn;
    row.init_gap = init_gap;
    row.bound = (init_gap + ctn) * std::exp(consts.lf * horizon.total_time());
    row.gamma = gamma;
    if (gamma > 0.0) {
      std::size_t exits = 0;
      for (double s : sups)
        if (s > gamma) ++exits;
      row.exit_probability = static_cast<double>(exits) / static_cast<double>(num_paths);
      const double rho = gamma * std::exp(-consts.lf * horizon.total_time()) / 3.0;
      row.exit_bound = (init_gap + ctn - horizon.total_time() * consts.omega_n) / rho;
    }
    report.rows.push_back(row);
  }
  // least-squares slope of log(error) against log(N)
  if (report.rows.size() >= 2) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double m = static_cast<double>(report.rows.size());
    for (const KurtzRow& r : report.rows) {
      const double x = std::log(static_cast<double>(r.scaling));
      const double y = std::log(r.empirical_sup_error);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    report.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  }
  return report;
}

MartingaleCheck verify_martingale(const JumpModel& model, const std::vector<int>& policy,
                                  const StagedHorizon& horizon, const std::vector<double>& z0,
                                  int num_paths, std::uint64_t seed, int workers) {
  const int n = model.num_species();
  const State x0 = state_from_density(model, z0);
  const double N = static_cast<double>(model.scaling());
  std::vector<double> terminal(static_cast<std::size_t>(num_paths) * static_cast<std::size_t>(n));
  const int nw = resolve_workers(workers);
  std::vector<SimScratch> scratch(static_cast<std::size_t>(nw));

  struct DriftIntegral {
    const JumpModel* model;
    int control = 0;
    double scaling = 1.0;
    std::vector<double> acc;
    std::vector<double> z;
    void hold(const State& x, double a, double b) {
      for (std::size_t i = 0; i < z.size(); ++i) z[i] = static_cast<double>(x[i]) / scaling;
      const auto F = vector_field_finite(*model, control, z);
      for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += F[i] * (b - a);
    }
    void jump(double, const State&) {}
  };

  parallel_for(static_cast<std::size_t>(num_paths), nw, [&](std::size_t p, std::size_t w) {
    RngStream rng(seed, stream_index(phase::kBounds, 0x6d617274ULL, p));
    DriftIntegral obs;
    obs.model = &model;
    obs.scaling = N;
    obs.acc.assign(static_cast<std::size_t>(n), 0.0);
    obs.z.assign(static_cast<std::size_t>(n), 0.0);
    State x = x0;
    for (int j = 0; j < horizon.num_stages(); ++j) {
      obs.control = policy[static_cast<std::size_t>(j)];
      ssa_segment(model, obs.control, x, horizon.stage_times[static_cast<std::size_t>(j)],
                  horizon.stage_times[static_cast<std::size_t>(j) + 1], rng, scratch[w], obs);
    }
    for (int i = 0; i < n; ++i)
      terminal[p * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] =
          static_cast<double>(x[static_cast<std::size_t>(i)] - x0[static_cast<std::size_t>(i)]) / N -
          obs.acc[static_cast<std::size_t>(i)];
  });

  MartingaleCheck check;
  check.num_paths = num_paths;
  check.mean.assign(static_cast<std::size_t>(n), 0.0);
  check.stderr_.assign(static_cast<std::size_t>(n), 0.0);
  for (int i = 0; i < n; ++i) {
    double sum = 0.0;
    for (int p = 0; p < num_paths; ++p)
      sum += terminal[static_cast<std::size_t>(p) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)];
    const double mean = sum / static_cast<double>(num_paths);
    double ss = 0.0;
    for (int p = 0; p < num_paths; ++p) {
      const double d =
          terminal[static_cast<std::size_t>(p) * static_cast<std::size_t>(n) + static_cast<std::size_t>(i)] - mean;
      ss += d * d;
    }
    check.mean[static_cast<std::size_t>(i)] = mean;
    check.stderr_[static_cast<std::size_t>(i)] =
        std::sqrt(ss / (static_cast<double>(num_paths) - 1.0) / static_cast<double>(num_paths));
  }
  return check;
}

Lemma1Result lemma1_check(const std::vector<double>& z, const std::vector<double>& w,
                          double alpha) {
  if (!(alpha > 1.0 && alpha <= 2.0)) throw ConfigError("alpha must lie in (1, 2]");
  auto norm = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
  };
  const double nw = norm(w);
  std::vector<double> zw(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) zw[i] = z[i] + w[i];
  double grad_dot = 0.0;
  if (nw > 0.0) {
    const double coef = alpha * std::pow(nw, alpha - 2.0);
    for (std::size_t i = 0; i < z.size(); ++i) grad_dot += coef * w[i] * z[i];
  }
  Lemma1Result out;
  out.middle = std::pow(norm(zw), alpha) - std::pow(nw, alpha) - grad_dot;
  out.bound = 4.0 / (alpha - 1.0) * std::pow(norm(z) / 2.0, alpha);
  return out;
}

}  // namespace jumpctrl
