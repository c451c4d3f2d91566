#pragma once

#include <cstdint>
#include <vector>

#include "jumpctrl/cost.hpp"
#include "jumpctrl/model.hpp"
#include "jumpctrl/odelimit.hpp"

namespace jumpctrl {

// Constants entering the convergence bounds: jump-moment supremum,
// drift-field mismatch and Lipschitz constants over the supremum box,
// cost Lipschitz/bound constants, and the tube radius gamma.
struct AssumptionConstants {
  double alpha = 2.0;      // in (1, 2]
  double m_n_alpha = 0.0;  // sup of the alpha-moment of density jumps
  double omega_n = 0.0;    // sup |F^{nu,N} - F^nu|
  double lf = 0.0;         // Lipschitz constant of the drift fields
  double l_r = 0.0, l_phi = 0.0, l_psi = 0.0;
  double m_r = 0.0, m_phi = 0.0, m_psi = 0.0;
  double gamma = 0.0;  // 0 until filled by derive_gamma
  DomainBox box;
};

// Closed-form suprema over the box for the four propensity classes (all
// monotone in z on the positive orthant, so the box's upper corner
// attains them); cost constants from the catalogue.
AssumptionConstants derive_constants(const JumpModel& model, const CostSpec& spec, double alpha);
AssumptionConstants derive_constants(const JumpModel& model, const CostSpec& spec, double alpha,
                                     const DomainBox& box);

// dense-grid cross-check of the moment supremum (test support)
double moment_supremum_grid(const JumpModel& model, double alpha, const DomainBox& box,
                            int points_per_axis);
double lipschitz_grid(const JumpModel& model, const DomainBox& box, int points_per_axis);

// Tube radius: half the smallest margin between the dense ODE output
// under every open-loop policy and the box boundary.
double derive_gamma(const JumpModel& model, const StagedHorizon& horizon,
                    const std::vector<double>& z0, const DomainBox& box, double dt = 1e-3);

// pathwise deviation constant
double c_tn(double alpha, double omega_n, double m_n_alpha, double total_time);
double c_tn(const AssumptionConstants& constants, double total_time);

double m_overline(const AssumptionConstants& constants, int num_stages, double total_time);

// cost-gap factor multiplying (|z_N - z_0| + C_{T,N})
double cost_gap_factor(const AssumptionConstants& constants, int num_stages, double total_time);

// value-iteration error recursion a_k, b_k (terminal a_K = L_psi, b_K = 0)
struct ValueErrorSequences {
  std::vector<double> a;
  std::vector<double> b;
};
ValueErrorSequences ak_bk(const AssumptionConstants& constants, const StagedHorizon& horizon,
                          double c_h_n);
// explicit solution (uniform stage widths)
ValueErrorSequences ak_bk_closed_form(const AssumptionConstants& constants,
                                      const StagedHorizon& horizon, double c_h_n);

// ---- empirical verification -------------------------------------------------

struct KurtzRow {
  std::int64_t scaling = 0;
  double empirical_sup_error = 0.0;  // mean over paths of sup_t |z^N(t) - z~(t)|
  double bound = 0.0;                // (|z^N(0) - z0| + C_{T,N}) e^{L_F T}
  double c_tn = 0.0;
  double init_gap = 0.0;
  // tube-exit statistics with rho = gamma e^{-L_F T} / 3: empirical
  // P(sup deviation > gamma) against the Chebyshev-type bound C_TN/rho
  double exit_probability = 0.0;
  double exit_bound = 0.0;
  double gamma = 0.0;
};

struct KurtzReport {
  std::vector<KurtzRow> rows;
  double slope = 0.0;  // log-log regression of empirical error vs N
};

KurtzReport verify_kurtz(const JumpModel& model, const std::vector<int>& policy,
                         const StagedHorizon& horizon, const std::vector<double>& z0,
                         const std::vector<std::int64_t>& scalings, int num_paths,
                         std::uint64_t seed, double alpha = 2.0, int workers = 0,
                         double ode_dt = 1e-3);

struct MartingaleCheck {
  std::vector<double> mean;     // per component
  std::vector<double> stderr_;  // per component
  int num_paths = 0;
};

// terminal value of the compensated density process along exact paths
MartingaleCheck verify_martingale(const JumpModel& model, const std::vector<int>& policy,
                                  const StagedHorizon& horizon, const std::vector<double>& z0,
                                  int num_paths, std::uint64_t seed, int workers = 0);

struct Lemma1Result {
  double middle = 0.0;
  double bound = 0.0;
};

// second-order remainder of |.|^alpha against its bound
Lemma1Result lemma1_check(const std::vector<double>& z, const std::vector<double>& w, double alpha);

}  // namespace jumpctrl
