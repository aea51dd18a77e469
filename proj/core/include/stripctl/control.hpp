#pragma once

#include <Eigen/Dense>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stripctl/geometry.hpp"
#include "stripctl/heat.hpp"
#include "stripctl/spectral.hpp"
#include "stripctl/strip_model.hpp"

namespace stripctl {

/// Control on a uniform time grid over [0, T], stored as the in-band fields
/// g(s_k) = e^{(T - s_k) Delta} phi* before the omega cutoff; the realized
/// control is v(s, x) = chi_omega(x) g(s, x), piecewise linear in time.
struct ControlFunction {
  double T = 0.0;
  int n_t = 0;
  std::shared_ptr<const FrequencyLattice> lattice;
  std::vector<Eigen::VectorXcd> pre_cutoff;
  double norm = 0.0;  // L2((0,T) x omega)

  double node(int k) const { return T * k / (n_t - 1); }
};

/// Grid samples of v at one time node; zero outside omega up to cells
/// straddling the boundary (their weight is the covered volume fraction).
GridField control_samples(const ControlFunction& v, int node, const SetDescription& omega,
                          const StripDomain& domain);

/// Recompute the L2((0,T) x omega) norm from the stored snapshots.
double control_norm(const ControlFunction& v, const SetDescription& omega,
                    const StripDomain& domain);

/// The dissipation/spectral-inequality constants fed to the abstract
/// observability machinery: eta1 = 1/2, eta2 = m = c2 = 1.
struct ObservabilityHypotheses {
  double c1 = 0.0;
  double eta1 = 0.5;
  double eta2 = 1.0;
  double m = 1.0;
  double c2 = 1.0;
  double t0 = std::numeric_limits<double>::infinity();
};

ObservabilityHypotheses observability_hypotheses(double c1, double t0);

struct CostReport {
  double c1 = std::numeric_limits<double>::quiet_NaN();
  double tau0 = std::numeric_limits<double>::quiet_NaN();
  double log_sqrt_C1 = std::numeric_limits<double>::quiet_NaN();
  double C2 = std::numeric_limits<double>::quiet_NaN();
  double T = std::numeric_limits<double>::quiet_NaN();
  double log_cost_bound = std::numeric_limits<double>::quiet_NaN();
  // empirical counterparts
  double empirical_observability = std::numeric_limits<double>::quiet_NaN();
  double achieved_cost = std::numeric_limits<double>::quiet_NaN();
  double final_residual = std::numeric_limits<double>::quiet_NaN();
};

/// Exact trapezoidal weight: the n_t-node trapezoid rule applied to
/// int_0^T e^{-s mu} ds, evaluated in closed form.
double trapezoid_exp_integral(double mu, double T, int n_t);

/// int_0^T e^{-(T-s) mu_i} PL[v_i](s) ds for node values v on the uniform
/// grid over [0, T] (piecewise-linear interpolation, exact per segment).
Eigen::VectorXcd duhamel_piecewise_linear(const FrequencyLattice& lattice, double T,
                                          const std::vector<Eigen::VectorXcd>& nodes);

/// Lambda_T = int_0^T e^{s Delta} chi_omega e^{s Delta} ds in the lattice
/// basis, trapezoidal in s: entries mass(i,j) * q(mu_i + mu_j).
Eigen::MatrixXcd gramian_matrix(const FrequencyLattice& lattice, const Eigen::MatrixXcd& mass,
                                double T, int n_t);

/// One application of the Gramian to a coefficient field.
Eigen::VectorXcd gramian_apply(const Eigen::VectorXcd& phi, double T,
                               const SetDescription& omega, int n_t,
                               const StripDomain& domain, const FrequencyLattice& lattice);

struct HumResult {
  ControlFunction control;
  HeatState final_state;
  double cost = 0.0;
  double residual_rel = 0.0;
  int cg_iterations = 0;
};

/// Minimal-norm control: solves Lambda_T phi = -e^{T Delta} u0 by (Jacobi
/// preconditioned) conjugate gradients to relative residual <= tol, then
/// v(t) = chi_omega e^{(T-t) Delta} phi. Final state by exact mode-wise
/// Duhamel integration of the piecewise-linear-in-time control.
HumResult hum_control(const HeatState& u0, double T, const SetDescription& omega, double tol,
                      const StripDomain& domain, int n_t = 128);

/// Largest generalized eigenvalue of (e^{T Delta}* e^{T Delta}, Lambda_T) by
/// seeded iteration: the smallest valid constant in the observability
/// estimate on the truncated model.
double empirical_observability_constant(double T, const SetDescription& omega,
                                        const StripDomain& domain,
                                        const FrequencyLattice& lattice, int n_t,
                                        std::uint64_t seed);

/// The explicit constant pipeline: c1, tau0 = 2^{5/2} 3 c1, log sqrt(C1),
/// C2 = (48K)^2 (||a||_1 + d)^2 log^2((2K)^d / gamma), and the log control
/// cost bound log sqrt(C1) + C2 / (2T).
CostReport cost_constants(double gamma, std::span<const double> a, int d, double K, double T);

struct HConditions {
  double h1 = 0.0;
  double h2 = 0.0;  // may overflow to +inf; the flag uses the exact comparison
  bool ok = false;
};

/// h1(tau) = exp(-2^3 3 c1^2 / tau)/tau <= 1/4, h2(tau) =
/// exp(2^4 (3 c1)^2 / tau)/tau >= 1, and tau <= 2^{5/2} 3 c1 (the boundary
/// tau = tau0 is admitted).
HConditions h_conditions_check(double c1, double tau);

struct LrSchedule {
  double E0 = 0.0;  // stage k controls modes with energy <= E0 * 4^k
  int k_max = 4;    // stages 0..k_max, interval lengths T * 2^{-(k+1)}
};

struct LrStage {
  int k = 0;
  double E = 0.0;
  double tau = 0.0;  // control half-interval length
  std::size_t low_modes = 0;
  double pre_norm = 0.0;
  double post_norm = 0.0;  // after control half + free half
  double cost = 0.0;
  int cg_iterations = 0;
};

struct LrResult {
  std::vector<LrStage> stages;
  HeatState final_state;
  double total_cost = 0.0;
  double final_norm = 0.0;
  /// first stage index from which the per-stage cost ratios stay < 1
  /// (summability report); -1 when the tail never settles.
  int summable_from = -1;
  bool ok = true;
  std::string message;
};

/// Lebeau-Robbiano staged synthesis: on each interval's first half a
/// finite-dimensional HUM control steers pi_{E_k} of the state to zero, the
/// second half is free dissipation.
LrResult lr_synthesize(const HeatState& u0, double T, const SetDescription& omega,
                       const LrSchedule& schedule, const StripDomain& domain, double tol,
                       int n_t = 128);

}  // namespace stripctl
