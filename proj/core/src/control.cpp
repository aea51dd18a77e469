#include "stripctl/control.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stripctl {

namespace {

constexpr double kE = 2.718281828459045235;

Eigen::VectorXd energies(const FrequencyLattice& lattice) {
  Eigen::VectorXd mu(static_cast<Eigen::Index>(lattice.size()));
  for (std::size_t i = 0; i < lattice.size(); ++i) mu(static_cast<Eigen::Index>(i)) =
      lattice.entries[i].energy;
  return mu;
}

Eigen::VectorXcd decay(const Eigen::VectorXd& mu, double t, const Eigen::VectorXcd& v) {
  Eigen::VectorXcd out = v;
  for (Eigen::Index i = 0; i < v.size(); ++i) out(i) *= std::exp(-t * mu(i));
  return out;
}

struct CgOutcome {
  Eigen::VectorXcd x;
  int iterations = 0;
  bool converged = false;
};

// Jacobi-preconditioned CG for Hermitian positive definite systems.
CgOutcome pcg(const Eigen::MatrixXcd& A, const Eigen::VectorXcd& b, double tol, int max_iter) {
  const Eigen::Index n = A.rows();
  Eigen::VectorXd diag(n);
  for (Eigen::Index i = 0; i < n; ++i) diag(i) = std::max(A(i, i).real(), 1e-300);

  CgOutcome out;
  out.x = Eigen::VectorXcd::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }
  Eigen::VectorXcd r = b;
  Eigen::VectorXcd z = r.cwiseQuotient(diag.cast<Complex>());
  Eigen::VectorXcd p = z;
  double rz = (r.adjoint() * z).real()(0);
  for (int it = 0; it < max_iter; ++it) {
    const Eigen::VectorXcd Ap = A * p;
    const double pAp = (p.adjoint() * Ap).real()(0);
    if (!(pAp > 0.0)) break;  // numerically lost definiteness
    const double alpha = rz / pAp;
    out.x += alpha * p;
    r -= alpha * Ap;
    out.iterations = it + 1;
    if (r.norm() <= tol * bnorm) {
      out.converged = true;
      return out;
    }
    z = r.cwiseQuotient(diag.cast<Complex>());
    const double rz_new = (r.adjoint() * z).real()(0);
    p = z + (rz_new / rz) * p;
    rz = rz_new;
  }
  out.converged = r.norm() <= tol * bnorm;
  return out;
}

// int_0^h e^{-mu w} dw and int_0^h w e^{-mu w} dw, stable for small mu*h.
void segment_integrals(double mu, double h, double& E0, double& E1) {
  const double x = mu * h;
  if (x < 1e-4) {
    E0 = h * (1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0);
    E1 = h * h * (0.5 - x / 3.0 + x * x / 8.0 - x * x * x / 30.0);
    return;
  }
  const double em = std::exp(-x);
  E0 = (1.0 - em) / mu;
  E1 = (1.0 - em * (1.0 + x)) / (mu * mu);
}

void add_duhamel(const Eigen::VectorXd& mu, double T, int n_t,
                 const std::vector<Eigen::VectorXcd>& v, Eigen::VectorXcd& out) {
  const double h = T / (n_t - 1);
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double m = mu(i);
    double E0, E1;
    segment_integrals(m, h, E0, E1);
    Complex acc(0.0);
    for (int k = 0; k + 1 < n_t; ++k) {
      const double a = T - (k + 1) * h;  // time left after segment end
      const Complex vk = v[static_cast<std::size_t>(k)](i);
      const Complex vk1 = v[static_cast<std::size_t>(k + 1)](i);
      const Complex slope = (vk1 - vk) / h;
      acc += std::exp(-m * a) * (vk1 * E0 - slope * E1);
    }
    out(i) += acc;
  }
}

// cost^2 by the same trapezoid rule the Gramian uses
double trapezoid_cost_sq(const std::vector<Eigen::VectorXcd>& g,
                         const std::vector<Eigen::VectorXcd>& v_hat, double T) {
  const int n_t = static_cast<int>(g.size());
  const double h = T / (n_t - 1);
  double s = 0.0;
  for (int k = 0; k < n_t; ++k) {
    const double w = (k == 0 || k == n_t - 1) ? 0.5 : 1.0;
    s += w * (g[static_cast<std::size_t>(k)].adjoint() * v_hat[static_cast<std::size_t>(k)])
             .real()(0);
  }
  return s * h;
}

}  // namespace

Eigen::VectorXcd duhamel_piecewise_linear(const FrequencyLattice& lattice, double T,
                                          const std::vector<Eigen::VectorXcd>& nodes) {
  if (nodes.size() < 2) throw std::invalid_argument("time grid needs at least 2 nodes");
  const Eigen::VectorXd mu = energies(lattice);
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(mu.size());
  add_duhamel(mu, T, static_cast<int>(nodes.size()), nodes, out);
  return out;
}

double trapezoid_exp_integral(double mu, double T, int n_t) {
  if (n_t < 2) throw std::invalid_argument("time grid needs at least 2 nodes");
  const double h = T / (n_t - 1);
  if (mu == 0.0) return T;
  const double num = std::expm1(-static_cast<double>(n_t) * h * mu);
  const double den = std::expm1(-h * mu);
  const double S = num / den;  // sum of e^{-k h mu}, k = 0..n_t-1
  return h * (S - 0.5 * (1.0 + std::exp(-T * mu)));
}

Eigen::MatrixXcd gramian_matrix(const FrequencyLattice& lattice, const Eigen::MatrixXcd& mass,
                                double T, int n_t) {
  if (n_t < 2) throw std::invalid_argument("time grid needs at least 2 nodes");
  const Eigen::VectorXd mu = energies(lattice);
  Eigen::MatrixXcd G = mass;
  for (Eigen::Index i = 0; i < G.rows(); ++i)
    for (Eigen::Index j = 0; j < G.cols(); ++j)
      G(i, j) *= trapezoid_exp_integral(mu(i) + mu(j), T, n_t);
  return G;
}

Eigen::VectorXcd gramian_apply(const Eigen::VectorXcd& phi, double T,
                               const SetDescription& omega, int n_t,
                               const StripDomain& domain, const FrequencyLattice& lattice) {
  const Eigen::MatrixXcd mass = mass_matrix(lattice, omega, domain);
  return gramian_matrix(lattice, mass, T, n_t) * phi;
}

GridField control_samples(const ControlFunction& v, int node, const SetDescription& omega,
                          const StripDomain& domain) {
  if (node < 0 || node >= v.n_t) throw std::invalid_argument("node out of range");
  BandLimitedField f;
  f.lattice = v.lattice;
  f.coeffs = v.pre_cutoff[static_cast<std::size_t>(node)];
  f.band = tight_band(*v.lattice, domain);
  GridField g = synthesize(f, domain);
  const auto w = cell_weights(omega, domain);
  double cell_vol = domain.longitudinal_step();
  for (int j = 0; j < domain.dimension() - 1; ++j) cell_vol *= domain.transverse_step();
  for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] *= w[i] / cell_vol;
  return g;
}

double control_norm(const ControlFunction& v, const SetDescription& omega,
                    const StripDomain& domain) {
  const Eigen::MatrixXcd mass = mass_matrix(*v.lattice, omega, domain);
  std::vector<Eigen::VectorXcd> v_hat(v.pre_cutoff.size());
  for (std::size_t k = 0; k < v.pre_cutoff.size(); ++k) v_hat[k] = mass * v.pre_cutoff[k];
  return std::sqrt(std::max(0.0, trapezoid_cost_sq(v.pre_cutoff, v_hat, v.T)));
}

ObservabilityHypotheses observability_hypotheses(double c1, double t0) {
  if (!(c1 >= 3.0 * kE)) throw std::invalid_argument("c1 must be at least 3e");
  ObservabilityHypotheses h;
  h.c1 = c1;
  h.t0 = t0;
  return h;
}

HumResult hum_control(const HeatState& u0, double T, const SetDescription& omega, double tol,
                      const StripDomain& domain, int n_t) {
  if (!(T > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (n_t < 2) throw std::invalid_argument("time grid needs at least 2 nodes");
  const auto& lattice = *u0.lattice;
  const Eigen::VectorXd mu = energies(lattice);

  HumResult res;
  res.control.T = T;
  res.control.n_t = n_t;
  res.control.lattice = u0.lattice;

  const double u0_norm = u0.norm();
  if (u0_norm == 0.0) {
    res.control.pre_cutoff.assign(static_cast<std::size_t>(n_t),
                                  Eigen::VectorXcd::Zero(u0.coeffs.size()));
    res.final_state = HeatState{u0.lattice, Eigen::VectorXcd::Zero(u0.coeffs.size()), T};
    return res;
  }

  const Eigen::MatrixXcd mass = mass_matrix(lattice, omega, domain);
  const Eigen::MatrixXcd G = gramian_matrix(lattice, mass, T, n_t);
  const Eigen::VectorXcd b = -decay(mu, T, u0.coeffs);

  const int max_iter = 10 * static_cast<int>(lattice.size());
  const CgOutcome cg = pcg(G, b, tol, max_iter);
  if (!cg.converged)
    throw std::runtime_error(
        "Gramian ill-conditioned (set effectively non-observable at this truncation)");
  res.cg_iterations = cg.iterations;

  const double h = T / (n_t - 1);
  std::vector<Eigen::VectorXcd> g(static_cast<std::size_t>(n_t));
  std::vector<Eigen::VectorXcd> v_hat(static_cast<std::size_t>(n_t));
  for (int k = 0; k < n_t; ++k) {
    g[static_cast<std::size_t>(k)] = decay(mu, T - k * h, cg.x);
    v_hat[static_cast<std::size_t>(k)] = mass * g[static_cast<std::size_t>(k)];
  }

  res.cost = std::sqrt(std::max(0.0, trapezoid_cost_sq(g, v_hat, T)));
  res.control.pre_cutoff = std::move(g);
  res.control.norm = res.cost;

  Eigen::VectorXcd final = decay(mu, T, u0.coeffs);
  add_duhamel(mu, T, n_t, v_hat, final);
  res.final_state = HeatState{u0.lattice, std::move(final), u0.time_stamp + T};
  res.residual_rel = res.final_state.norm() / u0_norm;
  return res;
}

double empirical_observability_constant(double T, const SetDescription& omega,
                                        const StripDomain& domain,
                                        const FrequencyLattice& lattice, int n_t,
                                        std::uint64_t seed) {
  if (!(T > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (lattice.entries.empty()) throw std::invalid_argument("empty lattice");
  const Eigen::MatrixXcd mass = mass_matrix(lattice, omega, domain);
  const Eigen::MatrixXcd G = gramian_matrix(lattice, mass, T, n_t);
  Eigen::LLT<Eigen::MatrixXcd> llt(G);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error(
        "Gramian ill-conditioned (set effectively non-observable at this truncation)");

  const Eigen::VectorXd mu = energies(lattice);
  const auto n = G.rows();
  Rng rng(seed);
  Eigen::VectorXcd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x(i) = rng.complex_normal();
  x.normalize();

  // power iteration on Lambda^{-1} A with A = e^{2T Delta} (diagonal)
  double rho = 0.0;
  const int cap = std::max(500, 10 * static_cast<int>(n));
  for (int it = 0; it < cap; ++it) {
    const Eigen::VectorXcd Ax = decay(mu, 2.0 * T, x);
    Eigen::VectorXcd y = llt.solve(Ax);
    const double ynorm = y.norm();
    if (!(ynorm > 0.0)) break;
    y /= ynorm;
    const double num = (y.adjoint() * decay(mu, 2.0 * T, y)).real()(0);
    const double den = (y.adjoint() * (G * y)).real()(0);
    const double next = num / den;
    x = y;
    if (it > 0 && std::abs(next - rho) <= 1e-8 * std::abs(next)) {
      rho = next;
      break;
    }
    rho = next;
  }
  return rho;
}

CostReport cost_constants(double gamma, std::span<const double> a, int d, double K, double T) {
  if (!(gamma > 0.0) || gamma > 1.0) throw std::invalid_argument("gamma must lie in (0, 1]");
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  if (!(K >= kE * (1.0 - 1e-12))) throw std::invalid_argument("K must be at least e");
  if (!(T > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (a.empty()) throw std::invalid_argument("side vector required");
  double a1 = 0.0;
  for (double v : a) {
    if (!(v > 0.0)) throw std::invalid_argument("side vector entries must be positive");
    a1 += v;
  }
  const double log_base = d * std::log(2.0 * K) - std::log(gamma);
  CostReport r;
  r.c1 = 4.0 * K * (a1 + d) * log_base;
  r.tau0 = std::pow(2.0, 2.5) * 3.0 * r.c1;
  r.log_sqrt_C1 = 12.0 * std::sqrt(2.0) * K * (a1 + d) * log_base;
  r.C2 = (48.0 * K) * (48.0 * K) * (a1 + d) * (a1 + d) * log_base * log_base;
  r.T = T;
  r.log_cost_bound = r.log_sqrt_C1 + r.C2 / (2.0 * T);
  return r;
}

HConditions h_conditions_check(double c1, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tau must be positive");
  HConditions h;
  h.h1 = std::exp(-8.0 * 3.0 * c1 * c1 / tau) / tau;
  h.h2 = std::exp(16.0 * 9.0 * c1 * c1 / tau) / tau;  // may overflow to +inf
  const bool range_ok = tau <= std::pow(2.0, 2.5) * 3.0 * c1 * (1.0 + 1e-12);
  h.ok = h.h1 <= 0.25 * (1.0 + 1e-12) && h.h2 >= 1.0 - 1e-12 && range_ok;
  return h;
}

LrResult lr_synthesize(const HeatState& u0, double T, const SetDescription& omega,
                       const LrSchedule& schedule, const StripDomain& domain, double tol,
                       int n_t) {
  if (!(T > 0.0)) throw std::invalid_argument("horizon must be positive");
  if (!(schedule.E0 > 0.0)) throw std::invalid_argument("schedule E0 must be positive");
  if (schedule.k_max < 0) throw std::invalid_argument("schedule k_max must be nonnegative");

  const auto& lattice = *u0.lattice;
  const Eigen::VectorXd mu = energies(lattice);
  const Eigen::MatrixXcd mass = mass_matrix(lattice, omega, domain);

  LrResult res;
  Eigen::VectorXcd state = u0.coeffs;
  const double u0_norm = u0.norm();
  double cost_sq = 0.0;
  std::vector<double> stage_costs;

  for (int k = 0; k <= schedule.k_max; ++k) {
    LrStage st;
    st.k = k;
    st.E = schedule.E0 * std::pow(4.0, k);
    const double T_k = T * std::pow(2.0, -(k + 1));
    st.tau = T_k / 2.0;
    st.pre_norm = state.norm();

    const auto low = indices_below_energy(lattice, st.E);
    st.low_modes = low.size();

    if (!low.empty() && st.pre_norm > 0.0) {
      const auto nl = static_cast<Eigen::Index>(low.size());
      Eigen::MatrixXcd mass_low(nl, nl);
      Eigen::VectorXd mu_low(nl);
      Eigen::VectorXcd state_low(nl);
      for (Eigen::Index i = 0; i < nl; ++i) {
        mu_low(i) = mu(static_cast<Eigen::Index>(low[static_cast<std::size_t>(i)]));
        state_low(i) = state(static_cast<Eigen::Index>(low[static_cast<std::size_t>(i)]));
        for (Eigen::Index j = 0; j < nl; ++j)
          mass_low(i, j) = mass(static_cast<Eigen::Index>(low[static_cast<std::size_t>(i)]),
                                static_cast<Eigen::Index>(low[static_cast<std::size_t>(j)]));
      }
      FrequencyLattice low_lat;
      low_lat.basis = lattice.basis;
      for (std::size_t idx : low) low_lat.entries.push_back(lattice.entries[idx]);
      const Eigen::MatrixXcd G = gramian_matrix(low_lat, mass_low, st.tau, n_t);
      Eigen::VectorXcd b(nl);
      for (Eigen::Index i = 0; i < nl; ++i)
        b(i) = -std::exp(-st.tau * mu_low(i)) * state_low(i);
      const CgOutcome cg = pcg(G, b, tol, 10 * static_cast<int>(nl) + 50);
      if (!cg.converged) {
        res.ok = false;
        res.message = "stage " + std::to_string(k) + ": CG failed to converge";
        break;
      }
      st.cg_iterations = cg.iterations;

      // control snapshots, lifted to the full lattice through the mass matrix
      const double h = st.tau / (n_t - 1);
      std::vector<Eigen::VectorXcd> g(static_cast<std::size_t>(n_t));
      std::vector<Eigen::VectorXcd> v_hat_low(static_cast<std::size_t>(n_t));
      std::vector<Eigen::VectorXcd> v_hat_full(static_cast<std::size_t>(n_t));
      for (int s = 0; s < n_t; ++s) {
        Eigen::VectorXcd gs = cg.x;
        for (Eigen::Index i = 0; i < nl; ++i) gs(i) *= std::exp(-(st.tau - s * h) * mu_low(i));
        g[static_cast<std::size_t>(s)] = gs;
        v_hat_low[static_cast<std::size_t>(s)] = mass_low * gs;
        Eigen::VectorXcd vf = Eigen::VectorXcd::Zero(state.size());
        for (Eigen::Index row = 0; row < state.size(); ++row) {
          Complex acc(0.0);
          for (Eigen::Index i = 0; i < nl; ++i)
            acc += mass(row, static_cast<Eigen::Index>(low[static_cast<std::size_t>(i)])) * gs(i);
          vf(row) = acc;
        }
        v_hat_full[static_cast<std::size_t>(s)] = std::move(vf);
      }
      const double st_cost_sq = std::max(0.0, trapezoid_cost_sq(g, v_hat_low, st.tau));
      st.cost = std::sqrt(st_cost_sq);
      cost_sq += st_cost_sq;
      stage_costs.push_back(st.cost);

      // controlled first half
      Eigen::VectorXcd next = decay(mu, st.tau, state);
      add_duhamel(mu, st.tau, n_t, v_hat_full, next);
      state = std::move(next);
    } else {
      state = decay(mu, st.tau, state);
      stage_costs.push_back(0.0);
    }
    // free second half
    state = decay(mu, st.tau, state);
    st.post_norm = state.norm();
    res.stages.push_back(st);

    if (u0_norm > 0.0 && st.pre_norm > 1e-13 * u0_norm &&
        st.post_norm >= st.pre_norm * (1.0 - 1e-12)) {
      res.ok = false;
      res.message = "stage " + std::to_string(k) +
                    ": non-decreasing stage norms (spectral truncation too small)";
    }
  }

  // remaining sliver of the horizon dissipates freely
  const double spent = T * (1.0 - std::pow(2.0, -(schedule.k_max + 1)));
  state = decay(mu, T - spent, state);

  res.final_state = HeatState{u0.lattice, std::move(state), u0.time_stamp + T};
  res.final_norm = res.final_state.norm();
  res.total_cost = std::sqrt(cost_sq);

  for (int k = static_cast<int>(stage_costs.size()) - 1; k >= 1; --k) {
    if (stage_costs[static_cast<std::size_t>(k - 1)] > 0.0 &&
        stage_costs[static_cast<std::size_t>(k)] >=
            stage_costs[static_cast<std::size_t>(k - 1)]) {
      res.summable_from = k;
      break;
    }
    if (k == 1) res.summable_from = 0;
  }
  if (stage_costs.size() <= 1) res.summable_from = 0;
  return res;
}

}  // namespace stripctl
