#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stripctl/geometry.hpp"
#include "stripctl/heat.hpp"
#include "stripctl/strip_model.hpp"

namespace stripctl {

struct QnEntry {
  int n = 0;
  Parallelepiped Q;
  double ratio = 0.0;
  bool below_threshold = false;  // ratio < 1/n^2
};

/// For each n, the interior parallelepiped with sides (2*pi*L,...,2*pi*L, n)
/// minimizing |S ∩ Q| / |Q|; the transverse sides pin the centers to
/// (pi*L,...,pi*L, x_d).
std::vector<QnEntry> qn_sequence(const SetDescription& S, const StripDomain& domain,
                                 int n_max, double step = 0.25, int workers = 1);

struct MillerEvaluation {
  std::vector<double> y;
  double T = 0.0;
  double kappa = 0.0;
  double integral = 0.0;  // ∫_omega exp(-|x-y|^2/(2T)) dx
  double d_b = 0.0;       // min(dist(y, boundary), T pi^2 d / 4)
  double value = 0.0;     // +inf sentinel when the integral vanishes
};

/// Gaussian-mass functional: quadrature with exact cell∩S weights over the
/// model box plus an analytic complementary-error-function tail bound beyond
/// it (negligible once X >= y_d + 8 sqrt(T)).
MillerEvaluation miller_functional(const SetDescription& S, std::span<const double> y,
                                   double T, double kappa, const StripDomain& domain);

enum class ProbeVerdict { BoundedConsistent, DivergenceConsistent, Inconclusive };

std::string to_string(ProbeVerdict v);

struct ProbeRow {
  int n = 0;
  std::vector<double> center;
  double ratio = 0.0;
  double functional = 0.0;
};

struct ProbeResult {
  ProbeVerdict verdict = ProbeVerdict::Inconclusive;
  std::vector<ProbeRow> rows;
  /// explicit thick-set bound D^2 - 2T log(gamma * prod a_j), when a
  /// certificate was supplied
  std::optional<double> thick_bound;
};

/// Evaluates the functional along the q_n centers. A supplied certificate
/// turns on the bounded-side check against the explicit thick-set bound; the
/// divergence verdict is the documented heuristic (value exceeding the n=1
/// level by `divergence_factor` with an increasing tail).
ProbeResult thickness_equivalence_probe(const SetDescription& S, double T, double kappa,
                                        int n_max, const StripDomain& domain,
                                        const std::optional<ThicknessCertificate>& cert,
                                        double step = 0.25, double divergence_factor = 10.0,
                                        int workers = 1);

struct DirichletWitness {
  double value = 0.0;                // (2/(pi L))^d exp(-2 (1+T) d / L^2)
  double quadrature_integral = 0.0;  // ∫_W |K_W(1+T, x, x_n)|^2 dx
  bool holds = false;                // quadrature_integral >= value
};

DirichletWitness dirichlet_lower_witness(std::span<const double> x_n, double T,
                                         const StripDomain& domain,
                                         const KernelParams& params,
                                         int quad_cells_per_axis = 64);

}  // namespace stripctl
