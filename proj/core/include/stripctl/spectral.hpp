#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "stripctl/geometry.hpp"
#include "stripctl/strip_model.hpp"

namespace stripctl {

using Complex = std::complex<double>;

/// Samples on the midpoint tensor grid, longitudinal index fastest.
struct GridField {
  std::vector<int> extents;  // (d-1) copies of transverse_cells(), then longitudinal_cells()
  std::vector<Complex> values;
};

/// Finite coefficient table over a frequency lattice together with its
/// declared spectral support box (side lengths b_1..b_d, centered at zero).
struct BandLimitedField {
  std::shared_ptr<const FrequencyLattice> lattice;
  Eigen::VectorXcd coeffs;
  std::vector<double> band;

  std::size_t size() const { return lattice ? lattice->size() : 0; }
  double plancherel_norm() const { return coeffs.norm(); }
};

/// Per-axis frequency magnitude of a lattice entry (transverse axes use
/// n/(2L) for the eigenfunction basis and n/L for the exponential one; the
/// last axis is xi).
double entry_frequency(const LatticeEntry& e, SpectralBasis basis, const StripDomain& domain,
                       int axis);

/// Band metadata just wide enough for every frequency in the lattice.
std::vector<double> tight_band(const FrequencyLattice& lattice, const StripDomain& domain);

BandLimitedField make_field(std::shared_ptr<const FrequencyLattice> lattice,
                            Eigen::VectorXcd coeffs, const StripDomain& domain);

/// Signed transverse indices |k_j| <= k_max with the exponential torus basis.
FrequencyLattice exponential_lattice(const StripDomain& domain, int k_max, int m_max);

/// Pointwise evaluation of the finite sum on the quadrature grid.
/// Throws when the band exceeds the Nyquist range of the grid.
GridField synthesize(const BandLimitedField& f, const StripDomain& domain);

/// Discrete inner products against the basis; exact inverse of synthesize for
/// in-band fields (the midpoint rule integrates basis products exactly below
/// the Nyquist range).
BandLimitedField analyze(const GridField& samples, const StripDomain& domain,
                         std::shared_ptr<const FrequencyLattice> lattice);

/// Exact per-cell measures |cell ∩ S|, flattened like GridField values.
std::vector<double> cell_weights(const SetDescription& S, const StripDomain& domain);

/// Quadrature L2 norm over a region, exact cell-measure weighted.
double norm_on(const GridField& samples, std::span<const double> weights,
               const StripDomain& domain);
double norm_on(const BandLimitedField& f, const SetDescription& region,
               const StripDomain& domain);

/// ||d^alpha f|| / ||f|| computed in coefficient space.
double bernstein_ratio(const BandLimitedField& f, std::span<const int> alpha,
                       const StripDomain& domain);

/// Restriction of coefficients to energies <= E; band set to side 2*sqrt(E)
/// per axis.
BandLimitedField spectral_projection(const BandLimitedField& g, double E,
                                     const StripDomain& domain);

/// Hermitian PSD matrix M[i][j] = ∫_{S ∩ model box} phi_i conj(phi_j),
/// assembled from exact per-axis interval integrals over the disjoint box
/// decomposition of S.
Eigen::MatrixXcd mass_matrix(const FrequencyLattice& lattice, const SetDescription& S,
                             const StripDomain& domain);
Eigen::MatrixXcd mass_matrix_boxes(const FrequencyLattice& lattice,
                                   const std::vector<Box>& boxes, const StripDomain& domain);

/// sup ||f||_{L2(Omega)} / ||f||_{L2(S∩Omega)} over the pi_E subspace: the
/// square root of the largest generalized eigenvalue of (full Gram, S Gram).
/// The basis is orthonormal so this is 1/sqrt(lambda_min(G_S)), found by
/// seeded inverse iteration refined to 1e-8 relative tolerance.
double empirical_spectral_constant(const StripDomain& domain, const SetDescription& S,
                                   double E, int trials, std::uint64_t seed);

struct SpectralConstants {
  double K = 2.718281828459045235;  // universal-constant stand-in, >= e
  double gamma = 1.0;
  std::vector<double> a;
  std::vector<double> b;
  int d = 2;
  double E = 0.0;
};

/// log of ((2K)^d / gamma)^{8 K sqrt(E) (||a||_1 + d)}.
double theoretical_spectral_constant(const SpectralConstants& c);

/// log of (K^d / gamma)^{K a.b + (6d-1)/2}.
double logvinenko_sereda_bound(const SpectralConstants& c);

}  // namespace stripctl
