#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stripctl/common.hpp"

namespace stripctl {

enum class BoundaryCondition { Dirichlet, Neumann };

std::string to_string(BoundaryCondition bc);

struct DomainConfig {
  int d = 2;                  // total dimension, >= 2
  double L = 1.0;             // transverse side is 2*pi*L
  BoundaryCondition bc = BoundaryCondition::Dirichlet;
  double X = 8.0;             // longitudinal half-width; model is [-X, X) periodic
  int n_max = 16;             // transverse mode cutoff per axis
  int m_max = 128;            // longitudinal mode cutoff (|m| <= m_max)
  double h = 0.05;            // requested quadrature step
};

/// Discretized model of the strip (0, 2*pi*L)^{d-1} x R. The unbounded
/// direction is modelled as [-X, X) with periodic wrap, frequencies
/// xi_m = pi*m/X. Quadrature is the midpoint rule on a uniform tensor grid;
/// the per-axis cell counts are the nearest integers to length/h, so the
/// stored effective steps divide the axis lengths exactly.
class StripDomain {
 public:
  explicit StripDomain(const DomainConfig& cfg);

  int dimension() const { return cfg_.d; }
  double scale() const { return cfg_.L; }
  BoundaryCondition bc() const { return cfg_.bc; }
  double half_width() const { return cfg_.X; }
  int transverse_cutoff() const { return cfg_.n_max; }
  int longitudinal_cutoff() const { return cfg_.m_max; }
  double requested_step() const { return cfg_.h; }
  const DomainConfig& config() const { return cfg_; }

  double transverse_extent() const { return 2.0 * kPi * cfg_.L; }

  int transverse_cells() const { return n_cells_transverse_; }
  int longitudinal_cells() const { return n_cells_longitudinal_; }
  double transverse_step() const { return h_transverse_; }
  double longitudinal_step() const { return h_longitudinal_; }

  /// Midpoint of transverse cell i, i in [0, transverse_cells()).
  double transverse_node(int i) const { return (i + 0.5) * h_transverse_; }
  /// Midpoint of longitudinal cell j, j in [0, longitudinal_cells()).
  double longitudinal_node(int j) const { return -cfg_.X + (j + 0.5) * h_longitudinal_; }

  /// Longitudinal frequency of mode m.
  double xi(int m) const { return kPi * m / cfg_.X; }

  /// Total number of quadrature cells, transverse_cells()^{d-1} * longitudinal_cells().
  std::size_t grid_size() const;

 private:
  DomainConfig cfg_;
  int n_cells_transverse_ = 0;
  int n_cells_longitudinal_ = 0;
  double h_transverse_ = 0.0;
  double h_longitudinal_ = 0.0;
};

enum class SpectralBasis { Eigenfunction, Exponential };

struct LatticeEntry {
  std::vector<int> n;   // transverse multi-index, size d-1
  int m = 0;            // longitudinal index, xi_m = pi*m/X
  double lambda = 0.0;  // transverse eigenvalue
  double xi = 0.0;
  double energy = 0.0;  // lambda + xi^2
};

/// Finite index set of the separable basis. For the eigenfunction basis the
/// transverse indices follow the boundary condition (n_j >= 1 Dirichlet,
/// n_j >= 0 Neumann); the exponential basis uses signed integers. Entries are
/// ordered lexicographically in (lambda, n, m).
struct FrequencyLattice {
  SpectralBasis basis = SpectralBasis::Eigenfunction;
  std::vector<LatticeEntry> entries;
  std::optional<double> energy_cutoff;  // nullopt == "full"
  bool cutoff_truncated = false;        // true when sqrt(E) exceeds representable range

  std::size_t size() const { return entries.size(); }
};

StripDomain build_domain(const DomainConfig& cfg);

bool admissible_index(std::span<const int> n, const StripDomain& domain);

/// lambda_n = ||n||_2^2 / (2L)^2.
double transverse_eigenvalue(std::span<const int> n, const StripDomain& domain);

/// Product eigenfunction on the transverse cross-section, normalized to unit
/// L2 norm (zero Neumann modes use the (2*pi*L)^{-1/2} factor so the family
/// is orthonormal).
class TransverseEigenfunction {
 public:
  TransverseEigenfunction(std::vector<int> n, const StripDomain& domain);
  double operator()(std::span<const double> x) const;
  /// 1-D factor for axis j evaluated at x.
  double axis_factor(int j, double x) const;

 private:
  std::vector<int> n_;
  double inv_two_L_;
  BoundaryCondition bc_;
  std::vector<double> norm_;  // per-axis normalization factor
};

std::pair<double, TransverseEigenfunction> transverse_eigenpair(
    std::vector<int> n, const StripDomain& domain);

/// All modes within the configured cutoffs, deterministic order.
FrequencyLattice full_lattice(const StripDomain& domain);

/// Entries with lambda_n <= E and xi_m^2 <= E - lambda_n, within cutoffs.
/// Sets cutoff_truncated when sqrt(E) exceeds the representable range.
FrequencyLattice lattice_below_energy(const StripDomain& domain, double E);

/// Subset of `full` with energy <= E (preserves order; used for projections).
std::vector<std::size_t> indices_below_energy(const FrequencyLattice& full, double E);

}  // namespace stripctl
