#include "stripctl/strip_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace stripctl {

std::string to_string(BoundaryCondition bc) {
  return bc == BoundaryCondition::Dirichlet ? "dirichlet" : "neumann";
}

StripDomain::StripDomain(const DomainConfig& cfg) : cfg_(cfg) {
  if (cfg.d < 2) throw std::invalid_argument("dimension must be at least 2");
  if (!(cfg.L > 0.0)) throw std::invalid_argument("nonpositive scale L");
  if (!(cfg.X > 0.0)) throw std::invalid_argument("nonpositive truncation");
  if (!(cfg.h > 0.0)) throw std::invalid_argument("nonpositive quadrature step");
  if (cfg.n_max < 1 || cfg.m_max < 1)
    throw std::invalid_argument("mode cutoffs must be at least 1");
  const double width = 2.0 * kPi * cfg.L;
  if (cfg.h > width || cfg.h > 2.0 * cfg.X)
    throw std::invalid_argument("quadrature step exceeds a domain extent");

  n_cells_transverse_ = std::max(1, static_cast<int>(std::llround(width / cfg.h)));
  n_cells_longitudinal_ = std::max(2, static_cast<int>(std::llround(2.0 * cfg.X / cfg.h)));
  // keep the longitudinal grid symmetric about 0 so half-strip cuts land on cell edges
  if (n_cells_longitudinal_ % 2 != 0) ++n_cells_longitudinal_;
  h_transverse_ = width / n_cells_transverse_;
  h_longitudinal_ = 2.0 * cfg.X / n_cells_longitudinal_;
}

std::size_t StripDomain::grid_size() const {
  std::size_t n = 1;
  for (int j = 0; j < cfg_.d - 1; ++j) n *= static_cast<std::size_t>(n_cells_transverse_);
  return n * static_cast<std::size_t>(n_cells_longitudinal_);
}

StripDomain build_domain(const DomainConfig& cfg) { return StripDomain(cfg); }

bool admissible_index(std::span<const int> n, const StripDomain& domain) {
  if (static_cast<int>(n.size()) != domain.dimension() - 1) return false;
  const int lo = domain.bc() == BoundaryCondition::Dirichlet ? 1 : 0;
  for (int v : n)
    if (v < lo) return false;
  return true;
}

double transverse_eigenvalue(std::span<const int> n, const StripDomain& domain) {
  if (!admissible_index(n, domain))
    throw std::invalid_argument("inadmissible transverse index for boundary condition");
  double s = 0.0;
  for (int v : n) s += static_cast<double>(v) * v;
  const double two_L = 2.0 * domain.scale();
  return s / (two_L * two_L);
}

TransverseEigenfunction::TransverseEigenfunction(std::vector<int> n, const StripDomain& domain)
    : n_(std::move(n)), inv_two_L_(1.0 / (2.0 * domain.scale())), bc_(domain.bc()) {
  if (!admissible_index(n_, domain))
    throw std::invalid_argument("inadmissible transverse index for boundary condition");
  norm_.resize(n_.size());
  const double L = domain.scale();
  for (std::size_t j = 0; j < n_.size(); ++j)
    norm_[j] = (n_[j] == 0) ? 1.0 / std::sqrt(2.0 * kPi * L) : 1.0 / std::sqrt(kPi * L);
}

double TransverseEigenfunction::axis_factor(int j, double x) const {
  const double arg = n_[j] * x * inv_two_L_;
  if (bc_ == BoundaryCondition::Dirichlet) return norm_[j] * std::sin(arg);
  return norm_[j] * std::cos(arg);
}

double TransverseEigenfunction::operator()(std::span<const double> x) const {
  double p = 1.0;
  for (std::size_t j = 0; j < n_.size(); ++j) p *= axis_factor(static_cast<int>(j), x[j]);
  return p;
}

std::pair<double, TransverseEigenfunction> transverse_eigenpair(std::vector<int> n,
                                                                const StripDomain& domain) {
  const double lambda = transverse_eigenvalue(n, domain);
  return {lambda, TransverseEigenfunction(std::move(n), domain)};
}

namespace {

void enumerate_indices(const StripDomain& domain, int axis, std::vector<int>& cur,
                       const std::function<void(const std::vector<int>&)>& emit) {
  if (axis == domain.dimension() - 1) {
    emit(cur);
    return;
  }
  const int lo = domain.bc() == BoundaryCondition::Dirichlet ? 1 : 0;
  for (int v = lo; v <= domain.transverse_cutoff(); ++v) {
    cur.push_back(v);
    enumerate_indices(domain, axis + 1, cur, emit);
    cur.pop_back();
  }
}

void sort_entries(std::vector<LatticeEntry>& entries) {
  std::sort(entries.begin(), entries.end(), [](const LatticeEntry& a, const LatticeEntry& b) {
    if (a.lambda != b.lambda) return a.lambda < b.lambda;
    if (a.n != b.n) return a.n < b.n;
    return a.m < b.m;
  });
}

}  // namespace

FrequencyLattice full_lattice(const StripDomain& domain) {
  FrequencyLattice lat;
  lat.basis = SpectralBasis::Eigenfunction;
  std::vector<int> cur;
  enumerate_indices(domain, 0, cur, [&](const std::vector<int>& n) {
    const double lambda = transverse_eigenvalue(n, domain);
    for (int m = -domain.longitudinal_cutoff(); m <= domain.longitudinal_cutoff(); ++m) {
      LatticeEntry e;
      e.n = n;
      e.m = m;
      e.lambda = lambda;
      e.xi = domain.xi(m);
      e.energy = lambda + e.xi * e.xi;
      lat.entries.push_back(std::move(e));
    }
  });
  sort_entries(lat.entries);
  return lat;
}

FrequencyLattice lattice_below_energy(const StripDomain& domain, double E) {
  if (E < 0.0) throw std::invalid_argument("energy cutoff must be nonnegative");
  FrequencyLattice lat;
  lat.basis = SpectralBasis::Eigenfunction;
  lat.energy_cutoff = E;

  // The cutoffs truncate the true lattice iff an index just beyond them would
  // still satisfy lambda_n + xi_m^2 <= E.
  {
    const double two_L = 2.0 * domain.scale();
    const int floor_idx = domain.bc() == BoundaryCondition::Dirichlet ? 1 : 0;
    const int nm = domain.transverse_cutoff();
    double lambda_next = static_cast<double>(nm + 1) * (nm + 1);
    lambda_next += static_cast<double>(domain.dimension() - 2) * floor_idx * floor_idx;
    lambda_next /= two_L * two_L;
    if (lambda_next <= E) lat.cutoff_truncated = true;
  }

  std::vector<int> cur;
  enumerate_indices(domain, 0, cur, [&](const std::vector<int>& n) {
    const double lambda = transverse_eigenvalue(n, domain);
    if (lambda > E) return;
    const double xi_cap = std::sqrt(E - lambda);
    const int m_cap = static_cast<int>(std::floor(xi_cap * domain.half_width() / kPi + 1e-12));
    const int m_hi = std::min(m_cap, domain.longitudinal_cutoff());
    for (int m = -m_hi; m <= m_hi; ++m) {
      LatticeEntry e;
      e.n = n;
      e.m = m;
      e.lambda = lambda;
      e.xi = domain.xi(m);
      e.energy = lambda + e.xi * e.xi;
      lat.entries.push_back(std::move(e));
    }
    if (m_cap > domain.longitudinal_cutoff()) lat.cutoff_truncated = true;
  });
  sort_entries(lat.entries);
  return lat;
}

std::vector<std::size_t> indices_below_energy(const FrequencyLattice& full, double E) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < full.entries.size(); ++i)
    if (full.entries[i].energy <= E) idx.push_back(i);
  return idx;
}

}  // namespace stripctl
