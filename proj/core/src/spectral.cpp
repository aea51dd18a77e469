#include "stripctl/spectral.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace stripctl {

namespace {

Box model_box(const StripDomain& domain) {
  Box b;
  const int d = domain.dimension();
  b.iv.resize(d);
  for (int j = 0; j < d - 1; ++j) b.iv[j] = {0.0, domain.transverse_extent()};
  b.iv[d - 1] = {-domain.half_width(), domain.half_width()};
  return b;
}

// ∫_a^b cos(w x) dx
double cosint(double w, double a, double b) {
  if (w == 0.0) return b - a;
  return (std::sin(w * b) - std::sin(w * a)) / w;
}

// ∫_a^b e^{i w x} dx
Complex expint(double w, double a, double b) {
  if (w == 0.0) return {b - a, 0.0};
  const Complex iw(0.0, w);
  return (std::exp(iw * b) - std::exp(iw * a)) / iw;
}

// ∫_a^b phi_p phi_q dx for the 1-D transverse eigenfunction family.
double eigen_pair_integral(int p, int q, double a, double b, double L, BoundaryCondition bc) {
  const double w = 1.0 / (2.0 * L);
  const auto norm = [&](int n) {
    return n == 0 ? 1.0 / std::sqrt(2.0 * kPi * L) : 1.0 / std::sqrt(kPi * L);
  };
  const double pref = norm(p) * norm(q) * 0.5;
  const double diff = cosint((p - q) * w, a, b);
  const double sum = cosint((p + q) * w, a, b);
  return bc == BoundaryCondition::Dirichlet ? pref * (diff - sum) : pref * (diff + sum);
}

Complex exponential_pair_integral(int p, int q, double a, double b, double L) {
  return expint(static_cast<double>(p - q) / L, a, b) / (2.0 * kPi * L);
}

void check_nyquist(const FrequencyLattice& lattice, const StripDomain& domain) {
  int max_abs_n = 0, max_abs_m = 0;
  for (const LatticeEntry& e : lattice.entries) {
    for (int v : e.n) max_abs_n = std::max(max_abs_n, std::abs(v));
    max_abs_m = std::max(max_abs_m, std::abs(e.m));
  }
  const bool ok_t = lattice.basis == SpectralBasis::Eigenfunction
                        ? max_abs_n < domain.transverse_cells()
                        : 2 * max_abs_n < domain.transverse_cells();
  const bool ok_l = 2 * max_abs_m < domain.longitudinal_cells();
  if (!ok_t || !ok_l)
    throw std::invalid_argument("band exceeds Nyquist range of the grid");
}

// Contiguous runs of equal transverse multi-index (entries are sorted).
struct Group {
  std::size_t begin, end;
};
std::vector<Group> transverse_groups(const FrequencyLattice& lattice) {
  std::vector<Group> groups;
  const auto& es = lattice.entries;
  std::size_t i = 0;
  while (i < es.size()) {
    std::size_t j = i + 1;
    while (j < es.size() && es[j].n == es[i].n) ++j;
    groups.push_back({i, j});
    i = j;
  }
  return groups;
}

// 1-D transverse factor tables, one complex value per grid node.
std::vector<Complex> axis_table(int index, SpectralBasis basis, const StripDomain& domain) {
  const int n1 = domain.transverse_cells();
  std::vector<Complex> tab(n1);
  const double L = domain.scale();
  if (basis == SpectralBasis::Eigenfunction) {
    const double w = index / (2.0 * L);
    const double norm = index == 0 ? 1.0 / std::sqrt(2.0 * kPi * L) : 1.0 / std::sqrt(kPi * L);
    const bool dirichlet = domain.bc() == BoundaryCondition::Dirichlet;
    for (int i = 0; i < n1; ++i) {
      const double x = domain.transverse_node(i);
      tab[i] = norm * (dirichlet ? std::sin(w * x) : std::cos(w * x));
    }
  } else {
    const double norm = 1.0 / std::sqrt(2.0 * kPi * L);
    for (int i = 0; i < n1; ++i) {
      const double x = domain.transverse_node(i);
      tab[i] = norm * std::exp(Complex(0.0, index * x / L));
    }
  }
  return tab;
}

}  // namespace

double entry_frequency(const LatticeEntry& e, SpectralBasis basis, const StripDomain& domain,
                       int axis) {
  const int d = domain.dimension();
  if (axis == d - 1) return std::abs(e.xi);
  const double scale = basis == SpectralBasis::Eigenfunction ? 1.0 / (2.0 * domain.scale())
                                                             : 1.0 / domain.scale();
  return std::abs(e.n[axis]) * scale;
}

std::vector<double> tight_band(const FrequencyLattice& lattice, const StripDomain& domain) {
  const int d = domain.dimension();
  std::vector<double> band(d, 0.0);
  for (const LatticeEntry& e : lattice.entries)
    for (int j = 0; j < d; ++j)
      band[j] = std::max(band[j], 2.0 * entry_frequency(e, lattice.basis, domain, j));
  return band;
}

BandLimitedField make_field(std::shared_ptr<const FrequencyLattice> lattice,
                            Eigen::VectorXcd coeffs, const StripDomain& domain) {
  if (!lattice || static_cast<std::size_t>(coeffs.size()) != lattice->size())
    throw std::invalid_argument("coefficient count does not match lattice");
  BandLimitedField f;
  f.band = tight_band(*lattice, domain);
  f.lattice = std::move(lattice);
  f.coeffs = std::move(coeffs);
  return f;
}

FrequencyLattice exponential_lattice(const StripDomain& domain, int k_max, int m_max) {
  if (k_max < 0 || m_max < 0) throw std::invalid_argument("cutoffs must be nonnegative");
  FrequencyLattice lat;
  lat.basis = SpectralBasis::Exponential;
  const int dm1 = domain.dimension() - 1;
  const double L = domain.scale();
  std::vector<int> n(dm1, -k_max);
  while (true) {
    double lambda = 0.0;
    for (int v : n) lambda += static_cast<double>(v) * v;
    lambda /= L * L;
    for (int m = -m_max; m <= m_max; ++m) {
      LatticeEntry e;
      e.n = n;
      e.m = m;
      e.lambda = lambda;
      e.xi = domain.xi(m);
      e.energy = lambda + e.xi * e.xi;
      lat.entries.push_back(std::move(e));
    }
    int j = dm1 - 1;
    while (j >= 0 && ++n[j] > k_max) n[j--] = -k_max;
    if (j < 0) break;
  }
  std::sort(lat.entries.begin(), lat.entries.end(),
            [](const LatticeEntry& a, const LatticeEntry& b) {
              if (a.lambda != b.lambda) return a.lambda < b.lambda;
              if (a.n != b.n) return a.n < b.n;
              return a.m < b.m;
            });
  return lat;
}

GridField synthesize(const BandLimitedField& f, const StripDomain& domain) {
  check_nyquist(*f.lattice, domain);
  const int d = domain.dimension();
  const int n1 = domain.transverse_cells();
  const int nd = domain.longitudinal_cells();

  GridField out;
  out.extents.assign(d - 1, n1);
  out.extents.push_back(nd);
  out.values.assign(domain.grid_size(), Complex(0.0));

  const double inv_sqrt_2X = 1.0 / std::sqrt(2.0 * domain.half_width());
  const auto groups = transverse_groups(*f.lattice);
  std::vector<Complex> longit(nd);
  std::vector<std::vector<Complex>> tabs(d - 1);

  for (const Group& g : groups) {
    const auto& n = f.lattice->entries[g.begin].n;
    std::fill(longit.begin(), longit.end(), Complex(0.0));
    for (std::size_t e = g.begin; e < g.end; ++e) {
      const Complex c = f.coeffs(static_cast<Eigen::Index>(e));
      if (c == Complex(0.0)) continue;
      const double xi = f.lattice->entries[e].xi;
      for (int j = 0; j < nd; ++j)
        longit[j] += c * inv_sqrt_2X * std::exp(Complex(0.0, xi * domain.longitudinal_node(j)));
    }
    for (int ax = 0; ax < d - 1; ++ax) tabs[ax] = axis_table(n[ax], f.lattice->basis, domain);

    // odometer over transverse grid points
    std::vector<int> ix(d - 1, 0);
    while (true) {
      Complex prof(1.0);
      std::size_t flat = 0;
      for (int ax = 0; ax < d - 1; ++ax) {
        prof *= tabs[ax][ix[ax]];
        flat = flat * n1 + ix[ax];
      }
      Complex* line = out.values.data() + flat * nd;
      for (int j = 0; j < nd; ++j) line[j] += prof * longit[j];
      int ax = d - 2;
      while (ax >= 0 && ++ix[ax] == n1) ix[ax--] = 0;
      if (ax < 0) break;
    }
  }
  return out;
}

BandLimitedField analyze(const GridField& samples, const StripDomain& domain,
                         std::shared_ptr<const FrequencyLattice> lattice) {
  check_nyquist(*lattice, domain);
  const int d = domain.dimension();
  const int n1 = domain.transverse_cells();
  const int nd = domain.longitudinal_cells();
  if (samples.values.size() != domain.grid_size())
    throw std::invalid_argument("sample grid does not match the domain");

  Eigen::VectorXcd coeffs = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(lattice->size()));
  double ht_pow = 1.0;
  for (int j = 0; j < d - 1; ++j) ht_pow *= domain.transverse_step();
  const double hd = domain.longitudinal_step();
  const double inv_sqrt_2X = 1.0 / std::sqrt(2.0 * domain.half_width());

  const auto groups = transverse_groups(*lattice);
  std::vector<Complex> reduced(nd);
  std::vector<std::vector<Complex>> tabs(d - 1);

  for (const Group& g : groups) {
    const auto& n = lattice->entries[g.begin].n;
    for (int ax = 0; ax < d - 1; ++ax) tabs[ax] = axis_table(n[ax], lattice->basis, domain);
    std::fill(reduced.begin(), reduced.end(), Complex(0.0));

    std::vector<int> ix(d - 1, 0);
    while (true) {
      Complex prof(1.0);
      std::size_t flat = 0;
      for (int ax = 0; ax < d - 1; ++ax) {
        prof *= tabs[ax][ix[ax]];
        flat = flat * n1 + ix[ax];
      }
      const Complex w = std::conj(prof) * ht_pow;
      const Complex* line = samples.values.data() + flat * nd;
      for (int j = 0; j < nd; ++j) reduced[j] += w * line[j];
      int ax = d - 2;
      while (ax >= 0 && ++ix[ax] == n1) ix[ax--] = 0;
      if (ax < 0) break;
    }

    for (std::size_t e = g.begin; e < g.end; ++e) {
      const double xi = lattice->entries[e].xi;
      Complex c(0.0);
      for (int j = 0; j < nd; ++j)
        c += reduced[j] * inv_sqrt_2X * std::exp(Complex(0.0, -xi * domain.longitudinal_node(j)));
      coeffs(static_cast<Eigen::Index>(e)) = c * hd;
    }
  }
  return make_field(std::move(lattice), std::move(coeffs), domain);
}

std::vector<double> cell_weights(const SetDescription& S, const StripDomain& domain) {
  const int d = domain.dimension();
  const int n1 = domain.transverse_cells();
  const int nd = domain.longitudinal_cells();
  std::vector<double> w(domain.grid_size(), 0.0);

  const auto boxes = decompose(S, model_box(domain));
  const double ht = domain.transverse_step();
  const double hd = domain.longitudinal_step();
  const double X = domain.half_width();

  // per-axis 1-D overlap of [lo,hi] with cell i
  const auto overlap = [](double lo, double hi, double cell_lo, double cell_hi) {
    return std::max(0.0, std::min(hi, cell_hi) - std::max(lo, cell_lo));
  };

  for (const Box& b : boxes) {
    std::vector<std::vector<double>> ov(d);
    std::vector<std::pair<int, int>> range(d);  // [first, last] nonzero cells
    bool empty = false;
    for (int j = 0; j < d; ++j) {
      const bool longit = j == d - 1;
      const int cells = longit ? nd : n1;
      const double step = longit ? hd : ht;
      const double origin = longit ? -X : 0.0;
      int first = std::max(0, static_cast<int>(std::floor((b.iv[j].lo - origin) / step)));
      int last = std::min(cells - 1, static_cast<int>(std::floor((b.iv[j].hi - origin) / step)));
      if (last < first) {
        empty = true;
        break;
      }
      ov[j].resize(last - first + 1);
      for (int i = first; i <= last; ++i)
        ov[j][i - first] =
            overlap(b.iv[j].lo, b.iv[j].hi, origin + i * step, origin + (i + 1) * step);
      range[j] = {first, last};
    }
    if (empty) continue;

    std::vector<int> ix(d);
    for (int j = 0; j < d; ++j) ix[j] = range[j].first;
    while (true) {
      double v = 1.0;
      std::size_t flat = 0;
      for (int j = 0; j < d; ++j) {
        v *= ov[j][ix[j] - range[j].first];
        flat = flat * (j == d - 1 ? nd : n1) + ix[j];
      }
      w[flat] += v;
      int j = d - 1;
      while (j >= 0) {
        if (++ix[j] <= range[j].second) break;
        ix[j] = range[j].first;
        --j;
      }
      if (j < 0) break;
    }
  }
  return w;
}

double norm_on(const GridField& samples, std::span<const double> weights,
               const StripDomain& domain) {
  if (samples.values.size() != weights.size() || weights.size() != domain.grid_size())
    throw std::invalid_argument("weight grid does not match the domain");
  double s = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) s += weights[i] * std::norm(samples.values[i]);
  return std::sqrt(s);
}

double norm_on(const BandLimitedField& f, const SetDescription& region,
               const StripDomain& domain) {
  const GridField g = synthesize(f, domain);
  const auto w = cell_weights(region, domain);
  return norm_on(g, w, domain);
}

double bernstein_ratio(const BandLimitedField& f, std::span<const int> alpha,
                       const StripDomain& domain) {
  const double den = f.coeffs.squaredNorm();
  if (den == 0.0) throw std::invalid_argument("zero field");
  if (static_cast<int>(alpha.size()) != domain.dimension())
    throw std::invalid_argument("multi-index size mismatch");
  double num = 0.0;
  for (std::size_t e = 0; e < f.lattice->size(); ++e) {
    double factor = 1.0;
    for (int j = 0; j < domain.dimension(); ++j) {
      const double freq = entry_frequency(f.lattice->entries[e], f.lattice->basis, domain, j);
      for (int k = 0; k < alpha[j]; ++k) factor *= freq * freq;
    }
    num += factor * std::norm(f.coeffs(static_cast<Eigen::Index>(e)));
  }
  return std::sqrt(num / den);
}

BandLimitedField spectral_projection(const BandLimitedField& g, double E,
                                     const StripDomain& domain) {
  if (E < 0.0) throw std::invalid_argument("energy cutoff must be nonnegative");
  auto lat = std::make_shared<FrequencyLattice>();
  lat->basis = g.lattice->basis;
  lat->energy_cutoff = E;
  std::vector<Complex> kept;
  for (std::size_t e = 0; e < g.lattice->size(); ++e) {
    if (g.lattice->entries[e].energy <= E) {
      lat->entries.push_back(g.lattice->entries[e]);
      kept.push_back(g.coeffs(static_cast<Eigen::Index>(e)));
    }
  }
  Eigen::VectorXcd coeffs(static_cast<Eigen::Index>(kept.size()));
  for (std::size_t i = 0; i < kept.size(); ++i) coeffs(static_cast<Eigen::Index>(i)) = kept[i];
  BandLimitedField out;
  out.lattice = std::move(lat);
  out.coeffs = std::move(coeffs);
  out.band.assign(domain.dimension(), 2.0 * std::sqrt(E));
  return out;
}

Eigen::MatrixXcd mass_matrix_boxes(const FrequencyLattice& lattice,
                                   const std::vector<Box>& boxes, const StripDomain& domain) {
  const int d = domain.dimension();
  const auto n = static_cast<Eigen::Index>(lattice.size());
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(n, n);

  // per-axis distinct transverse index values and per-entry ids
  std::vector<std::vector<int>> distinct(d - 1);
  std::vector<std::vector<int>> ids(d - 1, std::vector<int>(lattice.size()));
  for (int ax = 0; ax < d - 1; ++ax) {
    std::map<int, int> seen;
    for (std::size_t e = 0; e < lattice.size(); ++e) {
      const int v = lattice.entries[e].n[ax];
      auto [it, inserted] = seen.emplace(v, static_cast<int>(distinct[ax].size()));
      if (inserted) distinct[ax].push_back(v);
      ids[ax][e] = it->second;
    }
  }
  int m_span = 0;
  for (const auto& e : lattice.entries) m_span = std::max(m_span, std::abs(e.m));

  const double L = domain.scale();
  const double X = domain.half_width();

  for (const Box& b : boxes) {
    // transverse tables
    std::vector<Eigen::MatrixXcd> T(d - 1);
    for (int ax = 0; ax < d - 1; ++ax) {
      const auto k = static_cast<Eigen::Index>(distinct[ax].size());
      T[ax].resize(k, k);
      for (Eigen::Index p = 0; p < k; ++p)
        for (Eigen::Index q = 0; q < k; ++q) {
          if (lattice.basis == SpectralBasis::Eigenfunction)
            T[ax](p, q) = eigen_pair_integral(distinct[ax][p], distinct[ax][q], b.iv[ax].lo,
                                              b.iv[ax].hi, L, domain.bc());
          else
            T[ax](p, q) = exponential_pair_integral(distinct[ax][p], distinct[ax][q],
                                                    b.iv[ax].lo, b.iv[ax].hi, L);
        }
    }
    // longitudinal Toeplitz table over m_i - m_j
    std::vector<Complex> ld(4 * m_span + 1);
    for (int delta = -2 * m_span; delta <= 2 * m_span; ++delta)
      ld[delta + 2 * m_span] =
          expint(kPi * delta / X, b.iv[d - 1].lo, b.iv[d - 1].hi) / (2.0 * X);

    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        Complex v = ld[lattice.entries[i].m - lattice.entries[j].m + 2 * m_span];
        for (int ax = 0; ax < d - 1; ++ax) v *= T[ax](ids[ax][i], ids[ax][j]);
        M(i, j) += v;
      }
    }
  }
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) M(i, j) = std::conj(M(j, i));
  return M;
}

Eigen::MatrixXcd mass_matrix(const FrequencyLattice& lattice, const SetDescription& S,
                             const StripDomain& domain) {
  return mass_matrix_boxes(lattice, decompose(S, model_box(domain)), domain);
}

double empirical_spectral_constant(const StripDomain& domain, const SetDescription& S,
                               double E, int trials, std::uint64_t seed) {
  const FrequencyLattice lattice = lattice_below_energy(domain, E);
  if (lattice.entries.empty())
    throw std::invalid_argument("empty spectral subspace below the energy cutoff");
  const auto boxes = decompose(S, model_box(domain));
  double measure = 0.0;
  for (const Box& b : boxes) measure += b.volume();
  if (!(measure > 0.0))
    throw std::invalid_argument("set has zero measure in the model box");

  const Eigen::MatrixXcd G = mass_matrix_boxes(lattice, boxes, domain);
  const auto n = G.rows();
  Eigen::LLT<Eigen::MatrixXcd> llt(G);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("set too thin at this resolution");

  Rng rng(seed);
  double best = 0.0;
  const int restarts = std::max(1, trials);
  const int iter_cap = 20 * static_cast<int>(n) + 200;
  for (int t = 0; t < restarts; ++t) {
    Eigen::VectorXcd x(n);
    for (Eigen::Index i = 0; i < n; ++i) x(i) = rng.complex_normal();
    x.normalize();
    double rho = std::numeric_limits<double>::infinity();
    for (int it = 0; it < iter_cap; ++it) {
      Eigen::VectorXcd y = llt.solve(x);
      y.normalize();
      const double next = (y.adjoint() * G * y).real()(0);
      x = y;
      if (std::abs(next - rho) <= 1e-8 * std::abs(next)) {
        rho = next;
        break;
      }
      rho = next;
    }
    if (!(rho > 1e-14)) throw std::runtime_error("set too thin at this resolution");
    best = std::max(best, 1.0 / std::sqrt(rho));
  }
  return best;
}

namespace {

void validate_constants(const SpectralConstants& c, bool strict_gamma) {
  const double e = std::exp(1.0);
  if (!(c.K >= e * (1.0 - 1e-12))) throw std::invalid_argument("K must be at least e");
  if (!(c.gamma > 0.0)) throw std::invalid_argument("gamma must be positive");
  if (strict_gamma && c.gamma > 1.0) throw std::invalid_argument("gamma must lie in (0, 1]");
  for (double v : c.a)
    if (!(v > 0.0)) throw std::invalid_argument("side vector entries must be positive");
  if (c.d < 1) throw std::invalid_argument("dimension must be positive");
}

}  // namespace

double theoretical_spectral_constant(const SpectralConstants& c) {
  validate_constants(c, /*strict_gamma=*/true);
  if (c.E < 0.0) throw std::invalid_argument("energy must be nonnegative");
  if (c.a.empty()) throw std::invalid_argument("side vector required");
  double a1 = 0.0;
  for (double v : c.a) a1 += v;
  const double log_base = c.d * std::log(2.0 * c.K) - std::log(c.gamma);
  return 8.0 * c.K * std::sqrt(c.E) * (a1 + c.d) * log_base;
}

double logvinenko_sereda_bound(const SpectralConstants& c) {
  validate_constants(c, /*strict_gamma=*/false);
  if (c.b.size() != c.a.size()) throw std::invalid_argument("a and b must have equal length");
  for (double v : c.b)
    if (!(v > 0.0)) throw std::invalid_argument("band entries must be positive");
  double ab = 0.0;
  for (std::size_t j = 0; j < c.a.size(); ++j) ab += c.a[j] * c.b[j];
  const double log_base = c.d * std::log(c.K) - std::log(c.gamma);
  return (c.K * ab + (6.0 * c.d - 1.0) / 2.0) * log_base;
}

}  // namespace stripctl
