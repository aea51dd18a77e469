#include "stripctl/necessity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "stripctl/spectral.hpp"

namespace stripctl {

std::string to_string(ProbeVerdict v) {
  switch (v) {
    case ProbeVerdict::BoundedConsistent:
      return "bounded-consistent (thick)";
    case ProbeVerdict::DivergenceConsistent:
      return "divergence-consistent (non-thick)";
    case ProbeVerdict::Inconclusive:
      return "inconclusive at this n_max";
  }
  return "?";
}

std::vector<QnEntry> qn_sequence(const SetDescription& S, const StripDomain& domain,
                                 int n_max, double step, int workers) {
  if (n_max < 1) throw std::invalid_argument("n_max must be at least 1");
  if (n_max > 2.0 * domain.half_width())
    throw std::invalid_argument("n exceeds longitudinal search range 2X");
  const int d = domain.dimension();
  std::vector<QnEntry> out;
  out.reserve(static_cast<std::size_t>(n_max));
  for (int n = 1; n <= n_max; ++n) {
    std::vector<double> a(d, domain.transverse_extent());
    a[d - 1] = n;
    const ThicknessCertificate cert = estimate_thickness(S, a, domain, step, workers);
    QnEntry e;
    e.n = n;
    e.Q = cert.worst;
    e.ratio = cert.gamma_est;
    e.below_threshold = e.ratio < 1.0 / (static_cast<double>(n) * n);
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

// ∫_a^b exp(-(x - y)^2 / (2T)) dx
double gauss_mass(double a, double b, double y, double T) {
  const double s = std::sqrt(2.0 * T);
  return std::sqrt(kPi * T / 2.0) * (std::erf((b - y) / s) - std::erf((a - y) / s));
}

}  // namespace

MillerEvaluation miller_functional(const SetDescription& S, std::span<const double> y,
                                   double T, double kappa, const StripDomain& domain) {
  if (!(T > 0.0)) throw std::invalid_argument("T must be positive");
  if (!(kappa > 1.0)) throw std::invalid_argument("kappa must exceed 1");
  const int d = domain.dimension();
  if (static_cast<int>(y.size()) != d) throw std::invalid_argument("point dimension mismatch");
  const double width = domain.transverse_extent();
  for (int j = 0; j < d - 1; ++j)
    if (!(y[j] > 0.0 && y[j] < width))
      throw std::invalid_argument("evaluation point must lie inside the strip");

  MillerEvaluation ev;
  ev.y.assign(y.begin(), y.end());
  ev.T = T;
  ev.kappa = kappa;

  // quadrature over the model box with exact cell∩S weights
  const auto w = cell_weights(S, domain);
  const int n1 = domain.transverse_cells();
  const int nd = domain.longitudinal_cells();
  double integral = 0.0;
  std::vector<int> ix(d - 1, 0);
  std::size_t flat_t = 0;
  // odometer over transverse cells, inner loop longitudinal
  while (true) {
    double r2_t = 0.0;
    for (int j = 0; j < d - 1; ++j) {
      const double dx = domain.transverse_node(ix[j]) - y[j];
      r2_t += dx * dx;
    }
    const double* wline = w.data() + flat_t * nd;
    for (int jd = 0; jd < nd; ++jd) {
      if (wline[jd] == 0.0) continue;
      const double dz = domain.longitudinal_node(jd) - y[d - 1];
      integral += wline[jd] * std::exp(-(r2_t + dz * dz) / (2.0 * T));
    }
    int j = d - 2;
    while (j >= 0 && ++ix[j] == n1) ix[j--] = 0;
    if (j < 0) break;
    flat_t = 0;
    for (int k = 0; k < d - 1; ++k) flat_t = flat_t * n1 + ix[k];
  }

  // Analytic tail beyond [-X, X], bounded by the full cross-section. Sets
  // whose longitudinal content provably stays inside the model box (finite
  // breakpoint hull, no periodic continuation) contribute nothing there.
  {
    const double X = domain.half_width();
    bool content_beyond_box;
    if (S.longitudinal_period()) {
      // periodic or invariant continuation: empty inside the box means empty
      // everywhere, otherwise the content repeats beyond it
      double wsum = 0.0;
      for (double v : w) wsum += v;
      content_beyond_box = wsum > 0.0;
    } else {
      // aperiodic: content is confined to the breakpoint hull
      std::vector<double> bp;
      S.axis_breakpoints(d - 1, -64.0 * X, 64.0 * X, bp);
      content_beyond_box = false;
      for (double b : bp)
        if (std::abs(b) > X) content_beyond_box = true;
    }
    if (content_beyond_box) {
      double transverse = 1.0;
      for (int j = 0; j < d - 1; ++j) transverse *= gauss_mass(0.0, width, y[j], T);
      const double s = std::sqrt(2.0 * T);
      const double tail_long =
          std::sqrt(kPi * T / 2.0) *
          (std::erfc((X - y[d - 1]) / s) + std::erfc((X + y[d - 1]) / s));
      integral += transverse * tail_long;
    }
  }
  ev.integral = integral;

  double dist = kInf;
  for (int j = 0; j < d - 1; ++j) dist = std::min({dist, y[j], width - y[j]});
  ev.d_b = std::min(dist, T * kPi * kPi * d / 4.0);

  if (!(integral > 0.0)) {
    ev.value = kInf;
    return ev;
  }
  const double penalty = kappa * kPi * kPi * d * d / 4.0 * (T / ev.d_b) * (T / ev.d_b);
  ev.value = -2.0 * T * std::log(integral) - penalty;
  return ev;
}

ProbeResult thickness_equivalence_probe(const SetDescription& S, double T, double kappa,
                                        int n_max, const StripDomain& domain,
                                        const std::optional<ThicknessCertificate>& cert,
                                        double step, double divergence_factor, int workers) {
  ProbeResult res;
  const auto qn = qn_sequence(S, domain, n_max, step, workers);
  for (const QnEntry& q : qn) {
    ProbeRow row;
    row.n = q.n;
    row.center = q.Q.center;
    row.ratio = q.ratio;
    row.functional = miller_functional(S, q.Q.center, T, kappa, domain).value;
    res.rows.push_back(std::move(row));
  }

  if (cert) {
    double d2 = 0.0, prod = 1.0;
    for (double v : cert->a) {
      d2 += v * v;
      prod *= v;
    }
    res.thick_bound = d2 - 2.0 * T * std::log(cert->gamma_est * prod);
  }

  bool all_bounded = res.thick_bound.has_value();
  if (all_bounded)
    for (const ProbeRow& r : res.rows)
      if (!(r.functional <= *res.thick_bound * (1.0 + 1e-9) + 1e-9)) all_bounded = false;

  if (cert && all_bounded) {
    res.verdict = ProbeVerdict::BoundedConsistent;
    return res;
  }

  // divergence heuristic: value exceeds the n = 1 level by the configured
  // factor and keeps increasing over the last quarter of the sweep
  const double F1 = res.rows.front().functional;
  double Fmax = -kInf;
  bool any_inf = false;
  for (const ProbeRow& r : res.rows) {
    if (std::isinf(r.functional)) any_inf = true;
    Fmax = std::max(Fmax, r.functional);
  }
  const double scale = std::max(std::abs(F1), 1e-6);
  bool exceeded = any_inf || (Fmax - F1 >= (divergence_factor - 1.0) * scale);
  bool tail_increasing = true;
  const std::size_t tail = static_cast<std::size_t>(std::max(2, n_max / 4));
  const std::size_t start = res.rows.size() > tail ? res.rows.size() - tail : 0;
  for (std::size_t i = start; i + 1 < res.rows.size(); ++i)
    if (!(res.rows[i + 1].functional > res.rows[i].functional) &&
        !std::isinf(res.rows[i].functional))
      tail_increasing = false;
  if (exceeded && tail_increasing)
    res.verdict = ProbeVerdict::DivergenceConsistent;
  else
    res.verdict = ProbeVerdict::Inconclusive;
  return res;
}

DirichletWitness dirichlet_lower_witness(std::span<const double> x_n, double T,
                                         const StripDomain& domain, const KernelParams& params,
                                         int quad_cells_per_axis) {
  const int d = domain.dimension();
  if (static_cast<int>(x_n.size()) != d) throw std::invalid_argument("point dimension mismatch");
  const double L = domain.scale();
  const double side = kPi * L;
  const double width = domain.transverse_extent();
  for (int j = 0; j < d - 1; ++j)
    if (x_n[j] - side / 2.0 < -1e-12 || x_n[j] + side / 2.0 > width + 1e-12)
      throw std::invalid_argument("cube does not fit inside the strip cross-section");

  DirichletWitness w;
  w.value = std::pow(2.0 / (kPi * L), d) * std::exp(-2.0 * (1.0 + T) * d / (L * L));

  CubeSpec W;
  W.center.assign(x_n.begin(), x_n.end());
  W.side = side;
  const int nq = quad_cells_per_axis;
  const double h = side / nq;
  std::vector<int> ix(d, 0);
  std::vector<double> x(d);
  double integral = 0.0;
  while (true) {
    for (int j = 0; j < d; ++j) x[j] = x_n[j] - side / 2.0 + (ix[j] + 0.5) * h;
    const double k = kernel_cube_series(1.0 + T, x, x_n, W, params);
    integral += k * k;
    int j = d - 1;
    while (j >= 0 && ++ix[j] == nq) ix[j--] = 0;
    if (j < 0) break;
  }
  integral *= std::pow(h, d);
  w.quadrature_integral = integral;
  w.holds = integral >= w.value * (1.0 - 1e-9);
  return w;
}

}  // namespace stripctl
