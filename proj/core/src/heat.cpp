#include "stripctl/heat.hpp"

#include <cmath>
#include <stdexcept>

#include "stripctl/common.hpp"

namespace stripctl {

HeatState evolve(const HeatState& g, double t) {
  if (t < 0.0) throw std::invalid_argument("negative evolution time");
  HeatState out;
  out.lattice = g.lattice;
  out.time_stamp = g.time_stamp + t;
  out.coeffs = g.coeffs;
  for (Eigen::Index i = 0; i < out.coeffs.size(); ++i)
    out.coeffs(i) *= std::exp(-t * g.lattice->entries[static_cast<std::size_t>(i)].energy);
  return out;
}

DissipationResult dissipation_check(const HeatState& g, double E, double t) {
  if (!(t > 0.0)) throw std::invalid_argument("dissipation check needs t > 0");
  DissipationResult r;
  double high = 0.0;
  for (Eigen::Index i = 0; i < g.coeffs.size(); ++i) {
    const double mu = g.lattice->entries[static_cast<std::size_t>(i)].energy;
    if (mu > E) {
      const double amp = std::abs(g.coeffs(i)) * std::exp(-t * mu);
      high += amp * amp;
    }
  }
  r.lhs = std::sqrt(high);
  r.rhs = std::exp(-t * E) * g.norm();
  r.holds = r.lhs <= r.rhs * (1.0 + 1e-12);
  return r;
}

namespace {

double gauss1d(double t, double z) {
  return std::exp(-z * z / (4.0 * t)) / std::sqrt(4.0 * kPi * t);
}

// interval kernel on (0, A) by the method of images
double interval_kernel(double t, double u, double v, double A, BoundaryCondition bc,
                       int image_count) {
  double s = 0.0;
  const double sign = bc == BoundaryCondition::Dirichlet ? -1.0 : 1.0;
  for (int k = -image_count; k <= image_count; ++k) {
    const double shift = 2.0 * A * k;
    s += gauss1d(t, u - v - shift) + sign * gauss1d(t, u + v - shift);
  }
  return s;
}

}  // namespace

double kernel_strip(double t, std::span<const double> x, std::span<const double> y,
                    const StripDomain& domain, const KernelParams& params) {
  if (!(t > 0.0)) throw std::invalid_argument("kernel needs t > 0");
  if (params.image_count < 1) throw std::invalid_argument("image_count must be at least 1");
  const int d = domain.dimension();
  if (static_cast<int>(x.size()) != d || static_cast<int>(y.size()) != d)
    throw std::invalid_argument("point dimension mismatch");
  double k = gauss1d(t, x[d - 1] - y[d - 1]);
  const double A = domain.transverse_extent();
  for (int j = 0; j < d - 1; ++j)
    k *= interval_kernel(t, x[j], y[j], A, domain.bc(), params.image_count);
  return k;
}

double kernel_cube_series(double t, std::span<const double> x, std::span<const double> y,
                          const CubeSpec& W, const KernelParams& params) {
  if (!(t > 0.0)) throw std::invalid_argument("kernel needs t > 0");
  if (params.series_count < 1) throw std::invalid_argument("series_count must be at least 1");
  const int d = static_cast<int>(W.center.size());
  const double side = W.side;
  const double L = side / kPi;  // eigenvalues eta_k = ||k||^2 / L^2
  for (int j = 0; j < d; ++j) {
    if (std::abs(x[j] - W.center[j]) > side / 2.0 + 1e-12 ||
        std::abs(y[j] - W.center[j]) > side / 2.0 + 1e-12)
      throw std::invalid_argument("points outside W");
  }
  // The series factorizes axis by axis.
  double prod = 1.0;
  const double norm2 = 2.0 / (kPi * L);
  for (int j = 0; j < d; ++j) {
    const double u = x[j] - W.center[j] + side / 2.0;  // in [0, side]
    const double v = y[j] - W.center[j] + side / 2.0;
    double s = 0.0;
    for (int k = 1; k <= params.series_count; ++k) {
      const double w = k / L;
      s += std::exp(-t * w * w) * std::sin(w * u) * std::sin(w * v);
    }
    prod *= norm2 * s;
  }
  return prod;
}

double unit_ball_volume(int d) {
  return std::pow(kPi, d / 2.0) / std::tgamma(d / 2.0 + 1.0);
}

SandwichResult gaussian_sandwich_check(double t, std::span<const double> x,
                                       std::span<const double> y, const StripDomain& domain,
                                       const KernelParams& params) {
  SandwichResult r;
  r.value = kernel_strip(t, x, y, domain, params);
  const int d = domain.dimension();
  double r2 = 0.0;
  for (int j = 0; j < d; ++j) r2 += (x[j] - y[j]) * (x[j] - y[j]);
  const GaussianBoundConstants& c = params.constants;
  const double td2 = std::pow(t, d / 2.0);
  if (domain.bc() == BoundaryCondition::Dirichlet) {
    r.lower = 0.0;
    r.upper = c.c_upper / td2 * std::exp(-r2 / (6.0 * t));
  } else {
    const double cd = unit_ball_volume(d);
    r.lower = c.C2 / (cd * td2) * std::exp(-c.c2 * r2 / t);
    r.upper = c.C1 / (cd * td2) * std::exp(-c.c1 * r2 / t);
  }
  r.holds = r.value <= r.upper * (1.0 + 1e-12) && r.value >= r.lower * (1.0 - 1e-12);
  return r;
}

SandwichCalibration calibrate_gaussian_constants(const StripDomain& domain,
                                                 const KernelParams& params, double t_lo,
                                                 double t_hi, int samples, std::uint64_t seed) {
  if (!(t_lo > 0.0) || !(t_hi >= t_lo)) throw std::invalid_argument("bad time range");
  Rng rng(seed);
  const int d = domain.dimension();
  const double A = domain.transverse_extent();
  const double X = domain.half_width();
  SandwichCalibration cal;
  cal.samples = samples;
  cal.C2_max = std::numeric_limits<double>::infinity();
  const double cd = unit_ball_volume(d);
  std::vector<double> x(d), y(d);
  for (int i = 0; i < samples; ++i) {
    const double t = rng.uniform(t_lo, t_hi);
    for (int j = 0; j < d - 1; ++j) {
      x[j] = rng.uniform(0.0, A);
      y[j] = rng.uniform(0.0, A);
    }
    x[d - 1] = rng.uniform(-X / 2.0, X / 2.0);
    y[d - 1] = rng.uniform(-X / 2.0, X / 2.0);
    const double value = kernel_strip(t, x, y, domain, params);
    double r2 = 0.0;
    for (int j = 0; j < d; ++j) r2 += (x[j] - y[j]) * (x[j] - y[j]);
    const double td2 = std::pow(t, d / 2.0);
    if (domain.bc() == BoundaryCondition::Dirichlet) {
      cal.c_upper_min = std::max(cal.c_upper_min, value * td2 * std::exp(r2 / (6.0 * t)));
    } else {
      cal.C1_min = std::max(cal.C1_min,
                            value * cd * td2 * std::exp(params.constants.c1 * r2 / t));
      cal.C2_max = std::min(cal.C2_max,
                            value * cd * td2 * std::exp(params.constants.c2 * r2 / t));
    }
  }
  return cal;
}

}  // namespace stripctl
