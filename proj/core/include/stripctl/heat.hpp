#pragma once

#include <Eigen/Dense>
#include <memory>
#include <span>

#include "stripctl/strip_model.hpp"

namespace stripctl {

/// Spectral-coefficient state of the adjoint heat flow.
struct HeatState {
  std::shared_ptr<const FrequencyLattice> lattice;
  Eigen::VectorXcd coeffs;
  double time_stamp = 0.0;

  double norm() const { return coeffs.norm(); }
};

/// Multiplies each coefficient by exp(-t (lambda_n + xi_m^2)); exact in
/// spectral form, so the semigroup law holds to rounding.
HeatState evolve(const HeatState& g, double t);

struct DissipationResult {
  double lhs = 0.0;  // ||(1 - pi_E) e^{t Delta} g||
  double rhs = 0.0;  // e^{-t E} ||g||
  bool holds = false;
};

DissipationResult dissipation_check(const HeatState& g, double E, double t);

struct GaussianBoundConstants {
  double c_upper = 1.0;  // Dirichlet upper: c / t^{d/2} * exp(-|x-y|^2 / (6t))
  double c1 = 0.2;       // Neumann upper exponent rate (must be <= 1/4)
  double c2 = 0.5;       // Neumann lower exponent rate (must be >= 1/4)
  double C1 = 1.0;       // Neumann upper amplitude, with 1/(c(d) t^{d/2})
  double C2 = 0.01;      // Neumann lower amplitude
};

struct KernelParams {
  int image_count = 8;   // method-of-images reflections per side
  int series_count = 64; // eigen-series terms per axis
  GaussianBoundConstants constants;
};

/// Heat kernel of the strip as a product of d-1 interval kernels on
/// (0, 2*pi*L) (method of images, sign per boundary condition) and the 1-D
/// free Gaussian along the unbounded axis.
double kernel_strip(double t, std::span<const double> x, std::span<const double> y,
                    const StripDomain& domain, const KernelParams& params);

/// Cube of side pi*L centred at x_n used by the Dirichlet lower-bound witness.
struct CubeSpec {
  std::vector<double> center;
  double side = 0.0;  // = pi * L
};

/// Truncated Dirichlet eigen-series kernel of the cube W.
double kernel_cube_series(double t, std::span<const double> x, std::span<const double> y,
                          const CubeSpec& W, const KernelParams& params);

struct SandwichResult {
  double lower = 0.0;
  double value = 0.0;
  double upper = 0.0;
  bool holds = false;
};

/// Evaluates the applicable Gaussian bounds with the configured constants
/// against kernel_strip at a single (t, x, y).
SandwichResult gaussian_sandwich_check(double t, std::span<const double> x,
                                       std::span<const double> y, const StripDomain& domain,
                                       const KernelParams& params);

struct SandwichCalibration {
  // Dirichlet: minimal c making the upper bound hold over the sample.
  double c_upper_min = 0.0;
  // Neumann: minimal C1 (upper) and maximal C2 (lower) at the configured rates.
  double C1_min = 0.0;
  double C2_max = 0.0;
  int samples = 0;
};

/// Sweeps seeded random (t, x, y) samples and reports the critical constants
/// that make the sandwich hold on them.
SandwichCalibration calibrate_gaussian_constants(const StripDomain& domain,
                                                 const KernelParams& params, double t_lo,
                                                 double t_hi, int samples, std::uint64_t seed);

/// Volume of the d-dimensional Euclidean unit ball.
double unit_ball_volume(int d);

}  // namespace stripctl
