#include <benchmark/benchmark.h>

#include "stripctl/common.hpp"
#include "stripctl/control.hpp"
#include "stripctl/heat.hpp"
#include "stripctl/spectral.hpp"

using namespace stripctl;

namespace {

StripDomain make_domain(int m_max) {
  DomainConfig c;
  c.d = 2;
  c.L = 0.5;
  c.bc = BoundaryCondition::Dirichlet;
  c.X = 8.0;
  c.n_max = 8;
  c.m_max = m_max;
  c.h = 0.05;
  return StripDomain(c);
}

void BM_MassMatrix(benchmark::State& state) {
  const StripDomain dom = make_domain(64);
  const SetDescription S = SetDescription::stripes(2, 0.5, 2.0, 1.0);
  const FrequencyLattice lat = lattice_below_energy(dom, static_cast<double>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(mass_matrix(lat, S, dom));
  }
  state.SetLabel(std::to_string(lat.size()) + " modes");
}
BENCHMARK(BM_MassMatrix)->Arg(9)->Arg(25)->Arg(64);

void BM_GramianAssembly(benchmark::State& state) {
  const StripDomain dom = make_domain(64);
  const SetDescription S = SetDescription::stripes(2, 0.5, 2.0, 1.0);
  const FrequencyLattice lat = lattice_below_energy(dom, static_cast<double>(state.range(0)));
  const Eigen::MatrixXcd mass = mass_matrix(lat, S, dom);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gramian_matrix(lat, mass, 1.0, 128));
  }
}
BENCHMARK(BM_GramianAssembly)->Arg(25)->Arg(64);

void BM_HumControl(benchmark::State& state) {
  const StripDomain dom = make_domain(64);
  const SetDescription S = SetDescription::stripes(2, 0.5, 2.0, 1.0);
  auto lat = std::make_shared<FrequencyLattice>(
      lattice_below_energy(dom, static_cast<double>(state.range(0))));
  Rng rng(7);
  Eigen::VectorXcd c(static_cast<Eigen::Index>(lat->size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = rng.complex_normal();
  c /= c.norm();
  const HeatState u0{lat, c, 0.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(hum_control(u0, 1.0, S, 1e-8, dom, 256));
  }
}
BENCHMARK(BM_HumControl)->Arg(12)->Arg(25);

void BM_ThicknessSearch(benchmark::State& state) {
  const StripDomain dom = make_domain(16);
  const SetDescription S = SetDescription::stripes(2, 0.5, 2.0, 1.0);
  const std::vector<double> a{dom.transverse_extent(), 2.0};
  const double step = 1.0 / static_cast<double>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_thickness(S, a, dom, step));
  }
}
BENCHMARK(BM_ThicknessSearch)->Arg(4)->Arg(16)->Arg(64);

void BM_KernelStrip(benchmark::State& state) {
  const StripDomain dom = make_domain(16);
  KernelParams params;
  params.image_count = static_cast<int>(state.range(0));
  const std::vector<double> x{1.0, 0.3};
  const std::vector<double> y{2.0, -0.7};
  for (auto _ : state) {
    benchmark::DoNotOptimize(kernel_strip(0.5, x, y, dom, params));
  }
}
BENCHMARK(BM_KernelStrip)->Arg(4)->Arg(8)->Arg(16);

void BM_Synthesize(benchmark::State& state) {
  const StripDomain dom = make_domain(32);
  auto lat = std::make_shared<FrequencyLattice>(full_lattice(dom));
  Rng rng(5);
  Eigen::VectorXcd c(static_cast<Eigen::Index>(lat->size()));
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = rng.complex_normal();
  const BandLimitedField f = make_field(lat, c, dom);
  for (auto _ : state) {
    benchmark::DoNotOptimize(synthesize(f, dom));
  }
}
BENCHMARK(BM_Synthesize);

}  // namespace

BENCHMARK_MAIN();
