#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "stripctl/common.hpp"
#include "stripctl/necessity.hpp"

using namespace stripctl;

namespace {

DomainConfig config(double L, double X) {
  DomainConfig c;
  c.d = 2;
  c.L = L;
  c.bc = BoundaryCondition::Dirichlet;
  c.X = X;
  c.n_max = 4;
  c.m_max = 8;
  c.h = 0.05;
  return c;
}

// ∫_a^b exp(-(x-y)^2/2) dx via the error function
double erf_mass(double a, double b, double y) {
  const double s = std::sqrt(2.0);
  return std::sqrt(kPi / 2.0) * (std::erf((b - y) / s) - std::erf((a - y) / s));
}

}  // namespace

TEST_CASE("qn_sequence") {
  const StripDomain dom(config(0.5, 8.0));
  const double width = dom.transverse_extent();  // pi

  SUBCASE("full strip: every ratio is 1 and never below 1/n^2") {
    const auto qn = qn_sequence(SetDescription::full(2), dom, 6);
    REQUIRE(qn.size() == 6);
    for (const QnEntry& e : qn) {
      CHECK(e.ratio == doctest::Approx(1.0));
      CHECK_FALSE(e.below_threshold);
      CHECK(e.Q.center[0] == doctest::Approx(width / 2.0));  // pinned to pi L
    }
  }

  SUBCASE("stripes: even n give 1/2, odd n give (n-1)/(2n); thick classification") {
    const SetDescription S = SetDescription::stripes(2, 0.5, 2.0, 1.0);
    const auto qn = qn_sequence(S, dom, 8);
    for (const QnEntry& e : qn) {
      const double expect = (e.n % 2 == 0) ? 0.5
                                           : (static_cast<double>(e.n) - 1.0) / (2.0 * e.n);
      CHECK(e.ratio == doctest::Approx(expect).epsilon(1e-12));
      if (e.n >= 2) CHECK_FALSE(e.below_threshold);  // 1/2 or (n-1)/2n >= 1/n^2 for n >= 2
    }
    CHECK(qn[0].below_threshold);  // n = 1 finds an empty window
  }

  SUBCASE("bounded box: the witness sequence |S ∩ Q_n| < (2 pi L)^{d-1}/n appears") {
    const StripDomain big(config(0.5, 16.0));
    const SetDescription S =
        SetDescription::box_union(2, {Box{{{0.0, width}, {-0.5, 0.5}}}});
    const auto qn = qn_sequence(S, big, 12);
    for (const QnEntry& e : qn) {
      CHECK(e.ratio <= 1.0 / (width * e.n) * width + 1e-12);  // |box| / ((2 pi L)^{d-1} n)
      // measure witness from the ratio: |S ∩ Q_n| = ratio * width * n
      const double mass = e.ratio * width * e.n;
      CHECK(mass < width / e.n + 1e-12);
    }
    for (const QnEntry& e : qn) CHECK(e.below_threshold);  // Q_n avoids the box entirely
  }

  SUBCASE("n beyond the longitudinal range is rejected") {
    CHECK_THROWS_WITH_AS(qn_sequence(SetDescription::full(2), dom, 17),
                         "n exceeds longitudinal search range 2X", std::invalid_argument);
  }
}

TEST_CASE("miller_functional") {
  const StripDomain dom(config(0.5, 8.0));
  const double width = dom.transverse_extent();

  SUBCASE("empty set gives the +inf sentinel") {
    const std::vector<double> y{width / 2.0, 0.0};
    const MillerEvaluation ev = miller_functional(SetDescription::empty(2), y, 1.0, 2.0, dom);
    CHECK(ev.integral == 0.0);
    CHECK(std::isinf(ev.value));
  }

  SUBCASE("full strip integral matches the error-function oracle") {
    const std::vector<double> y{width / 2.0, 0.3};
    const MillerEvaluation ev = miller_functional(SetDescription::full(2), y, 1.0, 2.0, dom);
    const double oracle = erf_mass(0.0, width, y[0]) * std::sqrt(2.0 * kPi);
    const double tol = 10.0 * dom.requested_step() * dom.requested_step();
    CHECK(std::abs(ev.integral - oracle) <= tol * oracle);
  }

  SUBCASE("periodic sets: the functional is periodic in y_d") {
    const SetDescription S = SetDescription::stripes(2, 0.5, 2.0, 1.0);
    const std::vector<double> y1{width / 2.0, 0.3};
    const std::vector<double> y2{width / 2.0, 2.3};
    const double f1 = miller_functional(S, y1, 1.0, 2.0, dom).value;
    const double f2 = miller_functional(S, y2, 1.0, 2.0, dom).value;
    const double tol = 10.0 * dom.requested_step() * dom.requested_step();
    CHECK(std::abs(f1 - f2) <= tol * std::max(1.0, std::abs(f1)));
  }

  SUBCASE("thick certificate lower-bounds the integral at sampled points") {
    const SetDescription S = SetDescription::stripes(2, 0.5, 2.0, 1.0);
    const auto cert =
        estimate_thickness(S, std::vector<double>{width, 2.0}, dom, 0.25);
    REQUIRE(cert.exhaustive);
    double d2 = 0.0, prod = 1.0;
    for (double v : cert.a) {
      d2 += v * v;
      prod *= v;
    }
    const double T = 1.0;
    const double bound = std::exp(-d2 / (2.0 * T)) * cert.gamma_est * prod;
    Rng rng(3);
    for (int i = 0; i < 20; ++i) {
      const std::vector<double> y{rng.uniform(0.1, width - 0.1), rng.uniform(-4.0, 4.0)};
      const MillerEvaluation ev = miller_functional(S, y, T, 2.0, dom);
      CHECK(ev.integral >= bound * (1.0 - 1e-9));
    }
  }

  SUBCASE("d_b takes both branches and varies continuously") {
    // L = 2: max wall distance 2 pi > T pi^2 d / 4 for T = 1, so both branches occur
    const StripDomain wide(config(2.0, 8.0));
    const double w2 = wide.transverse_extent();
    const double cap = 1.0 * kPi * kPi * 2.0 / 4.0;
    double prev = -1.0;
    for (int i = 1; i <= 40; ++i) {
      const double y1 = w2 * i / 82.0;  // stays in the lower half
      const std::vector<double> yy{y1, 0.0};
      const MillerEvaluation ev = miller_functional(SetDescription::full(2), yy, 1.0, 2.0, wide);
      CHECK(ev.d_b == doctest::Approx(std::min(y1, cap)).epsilon(1e-12));
      if (prev >= 0.0) CHECK(std::abs(ev.d_b - prev) <= w2 / 82.0 + 1e-12);
      prev = ev.d_b;
    }
  }

  SUBCASE("kappa below 1 is rejected") {
    const std::vector<double> y{1.0, 0.0};
    CHECK_THROWS_AS(miller_functional(SetDescription::full(2), y, 1.0, 0.5, dom),
                    std::invalid_argument);
  }
}

TEST_CASE("thickness_equivalence_probe") {
  SUBCASE("thick stripes: bounded-consistent, all values below the explicit bound") {
    const StripDomain dom(config(0.5, 8.0));
    const double width = dom.transverse_extent();
    const SetDescription S = SetDescription::stripes(2, 0.5, 2.0, 1.0);
    const auto cert = estimate_thickness(S, std::vector<double>{width, 2.0}, dom, 0.25);
    const ProbeResult probe =
        thickness_equivalence_probe(S, 1.0, 2.0, 8, dom, cert, 0.25);
    CHECK(probe.verdict == ProbeVerdict::BoundedConsistent);
    REQUIRE(probe.thick_bound.has_value());
    for (const ProbeRow& r : probe.rows) CHECK(r.functional <= *probe.thick_bound + 1e-9);
  }

  SUBCASE("bounded box: divergence-consistent with eventually increasing values") {
    // the box sits at the longitudinal edge, so the avoiding windows' centers
    // recede from it at rate n/2 and the functional grows like n^2
    const StripDomain dom(config(0.5, 16.0));
    const double width = dom.transverse_extent();
    const SetDescription S =
        SetDescription::box_union(2, {Box{{{0.0, width}, {-16.0, -15.0}}}});
    const ProbeResult probe =
        thickness_equivalence_probe(S, 1.0, 2.0, 20, dom, std::nullopt, 0.25);
    CHECK(probe.verdict == ProbeVerdict::DivergenceConsistent);
    // eventually monotone increasing along the tail
    for (std::size_t i = probe.rows.size() - 5; i + 1 < probe.rows.size(); ++i)
      CHECK(probe.rows[i + 1].functional > probe.rows[i].functional);
    // quadratic-type growth: F(2n)/F(n) comfortably above 2 in the tail
    CHECK(probe.rows[19].functional > 2.0 * probe.rows[9].functional);
  }

  SUBCASE("full strip: bounded-consistent") {
    const StripDomain dom(config(0.5, 8.0));
    const double width = dom.transverse_extent();
    const SetDescription S = SetDescription::full(2);
    const auto cert = estimate_thickness(S, std::vector<double>{width, 2.0}, dom, 0.5);
    const ProbeResult probe = thickness_equivalence_probe(S, 1.0, 2.0, 8, dom, cert, 0.5);
    CHECK(probe.verdict == ProbeVerdict::BoundedConsistent);
  }
}

TEST_CASE("dirichlet_lower_witness") {
  SUBCASE("d=2, L=1, T=1 evaluates to (2/pi)^2 e^{-8} and the quadrature dominates") {
    const StripDomain dom(config(1.0, 8.0));
    KernelParams params;
    params.series_count = 32;
    const std::vector<double> x_n{kPi, 0.0};
    const DirichletWitness w = dirichlet_lower_witness(x_n, 1.0, dom, params, 48);
    const double expect = std::pow(2.0 / kPi, 2) * std::exp(-8.0);
    CHECK(w.value == doctest::Approx(expect).epsilon(1e-12));
    CHECK(w.value == doctest::Approx(1.3598e-4).epsilon(1e-3));
    CHECK(w.holds);
    CHECK(w.quadrature_integral >= w.value);
  }

  SUBCASE("strictly positive for a sweep of T") {
    const StripDomain dom(config(1.0, 8.0));
    KernelParams params;
    params.series_count = 16;
    for (double T : {0.1, 1.0, 5.0}) {
      const std::vector<double> xn{kPi, 0.0};
      const DirichletWitness w = dirichlet_lower_witness(xn, T, dom, params, 32);
      CHECK(w.value > 0.0);
      CHECK(w.holds);
    }
  }

  SUBCASE("cube that does not fit transversally is rejected") {
    const StripDomain dom(config(1.0, 8.0));
    KernelParams params;
    const std::vector<double> xn{0.1, 0.0};
    CHECK_THROWS_WITH_AS(dirichlet_lower_witness(xn, 1.0, dom, params, 16),
                         "cube does not fit inside the strip cross-section",
                         std::invalid_argument);
  }
}
