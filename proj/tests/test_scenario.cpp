#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "stripctl/common.hpp"
#include "stripctl/runner.hpp"
#include "stripctl/scenario.hpp"

using namespace stripctl;

namespace {

const char* kStripesThickness = R"(
# thickness of the reference stripe family
task = thickness
domain.d = 2
domain.L = 0.5
domain.bc = dirichlet
domain.X = 8
domain.N_max = 4
domain.M_max = 8
domain.h = 0.05
seed = 1
set = stripes{period=2, width=1}
thickness.a = [2*pi*L, 2]
thickness.step = 0.5
)";

std::vector<std::string> csv_lines(const std::string& csv) {
  std::vector<std::string> lines;
  std::istringstream in(csv);
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::istringstream in(line);
  std::string cell;
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

TEST_CASE("config parsing") {
  SUBCASE("dotted keys, comments, numeric expressions") {
    Config cfg = parse_config("a.b = 2*pi\n# note\nc = 1.5 # trailing\nname = run1\n");
    cfg.bind_symbols(1.0, 8.0);
    CHECK(cfg.number("a.b") == doctest::Approx(2.0 * kPi));
    CHECK(cfg.number("c") == 1.5);
    CHECK(cfg.text("name") == "run1");
  }

  SUBCASE("parse errors carry line and column") {
    try {
      parse_config("ok = 1\nbroken line\n");
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
      CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
  }

  SUBCASE("duplicate keys are rejected") {
    CHECK_THROWS_AS(parse_config("a = 1\na = 2\n"), ParseError);
  }

  SUBCASE("validation errors name the field") {
    try {
      Config cfg = parse_config("x = abc\n");
      cfg.number("x");
      FAIL("expected FieldError");
    } catch (const FieldError& e) {
      CHECK(e.field() == "x");
    }
    try {
      Config cfg = parse_config("a = 1\n");
      cfg.number("missing.key");
      FAIL("expected FieldError");
    } catch (const FieldError& e) {
      CHECK(e.field() == "missing.key");
      CHECK(std::string(e.what()).find("missing.key") != std::string::npos);
    }
  }
}

TEST_CASE("set expression parsing") {
  DomainConfig dc;
  dc.d = 2;
  dc.L = 0.5;
  dc.X = 8.0;
  dc.n_max = 2;
  dc.m_max = 4;
  dc.h = 0.1;
  const StripDomain dom(dc);

  SUBCASE("primitives and combinations evaluate membership") {
    const SetDescription stripes = parse_set_expression("stripes{period=2, width=1}", dom);
    const std::vector<double> inside{1.0, 0.5};
    const std::vector<double> outside{1.0, 1.5};
    CHECK(stripes.contains(inside));
    CHECK_FALSE(stripes.contains(outside));

    const SetDescription u = parse_set_expression(
        "union{box{[0,1],[0,1]}; complement{all}}", dom);
    CHECK(u.contains(std::vector<double>{0.5, 0.5}));
    CHECK_FALSE(u.contains(std::vector<double>{2.0, 0.5}));

    const SetDescription star = parse_set_expression("box{*, [0, 1]}", dom);
    CHECK(star.contains(std::vector<double>{3.0, 0.5}));  // full transverse extent
  }

  SUBCASE("symbols pi, L, X are bound") {
    const SetDescription b = parse_set_expression("box{[0, 2*pi*L], [-X, X]}", dom);
    CHECK(b.contains(std::vector<double>{3.0, 7.9}));
    CHECK_FALSE(b.contains(std::vector<double>{3.2, 0.0}));
  }

  SUBCASE("errors carry position info") {
    CHECK_THROWS_AS(parse_set_expression("frobnicate{1}", dom), ParseError);
    CHECK_THROWS_AS(parse_set_expression("box{[0,1],[0,1]} junk", dom), ParseError);
  }
}

TEST_CASE("run_scenario: thickness on stripes emits gamma 1/2") {
  const Scenario sc = load_scenario(kStripesThickness, "stripes");
  const RunArtifacts art = run_scenario(sc, 1);
  const auto lines = csv_lines(art.primary_csv);
  REQUIRE(lines.size() == 2);
  CHECK(lines[0].rfind("gamma_est,", 0) == 0);
  const auto cells = split(lines[1]);
  CHECK(std::strtod(cells[0].c_str(), nullptr) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(cells[2] == "1");  // exhaustive
  // manifest carries the parameters
  CHECK(art.manifest_json.find("\"task\": \"thickness\"") != std::string::npos);
}

TEST_CASE("run_scenario: cost-bound reproduces the constant pipeline") {
  const char* text = R"(
task = cost-bound
domain.d = 2
domain.L = 0.5
domain.X = 8
cost.gamma = 1
cost.a = [1, 1]
cost.T = 1
seed = 1
)";
  const Scenario sc = load_scenario(text, "cb");
  const RunArtifacts art = run_scenario(sc, 1);
  const auto lines = csv_lines(art.primary_csv);
  REQUIRE(lines.size() == 2);
  const auto header = split(lines[0]);
  const auto cells = split(lines[1]);
  REQUIRE(header.size() == cells.size());
  double c1 = 0.0, log_sqrt_C1 = 0.0, C2 = 0.0, logbound = 0.0;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == "c1") c1 = std::strtod(cells[i].c_str(), nullptr);
    if (header[i] == "log_sqrt_C1") log_sqrt_C1 = std::strtod(cells[i].c_str(), nullptr);
    if (header[i] == "C2") C2 = std::strtod(cells[i].c_str(), nullptr);
    if (header[i] == "log_cost_bound") logbound = std::strtod(cells[i].c_str(), nullptr);
  }
  const double e = std::exp(1.0);
  CHECK(c1 == doctest::Approx(32.0 * e * (1.0 + std::log(2.0))).epsilon(1e-14));
  CHECK(logbound == doctest::Approx(log_sqrt_C1 + C2 / 2.0).epsilon(1e-15));
}

TEST_CASE("malformed scenarios fail before producing artifacts") {
  CHECK_THROWS_AS(load_scenario("task = thickness\ndomain.L = -1\nset = all\n", "x"),
                  FieldError);
  CHECK_THROWS_AS(load_scenario("task = bogus\n", "x"), FieldError);
  CHECK_THROWS_AS(load_scenario("not a config\n", "x"), ParseError);
  // missing required set
  CHECK_THROWS_AS(load_scenario("task = thickness\n", "x"), FieldError);
}

TEST_CASE("byte-for-byte reproducibility") {
  const Scenario sc = load_scenario(kStripesThickness, "stripes");
  const RunArtifacts a = run_scenario(sc, 1);
  const RunArtifacts b = run_scenario(sc, 4);  // worker count must not matter
  CHECK(a.primary_csv == b.primary_csv);
  CHECK(a.plot_csv == b.plot_csv);
}

TEST_CASE("numbers round-trip through their 17-digit text form") {
  Rng rng(5);
  for (int i = 0; i < 200; ++i) {
    const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-30, 30));
    const std::string s = format_double(v);
    CHECK(std::strtod(s.c_str(), nullptr) == v);
  }
}

TEST_CASE("sweep") {
  const char* sweep_text = R"(
task = cost-bound
domain.d = 2
domain.L = 0.5
cost.gamma = 0.5
cost.a = [1, 1]
seed = 1
sweep.cost.T = {0.1, 0.2, 0.5, 1, 2}
)";

  SUBCASE("cost sweep rows are ordered and the bound decreases in T") {
    const Scenario sc = load_scenario(sweep_text, "sw");
    const RunArtifacts art = sweep_scenario(sc, 2);
    const auto lines = csv_lines(art.primary_csv);
    REQUIRE(lines.size() == 6);  // header + 5 points
    const auto header = split(lines[0]);
    CHECK(header[0] == "cost.T");
    std::size_t bound_col = 0;
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == "log_cost_bound") bound_col = i;
    double prev = kInf;
    for (std::size_t r = 1; r < lines.size(); ++r) {
      const auto cells = split(lines[r]);
      const double T = std::strtod(cells[0].c_str(), nullptr);
      const double bound = std::strtod(cells[bound_col].c_str(), nullptr);
      CHECK(T > 0.0);
      CHECK(bound < prev);
      prev = bound;
    }
  }

  SUBCASE("empty sweep and range explosion are rejected") {
    CHECK_THROWS_AS(
        sweep_scenario(load_scenario("task = cost-bound\ncost.gamma=1\ncost.a=[1,1]\n", "x"),
                       1),
        FieldError);
    const char* huge = R"(
task = cost-bound
cost.gamma = 1
cost.a = [1, 1]
sweep.cost.T = range(0.001, 200, 0.001)
)";
    CHECK_THROWS_AS(sweep_scenario(load_scenario(huge, "x"), 1), FieldError);
  }

  SUBCASE("spectral sweep: empirical constant is nondecreasing in E") {
    const char* spectral_text = R"(
task = spectral-check
domain.d = 2
domain.L = 0.5
domain.X = 8
domain.N_max = 4
domain.M_max = 12
domain.h = 0.05
seed = 3
set = stripes{period=2, width=1}
spectral.E_values = [1, 4, 9]
spectral.gamma = 0.5
spectral.a = [2*pi*L, 2]
spectral.trials = 2
)";
    const Scenario sc = load_scenario(spectral_text, "sp");
    const RunArtifacts art = run_scenario(sc, 1);
    const auto lines = csv_lines(art.primary_csv);
    REQUIRE(lines.size() == 4);
    double prev = 0.0;
    for (std::size_t r = 1; r < lines.size(); ++r) {
      const double c = std::strtod(split(lines[r])[2].c_str(), nullptr);
      CHECK(c >= prev * (1.0 - 1e-9));
      prev = c;
    }
  }
}

TEST_CASE("remaining tasks run end to end through the scenario engine") {
  const char* common = R"(
domain.d = 2
domain.L = 0.5
domain.X = 8
domain.N_max = 4
domain.M_max = 12
domain.h = 0.05
seed = 2
)";

  SUBCASE("dissipation") {
    const std::string text = std::string("task = dissipation\n") + common +
                             "dissipation.E = 4\ndissipation.states = 5\n"
                             "dissipation.times = [0.1, 1]\n";
    const RunArtifacts art = run_scenario(load_scenario(text, "d"), 1);
    CHECK(csv_lines(art.primary_csv).size() == 1 + 10);
    CHECK(art.manifest_json.find("\"all_hold\": true") != std::string::npos);
  }

  SUBCASE("hum with cost constants") {
    const std::string text = std::string("task = hum\n") + common +
                             "set = stripes{period=2, width=1}\nhum.T = 1\nhum.E_cap = 6\n"
                             "hum.n_t = 256\nhum.observability = true\n"
                             "cost.gamma = 0.5\ncost.a = [2*pi*L, 2]\n";
    const RunArtifacts art = run_scenario(load_scenario(text, "h"), 1);
    const auto lines = csv_lines(art.primary_csv);
    REQUIRE(lines.size() == 2);
    const auto header = split(lines[0]);
    const auto cells = split(lines[1]);
    double cost = 0, resid = 1, obs = 0, bound = 0;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == "achieved_cost") cost = std::strtod(cells[i].c_str(), nullptr);
      if (header[i] == "final_residual") resid = std::strtod(cells[i].c_str(), nullptr);
      if (header[i] == "empirical_observability") obs = std::strtod(cells[i].c_str(), nullptr);
      if (header[i] == "log_cost_bound") bound = std::strtod(cells[i].c_str(), nullptr);
    }
    CHECK(cost > 0.0);
    CHECK(resid < 1e-4);
    CHECK(cost <= std::sqrt(obs) * (1.0 + 1e-4));
    CHECK(std::log(cost) <= bound);
  }

  SUBCASE("lr") {
    const std::string text = std::string("task = lr\n") + common +
                             "set = stripes{period=2, width=1}\nlr.T = 1\nlr.E_cap = 8\n"
                             "lr.E0 = 2\nlr.k_max = 2\nlr.n_t = 64\n";
    const RunArtifacts art = run_scenario(load_scenario(text, "l"), 1);
    CHECK(csv_lines(art.primary_csv).size() == 1 + 3);  // one row per stage
  }

  SUBCASE("observability") {
    const std::string text = std::string("task = observability\n") + common +
                             "set = stripes{period=2, width=1}\n"
                             "observability.T = 1\nobservability.E_cap = 4\n"
                             "observability.n_t = 128\n";
    const RunArtifacts art = run_scenario(load_scenario(text, "o"), 1);
    const auto lines = csv_lines(art.primary_csv);
    REQUIRE(lines.size() == 2);
    CHECK(std::strtod(split(lines[1])[3].c_str(), nullptr) > 0.0);
  }

  SUBCASE("necessity") {
    const std::string text = std::string("task = necessity\n") + common +
                             "set = stripes{period=2, width=1}\nnecessity.T = 1\n"
                             "necessity.kappa = 2\nnecessity.n_max = 4\n"
                             "necessity.cert_a = [2*pi*L, 2]\n";
    const RunArtifacts art = run_scenario(load_scenario(text, "n"), 1);
    CHECK(csv_lines(art.primary_csv).size() == 1 + 4);
    CHECK(art.manifest_json.find("bounded-consistent") != std::string::npos);
  }

  SUBCASE("kernel-check") {
    const std::string text = std::string("task = kernel-check\n") + common +
                             "kernel.samples = 50\nkernel.t_lo = 0.2\nkernel.t_hi = 1.0\n";
    const RunArtifacts art = run_scenario(load_scenario(text, "k"), 1);
    const auto lines = csv_lines(art.primary_csv);
    REQUIRE(lines.size() == 2);
    const auto cells = split(lines[1]);
    CHECK(std::strtod(cells[5].c_str(), nullptr) == 1.0);  // dominated_fraction
  }

  SUBCASE("two-key sweep expands in declaration order") {
    const char* text = R"(
task = cost-bound
cost.gamma = 0.5
cost.a = [1, 1]
sweep.cost.K = {2.8, 3.0}
sweep.cost.T = {0.5, 1}
)";
    const RunArtifacts art = sweep_scenario(load_scenario(text, "s2"), 1);
    const auto lines = csv_lines(art.primary_csv);
    REQUIRE(lines.size() == 5);
    CHECK(split(lines[0])[0] == "cost.K");
    CHECK(split(lines[0])[1] == "cost.T");
    // row order: (2.8, 0.5), (2.8, 1), (3.0, 0.5), (3.0, 1)
    CHECK(std::strtod(split(lines[1])[0].c_str(), nullptr) == 2.8);
    CHECK(std::strtod(split(lines[1])[1].c_str(), nullptr) == 0.5);
    CHECK(std::strtod(split(lines[2])[1].c_str(), nullptr) == 1.0);
    CHECK(std::strtod(split(lines[3])[0].c_str(), nullptr) == 3.0);
  }
}

TEST_CASE("geometry dump emits the box list") {
  const Scenario sc = load_scenario(kStripesThickness, "stripes");
  const std::string csv = geometry_dump_csv(sc);
  const auto lines = csv_lines(csv);
  REQUIRE(lines.size() >= 2);
  CHECK(lines[0] == "lo1,hi1,lo2,hi2");
  // stripes on [-8, 8]: 8 full stripes of width 1
  CHECK(lines.size() == 1 + 8);
  const auto cells = split(lines[1]);
  CHECK(std::strtod(cells[0].c_str(), nullptr) == doctest::Approx(0.0));
  CHECK(std::strtod(cells[1].c_str(), nullptr) == doctest::Approx(kPi));
}

