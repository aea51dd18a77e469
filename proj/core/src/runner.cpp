#include "stripctl/runner.hpp"

#include <chrono>
#include <cmath>
#include <json.hpp>
#include <map>
#include <sstream>

#include "stripctl/common.hpp"
#include "stripctl/control.hpp"
#include "stripctl/heat.hpp"
#include "stripctl/necessity.hpp"
#include "stripctl/spectral.hpp"

namespace stripctl {

using json = nlohmann::ordered_json;

CsvBuilder::CsvBuilder(std::vector<std::string> header) : header_(std::move(header)) {
  for (std::size_t i = 0; i < header_.size(); ++i) {
    if (i) out_ += ',';
    out_ += header_[i];
  }
  out_ += '\n';
}

void CsvBuilder::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_ += ',';
    out_ += cells[i];
  }
  out_ += '\n';
  ++rows_;
}

namespace {

std::string fmt(double v) { return format_double(v); }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "1" : "0"; }

struct TaskOutput {
  CsvBuilder primary{{}};
  CsvBuilder plot{{}};
  json summary;
};

Eigen::VectorXcd random_state(const FrequencyLattice& lattice, std::uint64_t seed,
                              double norm_target) {
  Rng rng(seed);
  Eigen::VectorXcd v(static_cast<Eigen::Index>(lattice.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = rng.complex_normal();
  if (norm_target > 0.0 && v.norm() > 0.0) v *= norm_target / v.norm();
  return v;
}

std::shared_ptr<const FrequencyLattice> task_lattice(const StripDomain& dom,
                                                     const Config& cfg,
                                                     const std::string& cap_key,
                                                     json* summary = nullptr) {
  auto lat = cfg.has(cap_key)
                 ? std::make_shared<FrequencyLattice>(
                       lattice_below_energy(dom, cfg.number(cap_key)))
                 : std::make_shared<FrequencyLattice>(full_lattice(dom));
  if (summary && lat->cutoff_truncated)
    (*summary)["warning"] = "mode cutoffs truncate the lattice below the energy cap";
  return lat;
}

// ---- tasks ----

TaskOutput run_thickness(const Scenario& sc, const StripDomain& dom, int workers) {
  const Config& cfg = sc.config;
  const SetDescription S = sc.build_set(dom);
  const std::vector<double> a = cfg.number_list("thickness.a");
  if (static_cast<int>(a.size()) != dom.dimension())
    throw FieldError("thickness.a", "needs one side per axis");
  const double a_d = a.back();
  if (dom.half_width() < 4.0 * std::max(1.0, a_d))
    throw FieldError("thickness.a",
                     "domain truncation too small: X must be at least 4*max(1, a_d)");
  const double step = cfg.number("thickness.step", 0.25);

  const ThicknessCertificate cert = estimate_thickness(S, a, dom, step, workers);

  std::vector<std::string> header{"gamma_est", "step", "exhaustive"};
  for (int j = 0; j < dom.dimension(); ++j) header.push_back("a" + std::to_string(j + 1));
  for (int j = 0; j < dom.dimension(); ++j)
    header.push_back("worst_center" + std::to_string(j + 1));
  TaskOutput out;
  out.primary = CsvBuilder(header);
  std::vector<std::string> row{fmt(cert.gamma_est), fmt(cert.step), fmt(cert.exhaustive)};
  for (double v : cert.a) row.push_back(fmt(v));
  for (double v : cert.worst.center) row.push_back(fmt(v));
  out.primary.row(row);

  out.plot = CsvBuilder({"a_d", "gamma_est"});
  out.plot.row({fmt(a_d), fmt(cert.gamma_est)});
  out.summary = {{"gamma_est", cert.gamma_est}, {"exhaustive", cert.exhaustive}};
  return out;
}

TaskOutput run_spectral_check(const Scenario& sc, const StripDomain& dom, int workers) {
  (void)workers;
  const Config& cfg = sc.config;
  const SetDescription S = sc.build_set(dom);
  std::vector<double> Es;
  if (cfg.has("spectral.E_values"))
    Es = cfg.number_list("spectral.E_values");
  else
    Es = {cfg.number("spectral.E")};
  const int trials = cfg.integer("spectral.trials", 2);

  SpectralConstants consts;
  consts.d = dom.dimension();
  consts.K = cfg.number("spectral.K", std::exp(1.0));
  consts.gamma = cfg.number("spectral.gamma", 1.0);
  if (cfg.has("spectral.a"))
    consts.a = cfg.number_list("spectral.a");
  else
    consts.a.assign(static_cast<std::size_t>(dom.dimension()), 1.0);

  TaskOutput out;
  out.primary = CsvBuilder({"E", "sqrt_E", "empirical_constant", "log_empirical",
                            "log_theoretical_at_K"});
  out.plot = CsvBuilder({"sqrt_E", "log_empirical_constant"});

  std::vector<double> log_emp(Es.size());
  for (std::size_t i = 0; i < Es.size(); ++i) {
    const double C = empirical_spectral_constant(dom, S, Es[i], trials, sc.seed + i);
    log_emp[i] = std::log(C);
    consts.E = Es[i];
    const double log_theo = theoretical_spectral_constant(consts);
    out.primary.row({fmt(Es[i]), fmt(std::sqrt(Es[i])), fmt(C), fmt(log_emp[i]),
                     fmt(log_theo)});
    out.plot.row({fmt(std::sqrt(Es[i])), fmt(log_emp[i])});
  }

  // minimal K >= e whose theoretical constant dominates every empirical value
  const double e = std::exp(1.0);
  auto dominates = [&](double K) {
    SpectralConstants c = consts;
    c.K = K;
    for (std::size_t i = 0; i < Es.size(); ++i) {
      c.E = Es[i];
      if (theoretical_spectral_constant(c) < log_emp[i]) return false;
    }
    return true;
  };
  double calibrated_K = std::numeric_limits<double>::quiet_NaN();
  if (dominates(e)) {
    calibrated_K = e;
  } else {
    double lo = e, hi = 2.0 * e;
    while (!dominates(hi) && hi < 1e6) hi *= 2.0;
    if (dominates(hi)) {
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (dominates(mid) ? hi : lo) = mid;
      }
      calibrated_K = hi;
    }
  }

  // least-squares fit of log C against sqrt(E)
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  const double n = static_cast<double>(Es.size());
  for (std::size_t i = 0; i < Es.size(); ++i) {
    const double x = std::sqrt(Es[i]);
    sx += x;
    sy += log_emp[i];
    sxx += x * x;
    sxy += x * log_emp[i];
    syy += log_emp[i] * log_emp[i];
  }
  const double slope = (n * sxy - sx * sy) / std::max(n * sxx - sx * sx, 1e-300);
  const double intercept = (sy - slope * sx) / n;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < Es.size(); ++i) {
    const double x = std::sqrt(Es[i]);
    ss_res += (log_emp[i] - slope * x - intercept) * (log_emp[i] - slope * x - intercept);
    ss_tot += (log_emp[i] - sy / n) * (log_emp[i] - sy / n);
  }
  const double r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;

  out.summary = {{"fit_slope", slope},
                 {"fit_intercept", intercept},
                 {"fit_r2", r2},
                 {"calibrated_K", calibrated_K}};
  return out;
}

TaskOutput run_dissipation(const Scenario& sc, const StripDomain& dom, int workers) {
  (void)workers;
  const Config& cfg = sc.config;
  TaskOutput out;
  const auto lattice = task_lattice(dom, cfg, "dissipation.E_cap", &out.summary);
  const double E = cfg.number("dissipation.E");
  std::vector<double> times;
  if (cfg.has("dissipation.times"))
    times = cfg.number_list("dissipation.times");
  else
    times = {0.1, 0.5, 1.0};
  const int states = cfg.integer("dissipation.states", 100);

  out.primary = CsvBuilder({"state", "t", "lhs", "rhs", "holds"});
  out.plot = CsvBuilder({"t", "max_ratio"});
  bool all_hold = true;
  for (double t : times) {
    double max_ratio = 0.0;
    for (int s = 0; s < states; ++s) {
      HeatState g{lattice, random_state(*lattice, sc.seed + 1000 * s, 1.0), 0.0};
      const DissipationResult r = dissipation_check(g, E, t);
      all_hold = all_hold && r.holds;
      if (r.rhs > 0.0) max_ratio = std::max(max_ratio, r.lhs / r.rhs);
      out.primary.row({fmt(s), fmt(t), fmt(r.lhs), fmt(r.rhs), fmt(r.holds)});
    }
    out.plot.row({fmt(t), fmt(max_ratio)});
  }
  out.summary["all_hold"] = all_hold;
  out.summary["states"] = states;
  out.summary["E"] = E;
  return out;
}

std::vector<std::string> cost_report_header() {
  return {"gamma",      "K",           "T",          "c1",
          "tau0",       "log_sqrt_C1", "C2",         "log_cost_bound",
          "empirical_observability",   "achieved_cost", "final_residual"};
}

std::vector<std::string> cost_report_row(double gamma, double K, const CostReport& r) {
  return {fmt(gamma),       fmt(K),           fmt(r.T),  fmt(r.c1),
          fmt(r.tau0),      fmt(r.log_sqrt_C1), fmt(r.C2), fmt(r.log_cost_bound),
          fmt(r.empirical_observability),       fmt(r.achieved_cost),
          fmt(r.final_residual)};
}

TaskOutput run_cost_bound(const Scenario& sc, const StripDomain& dom, int workers) {
  (void)workers;
  const Config& cfg = sc.config;
  const double gamma = cfg.number("cost.gamma");
  const std::vector<double> a = cfg.number_list("cost.a");
  const double K = cfg.number("cost.K", std::exp(1.0));
  const double T = cfg.number("cost.T", 1.0);
  const CostReport r = cost_constants(gamma, a, dom.dimension(), K, T);
  const HConditions h = h_conditions_check(r.c1, r.tau0);

  TaskOutput out;
  auto header = cost_report_header();
  header.push_back("h1_at_tau0");
  header.push_back("h_ok");
  out.primary = CsvBuilder(header);
  auto row = cost_report_row(gamma, K, r);
  row.push_back(fmt(h.h1));
  row.push_back(fmt(h.ok));
  out.primary.row(row);

  out.plot = CsvBuilder({"inv_T", "log_cost_bound"});
  out.plot.row({fmt(1.0 / T), fmt(r.log_cost_bound)});
  out.summary = {{"c1", r.c1}, {"log_cost_bound", r.log_cost_bound}, {"h_ok", h.ok}};
  return out;
}

TaskOutput run_hum(const Scenario& sc, const StripDomain& dom, int workers) {
  (void)workers;
  const Config& cfg = sc.config;
  const SetDescription S = sc.build_set(dom);
  TaskOutput out;
  const auto lattice = task_lattice(dom, cfg, "hum.E_cap", &out.summary);
  const double T = cfg.number("hum.T", 1.0);
  const int n_t = cfg.integer("hum.n_t", 128);
  const double tol = cfg.number("hum.tol", 1e-8);

  HeatState u0{lattice, random_state(*lattice, sc.seed, cfg.number("hum.u0_norm", 1.0)), 0.0};
  const HumResult hum = hum_control(u0, T, S, tol, dom, n_t);

  CostReport r;
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double K = std::numeric_limits<double>::quiet_NaN();
  if (cfg.has("cost.gamma") && cfg.has("cost.a")) {
    gamma = cfg.number("cost.gamma");
    K = cfg.number("cost.K", std::exp(1.0));
    r = cost_constants(gamma, cfg.number_list("cost.a"), dom.dimension(), K, T);
  }
  r.T = T;
  r.achieved_cost = hum.cost;
  r.final_residual = hum.residual_rel;
  if (cfg.boolean("hum.observability", false))
    r.empirical_observability =
        empirical_observability_constant(T, S, dom, *lattice, n_t, sc.seed + 7);

  out.primary = CsvBuilder(cost_report_header());
  out.primary.row(cost_report_row(gamma, K, r));
  out.plot = CsvBuilder({"inv_T", "log_achieved_cost"});
  out.plot.row({fmt(1.0 / T), fmt(std::log(std::max(hum.cost, 1e-300)))});
  out.summary["cost"] = hum.cost;
  out.summary["residual"] = hum.residual_rel;
  out.summary["cg_iterations"] = hum.cg_iterations;
  out.summary["modes"] = lattice->size();
  return out;
}

TaskOutput run_lr(const Scenario& sc, const StripDomain& dom, int workers) {
  (void)workers;
  const Config& cfg = sc.config;
  const SetDescription S = sc.build_set(dom);
  TaskOutput out;
  const auto lattice = task_lattice(dom, cfg, "lr.E_cap", &out.summary);
  const double T = cfg.number("lr.T", 1.0);
  const int n_t = cfg.integer("lr.n_t", 128);
  const double tol = cfg.number("lr.tol", 1e-8);
  double lambda_min = kInf;
  for (const auto& e : lattice->entries) lambda_min = std::min(lambda_min, e.energy);
  LrSchedule schedule;
  schedule.E0 = cfg.number("lr.E0", lambda_min + 1.0);
  schedule.k_max = cfg.integer("lr.k_max", 4);

  HeatState u0{lattice, random_state(*lattice, sc.seed, cfg.number("lr.u0_norm", 1.0)), 0.0};
  const LrResult lr = lr_synthesize(u0, T, S, schedule, dom, tol, n_t);
  if (!lr.ok) throw std::runtime_error("lr: " + lr.message);

  out.primary = CsvBuilder({"k", "E_k", "tau", "low_modes", "pre_norm", "post_norm",
                            "stage_cost", "cg_iterations"});
  out.plot = CsvBuilder({"k", "log_post_norm"});
  for (const LrStage& st : lr.stages) {
    out.primary.row({fmt(st.k), fmt(st.E), fmt(st.tau), fmt(st.low_modes), fmt(st.pre_norm),
                     fmt(st.post_norm), fmt(st.cost), fmt(st.cg_iterations)});
    out.plot.row({fmt(st.k), fmt(std::log(std::max(st.post_norm, 1e-300)))});
  }
  out.summary["total_cost"] = lr.total_cost;
  out.summary["final_norm"] = lr.final_norm;
  out.summary["summable_from"] = lr.summable_from;
  out.summary["stages"] = lr.stages.size();
  return out;
}

TaskOutput run_observability(const Scenario& sc, const StripDomain& dom, int workers) {
  (void)workers;
  const Config& cfg = sc.config;
  const SetDescription S = sc.build_set(dom);
  TaskOutput out;
  const auto lattice = task_lattice(dom, cfg, "observability.E_cap", &out.summary);
  const double T = cfg.number("observability.T", 1.0);
  const int n_t = cfg.integer("observability.n_t", 128);

  const double C = empirical_observability_constant(T, S, dom, *lattice, n_t, sc.seed);

  out.primary = CsvBuilder({"T", "X", "modes", "observability_constant"});
  out.primary.row({fmt(T), fmt(dom.half_width()), fmt(lattice->size()), fmt(C)});
  out.plot = CsvBuilder({"X", "log_observability_constant"});
  out.plot.row({fmt(dom.half_width()), fmt(std::log(C))});
  out.summary["constant"] = C;
  out.summary["modes"] = lattice->size();
  return out;
}

TaskOutput run_necessity(const Scenario& sc, const StripDomain& dom, int workers) {
  const Config& cfg = sc.config;
  const SetDescription S = sc.build_set(dom);
  const double T = cfg.number("necessity.T", 1.0);
  const double kappa = cfg.number("necessity.kappa", 2.0);
  const int n_max = cfg.integer("necessity.n_max", 10);
  const double step = cfg.number("necessity.step", 0.25);

  std::optional<ThicknessCertificate> cert;
  if (cfg.has("necessity.cert_a")) {
    const std::vector<double> a = cfg.number_list("necessity.cert_a");
    cert = estimate_thickness(S, a, dom, cfg.number("necessity.cert_step", step), workers);
  }
  const ProbeResult probe =
      thickness_equivalence_probe(S, T, kappa, n_max, dom, cert, step,
                                  cfg.number("necessity.divergence_factor", 10.0), workers);

  TaskOutput out;
  std::vector<std::string> header{"n"};
  for (int j = 0; j < dom.dimension(); ++j) header.push_back("center" + std::to_string(j + 1));
  header.push_back("ratio");
  header.push_back("functional");
  out.primary = CsvBuilder(header);
  out.plot = CsvBuilder({"n", "functional"});
  for (const ProbeRow& r : probe.rows) {
    std::vector<std::string> row{fmt(r.n)};
    for (double c : r.center) row.push_back(fmt(c));
    row.push_back(fmt(r.ratio));
    row.push_back(fmt(r.functional));
    out.primary.row(row);
    out.plot.row({fmt(r.n), fmt(r.functional)});
  }
  out.summary = {{"verdict", to_string(probe.verdict)}};
  if (probe.thick_bound) out.summary["thick_bound"] = *probe.thick_bound;
  if (cert) out.summary["certificate_gamma"] = cert->gamma_est;
  return out;
}

TaskOutput run_kernel_check(const Scenario& sc, const StripDomain& dom, int workers) {
  (void)workers;
  const Config& cfg = sc.config;
  KernelParams params;
  params.image_count = cfg.integer("kernel.image_count", 8);
  params.series_count = cfg.integer("kernel.series_count", 64);
  params.constants.c_upper = cfg.number("kernel.c_upper", 1.0);
  params.constants.c1 = cfg.number("kernel.c1", 0.2);
  params.constants.c2 = cfg.number("kernel.c2", 0.5);
  params.constants.C1 = cfg.number("kernel.C1", 1.0);
  params.constants.C2 = cfg.number("kernel.C2", 0.01);
  const double t_lo = cfg.number("kernel.t_lo", 0.1);
  const double t_hi = cfg.number("kernel.t_hi", 2.0);
  const int samples = cfg.integer("kernel.samples", 1000);

  const SandwichCalibration cal =
      calibrate_gaussian_constants(dom, params, t_lo, t_hi, samples, sc.seed);

  // cube-kernel domination sample on a cube that fits the cross-section
  const int d = dom.dimension();
  const double L = dom.scale();
  CubeSpec W;
  W.center.assign(static_cast<std::size_t>(d), kPi * L);
  W.center[static_cast<std::size_t>(d - 1)] = 0.0;
  W.side = kPi * L;
  Rng rng(sc.seed + 13);
  double min_gap = kInf;
  int dominated = 0;
  std::vector<double> x(d), y(d);
  for (int i = 0; i < samples; ++i) {
    const double t = rng.uniform(t_lo, t_hi);
    for (int j = 0; j < d; ++j) {
      x[j] = W.center[static_cast<std::size_t>(j)] + W.side * (rng.uniform() - 0.5);
      y[j] = W.center[static_cast<std::size_t>(j)] + W.side * (rng.uniform() - 0.5);
    }
    const double ks = kernel_strip(t, x, y, dom, params);
    const double kw = kernel_cube_series(t, x, y, W, params);
    min_gap = std::min(min_gap, ks - kw);
    if (ks >= kw * (1.0 - 1e-12) - 1e-15) ++dominated;
  }

  TaskOutput out;
  out.primary = CsvBuilder({"samples", "c_upper_min", "C1_min", "C2_max",
                            "domination_min_gap", "dominated_fraction"});
  out.primary.row({fmt(samples), fmt(cal.c_upper_min), fmt(cal.C1_min), fmt(cal.C2_max),
                   fmt(min_gap), fmt(static_cast<double>(dominated) / samples)});

  // on-diagonal sweep for plotting value against the configured upper bound
  out.plot = CsvBuilder({"t", "kernel_on_diagonal", "upper_bound"});
  std::vector<double> x0(static_cast<std::size_t>(d), kPi * L);
  x0[static_cast<std::size_t>(d - 1)] = 0.0;
  for (int i = 0; i < 20; ++i) {
    const double t = t_lo + (t_hi - t_lo) * i / 19.0;
    const SandwichResult s = gaussian_sandwich_check(t, x0, x0, dom, params);
    out.plot.row({fmt(t), fmt(s.value), fmt(s.upper)});
  }
  out.summary = {{"c_upper_min", cal.c_upper_min},
                 {"C1_min", cal.C1_min},
                 {"C2_max", cal.C2_max},
                 {"domination_min_gap", min_gap}};
  return out;
}

TaskOutput dispatch(const Scenario& sc, const StripDomain& dom, int workers) {
  switch (sc.task) {
    case Task::Thickness: return run_thickness(sc, dom, workers);
    case Task::SpectralCheck: return run_spectral_check(sc, dom, workers);
    case Task::Dissipation: return run_dissipation(sc, dom, workers);
    case Task::CostBound: return run_cost_bound(sc, dom, workers);
    case Task::Hum: return run_hum(sc, dom, workers);
    case Task::Lr: return run_lr(sc, dom, workers);
    case Task::Observability: return run_observability(sc, dom, workers);
    case Task::Necessity: return run_necessity(sc, dom, workers);
    case Task::KernelCheck: return run_kernel_check(sc, dom, workers);
  }
  throw std::logic_error("unhandled task");
}

json manifest_base(const Scenario& sc, int workers) {
  json m;
  m["tool"] = "strip-control";
  m["version"] = kToolVersion;
  m["task"] = to_string(sc.task);
  m["name"] = sc.name;
  m["seed"] = sc.seed;
  m["workers"] = workers;
  json params = json::object();
  for (const auto& [k, v] : sc.config.all()) params[k] = v.raw;
  m["parameters"] = params;
  return m;
}

}  // namespace

RunArtifacts run_scenario(const Scenario& sc, int workers) {
  const auto start = std::chrono::steady_clock::now();
  const StripDomain dom = sc.build();
  TaskOutput out = dispatch(sc, dom, workers);
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  json m = manifest_base(sc, workers);
  m["summary"] = out.summary;
  m["wall_time_s"] = wall;

  RunArtifacts art;
  art.primary_csv = out.primary.str();
  art.plot_csv = out.plot.str();
  art.manifest_json = m.dump(2) + "\n";
  art.summary = to_string(sc.task) + ": " + out.summary.dump();
  return art;
}

RunArtifacts sweep_scenario(const Scenario& sc, int workers) {
  const auto start = std::chrono::steady_clock::now();
  std::vector<std::string> sweep_keys = sc.config.keys_with_prefix("sweep.");
  if (sweep_keys.empty()) throw FieldError("sweep", "no sweep.<key> entries present");

  std::vector<std::vector<double>> values;
  std::size_t total = 1;
  for (const auto& k : sweep_keys) {
    values.push_back(sc.config.sweep_values(k));
    total *= values.back().size();
    if (total > 100000) throw FieldError("sweep", "range explosion guard: > 100000 points");
  }

  // expand point configs
  std::vector<Scenario> points(total);
  for (std::size_t p = 0; p < total; ++p) {
    Config cfg;  // rebuild with overridden entries
    std::size_t rest = p;
    std::map<std::string, double> overrides;
    for (std::size_t i = sweep_keys.size(); i-- > 0;) {
      const auto& vals = values[i];
      overrides[sweep_keys[i].substr(6)] = vals[rest % vals.size()];
      rest /= vals.size();
    }
    for (const auto& [k, e] : sc.config.all()) {
      if (k.rfind("sweep.", 0) == 0) continue;
      auto it = overrides.find(k);
      if (it != overrides.end()) {
        Config::Entry ne = e;
        ne.raw = format_double(it->second);
        cfg.set(k, ne);
        overrides.erase(it);
      } else {
        cfg.set(k, e);
      }
    }
    for (const auto& [k, v] : overrides) {
      Config::Entry ne;
      ne.raw = format_double(v);
      ne.line = 0;
      ne.col = 0;
      cfg.set(k, ne);
    }
    // serialize back to text and re-load so domain-dependent validation reruns
    std::string text;
    for (const auto& [k, e] : cfg.all()) text += k + " = " + e.raw + "\n";
    points[p] = load_scenario(text, sc.name);
  }

  std::vector<TaskOutput> outs(total);
  std::vector<std::string> errors(total);
  parallel_for(
      total,
      [&](std::size_t p) {
        try {
          const StripDomain dom = points[p].build();
          outs[p] = dispatch(points[p], dom, 1);
        } catch (const std::exception& e) {
          errors[p] = e.what();
        }
      },
      workers);
  for (std::size_t p = 0; p < total; ++p)
    if (!errors[p].empty())
      throw std::runtime_error("sweep point " + std::to_string(p) + ": " + errors[p]);

  // assemble: sweep columns + per-point primary rows, deterministic order
  std::vector<std::string> header;
  for (const auto& k : sweep_keys) header.push_back(k.substr(6));
  for (const auto& h : outs[0].primary.header()) header.push_back(h);
  CsvBuilder primary(header);

  std::vector<std::string> plot_header;
  for (const auto& k : sweep_keys) plot_header.push_back(k.substr(6));
  for (const auto& h : outs[0].plot.header()) plot_header.push_back(h);
  CsvBuilder plot(plot_header);

  json point_summaries = json::array();
  for (std::size_t p = 0; p < total; ++p) {
    std::vector<std::string> prefix;
    std::size_t rest = p;
    std::vector<std::string> rev;
    for (std::size_t i = sweep_keys.size(); i-- > 0;) {
      const auto& vals = values[i];
      rev.push_back(format_double(vals[rest % vals.size()]));
      rest /= vals.size();
    }
    prefix.assign(rev.rbegin(), rev.rend());

    // append rows with the sweep prefix
    {
      std::istringstream in(outs[p].primary.str());
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        std::vector<std::string> cells = prefix;
        cells.push_back(line);
        primary.row(cells);
      }
    }
    {
      std::istringstream in(outs[p].plot.str());
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        std::vector<std::string> cells = prefix;
        cells.push_back(line);
        plot.row(cells);
      }
    }
    point_summaries.push_back(outs[p].summary);
  }

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json m = manifest_base(sc, workers);
  m["sweep_keys"] = json::array();
  for (const auto& k : sweep_keys) m["sweep_keys"].push_back(k.substr(6));
  m["points"] = total;
  m["point_summaries"] = point_summaries;
  m["wall_time_s"] = wall;

  RunArtifacts art;
  art.primary_csv = primary.str();
  art.plot_csv = plot.str();
  art.manifest_json = m.dump(2) + "\n";
  art.summary = "sweep(" + to_string(sc.task) + "): " + std::to_string(total) + " points";
  return art;
}

std::string geometry_dump_csv(const Scenario& sc) {
  const StripDomain dom = sc.build();
  const SetDescription S = sc.build_set(dom);
  Box window;
  window.iv.resize(dom.dimension());
  for (int j = 0; j < dom.dimension() - 1; ++j) window.iv[j] = {0.0, dom.transverse_extent()};
  window.iv[dom.dimension() - 1] = {-dom.half_width(), dom.half_width()};
  std::vector<std::string> header;
  for (int j = 0; j < dom.dimension(); ++j) {
    header.push_back("lo" + std::to_string(j + 1));
    header.push_back("hi" + std::to_string(j + 1));
  }
  CsvBuilder csv(header);
  for (const Box& b : decompose(S, window)) {
    std::vector<std::string> row;
    for (const Interval& iv : b.iv) {
      row.push_back(format_double(iv.lo));
      row.push_back(format_double(iv.hi));
    }
    csv.row(row);
  }
  return csv.str();
}

}  // namespace stripctl
