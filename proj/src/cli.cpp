#include "cqed/cli.hpp"

#include <CLI11.hpp>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "cqed/chargeq.hpp"
#include "cqed/datio.hpp"
#include "cqed/fitkit.hpp"
#include "cqed/multilevel.hpp"
#include "cqed/svg.hpp"
#include "cqed/wigner.hpp"

namespace cqed {

namespace fs = std::filesystem;

// Built-in example parameter set: a flux-tunable ~4-5.4 GHz high-impedance
// resonator coupled to a t_c ~ 2 GHz charge qubit.  Used when a run config
// omits the corresponding block, so the flag-only invocations stay useful.
namespace defaults {
constexpr double f_r = 4.149e9, kappa = 19e6, kappa_ext = 8e6;
constexpr double t_c = 2.072e9, g0 = 165e6, gamma0 = 57e6, gamma_eps = 164e6;
constexpr int n_squid = 35;
constexpr double squid_l0 = 1.02e-9, c_r = 2.44e-14;
constexpr double v_flux0 = 0.2, v_flux_period = 1.0;
constexpr int f_points = 401, x_points = 201;
constexpr double eps_span = 25e9, f_halfspan = 0.5e9;
}  // namespace defaults

// --- small helpers ---------------------------------------------------------

static std::string fmtg(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

static Eigen::VectorXd linspace(double a, double b, Eigen::Index n) {
  return Eigen::VectorXd::LinSpaced(n, a, b);
}

static json load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config: " + path);
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw config_error("malformed config " + path + ": " + e.what());
  }
  if (j.value("schema", "") != "cqedsim-run/1")
    throw config_error("config schema must be \"cqedsim-run/1\" in " + path);
  return j;
}

static json require_block(const json& cfg, const char* name) {
  if (!cfg.contains(name) || !cfg[name].is_object())
    throw config_error(std::string("config is missing the \"") + name +
                       "\" block");
  return cfg[name];
}

static std::string join_path(const std::string& dir, const std::string& base) {
  return (fs::path(dir) / base).string();
}

static void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    throw config_error("output directory not writable: " + dir);
}

static std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw config_error("missing dataset: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(ss.str())));
  return buf;
}

// Locate a preset: literal path first, then $CQEDSIM_PRESETS, then ./presets.
static std::string resolve_preset(const std::string& name) {
  if (fs::exists(name)) return name;
  std::vector<std::string> tried{name};
  const std::string file = name.size() > 5 && name.ends_with(".json")
                               ? name
                               : name + ".json";
  if (const char* env = std::getenv("CQEDSIM_PRESETS")) {
    const std::string p = join_path(env, file);
    if (fs::exists(p)) return p;
    tried.push_back(p);
  }
  const std::string local = join_path("presets", file);
  if (fs::exists(local)) return local;
  tried.push_back(local);
  std::string msg = "preset not found: " + name + " (tried";
  for (const auto& t : tried) msg += " " + t;
  throw config_error(msg + ")");
}

// Deterministic worker pool over [0, n); fn(i) must touch disjoint state.
static void parallel_for(Eigen::Index n, int n_threads,
                         const std::function<void(Eigen::Index)>& fn) {
  n_threads = std::max(1, std::min<int>(n_threads, static_cast<int>(n)));
  if (n_threads <= 1) {
    for (Eigen::Index i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<Eigen::Index> next{0};
  std::exception_ptr err;
  std::mutex err_mtx;
  auto worker = [&] {
    for (;;) {
      const Eigen::Index i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mtx);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<size_t>(n_threads));
  for (int t = 0; t < n_threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

// --- simulate ----------------------------------------------------------------

namespace {

struct SimPlan {
  std::string model;  // bare | two_level | multilevel
  ResonatorParams res;
  EnvParams env;
  ChargeQubitParams qubit;
  ScsParams scs;
  NoiseRates rates;
  DetuningCal det_cal;
  SquidArrayCal squid;
  double v_flux0 = defaults::v_flux0;
  double v_flux_period = defaults::v_flux_period;
  Eigen::VectorXd f;        // drive axis
  Eigen::VectorXd x;        // slow axis (empty -> trace output)
  std::string x_kind;       // eps | v_pl | v_flux | "" for trace
  double eps_fixed = 0.0;   // trace / flux-map detuning
  double noise_sigma = 0.0;
  NoiseMode noise_mode = NoiseMode::additive;
  bool svg = false;
  std::string base = "sim";
  json resolved;  // fully resolved block recorded in the sidecar
};

double jget(const json& j, const char* key, double dflt) {
  return j.contains(key) ? j.at(key).get<double>() : dflt;
}

Eigen::VectorXd parse_axis(const json& a, const char* what,
                           std::vector<std::string>& problems) {
  const double start = jget(a, "start", 0.0);
  const double stop = jget(a, "stop", 0.0);
  const auto points = static_cast<Eigen::Index>(jget(a, "points", 0.0));
  if (!(start < stop))
    problems.push_back(std::string(what) + ": start must be < stop");
  if (points < 2) problems.push_back(std::string(what) + ": points must be >= 2");
  if (!problems.empty()) return Eigen::VectorXd();
  return linspace(start, stop, points);
}

json axis_json(const Eigen::VectorXd& v) {
  return json{{"start", v[0]}, {"stop", v[v.size() - 1]}, {"points", v.size()}};
}

// Resolve the simulate block against the built-in defaults, collecting every
// validation problem instead of stopping at the first.
SimPlan plan_simulation(const json& blk) {
  std::vector<std::string> problems;
  SimPlan plan;
  plan.model = blk.value("model", std::string("bare"));
  if (plan.model == "two-level") plan.model = "two_level";
  const bool two = plan.model == "two_level";
  const bool multi = plan.model == "multilevel";
  if (!two && !multi && plan.model != "bare")
    problems.push_back("model must be bare, two_level or multilevel (got \"" +
                       plan.model + "\")");

  const json res = blk.value("resonator", json::object());
  plan.res.f_r = jget(res, "f_r_hz", defaults::f_r);
  plan.res.kappa = jget(res, "kappa_hz", defaults::kappa);
  plan.res.kappa_ext = jget(res, "kappa_ext_hz", defaults::kappa_ext);
  plan.res.phi = jget(res, "phi_rad", 0.0);
  if (!(plan.res.f_r > 0)) problems.push_back("resonator.f_r_hz must be > 0");
  if (!(plan.res.kappa > 0)) problems.push_back("resonator.kappa_hz must be > 0");
  if (plan.res.kappa_ext < 0)
    problems.push_back("resonator.kappa_ext_hz must be >= 0");

  const json env = blk.value("env", json::object());
  plan.env.a = jget(env, "a", 1.0);
  plan.env.alpha = jget(env, "alpha_rad", 0.0);
  plan.env.tau = jget(env, "tau_s", 0.0);
  if (!(plan.env.a > 0)) problems.push_back("env.a must be > 0");

  if (two) {
    const json q = blk.value("qubit", json::object());
    plan.qubit.t_c = jget(q, "t_c_hz", defaults::t_c);
    plan.qubit.g0 = jget(q, "g0_hz", defaults::g0);
    plan.qubit.gamma0 = jget(q, "gamma0_hz", defaults::gamma0);
    plan.qubit.gamma_eps = jget(q, "gamma_eps_hz", defaults::gamma_eps);
    if (!(plan.qubit.t_c > 0)) problems.push_back("qubit.t_c_hz must be > 0");
    if (plan.qubit.g0 < 0) problems.push_back("qubit.g0_hz must be >= 0");
    if (!(plan.qubit.gamma0 > 0))
      problems.push_back("qubit.gamma0_hz must be > 0");
    if (plan.qubit.gamma_eps < 0)
      problems.push_back("qubit.gamma_eps_hz must be >= 0");
  }
  if (multi) {
    if (blk.contains("preset")) {
      try {
        const ScsPreset pre =
            load_preset(resolve_preset(blk["preset"].get<std::string>()));
        plan.scs = pre.scs;
        plan.rates = pre.noise;
      } catch (const config_error& e) {
        problems.push_back(e.what());
      }
    } else if (blk.contains("scs") && blk.contains("noise_rates")) {
      try {
        plan.scs = scs_from_json(blk["scs"]);
        plan.rates = noise_rates_from_json(blk["noise_rates"]);
      } catch (const config_error& e) {
        problems.push_back(e.what());
      }
    } else {
      problems.push_back(
          "multilevel model needs either \"preset\" or \"scs\"+\"noise_rates\"");
    }
    if (plan.rates.gamma_eps <= 0 && plan.rates.gamma_br.maxCoeff() <= 0)
      problems.push_back("multilevel noise rates are all zero");
  }

  plan.eps_fixed = jget(blk, "eps_hz", 0.0);

  // slow axis
  const bool want_map = blk.contains("x_axis") ||
                        ((two || multi) && !blk.contains("trace_at_eps_hz"));
  if (want_map) {
    json ax = blk.value("x_axis", json::object());
    plan.x_kind = ax.value("kind", std::string("eps"));
    if (plan.x_kind == "eps" || plan.x_kind == "v_pl") {
      if (plan.model == "bare")
        problems.push_back("bare model supports only v_flux maps or traces");
      if (!ax.contains("start"))
        ax = json{{"kind", plan.x_kind},
                  {"start", -defaults::eps_span},
                  {"stop", defaults::eps_span},
                  {"points", defaults::x_points}};
      plan.x = parse_axis(ax, "x_axis", problems);
      if (plan.x_kind == "v_pl") {
        if (!blk.contains("detuning_cal")) {
          problems.push_back("v_pl axis requires a detuning_cal block");
        } else {
          const json& d = blk["detuning_cal"];
          plan.det_cal.beta_pl = jget(d, "beta_pl_ev_per_v", 0.0);
          plan.det_cal.beta_pr = jget(d, "beta_pr_ev_per_v", 0.0);
          plan.det_cal.v_pl0 = jget(d, "v_pl0_v", 0.0);
          plan.det_cal.v_pr0 = jget(d, "v_pr0_v", 0.0);
          if (!(plan.det_cal.beta_pl > 0))
            problems.push_back("detuning_cal.beta_pl_ev_per_v must be > 0");
        }
      }
    } else if (plan.x_kind == "v_flux") {
      const json fc = blk.value("flux_cal", json::object());
      plan.squid.n_squid = static_cast<int>(jget(fc, "n_squid", defaults::n_squid));
      plan.squid.l0 = jget(fc, "l0_h", defaults::squid_l0);
      plan.squid.c_r = jget(fc, "c_r_f", defaults::c_r);
      plan.v_flux0 = jget(fc, "v_flux0_v", defaults::v_flux0);
      plan.v_flux_period = jget(fc, "v_flux_period_v", defaults::v_flux_period);
      if (plan.squid.n_squid < 1) problems.push_back("flux_cal.n_squid must be >= 1");
      if (!(plan.squid.l0 > 0)) problems.push_back("flux_cal.l0_h must be > 0");
      if (!(plan.squid.c_r > 0)) problems.push_back("flux_cal.c_r_f must be > 0");
      if (!(plan.v_flux_period > 0))
        problems.push_back("flux_cal.v_flux_period_v must be > 0");
      if (!ax.contains("start"))
        ax = json{{"kind", "v_flux"},
                  {"start", 0.4},
                  {"stop", 0.6},
                  {"points", defaults::x_points}};
      plan.x = parse_axis(ax, "x_axis", problems);
    } else {
      problems.push_back("x_axis.kind must be eps, v_pl or v_flux (got \"" +
                         plan.x_kind + "\")");
    }
  } else if (blk.contains("trace_at_eps_hz")) {
    plan.eps_fixed = blk["trace_at_eps_hz"].get<double>();
  }

  // drive axis
  if (blk.contains("f_d_hz")) {
    plan.f = parse_axis(blk["f_d_hz"], "f_d_hz", problems);
  } else if (problems.empty()) {
    double lo = plan.res.f_r - defaults::f_halfspan;
    double hi = plan.res.f_r + defaults::f_halfspan;
    if (plan.x_kind == "v_flux") {
      lo = 1e300;
      hi = -1e300;
      for (Eigen::Index i = 0; i < plan.x.size(); ++i) {
        const double phi = (plan.x[i] - plan.v_flux0) / plan.v_flux_period;
        const double fr = flux_to_frequency(plan.squid, phi);
        lo = std::min(lo, fr);
        hi = std::max(hi, fr);
      }
      lo -= 0.15e9;
      hi += 0.15e9;
    }
    plan.f = linspace(lo, hi, defaults::f_points);
  }

  if (blk.contains("noise")) {
    const json& nz = blk["noise"];
    plan.noise_sigma = jget(nz, "sigma", 0.0);
    const std::string mode = nz.value("mode", std::string("additive"));
    if (mode == "multiplicative")
      plan.noise_mode = NoiseMode::multiplicative;
    else if (mode != "additive")
      problems.push_back("noise.mode must be additive or multiplicative");
    if (plan.noise_sigma < 0) problems.push_back("noise.sigma must be >= 0");
  }
  plan.svg = blk.value("svg", false);
  plan.base = blk.value("output", std::string("sim"));

  if (!problems.empty()) {
    std::string msg = "invalid simulate config:";
    for (const auto& p : problems) msg += "\n  - " + p;
    throw config_error(msg);
  }

  // Record the fully resolved plan so reruns hash identically even when the
  // original config relied on defaults.
  json r{{"model", plan.model},
         {"resonator",
          {{"f_r_hz", plan.res.f_r},
           {"kappa_hz", plan.res.kappa},
           {"kappa_ext_hz", plan.res.kappa_ext},
           {"phi_rad", plan.res.phi}}},
         {"env",
          {{"a", plan.env.a}, {"alpha_rad", plan.env.alpha}, {"tau_s", plan.env.tau}}},
         {"f_d_hz", axis_json(plan.f)},
         {"eps_hz", plan.eps_fixed},
         {"output", plan.base}};
  if (plan.model == "two_level")
    r["qubit"] = json{{"t_c_hz", plan.qubit.t_c},
                      {"g0_hz", plan.qubit.g0},
                      {"gamma0_hz", plan.qubit.gamma0},
                      {"gamma_eps_hz", plan.qubit.gamma_eps}};
  if (plan.model == "multilevel") {
    r["scs"] = scs_to_json(plan.scs);
    r["noise_rates"] = noise_rates_to_json(plan.rates);
  }
  if (plan.x.size()) {
    json ax = axis_json(plan.x);
    ax["kind"] = plan.x_kind;
    r["x_axis"] = ax;
    if (plan.x_kind == "v_pl")
      r["detuning_cal"] = json{{"beta_pl_ev_per_v", plan.det_cal.beta_pl},
                               {"beta_pr_ev_per_v", plan.det_cal.beta_pr},
                               {"v_pl0_v", plan.det_cal.v_pl0},
                               {"v_pr0_v", plan.det_cal.v_pr0}};
    if (plan.x_kind == "v_flux")
      r["flux_cal"] = json{{"n_squid", plan.squid.n_squid},
                           {"l0_h", plan.squid.l0},
                           {"c_r_f", plan.squid.c_r},
                           {"v_flux0_v", plan.v_flux0},
                           {"v_flux_period_v", plan.v_flux_period}};
  }
  if (plan.noise_sigma > 0)
    r["noise"] = json{{"sigma", plan.noise_sigma},
                      {"mode", plan.noise_mode == NoiseMode::additive
                                   ? "additive"
                                   : "multiplicative"}};
  plan.resolved = std::move(r);
  return plan;
}

void run_simulate(const json& blk, const CliOptions& opt) {
  SimPlan plan = plan_simulation(blk);
  ensure_out_dir(opt.out_dir);
  json inputs{{"command", "simulate"}, {"config", plan.resolved}, {"seed", opt.seed}};

  if (plan.x.size() == 0) {
    // trace output, environment included
    auto model = [&](double fd) -> cplx {
      if (plan.model == "bare") return s21_bare(plan.res, plan.env, fd);
      if (plan.model == "two_level")
        return s21_coupled(plan.res, plan.env, plan.qubit, plan.eps_fixed, fd);
      return s21_multilevel(plan.res, plan.env, plan.scs, plan.rates,
                            plan.eps_fixed, fd);
    };
    const ComplexTrace t = synthesize_trace(model, plan.f, plan.noise_sigma, opt.seed);
    const std::string csv = join_path(opt.out_dir, plan.base + ".csv");
    write_trace_csv(csv, t);
    write_sidecar(join_path(opt.out_dir, plan.base + ".meta.json"), inputs);
    if (plan.svg)
      write_svg_lines(join_path(opt.out_dir, plan.base + ".svg"), t.f,
                      {t.s21.cwiseAbs2()}, "|S21|^2");
    std::cout << "wrote " << csv << "\n";
    return;
  }

  // map output: |A/A0|^2, i.e. the environment prefactor divided out
  Map2D m;
  m.x = plan.x;
  m.y = plan.f;
  m.cells.resize(plan.x.size(), plan.f.size());
  m.x_label = plan.x_kind == "eps" ? "eps_hz"
              : plan.x_kind == "v_pl" ? "v_pl_v"
                                      : "v_flux_v";
  const EnvParams unity;
  parallel_for(plan.x.size(), opt.parallel, [&](Eigen::Index i) {
    ResonatorParams r = plan.res;
    double eps = plan.eps_fixed;
    if (plan.x_kind == "eps") {
      eps = plan.x[i];
    } else if (plan.x_kind == "v_pl") {
      eps = detuning_from_voltages(plan.det_cal, plan.x[i], plan.det_cal.v_pr0);
    } else {
      r.f_r = flux_to_frequency(plan.squid,
                                (plan.x[i] - plan.v_flux0) / plan.v_flux_period);
    }
    Eigen::VectorXcd s;
    if (plan.model == "bare")
      s = s21_bare(r, unity, plan.f);
    else if (plan.model == "two_level")
      s = s21_coupled(r, unity, plan.qubit, eps, plan.f);
    else
      s = s21_multilevel(r, unity, plan.scs, plan.rates, eps, plan.f);
    m.cells.row(i) = s.cwiseAbs2().transpose();
  });
  if (plan.noise_sigma > 0) {
    std::mt19937_64 rng(opt.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (Eigen::Index i = 0; i < m.cells.rows(); ++i)
      for (Eigen::Index j = 0; j < m.cells.cols(); ++j) {
        const double n = plan.noise_sigma * gauss(rng);
        m.cells(i, j) =
            plan.noise_mode == NoiseMode::additive ? m.cells(i, j) + n
                                                   : m.cells(i, j) * (1.0 + n);
      }
  }
  const std::string csv = join_path(opt.out_dir, plan.base + ".csv");
  write_map_csv(csv, m);
  write_sidecar(join_path(opt.out_dir, plan.base + ".meta.json"), inputs);
  if (plan.svg)
    write_svg_heatmap(join_path(opt.out_dir, plan.base + ".svg"), m, "|A/A0|^2");
  std::cout << "wrote " << csv << "\n";
}

}  // namespace

void cmd_simulate(const CliOptions& opt) {
  const json cfg = load_run_config(opt.config_path);
  run_simulate(require_block(cfg, "simulate"), opt);
}

// --- fit ---------------------------------------------------------------------

namespace {

// Minimal two-column numeric CSV (optional header), e.g. gate voltage vs
// conductance for thermometry.
void read_xy_csv(const std::string& path, Eigen::VectorXd& x, Eigen::VectorXd& y) {
  std::ifstream in(path);
  if (!in) throw config_error("missing dataset: " + path);
  std::vector<double> xs, ys;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    char* end = nullptr;
    const double a = std::strtod(line.c_str(), &end);
    if (end == line.c_str()) continue;  // header
    while (*end == ',' || *end == ' ' || *end == '\t') ++end;
    char* end2 = nullptr;
    const double b = std::strtod(end, &end2);
    if (end2 == end) throw config_error("malformed row in " + path + ": " + line);
    xs.push_back(a);
    ys.push_back(b);
  }
  if (xs.size() < 4) throw config_error("too few rows in " + path);
  x = Eigen::Map<Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
  y = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
}

void add_params(json& params, json& sigma2, const FitResult& r) {
  for (Eigen::Index i = 0; i < r.p.size(); ++i) {
    const std::string name = i < static_cast<Eigen::Index>(r.names.size())
                                 ? r.names[static_cast<size_t>(i)]
                                 : "p" + std::to_string(i);
    params[name] = r.p[i];
    sigma2[name] = r.sigma2[i];
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw config_error("cannot open for writing: " + path);
  out << text;
}

std::string describe_fit(const FitResult& r) {
  std::ostringstream os;
  os << "converged: " << (r.converged ? "yes" : "no")
     << "   iterations: " << r.iterations << "   cost: " << fmtg(r.cost) << "\n";
  if (!r.frozen.empty()) {
    os << "frozen (unidentifiable): ";
    for (size_t i = 0; i < r.frozen.size(); ++i) {
      const int idx = r.frozen[i];
      os << (i ? ", " : "")
         << (idx < static_cast<int>(r.names.size()) ? r.names[static_cast<size_t>(idx)]
                                                    : "p" + std::to_string(idx));
    }
    os << "\n";
  }
  return os.str();
}

std::string param_table(const FitResult& r) {
  std::ostringstream os;
  for (Eigen::Index i = 0; i < r.p.size(); ++i) {
    const std::string name = i < static_cast<Eigen::Index>(r.names.size())
                                 ? r.names[static_cast<size_t>(i)]
                                 : "p" + std::to_string(i);
    os << "  " << name << " = " << fmtg(r.p[i]);
    if (r.sigma2[i] > 0) os << " +/- " << fmtg(r.sigma2[i]) << " (2 sigma)";
    os << "\n";
  }
  return os.str();
}

void run_fit(const json& blk, const CliOptions& opt) {
  const std::string model = blk.value("model", std::string(""));
  if (!blk.contains("datasets") || !blk["datasets"].is_array() ||
      blk["datasets"].empty())
    throw config_error("fit config needs a non-empty \"datasets\" array");
  std::vector<std::string> datasets;
  for (const auto& d : blk["datasets"]) datasets.push_back(d.get<std::string>());
  for (const auto& d : datasets)
    if (!fs::exists(d)) throw config_error("missing dataset: " + d);
  ensure_out_dir(opt.out_dir);

  json params = json::object(), sigma2 = json::object(), derived = json::object();
  FitResult raw;
  std::ostringstream rep;
  rep << "model: " << model << "\n";
  for (const auto& d : datasets) rep << "dataset: " << d << "\n";

  if (model == "bare") {
    const BareFit bf = fit_bare(read_trace_csv(datasets[0]));
    raw = bf.raw;
    add_params(params, sigma2, raw);
    derived["q_total"] = bf.resonator.f_r / bf.resonator.kappa;
    if (bf.resonator.kappa_ext > 0)
      derived["q_ext"] = bf.resonator.f_r / bf.resonator.kappa_ext;
    rep << describe_fit(raw) << param_table(raw);
    rep << "  q_total = " << fmtg(derived["q_total"].get<double>()) << "\n";
  } else if (model == "joint_2d") {
    if (!blk.contains("resonators") || !blk["resonators"].is_array() ||
        blk["resonators"].size() != datasets.size())
      throw config_error("joint_2d needs one \"resonators\" entry per dataset");
    if (!blk.contains("init"))
      throw config_error("joint_2d needs an \"init\" block");
    std::vector<Map2D> maps;
    std::vector<ResonatorParams> rs;
    for (size_t k = 0; k < datasets.size(); ++k) {
      maps.push_back(read_map_csv(datasets[k]));
      const json& rj = blk["resonators"][k];
      rs.push_back(ResonatorParams{jget(rj, "f_r_hz", 0.0), jget(rj, "kappa_hz", 0.0),
                                   jget(rj, "kappa_ext_hz", 0.0),
                                   jget(rj, "phi_rad", 0.0)});
    }
    const json& ij = blk["init"];
    JointMapInit init;
    init.t_c = jget(ij, "t_c_hz", 0.0);
    init.beta_pl = jget(ij, "beta_pl_ev_per_v", 0.0);
    init.gamma0 = jget(ij, "gamma0_hz", 0.0);
    init.gamma_eps = jget(ij, "gamma_eps_hz", 0.0);
    init.fix_gamma0 = ij.value("fix_gamma0", true);
    if (ij.contains("g0_hz"))
      for (const auto& v : ij["g0_hz"]) init.g0.push_back(v.get<double>());
    if (ij.contains("v_pl0_v"))
      for (const auto& v : ij["v_pl0_v"]) init.v_pl0.push_back(v.get<double>());
    const JointMapFit jf = fit_2d_joint(maps, rs, init);
    raw = jf.raw;
    add_params(params, sigma2, raw);
    if (init.fix_gamma0) params["gamma0"] = jf.gamma0;
    rep << describe_fit(raw) << "shared parameters\n" << param_table(raw);
    json dmaps = json::array();
    for (size_t k = 0; k < datasets.size(); ++k) {
      const double f_q0 = 2.0 * jf.t_c;
      const double g_eff_res = jf.g0[k] * 2.0 * jf.t_c / rs[k].f_r;
      const double coop = cooperativity(jf.g0[k], rs[k].kappa, jf.gamma0);
      dmaps.push_back(json{{"dataset", datasets[k]},
                           {"f_r_hz", rs[k].f_r},
                           {"kappa_hz", rs[k].kappa},
                           {"kappa_ext_hz", rs[k].kappa_ext},
                           {"g0_hz", jf.g0[k]},
                           {"gamma0_hz", jf.gamma0},
                           {"f_q0_hz", f_q0},
                           {"g_eff_res_hz", g_eff_res},
                           {"cooperativity", coop}});
      rep << "map " << k << " (" << datasets[k] << ")\n"
          << "  f_r_hz = " << fmtg(rs[k].f_r) << " (fixed)   kappa_hz = "
          << fmtg(rs[k].kappa) << " (fixed)   kappa_ext_hz = "
          << fmtg(rs[k].kappa_ext) << " (fixed)\n"
          << "  f_q0_hz = " << fmtg(f_q0)
          << "   g_eff_res_hz = " << fmtg(g_eff_res) << "   C = " << fmtg(coop)
          << "\n";
    }
    derived["maps"] = dmaps;
  } else if (model == "thermometry") {
    if (!blk.contains("lever_arm_ev_per_v"))
      throw config_error("thermometry needs \"lever_arm_ev_per_v\"");
    Eigen::VectorXd v, g;
    read_xy_csv(datasets[0], v, g);
    const ThermometryFit tf =
        fit_thermometry(v, g, blk["lever_arm_ev_per_v"].get<double>());
    raw = tf.raw;
    add_params(params, sigma2, raw);
    derived["t_e_mk"] = tf.t_e * 1e3;
    rep << describe_fit(raw) << param_table(raw);
    rep << "  T_e = " << fmtg(tf.t_e * 1e3) << " mK\n";
  } else if (model == "lorentzian") {
    const ComplexTrace t = read_trace_csv(datasets[0]);
    Eigen::VectorXd f = t.f, y = t.s21.cwiseAbs2();
    if (blk.contains("window_hz")) {
      const double lo = blk["window_hz"][0].get<double>();
      const double hi = blk["window_hz"][1].get<double>();
      std::vector<double> fs, ys;
      for (Eigen::Index i = 0; i < f.size(); ++i)
        if (f[i] >= lo && f[i] <= hi) {
          fs.push_back(f[i]);
          ys.push_back(y[i]);
        }
      if (fs.size() < 6) throw config_error("window_hz leaves too few points");
      f = Eigen::Map<Eigen::VectorXd>(fs.data(), static_cast<Eigen::Index>(fs.size()));
      y = Eigen::Map<Eigen::VectorXd>(ys.data(), static_cast<Eigen::Index>(ys.size()));
    }
    const LorentzianFit lf = fit_lorentzian(f, y);
    raw = lf.raw;
    add_params(params, sigma2, raw);
    derived["gamma_hwhm_hz"] = lf.fwhm / 2.0;
    rep << describe_fit(raw) << param_table(raw);
  } else {
    throw config_error("fit model must be bare, joint_2d, thermometry or "
                       "lorentzian (got \"" + model + "\")");
  }

  json dhashes = json::object();
  for (const auto& d : datasets) dhashes[d] = hash_file(d);
  json out{{"schema", "cqedsim-fit/1"},
           {"model", model},
           {"params", params},
           {"sigma2", sigma2},
           {"derived", derived},
           {"cost", raw.cost},
           {"iterations", raw.iterations},
           {"converged", raw.converged},
           {"inputs", json{{"command", "fit"}, {"config", blk}, {"datasets", dhashes}}}};
  out["content_hash"] = content_hash(out);

  const std::string base = blk.value("output", std::string("fit_result"));
  const std::string jpath = join_path(opt.out_dir, base + ".json");
  write_text(jpath, out.dump(2) + "\n");
  write_text(join_path(opt.out_dir, base + "_report.txt"), rep.str());
  std::cout << "wrote " << jpath << "\n";
}

}  // namespace

void cmd_fit(const CliOptions& opt) {
  const json cfg = load_run_config(opt.config_path);
  run_fit(require_block(cfg, "fit"), opt);
}

// --- wigner --------------------------------------------------------------------

namespace {

GridSpec grid_from_json(const json& blk) {
  GridSpec g;
  if (blk.contains("grid")) {
    const json& gj = blk["grid"];
    g.half_extent = jget(gj, "half_extent", g.half_extent);
    g.points = static_cast<int>(jget(gj, "points", g.points));
    g.softcore = jget(gj, "softcore", g.softcore);
  }
  return g;
}

void run_wigner(const json& blk, const CliOptions& opt) {
  ensure_out_dir(opt.out_dir);
  const double lambda_w = jget(blk, "lambda_w", 0.0);
  const double orbital = jget(blk, "orbital_hz", 70e9);
  const GridSpec grid = grid_from_json(blk);
  const int n_levels = static_cast<int>(jget(blk, "n_levels", 8));
  const std::string base = blk.value("output", std::string("wigner"));
  const bool svg = blk.value("svg", true);

  if (blk.contains("alpha_sweep")) {
    std::vector<std::string> problems;
    const Eigen::VectorXd av = parse_axis(blk["alpha_sweep"], "alpha_sweep", problems);
    if (!problems.empty()) throw config_error("invalid wigner config: " + problems[0]);
    double band_lo = 0.0, band_hi = 0.0;
    if (blk.contains("band_hz")) {
      band_lo = blk["band_hz"][0].get<double>();
      band_hi = blk["band_hz"][1].get<double>();
    }
    std::vector<double> alphas(av.data(), av.data() + av.size());
    const AnisotropySweep sw = anisotropy_sweep(lambda_w, alphas, grid, orbital,
                                                band_lo, band_hi, opt.parallel);
    std::ostringstream csv;
    csv << "alpha,delta_st_hw,delta_st_hz,ok,error\n";
    Eigen::VectorXd xs(av.size()), ds(av.size());
    for (size_t i = 0; i < sw.points.size(); ++i) {
      const SweepPoint& p = sw.points[i];
      csv << fmt17(p.alpha) << ',' << fmt17(p.delta_st) << ','
          << fmt17(p.delta_st * orbital) << ',' << (p.ok ? 1 : 0) << ','
          << p.error << "\n";
      xs[static_cast<Eigen::Index>(i)] = p.alpha;
      ds[static_cast<Eigen::Index>(i)] = p.ok ? p.delta_st : 0.0;
    }
    const std::string cpath = join_path(opt.out_dir, base + "_sweep.csv");
    write_text(cpath, csv.str());
    json inputs{{"command", "wigner"},
                {"config", blk},
                {"seed", opt.seed},
                {"derived",
                 {{"alpha_in_band", sw.band_found ? json(sw.alpha_in_band) : json()},
                  {"band_found", sw.band_found}}}};
    write_sidecar(join_path(opt.out_dir, base + "_sweep.meta.json"), inputs);
    if (svg)
      write_svg_lines(join_path(opt.out_dir, base + "_sweep.svg"), xs, {ds},
                      "delta_ST vs alpha");
    if (sw.band_found)
      std::cout << "alpha_in_band = " << fmtg(sw.alpha_in_band) << "\n";
    else
      std::cout << "alpha_in_band = none\n";
    std::cout << "wrote " << cpath << "\n";
    return;
  }

  RelativeProblem prob{lambda_w, jget(blk, "alpha", 1.0)};
  const RelativeSolution sol = solve_relative(prob, grid, n_levels);
  std::ostringstream csv;
  csv << "level,energy_hw,energy_hz,parity\n";
  for (size_t i = 0; i < sol.energy.size(); ++i)
    csv << i << ',' << fmt17(sol.energy[i]) << ',' << fmt17(sol.energy[i] * orbital)
        << ',' << sol.parity[i] << "\n";
  const std::string cpath = join_path(opt.out_dir, base + "_levels.csv");
  write_text(cpath, csv.str());
  json inputs{{"command", "wigner"},
              {"config", blk},
              {"seed", opt.seed},
              {"derived",
               {{"delta_st_hw", sol.delta_st},
                {"delta_st_hz", sol.delta_st * orbital},
                {"iterations", sol.iterations}}}};
  write_sidecar(join_path(opt.out_dir, base + "_levels.meta.json"), inputs);
  if (svg) {
    const ChargeDensity cd = charge_density(sol, 0);
    Map2D dm;
    dm.x = cd.axis;
    dm.y = cd.axis;
    dm.cells = cd.density;
    dm.x_label = "x_osc";
    dm.y_label = "y_osc";
    write_svg_heatmap(join_path(opt.out_dir, base + "_density.svg"), dm,
                      "two-particle density");
  }
  std::cout << "delta_st = " << fmtg(sol.delta_st) << " hbar*w_orb = "
            << fmtg(sol.delta_st * orbital) << " Hz\n";
  std::cout << "wrote " << cpath << "\n";
}

}  // namespace

void cmd_wigner(const CliOptions& opt) {
  const json cfg = load_run_config(opt.config_path);
  run_wigner(require_block(cfg, "wigner"), opt);
}

// --- report --------------------------------------------------------------------

namespace {

std::string cell_or_blank(const json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return "";
  return fmtg(j[key].get<double>());
}

void run_report(const json& blk, const CliOptions& opt) {
  ensure_out_dir(opt.out_dir);
  std::vector<std::string> paths;
  if (blk.contains("inputs"))
    for (const auto& p : blk["inputs"]) paths.push_back(p.get<std::string>());
  std::vector<std::string> missing;
  for (const auto& p : paths)
    if (!fs::exists(p)) missing.push_back(p);
  if (!missing.empty()) {
    std::string msg = "missing report inputs:";
    for (const auto& p : missing) msg += "\n  - " + p;
    throw config_error(msg);
  }

  std::ostringstream csv;
  csv << "source,model,t_c_hz,f_r_hz,g0_hz,gamma_hz,kappa_hz,kappa_ext_hz,"
         "cooperativity,integrity,content_hash\n";
  for (const auto& p : paths) {
    std::ifstream in(p);
    json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw config_error("malformed fit result " + p + ": " + e.what());
    }
    json probe = j;
    probe.erase("content_hash");
    const std::string stored = j.value("content_hash", "");
    const bool ok = !stored.empty() && content_hash(probe) == stored;
    if (!ok) std::cerr << "integrity warning: content hash mismatch in " << p << "\n";
    const std::string integrity = ok ? "ok" : "HASH MISMATCH";
    const std::string model = j.value("model", "");
    const json params = j.value("params", json::object());
    const json derived = j.value("derived", json::object());
    if (model == "joint_2d" && derived.contains("maps")) {
      for (const auto& m : derived["maps"]) {
        csv << m.value("dataset", p) << ',' << model << ','
            << cell_or_blank(params, "t_c") << ',' << cell_or_blank(m, "f_r_hz")
            << ',' << cell_or_blank(m, "g0_hz") << ','
            << cell_or_blank(m, "gamma0_hz") << ',' << cell_or_blank(m, "kappa_hz")
            << ',' << cell_or_blank(m, "kappa_ext_hz") << ','
            << cell_or_blank(m, "cooperativity") << ',' << integrity << ','
            << stored << "\n";
      }
    } else if (model == "bare") {
      csv << p << ',' << model << ",," << cell_or_blank(params, "f_r") << ",,,"
          << cell_or_blank(params, "kappa") << ','
          << cell_or_blank(params, "kappa_ext") << ",," << integrity << ','
          << stored << "\n";
    } else {
      csv << p << ',' << model << ",,,,,,,," << integrity << ',' << stored << "\n";
    }
  }
  const std::string cpath =
      join_path(opt.out_dir, blk.value("output", std::string("table")) + ".csv");
  write_text(cpath, csv.str());
  std::cout << csv.str();
}

}  // namespace

void cmd_report(const CliOptions& opt) {
  const json cfg = load_run_config(opt.config_path);
  run_report(require_block(cfg, "report"), opt);
}

// --- argument parsing ------------------------------------------------------------

static json block_from_config_or_empty(const CliOptions& opt, const char* name) {
  if (opt.config_path.empty()) return json::object();
  const json cfg = load_run_config(opt.config_path);
  return cfg.contains(name) ? cfg[name] : json::object();
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"charge-photon spectroscopy simulator and fitting toolkit"};
  app.require_subcommand(1);
  CliOptions opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON run config (cqedsim-run/1)");
    sub->add_option("--out", opt.out_dir, "output directory");
    sub->add_option("--parallel", opt.parallel, "worker threads")
        ->check(CLI::PositiveNumber);
    sub->add_option("--seed", opt.seed, "noise seed");
  };

  // simulate shortcuts
  std::string model_flag, preset_flag;
  double fr_flag = 0.0;
  bool flux_sweep = false, svg_flag = false;
  CLI::App* sim = app.add_subcommand("simulate", "simulate traces and 2D maps");
  add_common(sim);
  sim->add_option("--model", model_flag, "bare | two-level | multilevel");
  sim->add_option("--preset", preset_flag, "multilevel parameter preset");
  sim->add_option("--fr", fr_flag, "resonator frequency [Hz]")
      ->check(CLI::PositiveNumber);
  sim->add_flag("--flux-sweep", flux_sweep, "sweep flux voltage instead of detuning");
  sim->add_flag("--svg", svg_flag, "also write charts");

  CLI::App* fitc = app.add_subcommand("fit", "fit datasets against the models");
  add_common(fitc);

  // wigner shortcuts
  double lambda_flag = -1.0, alpha_flag = -1.0, orbital_flag = 0.0;
  std::string alpha_range, band_range;
  CLI::App* wig = app.add_subcommand("wigner", "two-particle relative-motion solver");
  add_common(wig);
  wig->add_option("--lambda", lambda_flag, "interaction/confinement ratio")
      ->check(CLI::NonNegativeNumber);
  wig->add_option("--alpha", alpha_flag, "trap anisotropy (l_y/l_x)^2")
      ->check(CLI::PositiveNumber);
  wig->add_option("--alpha-range", alpha_range, "sweep start:stop:step");
  wig->add_option("--band", band_range, "target band lo:hi [Hz]");
  wig->add_option("--orbital", orbital_flag, "orbital energy scale [Hz]");

  CLI::App* repc = app.add_subcommand("report", "aggregate fit results");
  add_common(repc);

  try {
    app.parse(argc, argv);

    if (app.got_subcommand(sim)) {
      json blk = block_from_config_or_empty(opt, "simulate");
      if (!model_flag.empty()) blk["model"] = model_flag;
      if (!preset_flag.empty()) {
        blk["preset"] = preset_flag;
        if (!blk.contains("model")) blk["model"] = "multilevel";
      }
      if (fr_flag > 0) blk["resonator"]["f_r_hz"] = fr_flag;
      if (flux_sweep) blk["x_axis"]["kind"] = "v_flux";
      if (svg_flag) blk["svg"] = true;
      run_simulate(blk, opt);
    } else if (app.got_subcommand(fitc)) {
      if (opt.config_path.empty()) throw config_error("fit requires --config");
      cmd_fit(opt);
    } else if (app.got_subcommand(wig)) {
      json blk = block_from_config_or_empty(opt, "wigner");
      if (lambda_flag >= 0) blk["lambda_w"] = lambda_flag;
      if (alpha_flag > 0) blk["alpha"] = alpha_flag;
      if (orbital_flag > 0) blk["orbital_hz"] = orbital_flag;
      if (!alpha_range.empty()) {
        double a = 0, b = 0, step = 0;
        if (std::sscanf(alpha_range.c_str(), "%lf:%lf:%lf", &a, &b, &step) != 3 ||
            step <= 0 || b < a)
          throw config_error("--alpha-range expects start:stop:step");
        const auto n = static_cast<Eigen::Index>(std::floor((b - a) / step + 1.5));
        blk["alpha_sweep"] =
            json{{"start", a}, {"stop", a + step * static_cast<double>(n - 1)},
                 {"points", n}};
      }
      if (!band_range.empty()) {
        double lo = 0, hi = 0;
        if (std::sscanf(band_range.c_str(), "%lf:%lf", &lo, &hi) != 2 || hi <= lo)
          throw config_error("--band expects lo:hi");
        blk["band_hz"] = json::array({lo, hi});
      }
      run_wigner(blk, opt);
    } else if (app.got_subcommand(repc)) {
      if (opt.config_path.empty()) throw config_error("report requires --config");
      cmd_report(opt);
    }
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const config_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

}  // namespace cqed
