#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "fault_iso/cli.hpp"
#include "fault_iso/errors.hpp"
#include "fault_iso/synthesis.hpp"

namespace fault_iso::cli {

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
}

void configure_logging() {
  auto logger = spdlog::stderr_logger_mt("fault-iso");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  const char* env = std::getenv("FAULT_ISO_LOG");
  spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

const char* prefilter_name(PrefilterKind k) { return k == PrefilterKind::kStatic ? "static" : "dynamic"; }

std::vector<double> with_dominant(std::vector<double> roots, double p) {
  auto it = std::max_element(roots.begin(), roots.end(),
                             [](double a, double b) { return std::abs(a) < std::abs(b); });
  *it = std::copysign(p, *it);
  return roots;
}

struct SweepRow {
  SweepPoint point;
  PrefilterKind prefilter;
  std::string status = "ok";
  std::size_t steps = 0;
  double max_err = NAN, mean_err = NAN, max_bound = NAN, mean_bound = NAN, decay = NAN;
  std::size_t violations = 0;
};

// Least-squares slope of ln(rhs) over [k0+n, k0+n+window].
double decay_rate(const BoundTrace& b, Index n, Index window) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (Index k = b.k0 + n; k <= b.k0 + n + window && k < static_cast<Index>(b.rows.size()); ++k) {
    const BoundRow& r = b.rows[static_cast<std::size_t>(k)];
    if (r.excluded || !(r.rhs > 0.0) || std::isinf(r.rhs)) continue;
    const double x = static_cast<double>(k), y = std::log(r.rhs);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++m;
  }
  if (m < 2) return NAN;
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

}  // namespace

std::string trace_csv(const Simulation& sim, const RunResult& run) {
  std::ostringstream os;
  const Index nu = sim.u.dim();
  const Index ny = sim.z.dim() - nu;
  os << "# " << kTraceVersion << "\n";
  os << "k,t_s";
  if (nu == 1) {
    os << ",u";
  } else {
    for (Index i = 0; i < nu; ++i) os << ",u" << i;
  }
  for (Index i = 0; i < ny; ++i) os << ",y" << i;
  os << ",r,e,f_a,f_m,f_a_hat,f_m_hat,err_2norm,bound_rhs,degenerate,warmup\n";
  const EstimatorTrace& t = run.trace;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto ki = static_cast<Index>(k);
    os << k << ',' << num(static_cast<double>(k) * sim.sample_time);
    for (Index i = 0; i < nu; ++i) os << ',' << num(sim.u(ki, static_cast<int>(i)));
    for (Index i = 0; i < ny; ++i) os << ',' << num(sim.z(ki, static_cast<int>(i)));
    const FaultEstimate& est = t.estimate[k];
    const BoundRow& b = run.bounds.rows[k];
    os << ',' << num(t.r[k]) << ',' << num(t.e[k]) << ',' << num(sim.f_a[k]) << ','
       << num(sim.f_m[k]) << ',' << num(est.f_a_hat) << ',' << num(est.f_m_hat) << ','
       << num(b.actual_err) << ',' << num(b.rhs) << ',' << (est.degenerate ? 1 : 0) << ','
       << (t.warmup[k] ? 1 : 0) << '\n';
  }
  return os.str();
}

namespace {

int cmd_synth(const RunConfig& cfg) {
  const Simulation sim = [&] {
    // synthesis needs only the DAE
    RunConfig c = cfg;
    c.steps = 1;
    c.f_a.clear();
    c.f_m.clear();
    return build_simulation(c);
  }();
  SynthesisOptions opts;
  opts.null_cutoff = cfg.null_cutoff;
  spdlog::info("synthesizing with d_N = {}", cfg.d_N);
  const DetectorFilter f = synthesize_detector(sim.dae, cfg.a_roots, cfg.d_N, opts);
  std::ostringstream rep;
  rep << "T(1) = " << num(f.T.eval(1.0)) << "\n";
  rep << "null-space dimension = " << f.null_dim << "\n";
  rep << "deg N = " << f.N.degree() << ", deg N F = " << f.NF.degree() << ", deg N L = "
      << f.NL.degree() << ", deg a = " << f.a.degree() << "\n";
  rep << "dominant pole |p| = " << num(std::abs(f.T.dominant_pole())) << "\n";
  rep << "max |N_bar H_bar| = " << num(f.rejection_error) << "\n";
  rep << "detectable = " << (check_detectability(sim.dae) ? "yes" : "no") << "\n";
  write_file(cfg.out_dir / "filter.txt", export_filter_text(f));
  write_file(cfg.out_dir / "synth_report.txt", rep.str());
  std::cout << rep.str();
  return kOk;
}

int cmd_simulate(const RunConfig& cfg) {
  spdlog::info("simulating {} steps", cfg.steps);
  const Simulation sim = build_simulation(cfg);
  const RunResult run = run_pipeline(cfg, sim);
  const auto path = cfg.out_dir / (std::string("trace_") + prefilter_name(cfg.prefilter) + ".csv");
  write_file(path, trace_csv(sim, run));
  spdlog::info("bound checked on {} steps, {} violations", run.bounds.checked, run.bounds.violations);
  std::cout << path.string() << "\n";
  return kOk;
}

std::string point_name(const SweepPoint& pt, PrefilterKind k) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "run_n%ld_p%g_%s.csv", static_cast<long>(pt.n), pt.p, prefilter_name(k));
  return buf;
}

int cmd_sweep(const RunConfig& cfg) {
  const Simulation sim = build_simulation(cfg);
  std::vector<std::future<SweepRow>> jobs;
  for (const SweepPoint& pt : cfg.sweep_points) {
    for (PrefilterKind kind : cfg.sweep_prefilters) {
      jobs.push_back(std::async(std::launch::async, [&cfg, &sim, pt, kind] {
        SweepRow row{pt, kind};
        try {
          RunConfig c = cfg;
          c.n = pt.n;
          c.prefilter = kind;
          c.a_roots = with_dominant(cfg.a_roots, pt.p);
          const RunResult run = run_pipeline(c, sim);
          write_file(cfg.out_dir / point_name(pt, kind), trace_csv(sim, run));
          double se = 0, sb = 0, me = 0, mb = 0;
          for (const BoundRow& b : run.bounds.rows) {
            if (b.excluded) continue;
            ++row.steps;
            se += b.actual_err;
            sb += b.rhs;
            me = std::max(me, b.actual_err);
            mb = std::max(mb, b.rhs);
          }
          if (row.steps > 0) {
            row.max_err = me;
            row.max_bound = mb;
            row.mean_err = se / static_cast<double>(row.steps);
            row.mean_bound = sb / static_cast<double>(row.steps);
          }
          row.decay = decay_rate(run.bounds, pt.n, cfg.decay_window);
          row.violations = run.bounds.violations;
        } catch (const std::exception& e) {
          row.status = std::string("error: ") + e.what();
          for (char& ch : row.status) {
            if (ch == ',' || ch == '\n') ch = ';';
          }
          spdlog::warn("sweep point n={} p={} failed: {}", pt.n, pt.p, e.what());
        }
        return row;
      }));
    }
  }
  std::ostringstream os;
  os << "# fault-iso-sweep v1\n";
  os << "n,p,prefilter,status,steps,max_err,mean_err,max_bound,mean_bound,bound_decay_rate,violations\n";
  for (auto& j : jobs) {
    const SweepRow r = j.get();
    os << r.point.n << ',' << num(r.point.p) << ',' << prefilter_name(r.prefilter) << ',' << r.status
       << ',' << r.steps << ',' << num(r.max_err) << ',' << num(r.mean_err) << ','
       << num(r.max_bound) << ',' << num(r.mean_bound) << ',' << num(r.decay) << ','
       << r.violations << '\n';
  }
  write_file(cfg.out_dir / "sweep_summary.csv", os.str());
  std::cout << (cfg.out_dir / "sweep_summary.csv").string() << "\n";
  return kOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  if (!spdlog::get("fault-iso")) configure_logging();
  CLI::App app{"Fault detection, isolation and estimation with real-time bounds"};
  app.require_subcommand(1);
  std::string config_path, out_dir;
  std::optional<std::uint64_t> seed;
  std::string command;
  for (const char* name : {"synth", "simulate", "sweep"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "JSON configuration file")->required();
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--seed", seed, "Seed for random signal sources");
    sub->callback([&command, name] { command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    RunConfig cfg = load_config(config_path);
    if (!out_dir.empty()) cfg.out_dir = out_dir;
    if (seed) cfg.seed = *seed;
    if (command == "synth") return cmd_synth(cfg);
    if (command == "simulate") return cmd_simulate(cfg);
    return cmd_sweep(cfg);
  } catch (const ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kConfigError;
  } catch (const NoNullSpace& e) {
    spdlog::error("synthesis infeasible: {}", e.what());
    return kSynthesisInfeasible;
  } catch (const GainUnreachable& e) {
    spdlog::error("synthesis infeasible: {}", e.what());
    return kSynthesisInfeasible;
  } catch (const ImproperFilter& e) {
    spdlog::error("synthesis infeasible: {}", e.what());
    return kSynthesisInfeasible;
  } catch (const InfeasibleConversion& e) {
    spdlog::error("model conversion infeasible: {}", e.what());
    return kSynthesisInfeasible;
  } catch (const DegenerateWindow& e) {
    spdlog::error("degenerate regression window: {}", e.what());
    return kDegenerateAbort;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
}

}  // namespace fault_iso::cli
