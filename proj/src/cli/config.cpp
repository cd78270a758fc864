#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include <json.hpp>

#include "fault_iso/cli.hpp"
#include "fault_iso/synthesis.hpp"

namespace fault_iso::cli {

using nlohmann::json;

namespace {

void only_keys(const json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [k, v] : j.items()) {
    if (!allowed.count(k)) throw ConfigError(where + ": unknown key '" + k + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

Eigen::MatrixXd read_matrix(const json& j, const std::string& name) {
  if (!j.is_array()) throw ConfigError(name + ": expected an array of rows");
  const auto rows = static_cast<Index>(j.size());
  if (rows == 0) return {};
  const auto cols = static_cast<Index>(j.at(0).size());
  Eigen::MatrixXd m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const json& row = j.at(static_cast<std::size_t>(r));
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      throw ConfigError(name + ": ragged matrix");
    }
    for (Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

std::vector<Segment> read_segments(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected a list of segments");
  std::vector<Segment> out;
  for (const auto& s : j) {
    only_keys(s, where, {"start", "mode", "value"});
    Segment seg;
    seg.start = s.at("start").get<std::size_t>();
    const std::string mode = s.value("mode", "const");
    if (mode == "const") {
      seg.mode = SegmentMode::kConst;
    } else if (mode == "ramp") {
      seg.mode = SegmentMode::kRamp;
    } else {
      throw ConfigError(where + ": mode must be 'const' or 'ramp'");
    }
    seg.value = s.at("value").get<double>();
    if (!out.empty() && seg.start <= out.back().start) {
      throw ConfigError(where + ": segments must have strictly increasing starts");
    }
    out.push_back(seg);
  }
  return out;
}

SignalSpec read_signal(const json& j, const std::string& where) {
  only_keys(j, where, {"type", "amplitude", "freq_hz", "phase", "hold", "segments"});
  SignalSpec s;
  const std::string type = j.value("type", "sine");
  if (type == "zero") {
    s.kind = SignalSpec::Kind::kZero;
  } else if (type == "sine") {
    s.kind = SignalSpec::Kind::kSine;
  } else if (type == "random") {
    s.kind = SignalSpec::Kind::kRandom;
  } else if (type == "piecewise") {
    s.kind = SignalSpec::Kind::kPiecewise;
  } else {
    throw ConfigError(where + ": unknown signal type '" + type + "'");
  }
  read(j, "amplitude", s.amplitude);
  read(j, "freq_hz", s.freq_hz);
  read(j, "phase", s.phase);
  read(j, "hold", s.hold);
  if (s.hold == 0) throw ConfigError(where + ": hold must be >= 1");
  if (j.contains("segments")) s.segments = read_segments(j.at("segments"), where + ".segments");
  return s;
}

std::vector<SignalSpec> read_signals(const json& j, const std::string& where) {
  std::vector<SignalSpec> out;
  if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      out.push_back(read_signal(j.at(i), where + "[" + std::to_string(i) + "]"));
    }
  } else {
    out.push_back(read_signal(j, where));
  }
  return out;
}

PrefilterKind read_prefilter(const std::string& s) {
  if (s == "static") return PrefilterKind::kStatic;
  if (s == "dynamic") return PrefilterKind::kDynamic;
  throw ConfigError("prefilter must be 'static' or 'dynamic'");
}

OdeModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open model file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ConfigError("model file " + path.string() + ": " + e.what());
  }
  only_keys(j, "model file", {"A", "B_u", "B_d", "B_f", "C", "D_u", "D_d", "D_f", "G"});
  OdeModel ode;
  const auto get = [&](const char* k, Eigen::MatrixXd& m) {
    if (j.contains(k)) m = read_matrix(j.at(k), k);
  };
  get("A", ode.A);
  get("B_u", ode.B_u);
  get("B_d", ode.B_d);
  get("B_f", ode.B_f);
  get("C", ode.C);
  get("D_u", ode.D_u);
  get("D_d", ode.D_d);
  get("D_f", ode.D_f);
  get("G", ode.G);
  if (ode.A.size() == 0 || ode.B_u.size() == 0 || ode.C.size() == 0) {
    throw ConfigError("model file needs at least A, B_u and C");
  }
  ode.E_X = [](const Eigen::VectorXd&, const Eigen::VectorXd& u) { return u(0); };
  try {
    ode.normalize();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model file: ") + e.what());
  }
  return ode;
}

void validate(const RunConfig& c) {
  if (c.d_N < 0) throw ConfigError("synthesis.d_N must be >= 0");
  if (c.a_roots.empty()) throw ConfigError("synthesis.a_roots must not be empty");
  for (std::size_t i = 0; i < c.a_roots.size(); ++i) {
    if (!(std::abs(c.a_roots[i]) < 1.0)) throw ConfigError("synthesis.a_roots: |root| must be < 1");
    for (std::size_t j = i + 1; j < c.a_roots.size(); ++j) {
      if (std::abs(c.a_roots[i] - c.a_roots[j]) < RationalFilter::kMinPoleGap) {
        throw ConfigError("synthesis.a_roots must be distinct");
      }
    }
  }
  if (c.n < 2) throw ConfigError("estimator.n must be >= 2");
  if (c.epsilon && !(*c.epsilon > 0.0)) throw ConfigError("estimator.epsilon must be > 0");
  if (c.steps < 1) throw ConfigError("scenario.steps must be >= 1");
  for (const auto* segs : {&c.f_a, &c.f_m}) {
    if (!segs->empty() && segs->back().start >= c.steps) {
      throw ConfigError("scenario: fault breakpoint beyond scenario.steps");
    }
  }
  for (const auto& pt : c.sweep_points) {
    if (pt.n < 2 || !(pt.p > 0.0 && pt.p < 1.0)) throw ConfigError("sweep.points: need n >= 2, 0 < p < 1");
  }
  if (c.decay_window < 1) throw ConfigError("sweep.decay_window must be >= 1");
  try {
    c.params.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

RunConfig default_config() {
  RunConfig c;
  const Scenario base = Scenario::case_study();
  c.steps = base.steps;
  c.f_a = base.f_a;
  c.f_m = base.f_m;
  SignalSpec u;
  u.kind = SignalSpec::Kind::kSine;
  u.amplitude = base.input_amplitude;
  u.freq_hz = base.input_freq_hz;
  c.inputs = {u};
  c.sample_time = c.params.h;
  return c;
}

RunConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  RunConfig c = default_config();
  json j;
  try {
    j = json::parse(text.empty() ? std::string("{}") : text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    only_keys(j, "config", {"version", "model", "E", "synthesis", "estimator", "scenario", "sweep", "output"});
    if (j.contains("version") && j.at("version").get<int>() != 1) throw ConfigError("unsupported config version");

    if (j.contains("model")) {
      const json& m = j.at("model");
      only_keys(m, "model", {"type", "signs", "params", "path"});
      const std::string type = m.value("type", "bicycle");
      if (type == "bicycle") {
        c.builtin_bicycle = true;
        const std::string signs = m.value("signs", "stabilized");
        if (signs == "stabilized") {
          c.signs = SignConvention::kStabilized;
        } else if (signs == "verbatim") {
          c.signs = SignConvention::kVerbatim;
        } else {
          throw ConfigError("model.signs must be 'stabilized' or 'verbatim'");
        }
        if (m.contains("params")) {
          const json& p = m.at("params");
          only_keys(p, "model.params", {"C_f", "C_r", "l_f", "l_r", "v_x", "m", "I", "g", "h"});
          read(p, "C_f", c.params.C_f);
          read(p, "C_r", c.params.C_r);
          read(p, "l_f", c.params.l_f);
          read(p, "l_r", c.params.l_r);
          read(p, "v_x", c.params.v_x);
          read(p, "m", c.params.m);
          read(p, "I", c.params.I);
          read(p, "g", c.params.g);
          read(p, "h", c.params.h);
        }
        c.sample_time = c.params.h;
      } else if (type == "file") {
        c.builtin_bicycle = false;
        if (!m.contains("path")) throw ConfigError("model.path is required for type 'file'");
        c.model_file = m.at("path").get<std::string>();
        if (c.model_file.is_relative()) c.model_file = base_dir / c.model_file;
        c.file_model = load_model_file(c.model_file);
      } else {
        throw ConfigError("model.type must be 'bicycle' or 'file'");
      }
    }

    if (j.contains("E")) {
      const json& e = j.at("E");
      only_keys(e, "E", {"component", "linear"});
      const Index nz = c.builtin_bicycle ? 4 : c.file_model.n_y() + c.file_model.n_u();
      Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(nz);
      if (e.contains("component") == e.contains("linear")) {
        throw ConfigError("E needs exactly one of 'component' or 'linear'");
      }
      if (e.contains("component")) {
        const auto i = e.at("component").get<Index>();
        if (i < 0 || i >= nz) throw ConfigError("E.component out of range");
        coeffs(i) = 1.0;
      } else {
        const auto v = e.at("linear").get<std::vector<double>>();
        if (static_cast<Index>(v.size()) != nz) throw ConfigError("E.linear must have n_z entries");
        for (Index i = 0; i < nz; ++i) coeffs(i) = v[static_cast<std::size_t>(i)];
      }
      c.e_coeffs = coeffs;
    }

    if (j.contains("synthesis")) {
      const json& s = j.at("synthesis");
      only_keys(s, "synthesis", {"d_N", "a_roots", "null_cutoff"});
      read(s, "d_N", c.d_N);
      read(s, "a_roots", c.a_roots);
      read(s, "null_cutoff", c.null_cutoff);
    }

    if (j.contains("estimator")) {
      const json& e = j.at("estimator");
      only_keys(e, "estimator", {"n", "prefilter", "epsilon", "degenerate_policy", "bound_variant"});
      read(e, "n", c.n);
      if (e.contains("prefilter")) c.prefilter = read_prefilter(e.at("prefilter").get<std::string>());
      if (e.contains("epsilon") && !e.at("epsilon").is_null()) c.epsilon = e.at("epsilon").get<double>();
      if (e.contains("degenerate_policy")) {
        const std::string p = e.at("degenerate_policy").get<std::string>();
        if (p == "hold-last") {
          c.policy = DegeneratePolicy::kHoldLast;
        } else if (p == "emit-error") {
          c.policy = DegeneratePolicy::kEmitError;
        } else {
          throw ConfigError("estimator.degenerate_policy must be 'hold-last' or 'emit-error'");
        }
      }
      if (e.contains("bound_variant")) {
        const std::string v = e.at("bound_variant").get<std::string>();
        if (v == "shifted") {
          c.bound_variant = BoundVariant::kShifted;
        } else if (v == "unshifted") {
          c.bound_variant = BoundVariant::kUnshifted;
        } else {
          throw ConfigError("estimator.bound_variant must be 'shifted' or 'unshifted'");
        }
      }
    }

    if (j.contains("scenario")) {
      const json& s = j.at("scenario");
      only_keys(s, "scenario", {"steps", "sample_time", "input", "disturbance", "f_a", "f_m"});
      read(s, "steps", c.steps);
      if (s.contains("sample_time")) {
        if (c.builtin_bicycle) throw ConfigError("scenario.sample_time applies to file models; set model.params.h");
        c.sample_time = s.at("sample_time").get<double>();
      }
      if (s.contains("input")) c.inputs = read_signals(s.at("input"), "scenario.input");
      if (s.contains("disturbance")) c.disturbances = read_signals(s.at("disturbance"), "scenario.disturbance");
      if (s.contains("f_a")) c.f_a = read_segments(s.at("f_a"), "scenario.f_a");
      if (s.contains("f_m")) c.f_m = read_segments(s.at("f_m"), "scenario.f_m");
    }

    if (j.contains("sweep")) {
      const json& s = j.at("sweep");
      only_keys(s, "sweep", {"points", "prefilters", "decay_window"});
      if (s.contains("points")) {
        c.sweep_points.clear();
        for (const auto& p : s.at("points")) {
          only_keys(p, "sweep.points", {"n", "p"});
          c.sweep_points.push_back({p.at("n").get<Index>(), p.at("p").get<double>()});
        }
        if (c.sweep_points.empty()) throw ConfigError("sweep.points must not be empty");
      }
      if (s.contains("prefilters")) {
        c.sweep_prefilters.clear();
        for (const auto& p : s.at("prefilters")) c.sweep_prefilters.push_back(read_prefilter(p.get<std::string>()));
        if (c.sweep_prefilters.empty()) throw ConfigError("sweep.prefilters must not be empty");
      }
      read(s, "decay_window", c.decay_window);
    }

    if (j.contains("output")) {
      const json& o = j.at("output");
      only_keys(o, "output", {"dir"});
      if (o.contains("dir")) c.out_dir = o.at("dir").get<std::string>();
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.parent_path());
}

namespace {

std::vector<double> make_signal(const SignalSpec& s, std::size_t len, double h, std::uint64_t seed) {
  switch (s.kind) {
    case SignalSpec::Kind::kZero:
      return std::vector<double>(len, 0.0);
    case SignalSpec::Kind::kSine:
      return gen_sine(s.amplitude, s.freq_hz, h, len, s.phase).channel(0);
    case SignalSpec::Kind::kPiecewise:
      return gen_piecewise(s.segments, len).channel(0);
    case SignalSpec::Kind::kRandom: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> dist(-s.amplitude, s.amplitude);
      std::vector<double> x(len);
      double v = 0.0;
      for (std::size_t k = 0; k < len; ++k) {
        if (k % s.hold == 0) v = dist(rng);
        x[k] = v;
      }
      return x;
    }
  }
  return {};
}

Signal make_channels(const std::vector<SignalSpec>& specs, Index dim, std::size_t len, double h,
                     std::uint64_t seed, const char* what) {
  if (static_cast<Index>(specs.size()) > dim) {
    throw ConfigError(std::string("scenario.") + what + ": more signals than channels");
  }
  Signal out(static_cast<int>(dim), len);
  for (std::size_t c = 0; c < specs.size(); ++c) {
    const std::vector<double> x = make_signal(specs[c], len, h, seed + 7919 * (c + 1));
    for (std::size_t k = 0; k < len; ++k) out.at(static_cast<Index>(k), static_cast<int>(c)) = x[k];
  }
  return out;
}

}  // namespace

Simulation build_simulation(const RunConfig& cfg) {
  Simulation sim;
  sim.sample_time = cfg.builtin_bicycle ? cfg.params.h : cfg.sample_time;
  if (cfg.builtin_bicycle) {
    sim.ode = bicycle_ode(discretize(continuous_matrices(cfg.params, cfg.signs), cfg.params.h), cfg.e_coeffs);
  } else {
    sim.ode = cfg.file_model;
    Eigen::VectorXd c = Eigen::VectorXd::Zero(sim.ode.n_y() + sim.ode.n_u());
    c(sim.ode.n_y()) = 1.0;
    attach_linear_e(sim.ode, cfg.e_coeffs ? *cfg.e_coeffs : c);
  }
  sim.dae = ode_to_dae(sim.ode);
  if (sim.ode.n_d() == 0 && !cfg.disturbances.empty()) {
    throw ConfigError("scenario.disturbance given but the model has no disturbance channels");
  }
  sim.u = make_channels(cfg.inputs, sim.ode.n_u(), cfg.steps, sim.sample_time, cfg.seed, "input");
  const Signal d = make_channels(cfg.disturbances, std::max<Index>(sim.ode.n_d(), 1), cfg.steps,
                                 sim.sample_time, cfg.seed + 1, "disturbance");
  sim.f_a = gen_piecewise(cfg.f_a, cfg.steps).channel(0);
  sim.f_m = gen_piecewise(cfg.f_m, cfg.steps).channel(0);
  const OdeTrajectory tr =
      simulate_ode(sim.ode, sim.u, sim.ode.n_d() > 0 ? &d : nullptr, sim.f_a, sim.f_m);
  sim.z = tr.z;
  return sim;
}

RunResult run_pipeline(const RunConfig& cfg, const Simulation& sim) {
  SynthesisOptions opts;
  opts.null_cutoff = cfg.null_cutoff;
  const DetectorFilter filter = synthesize_detector(sim.dae, cfg.a_roots, cfg.d_N, opts);
  RegressionConfig rc;
  rc.n = cfg.n;
  rc.epsilon = cfg.epsilon;
  rc.policy = cfg.policy;
  RunResult out;
  out.trace = run_estimator(filter, cfg.prefilter, sim.z, sim.dae.E, rc);
  out.bounds = evaluate_bounds(out.trace, filter.T, sim.f_a, sim.f_m, -1, cfg.bound_variant);
  return out;
}

}  // namespace fault_iso::cli
