#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "fault_iso/bounds.hpp"
#include "fault_iso/errors.hpp"
#include "fault_iso/estimator.hpp"
#include "fault_iso/model.hpp"
#include "fault_iso/signals.hpp"
#include "fault_iso/vehicle.hpp"

namespace fault_iso::cli {

enum ExitCode : int {
  kOk = 0,
  kConfigError = 2,
  kSynthesisInfeasible = 3,
  kDegenerateAbort = 4,
};

/// Invalid or unreadable configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct SignalSpec {
  enum class Kind { kZero, kSine, kRandom, kPiecewise } kind = Kind::kZero;
  double amplitude = 0.0;
  double freq_hz = 0.0;
  double phase = 0.0;
  std::size_t hold = 1;  // random: samples per held value
  std::vector<Segment> segments;
};

struct SweepPoint {
  Index n = 10;
  double p = 0.85;
};

struct RunConfig {
  // model
  bool builtin_bicycle = true;
  BicycleParams params;
  SignConvention signs = SignConvention::kStabilized;
  std::filesystem::path model_file;
  OdeModel file_model;   // loaded when !builtin_bicycle
  double sample_time = 0.01;
  std::optional<Eigen::VectorXd> e_coeffs;  // unset: steering input / first input
  // synthesis
  int d_N = 3;
  std::vector<double> a_roots{-0.85, -0.59, -0.58};
  double null_cutoff = 1e-10;
  // estimator
  Index n = 10;
  PrefilterKind prefilter = PrefilterKind::kDynamic;
  std::optional<double> epsilon;
  DegeneratePolicy policy = DegeneratePolicy::kHoldLast;
  BoundVariant bound_variant = BoundVariant::kShifted;
  // scenario
  std::size_t steps = 2500;
  std::vector<SignalSpec> inputs;        // one per input channel
  std::vector<SignalSpec> disturbances;  // one per disturbance channel, zero when empty
  std::vector<Segment> f_a;
  std::vector<Segment> f_m;
  // sweep
  std::vector<SweepPoint> sweep_points{{10, 0.6}, {10, 0.85}, {80, 0.85}};
  std::vector<PrefilterKind> sweep_prefilters{PrefilterKind::kStatic, PrefilterKind::kDynamic};
  Index decay_window = 30;
  // output
  std::filesystem::path out_dir = "fault-iso-out";
  std::uint64_t seed = 1;
};

/// Baseline case study; every field of a config file overrides one of these.
RunConfig default_config();
/// Parses JSON text; relative model paths resolve against `base_dir`.
RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir = {});
RunConfig load_config(const std::filesystem::path& path);

/// Plant, DAE and signals for one run.
struct Simulation {
  OdeModel ode;
  DaeModel dae;
  Signal u;
  Signal z;
  std::vector<double> f_a;
  std::vector<double> f_m;
  double sample_time = 0.0;
};

Simulation build_simulation(const RunConfig& cfg);

struct RunResult {
  EstimatorTrace trace;
  BoundTrace bounds;
};

/// Synthesis, estimation and bound evaluation for one (n, roots, prefilter).
RunResult run_pipeline(const RunConfig& cfg, const Simulation& sim);

inline constexpr const char* kTraceVersion = "fault-iso-trace v1";

std::string trace_csv(const Simulation& sim, const RunResult& run);

/// Entry point used by the executable; returns the process exit code.
int run_cli(int argc, const char* const* argv);

}  // namespace fault_iso::cli
