#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "fault_iso/model.hpp"
#include "fault_iso/signals.hpp"

namespace fault_iso {

/// Single-track lateral model parameters (SI units).
struct BicycleParams {
  double C_f = 1.50e5;  // N/rad
  double C_r = 1.10e5;  // N/rad
  double l_f = 1.3;     // m
  double l_r = 1.7;     // m
  double v_x = 19.0;    // m/s
  double m = 1500.0;    // kg
  double I = 2600.0;    // kg m^2
  double g = 9.81;      // m/s^2
  double h = 0.01;      // s

  void validate() const;
};

/// kVerbatim keeps the published signs of the upper-left 2x2 block of A;
/// kStabilized negates that block (the usual stable lateral dynamics).
enum class SignConvention { kVerbatim, kStabilized };

/// State [v_y, yaw rate, y_e, psi_e], disturbances [sin(bank), curvature].
struct ContinuousModel {
  Eigen::MatrixXd A, B_u, B_d, B_f, C;
};

ContinuousModel continuous_matrices(const BicycleParams& p,
                                    SignConvention signs = SignConvention::kVerbatim);

/// Scaling and squaring with a degree-13 Pade approximant.
Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& m);

struct DiscretePlant {
  Eigen::MatrixXd A, B_u, B_d, B_f, C;
  double h = 0.0;
};

/// Zero-order-hold discretization of each input block in `b`, via the
/// augmented exponential exp([[A, B], [0, 0]] h).
std::pair<Eigen::MatrixXd, std::vector<Eigen::MatrixXd>> discretize(
    const Eigen::MatrixXd& a, const std::vector<Eigen::MatrixXd>& b, double h);
DiscretePlant discretize(const ContinuousModel& c, double h);

/// Discrete ODE with E(z) = coeffs . z (default: the steering input u).
OdeModel bicycle_ode(const DiscretePlant& plant, std::optional<Eigen::VectorXd> e_coeffs = {});

struct Scenario {
  std::size_t steps = 2500;
  double input_amplitude = 2.3e-3;  // rad
  double input_freq_hz = 0.3;
  std::vector<Segment> f_a;
  std::vector<Segment> f_m;
  std::optional<Signal> input;        // overrides the sinusoid when set
  std::optional<Signal> disturbance;  // zero when unset
  std::optional<Eigen::VectorXd> e_coeffs;

  /// Incipient faults of the published case study.
  static Scenario case_study();
  /// Constant faults switched on at k0.
  static Scenario step_faults(std::size_t k0, double f_a, double f_m, std::size_t steps);
};

struct CaseStudy {
  DiscretePlant plant;
  OdeModel ode;
  DaeModel dae;
  Signal u;
  Signal z;
  Signal x;  // DAE unknowns [X; d]
  std::vector<double> f_a;
  std::vector<double> f_m;
  std::vector<double> delta;
  Index k0_a = -1;  // first nonzero sample, -1 if the fault never occurs
  Index k0_m = -1;
};

CaseStudy build_case_study(const BicycleParams& params, const Scenario& scenario,
                           SignConvention signs = SignConvention::kStabilized);

/// First index with a nonzero sample, -1 if none.
Index first_nonzero(const std::vector<double>& x);

}  // namespace fault_iso
