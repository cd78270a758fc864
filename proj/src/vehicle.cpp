#include "fault_iso/vehicle.hpp"

#include <numbers>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

namespace fault_iso {

void BicycleParams::validate() const {
  for (double v : {C_f, C_r, l_f, l_r, v_x, m, I, g, h}) {
    if (!(v > 0.0)) throw std::invalid_argument("BicycleParams: all parameters must be positive");
  }
}

ContinuousModel continuous_matrices(const BicycleParams& p, SignConvention signs) {
  p.validate();
  ContinuousModel c;
  c.A.resize(4, 4);
  c.A << (p.C_f + p.C_r) / (p.v_x * p.m), (p.l_f * p.C_f - p.l_r * p.C_r) / (p.v_x * p.m), 0, 0,
      (p.l_f * p.C_f - p.l_r * p.C_r) / (p.v_x * p.I),
      (p.l_f * p.l_f * p.C_f + p.l_r * p.l_r * p.C_r) / (p.v_x * p.I), 0, 0,
      -1, 0, 0, p.v_x,
      0, -1, 0, 0;
  if (signs == SignConvention::kStabilized) c.A.topLeftCorner(2, 2) *= -1.0;
  c.B_u.resize(4, 1);
  c.B_u << -p.C_f / p.m, -p.l_f * p.C_f / p.I, 0, 0;
  c.B_d.resize(4, 2);
  c.B_d << p.g, 0, 0, 0, 0, 0, 0, p.v_x;
  c.B_f = c.B_u;
  c.C.resize(3, 4);
  c.C << 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1;
  return c;
}

Eigen::MatrixXd matrix_exp(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("matrix_exp: square matrix required");
  return m.exp();
}

std::pair<Eigen::MatrixXd, std::vector<Eigen::MatrixXd>> discretize(
    const Eigen::MatrixXd& a, const std::vector<Eigen::MatrixXd>& b, double h) {
  if (!(h > 0.0)) throw std::invalid_argument("discretize: h must be positive");
  const Index n = a.rows();
  Index m = 0;
  for (const auto& bi : b) {
    if (bi.rows() != n) throw std::invalid_argument("discretize: B rows != A rows");
    m += bi.cols();
  }
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + m, n + m);
  aug.topLeftCorner(n, n) = a;
  Index col = n;
  for (const auto& bi : b) {
    aug.block(0, col, n, bi.cols()) = bi;
    col += bi.cols();
  }
  const Eigen::MatrixXd e = matrix_exp(aug * h);
  std::vector<Eigen::MatrixXd> bd;
  col = n;
  for (const auto& bi : b) {
    bd.push_back(e.block(0, col, n, bi.cols()));
    col += bi.cols();
  }
  return {e.topLeftCorner(n, n), std::move(bd)};
}

DiscretePlant discretize(const ContinuousModel& c, double h) {
  auto [a, b] = discretize(c.A, {c.B_u, c.B_d, c.B_f}, h);
  return DiscretePlant{a, b[0], b[1], b[2], c.C, h};
}

OdeModel bicycle_ode(const DiscretePlant& plant, std::optional<Eigen::VectorXd> e_coeffs) {
  OdeModel ode;
  ode.A = plant.A;
  ode.B_u = plant.B_u;
  ode.B_d = plant.B_d;
  ode.B_f = plant.B_f;
  ode.C = plant.C;
  ode.E_X = [](const Eigen::VectorXd&, const Eigen::VectorXd& u) { return u(0); };
  ode.normalize();
  if (e_coeffs) attach_linear_e(ode, *e_coeffs);
  return ode;
}

Scenario Scenario::case_study() {
  Scenario s;
  const double deg = std::numbers::pi / 180.0;
  s.f_m = {{0, SegmentMode::kRamp, -0.05 / 100.0}, {400, SegmentMode::kConst, -0.2}};
  s.f_a = {{0, SegmentMode::kConst, 0.0},
           {850, SegmentMode::kRamp, 2.5e-4 * deg},
           {1250, SegmentMode::kConst, 0.1 * deg}};
  return s;
}

Scenario Scenario::step_faults(std::size_t k0, double f_a, double f_m, std::size_t steps) {
  Scenario s;
  s.steps = steps;
  s.f_a = {{k0, SegmentMode::kConst, f_a}};
  s.f_m = {{k0, SegmentMode::kConst, f_m}};
  return s;
}

Index first_nonzero(const std::vector<double>& x) {
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (x[k] != 0.0) return static_cast<Index>(k);
  }
  return -1;
}

CaseStudy build_case_study(const BicycleParams& params, const Scenario& sc, SignConvention signs) {
  CaseStudy cs;
  cs.plant = discretize(continuous_matrices(params, signs), params.h);
  cs.ode = bicycle_ode(cs.plant, sc.e_coeffs);
  cs.dae = ode_to_dae(cs.ode);
  cs.u = sc.input ? *sc.input
                  : gen_sine(sc.input_amplitude, sc.input_freq_hz, params.h, sc.steps);
  if (cs.u.size() < sc.steps || cs.u.dim() != 1) {
    throw std::invalid_argument("build_case_study: input must be scalar and cover the scenario");
  }
  if (cs.u.size() > sc.steps) cs.u = Signal(Eigen::MatrixXd(cs.u.matrix().leftCols(static_cast<Index>(sc.steps))));
  for (const auto* segs : {&sc.f_a, &sc.f_m}) {
    if (!segs->empty() && segs->back().start >= sc.steps) {
      throw std::invalid_argument("build_case_study: breakpoint beyond the scenario duration");
    }
  }
  cs.f_a = gen_piecewise(sc.f_a, sc.steps).channel(0);
  cs.f_m = gen_piecewise(sc.f_m, sc.steps).channel(0);
  cs.k0_a = first_nonzero(cs.f_a);
  cs.k0_m = first_nonzero(cs.f_m);
  const OdeTrajectory tr = simulate_ode(cs.ode, cs.u, sc.disturbance ? &*sc.disturbance : nullptr,
                                        cs.f_a, cs.f_m);
  cs.z = tr.z;
  cs.x = tr.x;
  cs.delta = tr.delta;
  return cs;
}

}  // namespace fault_iso
