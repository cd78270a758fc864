#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fault_iso/polymat.hpp"
#include "fault_iso/signals.hpp"

namespace fault_iso {

/// Static map E: z -> scalar.
using ZMap = std::function<double(const Eigen::VectorXd& z)>;
/// Static map E_X(w, u) with w = B_X X.
using StateMap = std::function<double(const Eigen::VectorXd& w, const Eigen::VectorXd& u)>;

/// H(q)[x] + L(q)[z] + F(q)[f_a + E(z) f_m] = 0.
struct DaeModel {
  PolyMatrix H{0, 0};
  PolyMatrix L{0, 0};
  PolyMatrix F{0, 1};
  ZMap E;

  Index n_r() const { return H.rows(); }
  Index n_x() const { return H.cols(); }
  Index n_z() const { return L.cols(); }

  /// Throws std::invalid_argument when the shapes disagree.
  void validate() const;
};

/// G X(k+1) = A X + B_u u + B_d d + B_f (f_a + E_X(B_X X, u) f_m)
/// y        = C X + D_u u + D_d d + D_f (f_a + E_Y(B_Y X, u) f_m)
/// Empty B_d / D_d mean no disturbance channel. An empty E_Y reuses E_X with B_X.
struct OdeModel {
  Eigen::MatrixXd G, A, B_u, B_d, B_f, B_X, B_Y, C, D_u, D_d, D_f;
  StateMap E_X;
  StateMap E_Y;

  Index n_X() const { return A.rows(); }
  Index n_u() const { return B_u.cols(); }
  Index n_d() const { return B_d.cols(); }
  Index n_y() const { return C.rows(); }

  /// Fills defaulted blocks (G = I, zero D's, empty disturbance) and checks shapes.
  void normalize();
};

/// E(z) = coeffs . z.
ZMap linear_map(Eigen::VectorXd coeffs);

/// Sets E_X (and clears E_Y) so that E(z) = c . z with z = [y; u], using
/// B_X = c_y C and E_X(w, u) = sum(w) + (c_y D_u + c_u) u. Conversion then
/// succeeds exactly when c_y D_f = 0 and c_y D_d = 0.
void attach_linear_e(OdeModel& ode, const Eigen::VectorXd& c);

struct ConversionReport {
  Eigen::MatrixXd K_X;
  Eigen::MatrixXd K_Y;
  double residual_X = 0.0;
  double residual_Y = 0.0;
};

/// Rewrites the ODE as a DAE with x = [X; d], z = [y; u].
/// tol < 0 selects 1e-9 * ||B_X|| (resp. ||B_Y||).
/// Throws InfeasibleConversion when no K_X / K_Y exists within tolerance.
DaeModel ode_to_dae(const OdeModel& ode, double tol = -1.0, ConversionReport* report = nullptr);

/// Generic rank test of [H F] against H at `trials` random real points.
bool check_detectability(const DaeModel& dae, int trials = 8, double tol = 1e-9,
                         std::uint64_t seed = 0x5eed);

struct OdeTrajectory {
  Signal X;                   // n_X x K
  Signal y;                   // n_y x K
  Signal z;                   // [y; u]
  Signal x;                   // [X; d], the DAE unknowns
  std::vector<double> delta;  // aggregated fault entering the state equation
};

/// Simulates the ODE from X0 (zero when empty). `d` may be empty for no disturbance.
OdeTrajectory simulate_ode(const OdeModel& ode, const Signal& u, const Signal* d,
                           std::span<const double> f_a, std::span<const double> f_m,
                           const Eigen::VectorXd& x0 = {});

/// max_k |H[x] + L[z] + F[f_a + E(z) f_m]|_inf over k = 0..K-1-deg.
double dae_identity_error(const DaeModel& dae, const Signal& x, const Signal& z,
                          std::span<const double> f_a, std::span<const double> f_m);

}  // namespace fault_iso
