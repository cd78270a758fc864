#pragma once

// Random model and signal generators for property tests.

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "fault_iso/model.hpp"
#include "fault_iso/signals.hpp"

namespace gen {

inline Eigen::MatrixXd gaussian(std::mt19937_64& rng, long rows, long cols, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Eigen::MatrixXd m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j) m(i, j) = g(rng);
  return m;
}

/// Random discrete plant with spectral radius `radius`, one fault column on
/// the state, E_X = u(0).
inline fault_iso::OdeModel random_ode(std::mt19937_64& rng, long nx, long ny, long nu, long nd,
                                      double radius = 0.9) {
  fault_iso::OdeModel ode;
  Eigen::MatrixXd a = gaussian(rng, nx, nx);
  const double rho = a.eigenvalues().cwiseAbs().maxCoeff();
  ode.A = a * (radius / rho);
  ode.B_u = gaussian(rng, nx, nu);
  ode.B_d = gaussian(rng, nx, nd);
  ode.B_f = gaussian(rng, nx, 1);
  ode.C = gaussian(rng, ny, nx);
  ode.D_u = gaussian(rng, ny, nu, 0.3);
  ode.E_X = [](const Eigen::VectorXd&, const Eigen::VectorXd& u) { return u(0); };
  ode.normalize();
  return ode;
}

/// Sum of a few random sinusoids per channel.
inline fault_iso::Signal random_sines(std::mt19937_64& rng, int dim, std::size_t len, double amp = 1.0) {
  std::uniform_real_distribution<double> freq(0.005, 0.2), phase(0.0, 6.283185307179586);
  std::normal_distribution<double> a(0.0, amp);
  if (dim == 0) return {};
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, static_cast<long>(len));
  for (int c = 0; c < dim; ++c) {
    for (int s = 0; s < 3; ++s) {
      const double w = freq(rng), ph = phase(rng), ak = a(rng);
      for (long k = 0; k < m.cols(); ++k) m(c, k) += ak * std::sin(6.283185307179586 * w * k + ph);
    }
  }
  return fault_iso::Signal(m);
}

}  // namespace gen
