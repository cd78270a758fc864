#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fault_iso/signals.hpp"

namespace fault_iso {

/// Scalar proper filter b(q)/a(q), a(q) = prod_i (q - p_i), with distinct real
/// poles strictly inside the unit circle.
class RationalFilter {
 public:
  static constexpr double kMinPoleGap = 1e-6;

  /// `num` ascending, at most poles.size()+1 coefficients.
  RationalFilter(std::vector<double> num, std::vector<double> poles);

  const std::vector<double>& num() const { return num_; }  // padded to d+1
  const std::vector<double>& poles() const { return poles_; }
  const std::vector<double>& residues() const { return residues_; }
  double feedthrough() const { return num_.back(); }
  int order() const { return static_cast<int>(poles_.size()); }
  /// Pole of largest magnitude (signed).
  double dominant_pole() const;

  /// Ascending coefficients of a(q).
  std::vector<double> den() const;
  double eval(double q0) const;
  std::complex<double> eval(std::complex<double> q0) const;

  /// h(0..len-1): b_d at k=0, sum_i r_i p_i^(k-1) afterwards.
  std::vector<double> impulse_response(std::size_t len) const;

 private:
  std::vector<double> num_;
  std::vector<double> poles_;
  std::vector<double> residues_;
};

/// r_i = b(p_i) / prod_{j != i} (p_i - p_j). Throws on repeated poles.
std::vector<double> residues(std::span<const double> num, std::span<const double> poles);

struct ModalRealization {
  Eigen::VectorXd A;  // diagonal
  Eigen::VectorXd B;  // ones
  Eigen::RowVectorXd C;
  double D = 0.0;
};

ModalRealization modal_realization(const RationalFilter& f);

struct ModalResponse {
  std::vector<double> y;
  Eigen::MatrixXd states;  // d x K, column k is X(k)
};

/// X(k+1) = A X(k) + B u(k), y(k) = C X(k) + D u(k).
ModalResponse simulate_modal(const RationalFilter& f, std::span<const double> u,
                             const Eigen::VectorXd& x0);

/// Streaming modal realization.
class ModalStepper {
 public:
  explicit ModalStepper(const RationalFilter& f);
  double step(double u);
  const Eigen::VectorXd& state() const { return x_; }

 private:
  ModalRealization m_;
  Eigen::VectorXd x_;
};

struct BoundConstants {
  double C0 = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  Index n = 0;
};

BoundConstants bound_constants(const RationalFilter& f, Index n);

/// Right-hand side of the zero steady-state output bound for a filter with
/// b(1) = 0:
///   C0 |X0| |p|^(k-n) + C1 |mu[u]| |p|^(k-n-k0) + C2 sqrt(m) V[u],
/// where mu, V are taken over the onset window [k0, k] of m = k-k0+1 samples.
double zero_ss_bound(const RationalFilter& f, Index n, Index k, Index k0, double x0_norm,
                     double onset_mean, double onset_std);
double zero_ss_bound(const RationalFilter& f, Index n, Index k, Index k0, double x0_norm,
                     std::span<const double> u);

/// sup |b(e^{jw})/a(e^{jw})| over `points` frequencies in [0, pi].
double hinf_norm_grid(const RationalFilter& f, int points = 1024);

}  // namespace fault_iso
