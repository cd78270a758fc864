#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fault_iso/signals.hpp"

namespace fault_iso {

/// Matrix polynomial P(q) = sum_i P_i q^i in the forward shift q.
/// Coefficients are stored in ascending powers; trailing zero coefficients
/// are trimmed (the zero polynomial keeps one zero coefficient).
class PolyMatrix {
 public:
  static constexpr double kTrimTol = 1e-12;

  PolyMatrix(Index rows, Index cols);  // zero polynomial
  explicit PolyMatrix(std::vector<Eigen::MatrixXd> coeffs, double trim_tol = kTrimTol);

  /// Scalar polynomial from ascending coefficients.
  static PolyMatrix scalar(std::span<const double> ascending);
  /// Monic scalar polynomial prod_i (q - roots[i]).
  static PolyMatrix from_roots(std::span<const double> roots);
  static PolyMatrix constant(const Eigen::MatrixXd& m);
  /// c * q^power.
  static PolyMatrix monomial(const Eigen::MatrixXd& c, int power);

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const Eigen::MatrixXd& coeff(int i) const { return coeffs_.at(static_cast<std::size_t>(i)); }
  const std::vector<Eigen::MatrixXd>& coeffs() const { return coeffs_; }
  bool is_zero() const;

  /// Ascending scalar coefficients of entry (i, j), length degree()+1.
  std::vector<double> entry(Index i, Index j) const;

  Eigen::MatrixXd eval(double q0) const;
  Eigen::MatrixXcd eval(std::complex<double> q0) const;

  /// Banded block-Toeplitz lifting with s block rows; size (s*rows) x ((s+d)*cols).
  Eigen::MatrixXd block_toeplitz(int s) const;

  PolyMatrix trimmed(double tol) const;

  PolyMatrix operator+(const PolyMatrix& o) const;
  PolyMatrix operator-(const PolyMatrix& o) const;
  PolyMatrix operator*(double c) const;

 private:
  void trim(double tol);

  Index rows_;
  Index cols_;
  std::vector<Eigen::MatrixXd> coeffs_;
};

/// Coefficient-wise convolution. Throws std::invalid_argument on dimension mismatch.
PolyMatrix poly_mul(const PolyMatrix& p, const PolyMatrix& q);
inline PolyMatrix operator*(const PolyMatrix& p, const PolyMatrix& q) { return poly_mul(p, q); }

Eigen::MatrixXd poly_eval(const PolyMatrix& p, double q0);

/// (P(q)[s])(k) = sum_i P_i s(k+i). Requires k + degree < s.size().
Eigen::VectorXd poly_apply(const PolyMatrix& p, const Signal& s, Index k);

/// One output sample of num(q)/den(q) applied to a vector signal.
/// `input` holds z(k-d_a..k) (oldest first, d_a+1 samples) and `output_history`
/// holds r(k-d_a..k-1) (oldest first, d_a samples).
double rational_filter_step(const PolyMatrix& num, const PolyMatrix& den,
                            std::span<const Eigen::VectorXd> input,
                            std::span<const double> output_history);

/// Streaming realization of a row numerator over a scalar denominator.
/// Zero initial conditions.
class DifferenceFilter {
 public:
  DifferenceFilter(PolyMatrix num, PolyMatrix den);

  double step(const Eigen::Ref<const Eigen::VectorXd>& z);
  void reset();

  int order() const { return den_.degree(); }

 private:
  PolyMatrix num_;
  PolyMatrix den_;
  std::vector<Eigen::VectorXd> inputs_;  // oldest first, d_a+1 samples
  std::vector<double> outputs_;          // oldest first, d_a samples
};

/// Filter a whole signal with zero initial conditions.
Signal filter_signal(const PolyMatrix& num, const PolyMatrix& den, const Signal& z);

}  // namespace fault_iso
