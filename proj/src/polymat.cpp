#include "fault_iso/polymat.hpp"

#include <algorithm>
#include <stdexcept>

#include "fault_iso/errors.hpp"

namespace fault_iso {

PolyMatrix::PolyMatrix(Index rows, Index cols)
    : rows_(rows), cols_(cols), coeffs_{Eigen::MatrixXd::Zero(rows, cols)} {}

PolyMatrix::PolyMatrix(std::vector<Eigen::MatrixXd> coeffs, double trim_tol)
    : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) throw std::invalid_argument("PolyMatrix: no coefficients");
  rows_ = coeffs_.front().rows();
  cols_ = coeffs_.front().cols();
  for (const auto& c : coeffs_) {
    if (c.rows() != rows_ || c.cols() != cols_) {
      throw std::invalid_argument("PolyMatrix: coefficient dimensions differ");
    }
  }
  trim(trim_tol);
}

PolyMatrix PolyMatrix::scalar(std::span<const double> ascending) {
  std::vector<Eigen::MatrixXd> c;
  for (double v : ascending) c.push_back(Eigen::MatrixXd::Constant(1, 1, v));
  if (c.empty()) c.push_back(Eigen::MatrixXd::Zero(1, 1));
  return PolyMatrix(std::move(c));
}

PolyMatrix PolyMatrix::from_roots(std::span<const double> roots) {
  std::vector<double> a{1.0};
  for (double r : roots) {
    std::vector<double> next(a.size() + 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      next[i + 1] += a[i];
      next[i] -= r * a[i];
    }
    a = std::move(next);
  }
  return scalar(a);
}

PolyMatrix PolyMatrix::constant(const Eigen::MatrixXd& m) { return PolyMatrix({m}); }

PolyMatrix PolyMatrix::monomial(const Eigen::MatrixXd& c, int power) {
  std::vector<Eigen::MatrixXd> cs(static_cast<std::size_t>(power) + 1,
                                  Eigen::MatrixXd::Zero(c.rows(), c.cols()));
  cs.back() = c;
  return PolyMatrix(std::move(cs));
}

bool PolyMatrix::is_zero() const {
  return coeffs_.size() == 1 && (coeffs_[0].size() == 0 || coeffs_[0].isZero(0.0));
}

std::vector<double> PolyMatrix::entry(Index i, Index j) const {
  std::vector<double> out;
  out.reserve(coeffs_.size());
  for (const auto& c : coeffs_) out.push_back(c(i, j));
  return out;
}

Eigen::MatrixXd PolyMatrix::eval(double q0) const {
  Eigen::MatrixXd acc = coeffs_.back();
  for (int i = degree() - 1; i >= 0; --i) acc = acc * q0 + coeffs_[static_cast<std::size_t>(i)];
  return acc;
}

Eigen::MatrixXcd PolyMatrix::eval(std::complex<double> q0) const {
  Eigen::MatrixXcd acc = coeffs_.back().cast<std::complex<double>>();
  for (int i = degree() - 1; i >= 0; --i) {
    acc = acc * q0 + coeffs_[static_cast<std::size_t>(i)].cast<std::complex<double>>();
  }
  return acc;
}

Eigen::MatrixXd PolyMatrix::block_toeplitz(int s) const {
  if (s < 1) throw std::invalid_argument("block_toeplitz: s must be >= 1");
  const int d = degree();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(s * rows_, (s + d) * cols_);
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j <= d; ++j) {
      out.block(i * rows_, (i + j) * cols_, rows_, cols_) = coeffs_[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

PolyMatrix PolyMatrix::trimmed(double tol) const {
  PolyMatrix p = *this;
  p.trim(tol);
  return p;
}

void PolyMatrix::trim(double tol) {
  while (coeffs_.size() > 1 && coeffs_.back().norm() <= tol) coeffs_.pop_back();
}

PolyMatrix PolyMatrix::operator+(const PolyMatrix& o) const {
  if (rows_ != o.rows_ || cols_ != o.cols_) throw std::invalid_argument("PolyMatrix +: dims");
  std::vector<Eigen::MatrixXd> c(std::max(coeffs_.size(), o.coeffs_.size()),
                                 Eigen::MatrixXd::Zero(rows_, cols_));
  for (std::size_t i = 0; i < coeffs_.size(); ++i) c[i] += coeffs_[i];
  for (std::size_t i = 0; i < o.coeffs_.size(); ++i) c[i] += o.coeffs_[i];
  return PolyMatrix(std::move(c));
}

PolyMatrix PolyMatrix::operator-(const PolyMatrix& o) const { return *this + o * -1.0; }

PolyMatrix PolyMatrix::operator*(double c) const {
  std::vector<Eigen::MatrixXd> out = coeffs_;
  for (auto& m : out) m *= c;
  return PolyMatrix(std::move(out));
}

PolyMatrix poly_mul(const PolyMatrix& p, const PolyMatrix& q) {
  if (p.cols() != q.rows()) throw std::invalid_argument("poly_mul: dimension mismatch");
  std::vector<Eigen::MatrixXd> c(static_cast<std::size_t>(p.degree() + q.degree() + 1),
                                 Eigen::MatrixXd::Zero(p.rows(), q.cols()));
  for (int i = 0; i <= p.degree(); ++i) {
    for (int j = 0; j <= q.degree(); ++j) {
      c[static_cast<std::size_t>(i + j)].noalias() += p.coeff(i) * q.coeff(j);
    }
  }
  return PolyMatrix(std::move(c));
}

Eigen::MatrixXd poly_eval(const PolyMatrix& p, double q0) { return p.eval(q0); }

Eigen::VectorXd poly_apply(const PolyMatrix& p, const Signal& s, Index k) {
  if (s.dim() != p.cols()) throw std::invalid_argument("poly_apply: dimension mismatch");
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(p.rows());
  for (int i = 0; i <= p.degree(); ++i) acc.noalias() += p.coeff(i) * s.sample(k + i);
  return acc;
}

namespace {

void check_proper(const PolyMatrix& num, const PolyMatrix& den) {
  if (den.rows() != 1 || den.cols() != 1) throw std::invalid_argument("denominator must be scalar");
  if (num.rows() != 1) throw std::invalid_argument("numerator must be a row");
  if (den.coeff(den.degree())(0, 0) == 0.0) throw ImproperFilter("zero leading denominator");
  if (num.degree() > den.degree()) {
    throw ImproperFilter("deg num > deg den");
  }
}

}  // namespace

double rational_filter_step(const PolyMatrix& num, const PolyMatrix& den,
                            std::span<const Eigen::VectorXd> input,
                            std::span<const double> output_history) {
  check_proper(num, den);
  const int da = den.degree();
  if (static_cast<int>(input.size()) != da + 1 || static_cast<int>(output_history.size()) != da) {
    throw std::invalid_argument("rational_filter_step: history length mismatch");
  }
  double acc = 0.0;
  for (int j = 0; j <= num.degree(); ++j) {
    acc += num.coeff(j).row(0).dot(input[static_cast<std::size_t>(j)]);
  }
  for (int i = 0; i < da; ++i) acc -= den.coeff(i)(0, 0) * output_history[static_cast<std::size_t>(i)];
  return acc / den.coeff(da)(0, 0);
}

DifferenceFilter::DifferenceFilter(PolyMatrix num, PolyMatrix den)
    : num_(std::move(num)), den_(std::move(den)) {
  check_proper(num_, den_);
  reset();
}

void DifferenceFilter::reset() {
  inputs_.assign(static_cast<std::size_t>(den_.degree()) + 1, Eigen::VectorXd::Zero(num_.cols()));
  outputs_.assign(static_cast<std::size_t>(den_.degree()), 0.0);
}

double DifferenceFilter::step(const Eigen::Ref<const Eigen::VectorXd>& z) {
  std::rotate(inputs_.begin(), inputs_.begin() + 1, inputs_.end());
  inputs_.back() = z;
  const double r = rational_filter_step(num_, den_, inputs_, outputs_);
  if (!outputs_.empty()) {
    std::rotate(outputs_.begin(), outputs_.begin() + 1, outputs_.end());
    outputs_.back() = r;
  }
  return r;
}

Signal filter_signal(const PolyMatrix& num, const PolyMatrix& den, const Signal& z) {
  DifferenceFilter f(num, den);
  std::vector<double> out(z.size());
  for (std::size_t k = 0; k < z.size(); ++k) out[k] = f.step(z.matrix().col(static_cast<Index>(k)));
  return Signal(std::move(out));
}

}  // namespace fault_iso
