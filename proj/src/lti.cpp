#include "fault_iso/lti.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "fault_iso/errors.hpp"

namespace fault_iso {

namespace {

double horner(std::span<const double> c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

void check_poles(std::span<const double> poles) {
  for (std::size_t i = 0; i < poles.size(); ++i) {
    for (std::size_t j = i + 1; j < poles.size(); ++j) {
      if (std::abs(poles[i] - poles[j]) < RationalFilter::kMinPoleGap) {
        throw std::invalid_argument("repeated or nearly repeated poles");
      }
    }
  }
}

}  // namespace

std::vector<double> residues(std::span<const double> num, std::span<const double> poles) {
  check_poles(poles);
  std::vector<double> r(poles.size());
  for (std::size_t i = 0; i < poles.size(); ++i) {
    double den = 1.0;
    for (std::size_t j = 0; j < poles.size(); ++j) {
      if (j != i) den *= poles[i] - poles[j];
    }
    r[i] = horner(num, poles[i]) / den;
  }
  return r;
}

RationalFilter::RationalFilter(std::vector<double> num, std::vector<double> poles)
    : num_(std::move(num)), poles_(std::move(poles)) {
  const std::size_t d = poles_.size();
  while (num_.size() > d + 1 && num_.back() == 0.0) num_.pop_back();
  if (num_.size() > d + 1) throw ImproperFilter("RationalFilter: deg num > number of poles");
  num_.resize(d + 1, 0.0);
  for (double p : poles_) {
    if (!(std::abs(p) < 1.0)) throw std::invalid_argument("RationalFilter: pole outside unit disc");
  }
  check_poles(poles_);
  residues_ = fault_iso::residues(num_, poles_);
}

double RationalFilter::dominant_pole() const {
  if (poles_.empty()) return 0.0;
  return *std::max_element(poles_.begin(), poles_.end(),
                           [](double a, double b) { return std::abs(a) < std::abs(b); });
}

std::vector<double> RationalFilter::den() const {
  std::vector<double> a{1.0};
  for (double p : poles_) {
    std::vector<double> next(a.size() + 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) {
      next[i + 1] += a[i];
      next[i] -= p * a[i];
    }
    a = std::move(next);
  }
  return a;
}

double RationalFilter::eval(double q0) const {
  double a = 1.0;
  for (double p : poles_) a *= q0 - p;
  return horner(num_, q0) / a;
}

std::complex<double> RationalFilter::eval(std::complex<double> q0) const {
  std::complex<double> b = 0.0;
  for (auto it = num_.rbegin(); it != num_.rend(); ++it) b = b * q0 + *it;
  std::complex<double> a = 1.0;
  for (double p : poles_) a *= q0 - p;
  return b / a;
}

std::vector<double> RationalFilter::impulse_response(std::size_t len) const {
  std::vector<double> h(len, 0.0);
  if (len == 0) return h;
  h[0] = feedthrough();
  for (std::size_t k = 1; k < len; ++k) {
    double acc = 0.0;
    for (std::size_t i = 0; i < poles_.size(); ++i) {
      acc += residues_[i] * std::pow(poles_[i], static_cast<double>(k - 1));
    }
    h[k] = acc;
  }
  return h;
}

ModalRealization modal_realization(const RationalFilter& f) {
  const int d = f.order();
  ModalRealization m;
  m.A = Eigen::Map<const Eigen::VectorXd>(f.poles().data(), d);
  m.B = Eigen::VectorXd::Ones(d);
  m.C = Eigen::Map<const Eigen::RowVectorXd>(f.residues().data(), d);
  m.D = f.feedthrough();
  return m;
}

ModalResponse simulate_modal(const RationalFilter& f, std::span<const double> u,
                             const Eigen::VectorXd& x0) {
  const ModalRealization m = modal_realization(f);
  if (x0.size() != m.A.size()) throw std::invalid_argument("simulate_modal: X0 dimension");
  ModalResponse out;
  out.y.resize(u.size());
  out.states.resize(m.A.size(), static_cast<Index>(u.size()));
  Eigen::VectorXd x = x0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    out.states.col(static_cast<Index>(k)) = x;
    out.y[k] = m.C.dot(x) + m.D * u[k];
    x = m.A.cwiseProduct(x) + m.B * u[k];
  }
  return out;
}

ModalStepper::ModalStepper(const RationalFilter& f)
    : m_(modal_realization(f)), x_(Eigen::VectorXd::Zero(f.order())) {}

double ModalStepper::step(double u) {
  const double y = m_.C.dot(x_) + m_.D * u;
  x_ = m_.A.cwiseProduct(x_) + m_.B * u;
  return y;
}

BoundConstants bound_constants(const RationalFilter& f, Index n) {
  if (n < 1) throw std::invalid_argument("bound_constants: n must be >= 1");
  double sum_sq = 0.0;
  double c2 = std::abs(f.feedthrough());
  for (int i = 0; i < f.order(); ++i) {
    const double r = f.residues()[static_cast<std::size_t>(i)];
    sum_sq += r * r;
    c2 += std::abs(r) / (1.0 - std::abs(f.poles()[static_cast<std::size_t>(i)]));
  }
  const double nd = static_cast<double>(n);
  BoundConstants c;
  c.n = n;
  c.C0 = std::sqrt(nd * sum_sq);
  c.C1 = std::sqrt(nd * f.order() * sum_sq) / (1.0 - std::abs(f.dominant_pole()));
  c.C2 = c2;
  return c;
}

double zero_ss_bound(const RationalFilter& f, Index n, Index k, Index k0, double x0_norm,
                     double onset_mean, double onset_std) {
  if (k < k0) throw std::invalid_argument("zero_ss_bound: k < k0");
  const double dc = f.eval(1.0);
  if (std::abs(dc) > 1e-10) throw std::invalid_argument("zero_ss_bound: nonzero steady-state gain");
  const BoundConstants c = bound_constants(f, n);
  const double p = std::abs(f.dominant_pole());
  const double m = static_cast<double>(k - k0 + 1);
  const auto decay = [p](double coef, Index e) {
    return coef == 0.0 ? 0.0 : coef * std::pow(p, static_cast<double>(e));
  };
  return decay(c.C0 * x0_norm, k - n) + decay(c.C1 * std::abs(onset_mean), k - n - k0) +
         c.C2 * std::sqrt(m) * onset_std;
}

double zero_ss_bound(const RationalFilter& f, Index n, Index k, Index k0, double x0_norm,
                     std::span<const double> u) {
  const WindowStats s = window_stats(u, k, k - k0 + 1);
  return zero_ss_bound(f, n, k, k0, x0_norm, s.mean, s.std);
}

double hinf_norm_grid(const RationalFilter& f, int points) {
  double best = 0.0;
  for (int i = 0; i < points; ++i) {
    const double w = std::numbers::pi * i / (points - 1);
    best = std::max(best, std::abs(f.eval(std::polar(1.0, w))));
  }
  return best;
}

}  // namespace fault_iso
