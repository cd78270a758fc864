#include "fault_iso/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fault_iso/errors.hpp"

namespace fault_iso {

void RegressionConfig::validate() const {
  if (n < 2) throw std::invalid_argument("RegressionConfig: n must be >= 2");
  if (epsilon && !(*epsilon > 0.0)) throw std::invalid_argument("RegressionConfig: epsilon must be > 0");
}

double default_epsilon(std::span<const double> e) {
  double inf = 0.0;
  for (double v : e) inf = std::max(inf, std::abs(v));
  return 1e-9 * std::max(1.0, inf);
}

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments moments(std::span<const double> x) {
  Moments m;
  if (x.empty()) return m;
  for (double v : x) m.mean += v;
  m.mean /= static_cast<double>(x.size());
  for (double v : x) m.var += (v - m.mean) * (v - m.mean);
  m.var /= static_cast<double>(x.size());
  return m;
}

}  // namespace

FaultEstimate regress(std::span<const double> e, std::span<const double> r,
                      const RegressionConfig& cfg, const FaultEstimate* previous) {
  if (e.size() != r.size() || static_cast<Index>(e.size()) != cfg.n) {
    throw std::invalid_argument("regress: window length must equal n");
  }
  const Moments me = moments(e);
  FaultEstimate out;
  out.C_n = std::sqrt(me.var + me.mean * me.mean + 1.0);
  const double eps = cfg.epsilon ? *cfg.epsilon : default_epsilon(e);
  if (std::sqrt(me.var) <= eps) {
    if (cfg.policy == DegeneratePolicy::kEmitError) {
      throw DegenerateWindow("regression window has no excitation (V_n[e] <= epsilon)");
    }
    if (previous) {
      out.f_a_hat = previous->f_a_hat;
      out.f_m_hat = previous->f_m_hat;
    }
    out.degenerate = true;
    return out;
  }
  // Normal equations of r ~ [e, 1], solved in centered form.
  double r_mean = 0.0;
  for (double v : r) r_mean += v;
  r_mean /= static_cast<double>(r.size());
  double cov = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) cov += (e[i] - me.mean) * (r[i] - r_mean);
  cov /= static_cast<double>(e.size());
  out.f_m_hat = cov / me.var;
  out.f_a_hat = r_mean - me.mean * out.f_m_hat;
  return out;
}

double regression_constant(std::span<const double> e) {
  const Moments m = moments(e);
  return std::sqrt(m.var + m.mean * m.mean + 1.0);
}

double pinv_norm(std::span<const double> e, std::optional<double> epsilon) {
  const Moments m = moments(e);
  const double v = std::sqrt(m.var);
  if (v <= (epsilon ? *epsilon : default_epsilon(e))) {
    throw DegenerateWindow("pinv_norm: degenerate window");
  }
  const double a = 1.0 + m.var + m.mean * m.mean;
  const double b = 4.0 * m.var;
  const double n = static_cast<double>(e.size());
  return std::sqrt(2.0 * (a + std::sqrt(std::max(a * a - b, 0.0))) / (n * b));
}

Prefilter::Prefilter(PrefilterKind kind, const RationalFilter& t)
    : kind_(kind), modal_(t), before_(Eigen::VectorXd::Zero(t.order())) {}

double Prefilter::step(double ez) {
  if (kind_ == PrefilterKind::kStatic) return ez;
  before_ = modal_.state();
  return modal_.step(ez);
}

EstimatorTrace run_estimator(const DetectorFilter& filter, PrefilterKind kind, const Signal& z,
                             const ZMap& E, const RegressionConfig& cfg) {
  cfg.validate();
  if (z.dim() != filter.NL.cols()) throw std::invalid_argument("run_estimator: z dimension");
  const std::size_t len = z.size();
  const auto n = static_cast<std::size_t>(cfg.n);

  EstimatorTrace tr;
  tr.n = cfg.n;
  tr.kind = kind;
  tr.r.resize(len);
  tr.e.resize(len);
  tr.ez.resize(len);
  tr.estimate.resize(len);
  tr.warmup.resize(len);
  tr.xp_norm.assign(len, 0.0);
  if (kind == PrefilterKind::kDynamic) tr.xp = Eigen::MatrixXd::Zero(filter.T.order(), static_cast<Index>(len));

  DifferenceFilter residual(filter.NL, filter.a);
  Prefilter pre(kind, filter.T);
  // windows padded with n-1 leading zeros
  std::vector<double> e_pad(n - 1 + len, 0.0), r_pad(n - 1 + len, 0.0);
  const FaultEstimate* previous = nullptr;
  RegressionConfig warm = cfg;
  warm.policy = DegeneratePolicy::kHoldLast;

  for (std::size_t k = 0; k < len; ++k) {
    const Eigen::VectorXd zk = z.matrix().col(static_cast<Index>(k));
    tr.r[k] = residual.step(zk);
    tr.ez[k] = E(zk);
    tr.e[k] = pre.step(tr.ez[k]);
    if (kind == PrefilterKind::kDynamic) {
      tr.xp.col(static_cast<Index>(k)) = pre.state_before_step();
      tr.xp_norm[k] = pre.state_before_step().norm();
    }
    e_pad[n - 1 + k] = tr.e[k];
    r_pad[n - 1 + k] = tr.r[k];
    tr.warmup[k] = k + 1 < n;
    const std::span<const double> ew(e_pad.data() + k, n), rw(r_pad.data() + k, n);
    tr.estimate[k] = regress(ew, rw, tr.warmup[k] ? warm : cfg, previous);
    previous = &tr.estimate[k];
  }
  return tr;
}

}  // namespace fault_iso
