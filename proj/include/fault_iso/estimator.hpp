#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "fault_iso/lti.hpp"
#include "fault_iso/model.hpp"
#include "fault_iso/synthesis.hpp"

namespace fault_iso {

enum class DegeneratePolicy { kHoldLast, kEmitError };

struct RegressionConfig {
  Index n = 10;
  std::optional<double> epsilon;  // unset: 1e-9 * max(1, |e_n|_inf)
  DegeneratePolicy policy = DegeneratePolicy::kHoldLast;

  void validate() const;
};

struct FaultEstimate {
  double f_a_hat = 0.0;
  double f_m_hat = 0.0;
  bool degenerate = false;
  double C_n = 1.0;
};

double default_epsilon(std::span<const double> e);

/// Least-squares fit r ~ f_a + e f_m over one window. On a flat window the
/// previous estimate is held (or DegenerateWindow is thrown, per policy).
FaultEstimate regress(std::span<const double> e, std::span<const double> r,
                      const RegressionConfig& cfg, const FaultEstimate* previous = nullptr);

/// sqrt(V^2 + mu^2 + 1) over the window.
double regression_constant(std::span<const double> e);

/// Spectral norm of the pseudo-inverse of [e, 1]. Throws DegenerateWindow when V <= eps.
double pinv_norm(std::span<const double> e, std::optional<double> epsilon = {});

enum class PrefilterKind { kStatic, kDynamic };

/// e = E(z) (static) or e = T[E(z)] (dynamic, zero initial state).
class Prefilter {
 public:
  Prefilter(PrefilterKind kind, const RationalFilter& t);
  double step(double ez);
  PrefilterKind kind() const { return kind_; }
  /// X_p(k) before the most recent step, i.e. the state that produced the last output.
  const Eigen::VectorXd& state_before_step() const { return before_; }

 private:
  PrefilterKind kind_;
  ModalStepper modal_;
  Eigen::VectorXd before_;
};

struct EstimatorTrace {
  Index n = 0;
  PrefilterKind kind = PrefilterKind::kStatic;
  std::vector<double> r;
  std::vector<double> e;
  std::vector<double> ez;
  std::vector<FaultEstimate> estimate;
  std::vector<bool> warmup;
  Eigen::MatrixXd xp;             // d x K, X_p(k) (dynamic only)
  std::vector<double> xp_norm;

  std::size_t size() const { return r.size(); }
};

EstimatorTrace run_estimator(const DetectorFilter& filter, PrefilterKind kind, const Signal& z,
                             const ZMap& E, const RegressionConfig& cfg);

}  // namespace fault_iso
