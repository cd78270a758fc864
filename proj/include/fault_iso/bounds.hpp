#pragma once

#include <array>
#include <span>
#include <vector>

#include "fault_iso/estimator.hpp"
#include "fault_iso/lti.hpp"

namespace fault_iso {

/// kShifted: decay factor |p|^(k-n-k0) and the onset-window mean of f_a in beta_0.
/// kUnshifted: |p|^(k-k0) and mu_n[f_a] in beta_0. Can be violated right after onset.
enum class BoundVariant { kShifted, kUnshifted };

struct BoundInputs {
  Index k = 0;
  Index k0 = 0;  // fault onset; windows [k0, k] hold m = k-k0+1 samples (0 before onset)
  Index n = 0;
  std::span<const double> f_a;
  std::span<const double> f_m;
  std::span<const double> ez;  // E(z)
  std::span<const double> e;   // regressor (E(z) itself for the static pre-filter)
  double xp_k0_norm = 0.0;     // |X_p(k0)|, dynamic only
  BoundConstants G;            // constants of G = T - 1
  double p = 0.0;              // |dominant pole|
  BoundVariant variant = BoundVariant::kShifted;
};

using Coeffs = std::array<double, 4>;

Coeffs alpha_coeffs(const BoundInputs& in);
Coeffs beta_coeffs(const BoundInputs& in);
/// +infinity when V_n[e] <= epsilon.
double static_bound(const BoundInputs& in, std::optional<double> epsilon = {});
double dynamic_bound(const BoundInputs& in, std::optional<double> epsilon = {});
/// Constant faults, static pre-filter; uses mu_n[f] as the fault levels.
double corollary_static(const BoundInputs& in);
/// Constant faults, dynamic pre-filter.
double corollary_dynamic(const BoundInputs& in);

/// G(q) = T(q) - 1 over the poles of T; asserts G(1) = 0.
RationalFilter error_filter(const RationalFilter& t);

struct VarProductCheck {
  double lhs1 = 0.0, rhs1 = 0.0;  // |V^2[a+b] - V^2[a] - V^2[b]| <= 2 min(|a|V[b], |b|V[a])
  double lhs2 = 0.0, rhs2 = 0.0;  // V[ab] <= sqrt(n) V[a]V[b] + |mu a|V[b] + |mu b|V[a]
};

VarProductCheck var_product_check(std::span<const double> a, std::span<const double> b);

struct BoundRow {
  Index k = 0;
  Coeffs coeffs{};
  double rhs = 0.0;
  double actual_err = 0.0;
  double corollary = 0.0;
  double V_n = 0.0;
  double C_n = 0.0;
  bool excluded = false;  // warm-up or degenerate
  bool dominated = true;
};

struct BoundTrace {
  std::vector<BoundRow> rows;
  Index k0 = 0;
  BoundConstants G;
  double p = 0.0;
  std::size_t violations = 0;
  std::size_t checked = 0;
};

/// Slack added to the bound when judging domination.
inline constexpr double kDominationSlack = 1e-9;

/// Evaluates the error bound matching the trace's pre-filter at every step.
/// k0 < 0 selects the first step where f_a or f_m is nonzero.
BoundTrace evaluate_bounds(const EstimatorTrace& trace, const RationalFilter& t,
                           std::span<const double> f_a, std::span<const double> f_m,
                           Index k0 = -1, BoundVariant variant = BoundVariant::kShifted);

}  // namespace fault_iso
