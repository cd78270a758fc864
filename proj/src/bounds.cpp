#include "fault_iso/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace fault_iso {

namespace {

struct Onset {
  double m = 0.0;  // samples in [k0, k]
  WindowStats fa, fm, ez, e, ez_fm, e_fm;
};

WindowStats product_stats(std::span<const double> a, std::span<const double> b, Index k, Index len) {
  std::vector<double> w(static_cast<std::size_t>(std::max<Index>(len, 0)));
  for (Index i = 0; i < len; ++i) {
    const Index j = k - len + 1 + i;
    w[static_cast<std::size_t>(i)] = j < 0 ? 0.0 : a[static_cast<std::size_t>(j)] * b[static_cast<std::size_t>(j)];
  }
  return stats_of(w);
}

Onset onset(const BoundInputs& in) {
  Onset o;
  const Index len = in.k >= in.k0 ? in.k - in.k0 + 1 : 0;
  o.m = static_cast<double>(len);
  o.fa = window_stats(in.f_a, in.k, len);
  o.fm = window_stats(in.f_m, in.k, len);
  o.ez = window_stats(in.ez, in.k, len);
  o.e = window_stats(in.e, in.k, len);
  o.ez_fm = product_stats(in.ez, in.f_m, in.k, len);
  o.e_fm = product_stats(in.e, in.f_m, in.k, len);
  return o;
}

double decay(double p, Index exponent) {
  if (p == 0.0) return exponent <= 0 ? 1.0 : 0.0;
  return std::pow(p, static_cast<double>(exponent));
}

Index decay_exponent(const BoundInputs& in) {
  return in.variant == BoundVariant::kShifted ? in.k - in.n - in.k0 : in.k - in.k0;
}

double coeff_decay(double c, double p, Index e) { return c == 0.0 ? 0.0 : c * decay(p, e); }

}  // namespace

Coeffs alpha_coeffs(const BoundInputs& in) {
  const Onset o = onset(in);
  const WindowStats en = window_stats(in.e, in.k, in.n);
  const double cn = std::sqrt(en.std * en.std + en.mean * en.mean + 1.0);
  const double sn = std::sqrt(static_cast<double>(in.n));
  const double ratio = std::sqrt(o.m / static_cast<double>(in.n));
  const double vfa_n = window_std(in.f_a, in.k, in.n);
  const double vfm_n = window_std(in.f_m, in.k, in.n);
  Coeffs a;
  a[0] = in.G.C1 * (cn / sn) * (std::abs(o.fa.mean) + std::abs(o.e_fm.mean));
  a[1] = in.G.C2 * cn * ratio;
  a[2] = in.G.C2 * cn * ratio * (std::sqrt(o.m) * o.ez.std + std::abs(o.ez.mean));
  a[3] = cn * (vfa_n + vfm_n * en.inf_norm + in.G.C2 * ratio * std::abs(o.fm.mean) * o.ez.std);
  return a;
}

Coeffs beta_coeffs(const BoundInputs& in) {
  const Onset o = onset(in);
  const WindowStats en = window_stats(in.e, in.k, in.n);
  const double cn = std::sqrt(en.std * en.std + en.mean * en.mean + 1.0);
  const double sn = std::sqrt(static_cast<double>(in.n));
  const double ratio = std::sqrt(o.m / static_cast<double>(in.n));
  const double vfa_n = window_std(in.f_a, in.k, in.n);
  const double vfm_n = window_std(in.f_m, in.k, in.n);
  const double fbar = window_mean(in.f_m, in.k, in.n);
  const double fa_level =
      in.variant == BoundVariant::kShifted ? o.fa.mean : window_mean(in.f_a, in.k, in.n);
  double gap = 0.0;  // |e_n - E(z)_n|_inf
  for (Index i = 0; i < in.n; ++i) {
    const Index j = in.k - i;
    if (j >= 0) gap = std::max(gap, std::abs(in.e[static_cast<std::size_t>(j)] - in.ez[static_cast<std::size_t>(j)]));
  }
  Coeffs b;
  b[0] = (cn / sn) * (in.G.C1 * (std::abs(fa_level) + std::abs(o.ez_fm.mean - o.ez.mean * fbar)) +
                      in.G.C0 * std::abs(fbar) * in.xp_k0_norm);
  b[1] = in.G.C2 * cn * ratio;
  b[2] = in.G.C2 * cn * ratio * (std::sqrt(o.m) * o.ez.std + std::abs(o.ez.mean));
  b[3] = cn * (vfa_n + vfm_n * (en.inf_norm + gap) +
               in.G.C2 * ratio * std::abs(o.fm.mean - fbar) * o.ez.std);
  return b;
}

namespace {

double assemble(const BoundInputs& in, const Coeffs& c, std::optional<double> epsilon) {
  const WindowStats en = window_stats(in.e, in.k, in.n);
  const double eps = epsilon ? *epsilon : 1e-9 * std::max(1.0, en.inf_norm);
  if (en.std <= eps) return std::numeric_limits<double>::infinity();
  const Index len = in.k >= in.k0 ? in.k - in.k0 + 1 : 0;
  const double vfa = window_std(in.f_a, in.k, len);
  const double vfm = window_std(in.f_m, in.k, len);
  return (coeff_decay(c[0], in.p, decay_exponent(in)) + c[1] * vfa + c[2] * vfm + c[3]) / en.std;
}

}  // namespace

double static_bound(const BoundInputs& in, std::optional<double> epsilon) {
  return assemble(in, alpha_coeffs(in), epsilon);
}

double dynamic_bound(const BoundInputs& in, std::optional<double> epsilon) {
  return assemble(in, beta_coeffs(in), epsilon);
}

double corollary_static(const BoundInputs& in) {
  const WindowStats en = window_stats(in.e, in.k, in.n);
  const double cn = std::sqrt(en.std * en.std + en.mean * en.mean + 1.0);
  const Onset o = onset(in);
  const double fa = window_mean(in.f_a, in.k, in.n);
  const double fm = window_mean(in.f_m, in.k, in.n);
  const double head = cn / (std::sqrt(static_cast<double>(in.n)) * en.std);
  return head * (coeff_decay(in.G.C1 * (std::abs(fa) + std::abs(fm) * std::abs(o.e.mean)), in.p,
                             in.k - in.n - in.k0) +
                 in.G.C2 * std::sqrt(o.m) * std::abs(fm) * o.e.std);
}

double corollary_dynamic(const BoundInputs& in) {
  const WindowStats en = window_stats(in.e, in.k, in.n);
  const double cn = std::sqrt(en.std * en.std + en.mean * en.mean + 1.0);
  const double fa = window_mean(in.f_a, in.k, in.n);
  const double fm = window_mean(in.f_m, in.k, in.n);
  const double head = cn / (std::sqrt(static_cast<double>(in.n)) * en.std);
  return head * coeff_decay(in.G.C1 * std::abs(fa) + in.G.C0 * std::abs(fm) * in.xp_k0_norm, in.p,
                            decay_exponent(in));
}

RationalFilter error_filter(const RationalFilter& t) {
  std::vector<double> num = t.num();
  const std::vector<double> den = t.den();
  for (std::size_t i = 0; i < num.size(); ++i) num[i] -= den[i];
  RationalFilter g(num, t.poles());
  double scale = 0.0;
  for (double v : den) scale += std::abs(v);
  double at_one = 0.0;
  for (double v : num) at_one += v;
  if (std::abs(at_one) > 1e-10 * std::max(1.0, scale)) {
    throw std::invalid_argument("error_filter: T(1) != 1, so T - 1 has nonzero steady-state gain");
  }
  return g;
}

VarProductCheck var_product_check(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) throw std::invalid_argument("var_product_check: lengths");
  std::vector<double> sum(a.size()), prod(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum[i] = a[i] + b[i];
    prod[i] = a[i] * b[i];
  }
  const WindowStats sa = stats_of(a), sb = stats_of(b), ss = stats_of(sum), sp = stats_of(prod);
  VarProductCheck c;
  c.lhs1 = std::abs(ss.std * ss.std - sa.std * sa.std - sb.std * sb.std);
  c.rhs1 = 2.0 * std::min(sa.two_norm * sb.std, sb.two_norm * sa.std);
  c.lhs2 = sp.std;
  c.rhs2 = std::sqrt(static_cast<double>(a.size())) * sa.std * sb.std +
           std::abs(sa.mean) * sb.std + std::abs(sb.mean) * sa.std;
  return c;
}

BoundTrace evaluate_bounds(const EstimatorTrace& trace, const RationalFilter& t,
                           std::span<const double> f_a, std::span<const double> f_m, Index k0,
                           BoundVariant variant) {
  const std::size_t len = trace.size();
  if (f_a.size() < len || f_m.size() < len) throw std::invalid_argument("evaluate_bounds: fault length");
  if (k0 < 0) {
    k0 = static_cast<Index>(len);
    for (std::size_t k = 0; k < len; ++k) {
      if (f_a[k] != 0.0 || f_m[k] != 0.0) {
        k0 = static_cast<Index>(k);
        break;
      }
    }
  }
  const RationalFilter g = error_filter(t);
  BoundTrace out;
  out.k0 = k0;
  out.G = bound_constants(g, trace.n);
  out.p = std::abs(t.dominant_pole());
  const bool dynamic = trace.kind == PrefilterKind::kDynamic;

  BoundInputs in;
  in.k0 = k0;
  in.n = trace.n;
  in.f_a = f_a.first(len);
  in.f_m = f_m.first(len);
  in.ez = trace.ez;
  in.e = trace.e;
  in.G = out.G;
  in.p = out.p;
  in.variant = variant;
  if (dynamic && k0 < static_cast<Index>(len)) in.xp_k0_norm = trace.xp_norm[static_cast<std::size_t>(k0)];

  out.rows.resize(len);
  for (std::size_t k = 0; k < len; ++k) {
    BoundRow& row = out.rows[k];
    in.k = static_cast<Index>(k);
    row.k = in.k;
    const FaultEstimate& est = trace.estimate[k];
    row.actual_err = std::hypot(est.f_a_hat - window_mean(f_a, in.k, in.n),
                                est.f_m_hat - window_mean(f_m, in.k, in.n));
    row.coeffs = dynamic ? beta_coeffs(in) : alpha_coeffs(in);
    row.rhs = assemble(in, row.coeffs, std::nullopt);
    row.corollary = dynamic ? corollary_dynamic(in) : corollary_static(in);
    const WindowStats en = window_stats(trace.e, in.k, in.n);
    row.V_n = en.std;
    row.C_n = est.C_n;
    row.excluded = trace.warmup[k] || est.degenerate || std::isinf(row.rhs);
    row.dominated = row.excluded || row.actual_err <= row.rhs + kDominationSlack;
    if (!row.excluded) {
      ++out.checked;
      if (!row.dominated) ++out.violations;
    }
  }
  return out;
}

}  // namespace fault_iso
