#pragma once

#include <span>
#include <string>
#include <vector>

#include "fault_iso/lti.hpp"
#include "fault_iso/model.hpp"
#include "fault_iso/polymat.hpp"

namespace fault_iso {

struct SynthesisOptions {
  double null_cutoff = 1e-10;  // singular values below cutoff * sigma_max span the null space
  double gain_tol = 1e-10;
  double rejection_tol = 1e-8;
};

/// Residual generator r = a^{-1}(q) N(q) L(q)[z] with T = -N F / a.
struct DetectorFilter {
  PolyMatrix N{1, 0};
  PolyMatrix a{1, 1};
  PolyMatrix NF{1, 1};
  PolyMatrix NL{1, 0};
  RationalFilter T{{0.0}, {}};
  std::vector<double> a_roots;
  int d_N = 0;
  Index null_dim = 0;
  double rejection_error = 0.0;  // max |N_bar H_bar|
};

/// Monic a(q) = prod (q - a_roots[i]); roots real, distinct, inside the unit disc.
DetectorFilter synthesize_detector(const DaeModel& dae, std::span<const double> a_roots, int d_N,
                                   const SynthesisOptions& opts = {});
/// Same, with a(q) given by coefficients; it is rescaled to monic form.
DetectorFilter synthesize_detector(const DaeModel& dae, const PolyMatrix& a, int d_N,
                                   const SynthesisOptions& opts = {});

/// Real roots of a scalar polynomial; throws ImproperFilter if any root is complex.
std::vector<double> real_roots(const PolyMatrix& a, double imag_tol = 1e-9);

Signal run_residual(const DetectorFilter& filter, const Signal& z);

/// Plain-text coefficient listing, ascending powers.
std::string export_filter_text(const DetectorFilter& filter);

}  // namespace fault_iso
