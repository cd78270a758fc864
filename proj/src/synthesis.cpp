#include "fault_iso/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "fault_iso/errors.hpp"

namespace fault_iso {

namespace {

void check_roots(std::span<const double> roots) {
  if (roots.empty()) throw ImproperFilter("a(q) needs at least one root");
  for (std::size_t i = 0; i < roots.size(); ++i) {
    if (!(std::abs(roots[i]) < 1.0)) throw ImproperFilter("a(q) root outside the unit disc");
    for (std::size_t j = i + 1; j < roots.size(); ++j) {
      if (std::abs(roots[i] - roots[j]) < RationalFilter::kMinPoleGap) {
        throw ImproperFilter("a(q) roots must be distinct");
      }
    }
  }
}

}  // namespace

std::vector<double> real_roots(const PolyMatrix& a, double imag_tol) {
  if (a.rows() != 1 || a.cols() != 1) throw std::invalid_argument("real_roots: scalar polynomial");
  const int d = a.degree();
  const double lead = a.coeff(d)(0, 0);
  if (d == 0) return {};
  Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(d, d);
  comp.bottomRows(d - 1).leftCols(d - 1).setIdentity();
  for (int i = 0; i < d; ++i) comp(0, i) = -a.coeff(d - 1 - i)(0, 0) / lead;
  const Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
  std::vector<double> out;
  for (Index i = 0; i < d; ++i) {
    const auto ev = es.eigenvalues()(i);
    if (std::abs(ev.imag()) > imag_tol) throw ImproperFilter("a(q) has complex roots");
    out.push_back(ev.real());
  }
  std::sort(out.begin(), out.end());
  return out;
}

DetectorFilter synthesize_detector(const DaeModel& dae, std::span<const double> a_roots, int d_N,
                                   const SynthesisOptions& opts) {
  dae.validate();
  if (d_N < 0) throw std::invalid_argument("synthesize_detector: d_N must be >= 0");
  check_roots(a_roots);

  DetectorFilter out;
  out.d_N = d_N;
  out.a_roots.assign(a_roots.begin(), a_roots.end());
  out.a = PolyMatrix::from_roots(a_roots);
  const int d_a = out.a.degree();
  const Index nr = dae.n_r();
  const int s = d_N + 1;

  const Eigen::MatrixXd hb = dae.H.block_toeplitz(s);
  const Eigen::MatrixXd fb = dae.F.block_toeplitz(s);
  const Eigen::VectorXd f_ones = fb.rowwise().sum();

  const Eigen::BDCSVD<Eigen::MatrixXd> svd(hb, Eigen::ComputeFullU);
  const auto& sv = svd.singularValues();
  const double smax = sv.size() > 0 ? sv(0) : 0.0;
  const Index rank = smax > 0.0 ? (sv.array() > opts.null_cutoff * smax).count() : 0;
  const Index null_dim = hb.rows() - rank;
  if (null_dim == 0) {
    throw NoNullSpace("left null space of the lifted H is empty at d_N = " + std::to_string(d_N));
  }
  const Eigen::MatrixXd z = svd.matrixU().rightCols(null_dim).transpose();
  out.null_dim = null_dim;

  const Eigen::VectorXd g = z * f_ones;
  if (g.norm() <= opts.gain_tol * std::max(1.0, f_ones.norm())) {
    throw GainUnreachable("no null-space filter senses the fault at d_N = " + std::to_string(d_N));
  }
  const double a1 = out.a.eval(1.0)(0, 0);
  const Eigen::RowVectorXd w = (-a1 / g.squaredNorm()) * g.transpose();
  const Eigen::RowVectorXd nbar = w * z;

  std::vector<Eigen::MatrixXd> nc;
  for (int i = 0; i < s; ++i) nc.push_back(nbar.segment(i * nr, nr));
  out.N = PolyMatrix(std::move(nc));
  out.NF = poly_mul(out.N, dae.F);
  out.NL = poly_mul(out.N, dae.L);
  if (out.NF.degree() > d_a || out.NL.degree() > d_a) {
    throw ImproperFilter("deg(N F) = " + std::to_string(out.NF.degree()) + ", deg(N L) = " +
                         std::to_string(out.NL.degree()) + " exceed deg a = " +
                         std::to_string(d_a));
  }

  out.rejection_error = hb.size() ? (nbar * hb).cwiseAbs().maxCoeff() : 0.0;
  if (out.rejection_error > opts.rejection_tol * std::max(1.0, nbar.norm() * hb.norm())) {
    throw Error("synthesized N does not reject the unknowns");
  }

  std::vector<double> tnum(static_cast<std::size_t>(d_a) + 1, 0.0);
  for (int i = 0; i <= out.NF.degree(); ++i) tnum[static_cast<std::size_t>(i)] = -out.NF.coeff(i)(0, 0);
  out.T = RationalFilter(std::move(tnum), out.a_roots);
  if (std::abs(out.T.eval(1.0) - 1.0) > 1e-8) throw Error("synthesized T(1) differs from 1");
  return out;
}

DetectorFilter synthesize_detector(const DaeModel& dae, const PolyMatrix& a, int d_N,
                                   const SynthesisOptions& opts) {
  const std::vector<double> roots = real_roots(a);
  return synthesize_detector(dae, std::span<const double>(roots), d_N, opts);
}

Signal run_residual(const DetectorFilter& filter, const Signal& z) {
  if (z.dim() != filter.NL.cols()) throw std::invalid_argument("run_residual: z dimension");
  return filter_signal(filter.NL, filter.a, z);
}

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_matrix_poly(std::ostringstream& os, const char* name, const PolyMatrix& p) {
  for (int i = 0; i <= p.degree(); ++i) {
    os << name << ' ' << i;
    for (Index c = 0; c < p.cols(); ++c) os << ' ' << fmt(p.coeff(i)(0, c));
    os << '\n';
  }
}

void write_scalar_poly(std::ostringstream& os, const char* name, const std::vector<double>& c) {
  os << name;
  for (double v : c) os << ' ' << fmt(v);
  os << '\n';
}

}  // namespace

std::string export_filter_text(const DetectorFilter& f) {
  std::ostringstream os;
  os << "# fault-iso filter v1\n";
  os << "# N: 1x" << f.N.cols() << ", NL: 1x" << f.NL.cols()
     << "; matrix rows are '<name> <power> <entries>', scalar rows '<name> <coefficients>'\n";
  write_matrix_poly(os, "N", f.N);
  write_matrix_poly(os, "NL", f.NL);
  write_scalar_poly(os, "a", f.a.entry(0, 0));
  write_scalar_poly(os, "T_num", f.T.num());
  write_scalar_poly(os, "T_den", f.T.den());
  write_scalar_poly(os, "a_roots", f.a_roots);
  return os.str();
}

}  // namespace fault_iso
