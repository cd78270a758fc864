#include "fault_iso/model.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include "fault_iso/errors.hpp"

namespace fault_iso {

void DaeModel::validate() const {
  if (L.rows() != H.rows() || F.rows() != H.rows()) {
    throw std::invalid_argument("DaeModel: H, L, F row counts differ");
  }
  if (F.cols() != 1) throw std::invalid_argument("DaeModel: F must be a single column");
  if (!E) throw std::invalid_argument("DaeModel: E is not set");
}

void OdeModel::normalize() {
  const Index nx = A.rows();
  if (A.cols() != nx) throw std::invalid_argument("OdeModel: A must be square");
  if (G.size() == 0) G = Eigen::MatrixXd::Identity(nx, nx);
  const Index ny = C.rows();
  const Index nu = B_u.cols();
  if (B_d.size() == 0) B_d.resize(nx, D_d.cols());
  const Index nd = B_d.cols();
  if (D_u.size() == 0) D_u = Eigen::MatrixXd::Zero(ny, nu);
  if (D_d.size() == 0) D_d = Eigen::MatrixXd::Zero(ny, nd);
  if (B_f.size() == 0) B_f = Eigen::MatrixXd::Zero(nx, 1);
  if (D_f.size() == 0) D_f = Eigen::MatrixXd::Zero(ny, 1);
  if (B_X.size() == 0) B_X = Eigen::MatrixXd::Zero(1, nx);
  const auto need = [](const Eigen::MatrixXd& m, Index r, Index c, const char* name) {
    if (m.rows() != r || m.cols() != c) {
      throw std::invalid_argument(std::string("OdeModel: bad shape for ") + name);
    }
  };
  need(G, nx, nx, "G");
  need(B_u, nx, nu, "B_u");
  need(B_d, nx, nd, "B_d");
  need(B_f, nx, 1, "B_f");
  need(C, ny, nx, "C");
  need(D_u, ny, nu, "D_u");
  need(D_d, ny, nd, "D_d");
  need(D_f, ny, 1, "D_f");
  if (B_X.cols() != nx) throw std::invalid_argument("OdeModel: bad shape for B_X");
  if (B_Y.size() != 0 && B_Y.cols() != nx) throw std::invalid_argument("OdeModel: bad shape for B_Y");
  if (!E_X) throw std::invalid_argument("OdeModel: E_X is not set");
}

ZMap linear_map(Eigen::VectorXd coeffs) {
  return [c = std::move(coeffs)](const Eigen::VectorXd& z) {
    if (z.size() != c.size()) throw std::invalid_argument("linear E: dimension mismatch");
    return c.dot(z);
  };
}

void attach_linear_e(OdeModel& ode, const Eigen::VectorXd& c) {
  ode.normalize();
  const Index ny = ode.n_y(), nu = ode.n_u();
  if (c.size() != ny + nu) throw std::invalid_argument("linear E: coefficient count != n_z");
  const Eigen::RowVectorXd cy = c.head(ny).transpose();
  const Eigen::RowVectorXd cu = c.tail(nu).transpose();
  ode.B_X = cy * ode.C;
  ode.B_Y.resize(0, 0);
  ode.E_Y = nullptr;
  const Eigen::RowVectorXd gain = cy * ode.D_u + cu;
  ode.E_X = [gain](const Eigen::VectorXd& w, const Eigen::VectorXd& u) { return w.sum() + gain.dot(u); };
}

namespace {

// Least-squares K with K [C D_f D_d] = [B 0 0]; returns the residual norm.
double solve_k(const OdeModel& ode, const Eigen::MatrixXd& b, Eigen::MatrixXd& k) {
  const Index ny = ode.n_y();
  Eigen::MatrixXd m(ny, ode.n_X() + 1 + ode.n_d());
  m << ode.C, ode.D_f, ode.D_d;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(b.rows(), m.cols());
  rhs.leftCols(ode.n_X()) = b;
  if (ny == 0) {
    k.resize(b.rows(), 0);
    return rhs.norm();
  }
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(m.transpose());
  k = cod.solve(rhs.transpose()).transpose();
  return (k * m - rhs).norm();
}

bool nonzero(const Eigen::MatrixXd& m) { return m.size() > 0 && !m.isZero(0.0); }

}  // namespace

DaeModel ode_to_dae(const OdeModel& input, double tol, ConversionReport* report) {
  OdeModel ode = input;
  ode.normalize();
  const bool separate_y = static_cast<bool>(ode.E_Y);
  const Eigen::MatrixXd b_y = separate_y && ode.B_Y.size() != 0 ? ode.B_Y : ode.B_X;

  ConversionReport rep;
  rep.residual_X = solve_k(ode, ode.B_X, rep.K_X);
  rep.residual_Y = solve_k(ode, b_y, rep.K_Y);
  const double tol_x = tol >= 0.0 ? tol : 1e-9 * ode.B_X.norm();
  const double tol_y = tol >= 0.0 ? tol : 1e-9 * b_y.norm();
  if (rep.residual_X > tol_x) {
    throw InfeasibleConversion("no K_X with B_X = K_X C, K_X D_f = 0, K_X D_d = 0 (residual " +
                               std::to_string(rep.residual_X) + ")");
  }
  if (rep.residual_Y > tol_y) {
    throw InfeasibleConversion("no K_Y with B_Y = K_Y C, K_Y D_f = 0, K_Y D_d = 0 (residual " +
                               std::to_string(rep.residual_Y) + ")");
  }
  const bool state_fault = nonzero(ode.B_f);
  const bool output_fault = nonzero(ode.D_f);
  if (state_fault && output_fault && separate_y) {
    throw InfeasibleConversion("a single fault column needs one E; E_X and E_Y differ");
  }

  const Index nx = ode.n_X(), nd = ode.n_d(), ny = ode.n_y(), nu = ode.n_u();
  const Index nr = nx + ny;

  DaeModel dae;
  Eigen::MatrixXd h0 = Eigen::MatrixXd::Zero(nr, nx + nd);
  Eigen::MatrixXd h1 = Eigen::MatrixXd::Zero(nr, nx + nd);
  h0.topLeftCorner(nx, nx) = ode.A;
  h0.topRightCorner(nx, nd) = ode.B_d;
  h0.bottomLeftCorner(ny, nx) = ode.C;
  h0.bottomRightCorner(ny, nd) = ode.D_d;
  h1.topLeftCorner(nx, nx) = -ode.G;
  dae.H = PolyMatrix({h0, h1});

  Eigen::MatrixXd l0 = Eigen::MatrixXd::Zero(nr, ny + nu);
  l0.topRightCorner(nx, nu) = ode.B_u;
  l0.bottomLeftCorner(ny, ny) = -Eigen::MatrixXd::Identity(ny, ny);
  l0.bottomRightCorner(ny, nu) = ode.D_u;
  dae.L = PolyMatrix::constant(l0);

  Eigen::MatrixXd f0(nr, 1);
  f0 << ode.B_f, ode.D_f;
  dae.F = PolyMatrix::constant(f0);

  const bool use_y = output_fault && !state_fault && separate_y;
  const Eigen::MatrixXd k = use_y ? rep.K_Y : rep.K_X;
  const StateMap e = use_y ? ode.E_Y : ode.E_X;
  const Eigen::MatrixXd d_u = ode.D_u;
  dae.E = [k, e, d_u, ny, nu](const Eigen::VectorXd& z) {
    const Eigen::VectorXd y = z.head(ny);
    const Eigen::VectorXd u = z.segment(ny, nu);
    return e(k * (y - d_u * u), u);
  };
  if (report) *report = std::move(rep);
  return dae;
}

namespace {

Index numerical_rank(const Eigen::MatrixXd& m, double tol) {
  if (m.size() == 0) return 0;
  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  return (s.array() > tol * s(0)).count();
}

}  // namespace

bool check_detectability(const DaeModel& dae, int trials, double tol, std::uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("check_detectability: trials must be >= 1");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  Index rank_h = 0, rank_hf = 0;
  for (int t = 0; t < trials; ++t) {
    double q0 = dist(rng);
    while (std::abs(std::abs(q0) - 1.0) < 1e-3) q0 = dist(rng);
    const Eigen::MatrixXd h = dae.H.eval(q0);
    Eigen::MatrixXd hf(h.rows(), h.cols() + 1);
    hf << h, dae.F.eval(q0);
    rank_h = std::max(rank_h, numerical_rank(h, tol));
    rank_hf = std::max(rank_hf, numerical_rank(hf, tol));
  }
  return rank_hf > rank_h;
}

OdeTrajectory simulate_ode(const OdeModel& input, const Signal& u, const Signal* d,
                           std::span<const double> f_a, std::span<const double> f_m,
                           const Eigen::VectorXd& x0) {
  OdeModel ode = input;
  ode.normalize();
  const std::size_t len = u.size();
  if (u.dim() != ode.n_u()) throw std::invalid_argument("simulate_ode: input dimension");
  if (f_a.size() < len || f_m.size() < len) throw std::invalid_argument("simulate_ode: fault length");
  const bool has_d = d != nullptr && ode.n_d() > 0;
  if (has_d && (d->dim() != ode.n_d() || d->size() < len)) {
    throw std::invalid_argument("simulate_ode: disturbance shape");
  }
  const Index nx = ode.n_X(), ny = ode.n_y(), nu = ode.n_u(), nd = ode.n_d();
  const Eigen::PartialPivLU<Eigen::MatrixXd> g(ode.G);
  const StateMap e_y = ode.E_Y ? ode.E_Y : ode.E_X;
  const Eigen::MatrixXd b_y = ode.E_Y && ode.B_Y.size() != 0 ? ode.B_Y : ode.B_X;

  OdeTrajectory out{Signal(static_cast<int>(nx), len), Signal(static_cast<int>(ny), len),
                    Signal(static_cast<int>(ny + nu), len),
                    Signal(static_cast<int>(nx + nd), len), std::vector<double>(len)};
  Eigen::VectorXd x = x0.size() == 0 ? Eigen::VectorXd::Zero(nx) : x0;
  Eigen::VectorXd dk = Eigen::VectorXd::Zero(nd);
  Eigen::VectorXd xz(nx + nd), z(ny + nu);
  for (std::size_t k = 0; k < len; ++k) {
    const auto ki = static_cast<Index>(k);
    const Eigen::VectorXd uk = u.matrix().col(ki);
    if (has_d) dk = d->matrix().col(ki);
    const double delta_x = f_a[k] + ode.E_X(ode.B_X * x, uk) * f_m[k];
    const double delta_y = f_a[k] + e_y(b_y * x, uk) * f_m[k];
    const Eigen::VectorXd y = ode.C * x + ode.D_u * uk + ode.D_d * dk + ode.D_f * delta_y;
    z << y, uk;
    xz << x, dk;
    out.X.set_sample(ki, x);
    out.y.set_sample(ki, y);
    out.z.set_sample(ki, z);
    out.x.set_sample(ki, xz);
    out.delta[k] = delta_x;
    x = g.solve(ode.A * x + ode.B_u * uk + ode.B_d * dk + ode.B_f * delta_x);
  }
  return out;
}

double dae_identity_error(const DaeModel& dae, const Signal& x, const Signal& z,
                          std::span<const double> f_a, std::span<const double> f_m) {
  const int deg = std::max({dae.H.degree(), dae.L.degree(), dae.F.degree()});
  const Index len = static_cast<Index>(z.size());
  std::vector<double> delta(z.size());
  for (Index k = 0; k < len; ++k) {
    const auto ku = static_cast<std::size_t>(k);
    delta[ku] = f_a[ku] + dae.E(z.matrix().col(k)) * f_m[ku];
  }
  const Signal ds(delta);
  double worst = 0.0;
  for (Index k = 0; k + deg < len; ++k) {
    const Eigen::VectorXd v = poly_apply(dae.H, x, k) + poly_apply(dae.L, z, k) +
                              poly_apply(dae.F, ds, k);
    worst = std::max(worst, v.cwiseAbs().maxCoeff());
  }
  return worst;
}

}  // namespace fault_iso
