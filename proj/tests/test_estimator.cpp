#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "fault_iso/errors.hpp"
#include "fault_iso/estimator.hpp"
#include "fault_iso/vehicle.hpp"
#include "oracles.hpp"

namespace fault_iso {
namespace {

std::vector<double> gaussian(std::mt19937_64& rng, std::size_t n, double mean = 0.0, double sd = 1.0) {
  std::normal_distribution<double> g(mean, sd);
  std::vector<double> v(n);
  for (double& x : v) x = g(rng);
  return v;
}

RegressionConfig config(Index n, DegeneratePolicy policy = DegeneratePolicy::kHoldLast) {
  RegressionConfig c;
  c.n = n;
  c.policy = policy;
  return c;
}

TEST(Regress, TwoPointInterpolation) {
  const std::vector<double> e{1.0, 2.0}, r{3.0, 5.0};
  const FaultEstimate f = regress(e, r, config(2));
  EXPECT_NEAR(f.f_a_hat, 1.0, 1e-15);
  EXPECT_NEAR(f.f_m_hat, 2.0, 1e-15);
  EXPECT_FALSE(f.degenerate);
}

TEST(Regress, FlatWindowIsDegenerate) {
  const std::vector<double> e{1.0, 1.0, 1.0}, r{0.3, -2.0, 7.0};
  FaultEstimate prev;
  prev.f_a_hat = 0.25;
  prev.f_m_hat = -4.0;
  const FaultEstimate held = regress(e, r, config(3), &prev);
  EXPECT_TRUE(held.degenerate);
  EXPECT_EQ(held.f_a_hat, 0.25);
  EXPECT_EQ(held.f_m_hat, -4.0);
  EXPECT_THROW(regress(e, r, config(3, DegeneratePolicy::kEmitError)), DegenerateWindow);
  EXPECT_THROW(regress(e, r, config(4)), std::invalid_argument);
  RegressionConfig bad = config(1);
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  RegressionConfig neg = config(5);
  neg.epsilon = 0.0;
  EXPECT_THROW(neg.validate(), std::invalid_argument);
}

TEST(Regress, MatchesLeastSquaresOracles) {
  std::mt19937_64 rng(61);
  for (int t = 0; t < 1000; ++t) {
    const auto e = gaussian(rng, 10, t % 3 ? 0.0 : 5.0, 1.0 + t % 4);
    const auto r = gaussian(rng, 10, 0.7, 2.0);
    const FaultEstimate f = regress(e, r, config(10));
    const Eigen::Vector2d svd = oracle::lstsq(e, r);
    const Eigen::Vector2d ne = oracle::normal_equations(e, r);
    EXPECT_NEAR(f.f_a_hat, svd(0), 1e-10 * std::max(1.0, std::abs(svd(0))));
    EXPECT_NEAR(f.f_m_hat, svd(1), 1e-10 * std::max(1.0, std::abs(svd(1))));
    EXPECT_NEAR(f.f_a_hat, ne(0), 1e-9 * std::max(1.0, std::abs(ne(0))));
    EXPECT_NEAR(f.f_m_hat, ne(1), 1e-9 * std::max(1.0, std::abs(ne(1))));
    EXPECT_NEAR(f.C_n, std::sqrt(std::pow(oracle::stddev(e), 2) + std::pow(oracle::mean(e), 2) + 1.0), 1e-12 * f.C_n);
  }
}

TEST(Regress, ExactRecoveryOfAffineModel) {
  std::mt19937_64 rng(62);
  std::uniform_int_distribution<Index> nn(2, 200);
  std::uniform_real_distribution<double> c(-10.0, 10.0);
  for (int t = 0; t < 1000; ++t) {
    const Index n = nn(rng);
    const auto e = gaussian(rng, static_cast<std::size_t>(n), c(rng), 0.1 + std::abs(c(rng)));
    const double c1 = c(rng), c2 = c(rng);
    std::vector<double> r(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) r[i] = c1 + e[i] * c2;
    const FaultEstimate f = regress(e, r, config(n));
    ASSERT_FALSE(f.degenerate);
    EXPECT_NEAR(f.f_a_hat, c1, 1e-10 * std::max(1.0, std::abs(c1)));
    EXPECT_NEAR(f.f_m_hat, c2, 1e-10 * std::max(1.0, std::abs(c2)));
  }
}

TEST(Regress, LinearInSecondArgument) {
  std::mt19937_64 rng(63);
  std::uniform_real_distribution<double> c(-3.0, 3.0);
  for (int t = 0; t < 500; ++t) {
    const auto e = gaussian(rng, 12, 1.0, 2.0);
    const auto r = gaussian(rng, 12), s = gaussian(rng, 12);
    const double a = c(rng), b = c(rng);
    std::vector<double> mix(12);
    for (std::size_t i = 0; i < 12; ++i) mix[i] = a * r[i] + b * s[i];
    const FaultEstimate fr = regress(e, r, config(12)), fs = regress(e, s, config(12)),
                        fm = regress(e, mix, config(12));
    EXPECT_NEAR(fm.f_a_hat, a * fr.f_a_hat + b * fs.f_a_hat, 1e-10);
    EXPECT_NEAR(fm.f_m_hat, a * fr.f_m_hat + b * fs.f_m_hat, 1e-10);
  }
}

TEST(Regress, ErrorBoundForAffineSignals) {
  std::mt19937_64 rng(64);
  std::uniform_int_distribution<Index> nn(2, 60);
  for (int t = 0; t < 1000; ++t) {
    const Index n = nn(rng);
    const auto e = gaussian(rng, static_cast<std::size_t>(n), t % 2 ? 3.0 : 0.0, 0.5 + t % 3);
    const auto y1 = gaussian(rng, static_cast<std::size_t>(n), 1.0, 0.4);
    const auto y2 = gaussian(rng, static_cast<std::size_t>(n), -0.5, 0.2);
    std::vector<double> r(e.size());
    for (std::size_t i = 0; i < e.size(); ++i) r[i] = y1[i] + e[i] * y2[i];
    const FaultEstimate f = regress(e, r, config(n));
    const double err = std::hypot(f.f_a_hat - oracle::mean(y1), f.f_m_hat - oracle::mean(y2));
    const double bound = f.C_n / oracle::stddev(e) * (oracle::stddev(y1) + oracle::stddev(y2) * oracle::inf_norm(e));
    EXPECT_LE(err, bound * (1.0 + 1e-12));
    const double norm = std::hypot(f.f_a_hat, f.f_m_hat);
    EXPECT_LE(norm, f.C_n / (std::sqrt(static_cast<double>(n)) * oracle::stddev(e)) * oracle::two_norm(r) * (1.0 + 1e-12));
  }
}

TEST(RegressionConstant, Examples) {
  const std::vector<double> zeros(5, 0.0), pm{1.0, -1.0}, c(4, 3.0);
  EXPECT_DOUBLE_EQ(regression_constant(zeros), 1.0);
  EXPECT_DOUBLE_EQ(regression_constant(pm), std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(regression_constant(c), std::sqrt(10.0));
}

TEST(PinvNorm, Examples) {
  const std::vector<double> pm{1.0, -1.0};
  EXPECT_NEAR(pinv_norm(pm), std::sqrt(0.5), 1e-15);
  EXPECT_NEAR(pinv_norm(pm), oracle::pinv_norm_svd(pm), 1e-14);
  const std::vector<double> flat(6, 2.0);
  EXPECT_THROW(pinv_norm(flat), DegenerateWindow);
}

TEST(PinvNorm, MatchesSvdAndBound) {
  std::mt19937_64 rng(65);
  std::uniform_int_distribution<Index> nn(2, 100);
  std::uniform_real_distribution<double> scale(-20.0, 20.0);
  for (int t = 0; t < 1000; ++t) {
    const auto e = gaussian(rng, static_cast<std::size_t>(nn(rng)), scale(rng), 0.05 + std::abs(scale(rng)));
    const double got = pinv_norm(e);
    EXPECT_NEAR(got, oracle::pinv_norm_svd(e), 1e-10 * got);
    const double n = static_cast<double>(e.size());
    EXPECT_LE(got, regression_constant(e) / (std::sqrt(n) * oracle::stddev(e)) * (1.0 + 1e-12));
    // scaling the window
    const double lambda = 1.0 + std::abs(scale(rng));
    std::vector<double> es(e);
    for (double& v : es) v *= lambda;
    EXPECT_NEAR(pinv_norm(es), oracle::pinv_norm_svd(es), 1e-10 * pinv_norm(es));
  }
}

TEST(Prefilter, StaticAndDynamic) {
  const RationalFilter t({0.15, 0.25}, {0.6, -0.2});
  const double gain = t.eval(1.0);
  const RationalFilter unit({0.15 / gain, 0.25 / gain}, {0.6, -0.2});
  Prefilter st(PrefilterKind::kStatic, unit);
  EXPECT_EQ(st.step(0.37), 0.37);
  EXPECT_EQ(st.step(-2.0), -2.0);

  // step response error of a unit-gain filter: -2 sum_i r_i p_i^k / (1 - p_i)
  Prefilter dyn(PrefilterKind::kDynamic, unit);
  double kappa = 0.0;
  for (int i = 0; i < unit.order(); ++i) {
    kappa += 2.0 * std::abs(unit.residues()[static_cast<std::size_t>(i)]) /
             (1.0 - std::abs(unit.poles()[static_cast<std::size_t>(i)]));
  }
  double e = 0.0;
  for (int k = 0; k < 120; ++k) {
    e = dyn.step(2.0);
    EXPECT_LE(std::abs(e - 2.0), kappa * std::pow(0.6, k) + 1e-15) << "k=" << k;
  }
  EXPECT_NEAR(e, 2.0, 1e-12);

  Prefilter imp(PrefilterKind::kDynamic, unit);
  const auto h = unit.impulse_response(50);
  for (int k = 0; k < 50; ++k) EXPECT_NEAR(imp.step(k == 0 ? 1.0 : 0.0), h[static_cast<std::size_t>(k)], 1e-15);
}

struct ToyPlant {
  DaeModel dae;
  DetectorFilter filter;
  Signal z;
  std::vector<double> fa, fm;
};

// x(k+1) = 0.5 x + u + f_a + u f_m, z = [x; u].
ToyPlant toy_plant(std::size_t len, std::size_t k0, double fa, double fm) {
  ToyPlant p;
  OdeModel ode;
  ode.A = Eigen::MatrixXd::Constant(1, 1, 0.5);
  ode.B_u = Eigen::MatrixXd::Ones(1, 1);
  ode.B_f = Eigen::MatrixXd::Ones(1, 1);
  ode.C = Eigen::MatrixXd::Ones(1, 1);
  ode.E_X = [](const Eigen::VectorXd&, const Eigen::VectorXd& u) { return u(0); };
  ode.normalize();
  p.dae = ode_to_dae(ode);
  const std::vector<double> roots{0.6};
  p.filter = synthesize_detector(p.dae, roots, 1);
  const Signal u = gen_sine(1.0, 0.3, 0.01, len);
  p.fa.assign(len, 0.0);
  p.fm.assign(len, 0.0);
  for (std::size_t k = k0; k < len; ++k) {
    p.fa[k] = fa;
    p.fm[k] = fm;
  }
  p.z = simulate_ode(ode, u, nullptr, p.fa, p.fm).z;
  return p;
}

TEST(RunEstimator, DynamicConvergesOnToyPlant) {
  const std::size_t k0 = 200;
  const ToyPlant p = toy_plant(k0 + 800, k0, 0.3, -0.2);
  EXPECT_NEAR(p.filter.T.eval(1.0), 1.0, 1e-12);
  const EstimatorTrace tr = run_estimator(p.filter, PrefilterKind::kDynamic, p.z, p.dae.E, config(10));
  for (std::size_t k = k0 + 500; k < tr.size(); ++k) {
    EXPECT_NEAR(tr.estimate[k].f_a_hat, 0.3, 1e-6) << "k=" << k;
    EXPECT_NEAR(tr.estimate[k].f_m_hat, -0.2, 1e-6) << "k=" << k;
  }
  EXPECT_EQ(tr.xp.cols(), static_cast<Index>(tr.size()));
  EXPECT_NEAR(tr.xp_norm[k0 + 3], tr.xp.col(static_cast<Index>(k0 + 3)).norm(), 0.0);
}

TEST(RunEstimator, StaticKeepsOscillating) {
  const std::size_t k0 = 200;
  const ToyPlant p = toy_plant(k0 + 1200, k0, 0.3, -0.2);
  const EstimatorTrace st = run_estimator(p.filter, PrefilterKind::kStatic, p.z, p.dae.E, config(10));
  const EstimatorTrace dy = run_estimator(p.filter, PrefilterKind::kDynamic, p.z, p.dae.E, config(10));
  double worst_static = 0.0, worst_dynamic = 0.0;
  for (std::size_t k = k0 + 800; k < st.size(); ++k) {
    worst_static = std::max(worst_static, std::hypot(st.estimate[k].f_a_hat - 0.3, st.estimate[k].f_m_hat + 0.2));
    worst_dynamic = std::max(worst_dynamic, std::hypot(dy.estimate[k].f_a_hat - 0.3, dy.estimate[k].f_m_hat + 0.2));
  }
  EXPECT_GT(worst_static, 1e-3);
  EXPECT_GT(worst_static, 100.0 * worst_dynamic);
}

TEST(RunEstimator, HealthyBicycleEstimatesZero) {
  Scenario s;
  s.steps = 1200;
  const CaseStudy cs = build_case_study({}, s);
  const std::vector<double> roots{-0.85, -0.59, -0.58};
  const DetectorFilter f = synthesize_detector(cs.dae, roots, 3);
  for (PrefilterKind kind : {PrefilterKind::kStatic, PrefilterKind::kDynamic}) {
    const EstimatorTrace tr = run_estimator(f, kind, cs.z, cs.dae.E, config(10));
    for (std::size_t k = 200; k < tr.size(); ++k) {
      if (tr.estimate[k].degenerate) continue;
      EXPECT_LE(std::abs(tr.estimate[k].f_a_hat), 1e-6);
      EXPECT_LE(std::abs(tr.estimate[k].f_m_hat), 1e-3);
    }
  }
}

TEST(RunEstimator, WarmupAndPolicy) {
  const ToyPlant p = toy_plant(300, 100, 0.1, 0.0);
  const EstimatorTrace tr = run_estimator(p.filter, PrefilterKind::kStatic, p.z, p.dae.E, config(10));
  for (std::size_t k = 0; k < tr.size(); ++k) EXPECT_EQ(tr.warmup[k], k < 9);
  // u(0) = 0 makes the first windows flat; warm-up never aborts
  EXPECT_NO_THROW(run_estimator(p.filter, PrefilterKind::kStatic, p.z, p.dae.E, config(10, DegeneratePolicy::kEmitError)));
  // a flat post-warm-up window does
  Eigen::MatrixXd zc = p.z.matrix();
  zc.row(1).tail(100).setConstant(0.5);
  EXPECT_THROW(run_estimator(p.filter, PrefilterKind::kStatic, Signal(zc), p.dae.E, config(10, DegeneratePolicy::kEmitError)),
               DegenerateWindow);
  const EstimatorTrace held = run_estimator(p.filter, PrefilterKind::kStatic, Signal(zc), p.dae.E, config(10));
  EXPECT_TRUE(held.estimate.back().degenerate);
  EXPECT_EQ(held.estimate.back().f_a_hat, held.estimate[199 + 9].f_a_hat);
}

}  // namespace
}  // namespace fault_iso
