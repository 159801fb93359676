#include "openness/simulate.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "generators.h"
#include "openness/errors.h"

namespace openness {
namespace {

Eigen::VectorXd Vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

ClosedLoopField Decay(double k) {
  return LinearField(Eigen::MatrixXd::Constant(1, 1, -k));
}

GTEST_TEST(Integrate, ScalarExponential) {
  const Trajectory t = Integrate(Decay(1), Vec({1.0}), 1e-3, 1.0);
  EXPECT_EQ(t.status, IntegrationStatus::kCompleted);
  ASSERT_EQ(t.times.size(), t.states.size());
  ASSERT_EQ(t.times.size(), t.norms.size());
  EXPECT_EQ(t.times.front(), 0.0);
  EXPECT_DOUBLE_EQ(t.times.back(), 1.0);
  EXPECT_NEAR(t.states.back()(0), std::exp(-1.0), 1e-6);
  EXPECT_NEAR(t.states.back()(0), 0.367879, 1e-6);
}

GTEST_TEST(Integrate, LastStepLandsOnHorizon) {
  const Trajectory t = Integrate(Decay(1), Vec({1.0}), 0.3, 1.0);
  EXPECT_EQ(t.times.back(), 1.0);
  EXPECT_EQ(t.times.size(), 5u);
}

GTEST_TEST(Integrate, EquilibriumStaysPut) {
  for (const char* loop : {"threshold_alpha", "counterexample:3"}) {
    const ClosedLoopField f = ClosedLoop(loop);
    const Trajectory t =
        Integrate(f, Eigen::VectorXd::Zero(f.state_dim), 1e-2, 2.0);
    for (const auto& x : t.states) EXPECT_EQ(x.norm(), 0.0) << loop;
    EXPECT_FALSE(t.decay_fit.has_value());
  }
}

GTEST_TEST(Integrate, RungeKuttaOrder) {
  auto error = [](double dt) {
    const Trajectory t = Integrate(Decay(1), Vec({1.0}), dt, 1.0);
    return std::abs(t.states.back()(0) - std::exp(-1.0));
  };
  for (double dt : {0.2, 0.1, 0.05}) {
    EXPECT_GE(error(dt) / error(dt / 2), 12.0) << dt;
  }
}

GTEST_TEST(Integrate, ThresholdAlphaDecay) {
  const Trajectory t =
      Integrate(ClosedLoop("threshold_alpha"), Vec({0.05, 0.05}), 1e-3, 20.0);
  EXPECT_EQ(t.status, IntegrationStatus::kCompleted);
  ASSERT_TRUE(t.decay_fit.has_value());
  EXPECT_GE(t.decay_fit->rate, 0.25);
  EXPECT_LE(t.decay_fit->rate, 0.35);
  EXPECT_LT(t.norms.back(), t.norms.front() * std::exp(-0.25 * 20.0));
}

GTEST_TEST(Integrate, ThresholdAlphaEventuallyMonotone) {
  const Trajectory t =
      Integrate(ClosedLoop("threshold_alpha"), Vec({0.05, 0.05}), 1e-3, 20.0);
  std::size_t i = 0;
  while (i < t.norms.size() && t.norms[i] > 0.05) ++i;
  ASSERT_LT(i, t.norms.size());
  for (std::size_t k = i + 1; k < t.norms.size(); ++k) {
    ASSERT_LE(t.norms[k], t.norms[k - 1]) << "t = " << t.times[k];
  }
}

GTEST_TEST(Integrate, CounterexampleMonotoneDecay) {
  const Trajectory t = Integrate(ClosedLoop("counterexample:3"), Vec({0.1}), 1e-2, 20.0);
  for (std::size_t k = 1; k < t.norms.size(); ++k) {
    EXPECT_LT(t.norms[k], t.norms[k - 1]);
  }
  // Oracle: x' = -x^3 gives x(t) = x0 / sqrt(1 + 2 x0^2 t).
  EXPECT_NEAR(t.states.back()(0), 0.1 / std::sqrt(1 + 2 * 0.01 * 20), 1e-9);
}

GTEST_TEST(Integrate, DivergenceAndErrors) {
  const Trajectory t =
      Integrate(LinearField(Eigen::MatrixXd::Identity(1, 1)), Vec({1.0}), 1e-2, 20.0);
  EXPECT_EQ(t.status, IntegrationStatus::kDiverged);
  EXPECT_GT(t.norms.back(), 1e6);
  EXPECT_LT(t.times.back(), 20.0);
  EXPECT_FALSE(t.message.empty());

  EXPECT_THROW(Integrate(ClosedLoop("threshold_alpha"), Vec({0.2, 0.0}), 1e-3, 1.0),
               InputError);
  IntegrateOptions no_basin;
  no_basin.check_basin = false;
  EXPECT_NO_THROW(Integrate(ClosedLoop("threshold_alpha"), Vec({0.2, 0.0}), 1e-3,
                            0.1, no_basin));
  EXPECT_THROW(Integrate(Decay(1), Vec({1.0}), 0.0, 1.0), InputError);
  EXPECT_THROW(Integrate(Decay(1), Vec({1.0}), 0.5, 0.1), InputError);
  EXPECT_THROW(Integrate(Decay(1), Vec({1.0, 2.0}), 0.1, 1.0), InputError);
}

GTEST_TEST(FitDecay, RecoversRate) {
  const Trajectory t = Integrate(Decay(2), Vec({1.0}), 1e-3, 5.0);
  const auto fit = FitDecay(t);
  ASSERT_TRUE(fit.has_value());
  EXPECT_NEAR(fit->rate, 2.0, 1e-6);
  EXPECT_NEAR(fit->intercept, 0.0, 1e-5);
}

GTEST_TEST(Linearize, ThresholdAlphaAtOrigin) {
  const Linearization lin =
      Linearize(ClosedLoop("threshold_alpha"), Vec({0.0, 0.0}), 1e-5);
  Eigen::Matrix2d expected;
  expected << 0, 1, -0.5, -2;
  EXPECT_LT((lin.jacobian - expected).cwiseAbs().maxCoeff(), 1e-3);
  ASSERT_EQ(lin.eigenvalues.size(), 2u);
  EXPECT_NEAR(lin.eigenvalues[0].real(), -1 - std::sqrt(0.5), 1e-3);
  EXPECT_NEAR(lin.eigenvalues[1].real(), -1 + std::sqrt(0.5), 1e-3);
  EXPECT_NEAR(lin.eigenvalues[0].real(), -1.70711, 1e-3);
  EXPECT_NEAR(lin.eigenvalues[1].real(), -0.29289, 1e-3);
  EXPECT_EQ(lin.eigenvalues[0].imag(), 0.0);
}

GTEST_TEST(Linearize, LinearFieldExact) {
  test::Gen gen(8);
  for (int n = 1; n <= 4; ++n) {
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = gen.Uniform(-3, 3);
    }
    const Linearization lin =
        Linearize(LinearField(a), Eigen::VectorXd::Zero(n), 1e-3);
    EXPECT_LT((lin.jacobian - a).cwiseAbs().maxCoeff(), 1e-9) << n;
  }
}

GTEST_TEST(Linearize, CounterexampleDegenerate) {
  const Linearization lin = Linearize(ClosedLoop("counterexample:3"), Vec({0.0}), 1e-5);
  EXPECT_NEAR(lin.jacobian(0, 0), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(lin.eigenvalues[0]), 0.0, 1e-9);
  EXPECT_THROW(Linearize(ClosedLoop("counterexample:3"), Vec({0.0}), 0.0), InputError);
  EXPECT_THROW(Linearize(ClosedLoop("counterexample:3"), Vec({1.0}), 1e-17),
               InputError);
}

GTEST_TEST(Eigenvalues, ClosedFormMatchesEigen) {
  test::Gen gen(77);
  for (int trial = 0; trial < 300; ++trial) {
    const int n = gen.Int(1, 5);
    Eigen::MatrixXd a(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a(i, j) = gen.Uniform(-5, 5);
    }
    const auto ours = Eigenvalues(a);
    ASSERT_EQ(ours.size(), static_cast<std::size_t>(n));
    // Oracle: match each Eigen eigenvalue to its nearest computed one.
    const Eigen::VectorXcd ref = Eigen::EigenSolver<Eigen::MatrixXd>(a).eigenvalues();
    for (Eigen::Index k = 0; k < ref.size(); ++k) {
      double best = 1e300;
      for (const auto& z : ours) best = std::min(best, std::abs(z - ref(k)));
      EXPECT_LT(best, 1e-7 * (1 + std::abs(ref(k)))) << trial;
    }
    for (std::size_t k = 1; k < ours.size(); ++k) {
      const bool ordered =
          ours[k - 1].real() < ours[k].real() ||
          (ours[k - 1].real() == ours[k].real() && ours[k - 1].imag() <= ours[k].imag());
      EXPECT_TRUE(ordered) << trial;
    }
  }
}

GTEST_TEST(Eigenvalues, RepeatedAndComplexRoots) {
  const auto rep = Eigenvalues(Eigen::Matrix3d::Identity() * 2.0);
  for (const auto& z : rep) EXPECT_NEAR(std::abs(z - 2.0), 0.0, 1e-7);
  Eigen::Matrix2d rot;
  rot << 0, -1, 1, 0;
  const auto c = Eigenvalues(rot);
  EXPECT_NEAR(c[0].imag(), -1.0, 1e-12);
  EXPECT_NEAR(c[1].imag(), 1.0, 1e-12);
}

GTEST_TEST(InverseGrowth, Examples) {
  const InverseGrowthResult a = InverseGrowth(3, std::exp(-3.0));
  EXPECT_NEAR(a.value, std::exp(-1.0), 1e-15);
  EXPECT_NEAR(a.value, 0.367879, 1e-6);
  EXPECT_TRUE(a.cross_check);
  for (int p : {3, 5, 7, 41}) EXPECT_DOUBLE_EQ(InverseGrowth(p, 1.0).value, 1.0);
  const InverseGrowthResult b = InverseGrowth(5, 0.01);
  EXPECT_NEAR(b.value, 0.398107, 1e-6);
  EXPECT_NEAR(b.brute_force, b.value, 1e-6);
  EXPECT_THROW(InverseGrowth(4, 0.1), InputError);
  EXPECT_THROW(InverseGrowth(1, 0.1), InputError);
  EXPECT_THROW(InverseGrowth(3, 0.0), InputError);
}

GTEST_TEST(GainEnvelopeCheck, BoundsIndependentOfP) {
  for (int p : {3, 5, 101}) {
    const GainEnvelopeReport r = GainEnvelopeCheck(p);
    EXPECT_TRUE(r.holds) << p;
    EXPECT_GE(r.min_ratio, 0.75);
    EXPECT_LE(r.max_ratio, 1.25 + 1e-12);
    // Oracle: |u_p(x)| / |x| = 1 + x^(p-1) tends to 1 at the origin.
    EXPECT_NEAR(r.min_ratio, 1.0, 1e-6) << p;
  }
  EXPECT_NEAR(GainEnvelopeCheck(3).max_ratio, 1.25, 1e-12);
}

GTEST_TEST(DefeatScan, SquareRootIsDefeated) {
  const auto p = DefeatScan([](double r) { return std::sqrt(r); });
  ASSERT_TRUE(p.has_value());
  EXPECT_EQ(*p, 3);
  EXPECT_GT(InverseGrowth(*p, std::exp(-*p)).value, std::sqrt(std::exp(-*p)));

  // H(e^-p) = 3 / (3 + p) drops below 1/e once p > 3e - 3.
  const auto q = DefeatScan([](double r) { return 3.0 / (3.0 - std::log(r)); });
  ASSERT_TRUE(q.has_value());
  EXPECT_EQ(*q, 7);
  EXPECT_FALSE(DefeatScan([](double) { return 1.0; }).has_value());
}

GTEST_TEST(ClosedLoopMap, MatchesField) {
  test::Gen gen(4);
  const ClosedLoopField field = ClosedLoop("threshold_alpha");
  const PolynomialSystem map = ClosedLoopMap("threshold_alpha");
  for (int k = 0; k < 100; ++k) {
    const auto z = gen.InBall(2, 0.1, Norm::kL2);
    const Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(z.data(), 2);
    EXPECT_LT((field.evaluate(x) - map.Evaluate(x)).norm(), 1e-12);
  }
  const PolynomialSystem cube = ClosedLoopMap("counterexample:3");
  EXPECT_EQ(cube.Evaluate(Vec({2.0}))(0), -8.0);
  EXPECT_ANY_THROW(ClosedLoop("nonsense"));
  EXPECT_ANY_THROW(ClosedLoop("counterexample:4"));
}

GTEST_TEST(WriteTrajectoryCsv, Format) {
  const Trajectory t = Integrate(ClosedLoop("threshold_alpha"), Vec({0.05, 0.0}),
                                 0.5, 1.0);
  std::ostringstream out;
  WriteTrajectoryCsv(t, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,x1,x2,norm");
  std::getline(in, line);
  EXPECT_EQ(line, "0,0.050000000000000003,0,0.050000000000000003");
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 3);
}

}  // namespace
}  // namespace openness
