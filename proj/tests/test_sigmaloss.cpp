#include <gtest/gtest.h>

#include "epca/sigmaloss.hpp"
#include "test_support.hpp"

using namespace epca;
using sigmaloss::SigmaLossParams;

namespace {

// Weighted location problem: residual_i = x_i - theta, theta in R^p.
struct Location {
  Eigen::MatrixXd points;  // p x n
  Eigen::VectorXd weights;

  Eigen::MatrixXd residuals(const Eigen::VectorXd& theta) const {
    return points.colwise() - theta;
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& c) const { return points * c / c.sum(); }

  sigmaloss::IrlsResult<Eigen::VectorXd> run(const SigmaLossParams& p, double tol = 1e-9,
                                             int max_iter = 100) const {
    return sigmaloss::irls_solve<Eigen::VectorXd>(
        [this](const Eigen::VectorXd& t) { return residuals(t); },
        [this](const Eigen::VectorXd& c) { return solve(c); }, weights, p,
        Eigen::VectorXd(points.rowwise().mean()), tol, max_iter);
  }
};

double location_objective_1d(const Eigen::VectorXd& x, double theta, double sigma) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) total += testkit::sigma_loss_ref(std::abs(x(i) - theta), sigma);
  return total;
}

}  // namespace

TEST(SigmaLossParams, RejectsNonPositive) {
  EXPECT_THROW(SigmaLossParams(0.0), ValidationError);
  EXPECT_THROW(SigmaLossParams(-1.0), ValidationError);
  EXPECT_THROW(SigmaLossParams(std::numeric_limits<double>::infinity()), ValidationError);
  EXPECT_THROW(SigmaLossParams(std::nan("")), ValidationError);
}

TEST(SigmaNormVector, Examples) {
  for (double s : {0.01, 1.0, 7.0, 1e6}) {
    EXPECT_NEAR(sigmaloss::sigma_norm_vector(Eigen::Vector2d(0.6, 0.8), SigmaLossParams(s)), 1.0, 1e-12);
  }
  EXPECT_EQ(sigmaloss::sigma_norm_vector(Eigen::Vector3d::Zero(), SigmaLossParams(1.0)), 0.0);
  EXPECT_NEAR(sigmaloss::sigma_norm_vector(Eigen::Vector2d(3, 0), SigmaLossParams(1.0)), 4.5, 1e-15);
  EXPECT_THROW(sigmaloss::sigma_norm_vector(Eigen::Vector2d(std::nan(""), 0), SigmaLossParams(1.0)),
               ValidationError);
}

TEST(SigmaNormMatrix, Examples) {
  EXPECT_NEAR(sigmaloss::sigma_norm_matrix(Eigen::Matrix2d::Identity(), SigmaLossParams(0.3)), 2.0, 1e-15);
  EXPECT_EQ(sigmaloss::sigma_norm_matrix(Eigen::Matrix3d::Zero(), SigmaLossParams(1.0)), 0.0);
  Eigen::Matrix2d a;
  a << 1, 0, 0, 3;
  EXPECT_NEAR(sigmaloss::sigma_norm_matrix(a, SigmaLossParams(1.0)), 5.5, 1e-15);
}

TEST(IrlsCoefficient, Examples) {
  EXPECT_NEAR(sigmaloss::irls_coefficient(1.0, SigmaLossParams(1.0)), 0.75, 1e-15);
  EXPECT_NEAR(sigmaloss::irls_coefficient(0.0, SigmaLossParams(1.0)), 2.0, 1e-15);
  EXPECT_NEAR(sigmaloss::irls_coefficient(0.0, SigmaLossParams(0.5)), 3.0, 1e-15);
  EXPECT_THROW(sigmaloss::irls_coefficient(-1.0, SigmaLossParams(1.0)), ValidationError);
}

TEST(IrlsCoefficient, FiniteAtZeroForTinySigma) {
  const double d = sigmaloss::irls_coefficient(0.0, SigmaLossParams(1e-200));
  EXPECT_TRUE(std::isfinite(d));
  EXPECT_NEAR(d, 0.5e14, 1e-6 * 0.5e14);
  // Above the clamp threshold the exact value (1 + sigma) / sigma is kept.
  EXPECT_NEAR(sigmaloss::irls_coefficient(0.0, SigmaLossParams(1e-8)), (1 + 1e-8) / 1e-8, 1e-2);
}

TEST(SigmaLoss, LimitsToL21AndFrobenius) {
  core::RngHandle rng(31);
  for (int trial = 0; trial < 30; ++trial) {
    Eigen::MatrixXd a = testkit::gaussian(rng, 5, 8);
    double l21 = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      a.col(j) *= std::pow(10.0, rng.uniform(-1.0, 1.0)) / a.col(j).norm();
      l21 += a.col(j).norm();
    }
    EXPECT_LE(std::abs(sigmaloss::sigma_norm_matrix(a, SigmaLossParams(1e-8)) - l21), 1e-6 * l21);
    const double ratio = sigmaloss::sigma_norm_matrix(a, SigmaLossParams(1e8)) / a.squaredNorm();
    EXPECT_NEAR(ratio, 1.0, 1e-6);
  }
}

TEST(SigmaLoss, NotHomogeneous) {
  core::RngHandle rng(32);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd a = testkit::gaussian(rng, 4, 6);
    const SigmaLossParams p(std::pow(10.0, rng.uniform(-2.0, 2.0)));
    EXPECT_GT(std::abs(sigmaloss::sigma_norm_matrix(2.0 * a, p) - 2.0 * sigmaloss::sigma_norm_matrix(a, p)), 0.0);
  }
}

TEST(SigmaLoss, GradientMatchesFiniteDifferences) {
  core::RngHandle rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::VectorXd a = testkit::gaussian(rng, 6, 1).col(0);
    const SigmaLossParams p(std::pow(10.0, rng.uniform(-2.0, 2.0)));
    const Eigen::VectorXd analytic = 2.0 * sigmaloss::irls_coefficient(a.norm(), p) * a;
    Eigen::VectorXd numeric(a.size());
    const double h = 1e-6;
    for (Eigen::Index i = 0; i < a.size(); ++i) {
      Eigen::VectorXd up = a, down = a;
      up(i) += h;
      down(i) -= h;
      numeric(i) = (testkit::sigma_loss_ref(up.norm(), p.sigma()) -
                    testkit::sigma_loss_ref(down.norm(), p.sigma())) / (2 * h);
    }
    EXPECT_LE((analytic - numeric).norm(), 1e-5 * analytic.norm());
  }
}

TEST(SigmaLoss, SurrogateMajorizes) {
  core::RngHandle rng(34);
  for (int trial = 0; trial < 10000; ++trial) {
    const double x = rng.uniform(0.0, 10.0);
    const double y = rng.uniform(0.0, 10.0);
    const double s = std::pow(10.0, rng.uniform(-3.0, 3.0));
    const double dy = (y + 2 * s) / (2 * (y + s) * (y + s));
    const double lhs = x * x / (x + s) - dy * x * x;
    const double rhs = y * y / (y + s) - dy * y * y;
    ASSERT_GE(rhs - lhs, -1e-12) << "x=" << x << " y=" << y << " sigma=" << s;
  }
}

TEST(IrlsSolve, ZeroResidualConvergesImmediately) {
  Location loc{Eigen::MatrixXd::Constant(2, 4, 3.0), Eigen::VectorXd::Ones(4)};
  const auto res = loc.run(SigmaLossParams(1.0));
  EXPECT_EQ(res.iterations, 1);
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.objective_trace.back(), 0.0);
}

TEST(IrlsSolve, LocationBetweenMeanAndMedian) {
  Eigen::MatrixXd pts(1, 3);
  pts << 0, 0, 10;
  Location loc{pts, Eigen::VectorXd::Ones(3)};
  const auto res = loc.run(SigmaLossParams(1.0), 1e-15, 500);

  // Dense grid oracle over [0, 10] with step 1e-4.
  double best_theta = 0.0, best = std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 100000; ++i) {
    const double t = i * 1e-4;
    const double v = location_objective_1d(pts.row(0), t, 1.0);
    if (v < best) {
      best = v;
      best_theta = t;
    }
  }
  EXPECT_NEAR(best_theta, 0.40795, 1e-4);  // frozen from the grid
  EXPECT_NEAR(res.params(0), best_theta, 2e-4);
  EXPECT_GT(res.params(0), 0.0);
  EXPECT_LT(res.params(0), 10.0 / 3.0);
}

TEST(IrlsSolve, LargeSigmaGivesMean) {
  Eigen::MatrixXd pts(1, 3);
  pts << 0, 0, 10;
  Location loc{pts, Eigen::VectorXd::Ones(3)};
  const auto res = loc.run(SigmaLossParams(1e8));
  EXPECT_NEAR(res.params(0), 10.0 / 3.0, 1e-3);
}

TEST(IrlsSolve, MonotoneDescent) {
  core::RngHandle rng(35);
  for (int trial = 0; trial < 30; ++trial) {
    Location loc{testkit::gaussian(rng, 3, 25), Eigen::VectorXd::Ones(25)};
    for (Eigen::Index i = 0; i < 5; ++i) loc.points.col(i) *= 20.0;
    for (Eigen::Index i = 0; i < 25; ++i) loc.weights(i) = rng.uniform(0.1, 2.0);
    const auto res = loc.run(SigmaLossParams(std::pow(10.0, rng.uniform(-2.0, 2.0))), 0.0, 60);
    for (std::size_t t = 1; t < res.objective_trace.size(); ++t) {
      EXPECT_LE(res.objective_trace[t], res.objective_trace[t - 1] * (1 + 1e-9));
    }
  }
}

TEST(IrlsSolve, InvalidMultipliers) {
  Location loc{Eigen::MatrixXd::Ones(1, 3), Eigen::Vector3d(1, -1, 1)};
  EXPECT_THROW(loc.run(SigmaLossParams(1.0)), ValidationError);
}

TEST(IrlsSolve, NonExactSolverTripsInvariant) {
  Eigen::MatrixXd pts(1, 3);
  pts << 0, 1, 2;
  const auto bad = [&]() {
    return sigmaloss::irls_solve<Eigen::VectorXd>(
        [&](const Eigen::VectorXd& t) { return Eigen::MatrixXd(pts.colwise() - t); },
        [](const Eigen::VectorXd&) { return Eigen::VectorXd::Constant(1, 50.0); },
        Eigen::VectorXd::Ones(3), SigmaLossParams(1.0), Eigen::VectorXd::Constant(1, 1.0));
  };
  EXPECT_THROW(bad(), InvariantError);
}
