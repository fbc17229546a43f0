#include "sindy/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "sindy/dynamics.hpp"
#include "support.hpp"

namespace sindy {
namespace {

const Trajectory& lorenz_training() {
  static const Trajectory traj = [] {
    const BenchmarkSystem sys = lorenz_system();
    return generate(sys, sys.default_x0, arange_times(0.0, 10.0, 0.002));
  }();
  return traj;
}

DerivativeMatrix analytic_lorenz(const Trajectory& traj) {
  Matrix d(traj.samples(), 3);
  for (Eigen::Index i = 0; i < traj.samples(); ++i) d.row(i) = lorenz_rhs(traj.states().row(i).transpose()).transpose();
  return {d};
}

FittedModel zero_model(Names vars) {
  const Names features = feature_names(PolynomialLibrary{}, vars);
  return FittedModel(PolynomialLibrary{}, CoefficientMatrix::zeros(static_cast<Eigen::Index>(features.size()),
                                                                   static_cast<Eigen::Index>(vars.size())),
                     features, vars);
}

TEST(Fit, LorenzDefaultsPrintKnownEquations) {
  const FittedModel model = fit(lorenz_training());
  const auto eq = model.equations(3);
  ASSERT_EQ(eq.size(), 3u);
  EXPECT_EQ(eq[0], "x0' = -9.999 x0 + 9.999 x1");
  EXPECT_EQ(eq[1], "x1' = 27.992 x0 + -0.999 x1 + -1.000 x0 x2");
  EXPECT_EQ(eq[2], "x2' = -2.666 x2 + 1.000 x0 x1");
}

TEST(Fit, Sr3ConfigurationWithNames) {
  ModelConfig cfg;
  cfg.differentiator = FiniteDifference{1};
  cfg.library = PolynomialLibrary{3, false, true};
  Sr3Config opt;
  opt.threshold = 0.1;
  opt.nu = 1.0;
  opt.tol = 1e-6;
  cfg.optimizer = opt;
  cfg.variable_names = {"x", "y", "z"};
  const FittedModel model = fit(lorenz_training(), cfg);
  EXPECT_EQ(model.variable_names(), (Names{"x", "y", "z"}));
  EXPECT_EQ(model.equations(3)[2], "z' = -2.675 z + 1.000 x y");
}

TEST(Fit, ExactDerivativesRecoverTrueCoefficients) {
  const Trajectory& traj = lorenz_training();
  const FittedModel model = fit(traj, {}, analytic_lorenz(traj));
  Matrix truth = Matrix::Zero(10, 3);
  // 1, x0, x1, x2, x0^2, x0 x1, x0 x2, x1^2, x1 x2, x2^2
  truth(1, 0) = -10.0;
  truth(2, 0) = 10.0;
  truth(1, 1) = 28.0;
  truth(2, 1) = -1.0;
  truth(6, 1) = -1.0;
  truth(3, 2) = -8.0 / 3.0;
  truth(5, 2) = 1.0;
  EXPECT_LT((model.coefficients().values() - truth).cwiseAbs().maxCoeff(), 1e-6);
  EXPECT_EQ(model.coefficients().support(), BoolMatrix(truth.array() != 0.0));
}

TEST(Fit, TwoSamplesTooFewForDefaultStencil) {
  const Trajectory traj((Vector(2) << 0.0, 0.1).finished(), Matrix::Ones(2, 3));
  try {
    fit(traj);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewSamples);
  }
}

TEST(Fit, OverrideShapeMismatch) {
  const Trajectory traj(arange_times(0.0, 1.0, 0.1), Matrix::Ones(10, 2));
  try {
    fit(traj, {}, DerivativeMatrix{Matrix::Zero(10, 3)});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(Fit, ExternalDifferentiatorAndRegressor) {
  const Trajectory& traj = lorenz_training();
  ModelConfig cfg;
  cfg.differentiator = ExternalDifferentiator{[&](const Matrix&, const Vector&) { return analytic_lorenz(traj); }, "exact"};
  cfg.optimizer = ExternalRegressor{[](const FeatureMatrix& theta, const DerivativeMatrix& xdot) {
                                      return stlsq(theta, xdot, {0.2, 0.0, 10, true});
                                    },
                                    "stlsq-0.2"};
  const FittedModel model = fit(traj, cfg);
  EXPECT_EQ(model.coefficients().nonzeros(), 7);
}

TEST(Predict, MatchesLibraryTimesCoefficients) {
  const Trajectory& traj = lorenz_training();
  const FittedModel model = fit(traj);
  const Matrix theta = polynomial_transform(traj.states(), PolynomialLibrary{}).values;
  const Matrix& xi = model.coefficients().values();
  Matrix expected = Matrix::Zero(theta.rows(), xi.cols());
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    for (Eigen::Index j = 0; j < xi.cols(); ++j) {
      for (Eigen::Index k = 0; k < xi.rows(); ++k) expected(i, j) += theta(i, k) * xi(k, j);
    }
  }
  EXPECT_LT((model.predict(traj.states()).values - expected).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Predict, RhsAgreesRowwise) {
  const Trajectory& traj = lorenz_training();
  const FittedModel model = fit(traj);
  const Matrix predicted = model.predict(traj.states()).values;
  for (Eigen::Index i = 0; i < traj.samples(); i += 37) {
    const Vector r = model.rhs(traj.states().row(i).transpose());
    EXPECT_LT((r - predicted.row(i).transpose()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Predict, ZeroModelGivesZeros) {
  const FittedModel model = zero_model({"a", "b"});
  EXPECT_EQ(model.predict(Matrix::Ones(4, 2)).values, Matrix::Zero(4, 2));
  EXPECT_EQ(model.rhs(Vector::Ones(2)), Vector::Zero(2));
  EXPECT_THROW(model.predict(Matrix::Ones(4, 3)), Error);
}

TEST(Predict, IdentityLibraryIdentityCoefficients) {
  const FittedModel model(IdentityLibrary{}, CoefficientMatrix(Matrix::Identity(3, 3)), {"a", "b", "c"}, {"a", "b", "c"});
  std::mt19937_64 rng(1);
  const Matrix x = testing::gaussian_matrix(rng, 6, 3);
  EXPECT_EQ(model.predict(x).values, x);
}

TEST(Differentiate, DelegatesToStoredMethod) {
  const Trajectory& traj = lorenz_training();
  const FittedModel model = fit(traj);
  EXPECT_EQ(model.differentiate(traj).values, finite_difference(traj).values);

  const Vector t = arange_times(0.0, 1.05, 0.1);
  const Trajectory constant(t, Matrix::Constant(t.size(), 3, 4.0));
  EXPECT_LT(model.differentiate(constant).values.cwiseAbs().maxCoeff(), 1e-12);

  const Trajectory quadratic(t, (t.array().square()).matrix().replicate(1, 3));
  const Matrix d = model.differentiate(quadratic).values;
  for (Eigen::Index i = 1; i + 1 < t.size(); ++i) EXPECT_NEAR(d(i, 0), 2.0 * t[i], 1e-12);
}

TEST(Rhs, NoBiasModelVanishesAtOrigin) {
  ModelConfig cfg;
  cfg.library = PolynomialLibrary{2, false, true};
  const FittedModel model = fit(lorenz_training(), cfg);
  EXPECT_EQ(model.rhs(Vector::Zero(3)), Vector::Zero(3));
}

TEST(Rhs, HandEvaluationAtOnes) {
  const FittedModel model = fit(lorenz_training());
  const Vector r = model.rhs(Vector::Ones(3));
  // Sums of the printed coefficients: -9.999 + 9.999, 27.992 - 0.999 - 1.000, -2.666 + 1.000.
  EXPECT_NEAR(r[0], 0.0, 5e-3);
  EXPECT_NEAR(r[1], 25.993, 5e-3);
  EXPECT_NEAR(r[2], -1.666, 5e-3);
  const Matrix& xi = model.coefficients().values();
  EXPECT_NEAR(r[0], xi.col(0).sum(), 1e-12);
}

TEST(Simulate, ZeroModelIsConstant) {
  const FittedModel model = zero_model({"a", "b"});
  const Vector x0 = (Vector(2) << 1.5, -2.0).finished();
  const Matrix y = model.simulate(x0, arange_times(0.0, 3.0, 0.1));
  for (Eigen::Index i = 0; i < y.rows(); ++i) EXPECT_EQ(Vector(y.row(i).transpose()), x0);
}

TEST(Simulate, LearnedDecayFollowsExponential) {
  const BenchmarkSystem sys = decay1d_system();
  const Trajectory data = generate(sys, sys.default_x0, arange_times(0.0, 5.0, 0.001));
  const FittedModel model = fit(data);
  ASSERT_EQ(model.equations()[0], "x0' = -1.000 x0");
  const Vector t = arange_times(0.0, 5.0 + 0.01, 0.01);
  const Matrix y = model.simulate((Vector(1) << 1.0).finished(), t);
  EXPECT_EQ(y(0, 0), 1.0);
  EXPECT_LT((y.col(0) - (-t.array()).exp().matrix()).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(Simulate, DeterministicAndStartsAtX0) {
  const FittedModel model = fit(lorenz_training());
  const Vector x0 = (Vector(3) << 8.0, 7.0, 15.0).finished();
  const Vector t = arange_times(0.0, 3.0, 0.002);
  const Matrix a = model.simulate(x0, t);
  const Matrix b = model.simulate(x0, t);
  EXPECT_EQ(a, b);
  EXPECT_EQ(Vector(a.row(0).transpose()), x0);
  EXPECT_THROW(model.simulate(Vector::Ones(2), t), Error);
}

TEST(Equations, ZeroModelFormatting) {
  EXPECT_EQ(zero_model({"u"}).equations(3), (std::vector<std::string>{"u' = 0.000"}));
  EXPECT_EQ(zero_model({"u"}).equations(1), (std::vector<std::string>{"u' = 0.0"}));
  EXPECT_THROW(zero_model({"u"}).equations(0), Error);
}

TEST(Equations, ColumnOrderAndNegativeTerms) {
  Matrix xi = Matrix::Zero(3, 2);
  xi(2, 0) = 3.0;
  xi(0, 0) = 0.5;
  xi(1, 0) = -1.25;
  xi(2, 1) = -0.0004;
  const FittedModel model(PolynomialLibrary{1, true, true}, CoefficientMatrix(xi), {"1", "a", "b"}, {"a", "b"});
  EXPECT_EQ(model.equations(3), (std::vector<std::string>{"a' = 0.500 1 + -1.250 a + 3.000 b", "b' = -0.000 b"}));
  EXPECT_EQ(model.equations(4)[1], "b' = -0.0004 b");
}

TEST(Score, PerfectAndMeanPredictions) {
  std::mt19937_64 rng(2);
  const Matrix ref = testing::gaussian_matrix(rng, 30, 3);
  EXPECT_DOUBLE_EQ(FittedModel::r2_score(ref, ref), 1.0);
  const Matrix means = ref.colwise().mean().replicate(30, 1);
  EXPECT_NEAR(FittedModel::r2_score(ref, means), 0.0, 1e-12);
}

TEST(Score, LorenzFitOnTrainingData) {
  const Trajectory& traj = lorenz_training();
  const FittedModel model = fit(traj);
  EXPECT_GT(model.score(traj, analytic_lorenz(traj)), 0.999);
  EXPECT_GT(model.score(traj), 0.999);
}

}  // namespace
}  // namespace sindy
