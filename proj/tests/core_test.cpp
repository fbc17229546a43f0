#include "sindy/core.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>

namespace sindy {
namespace {

Matrix sample_states() {
  Matrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  return x;
}

TEST(ValidateTrajectory, AcceptsWellFormedInput) {
  const Vector t = (Vector(3) << 0.0, 0.1, 0.2).finished();
  const Trajectory traj = validate_trajectory(t, sample_states());
  EXPECT_EQ(traj.samples(), 3);
  EXPECT_EQ(traj.dimension(), 2);
  EXPECT_EQ(traj.variable_names(), (Names{"x0", "x1"}));
  EXPECT_EQ(traj.times().size(), traj.states().rows());
}

TEST(ValidateTrajectory, RejectsDuplicateTime) {
  const Vector t = (Vector(3) << 0.0, 0.0, 0.1).finished();
  try {
    validate_trajectory(t, sample_states());
    FAIL() << "expected NonMonotonicTime";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonMonotonicTime);
  }
}

TEST(ValidateTrajectory, RejectsNaN) {
  Matrix x = sample_states();
  x(1, 1) = std::numeric_limits<double>::quiet_NaN();
  const Vector t = (Vector(3) << 0.0, 0.1, 0.2).finished();
  try {
    validate_trajectory(t, x);
    FAIL() << "expected NonFinite";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonFinite);
  }
}

TEST(ValidateTrajectory, RejectsInfiniteTime) {
  const Vector t = (Vector(3) << 0.0, 0.1, std::numeric_limits<double>::infinity()).finished();
  EXPECT_THROW(validate_trajectory(t, sample_states()), Error);
}

TEST(ValidateTrajectory, RejectsLengthMismatch) {
  const Vector t = (Vector(2) << 0.0, 0.1).finished();
  try {
    validate_trajectory(t, sample_states());
    FAIL() << "expected ShapeMismatch";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ShapeMismatch);
  }
}

TEST(ValidateTrajectory, RejectsWrongNameCount) {
  const Vector t = (Vector(3) << 0.0, 0.1, 0.2).finished();
  EXPECT_THROW(validate_trajectory(t, sample_states(), {"a"}), Error);
}

TEST(ValidateTrajectory, IsIdempotent) {
  const Vector t = (Vector(3) << 0.0, 0.1, 0.2).finished();
  const Trajectory once = validate_trajectory(t, sample_states(), {"u", "v"});
  const Trajectory twice = validate_trajectory(once.times(), once.states(), once.variable_names());
  EXPECT_EQ(once, twice);
}

TEST(UniformStep, PaperStep) {
  const Vector t = (Vector(3) << 0.0, 0.002, 0.004).finished();
  const auto h = uniform_step(t);
  ASSERT_TRUE(h.has_value());
  EXPECT_NEAR(*h, 0.002, 1e-15);
}

TEST(UniformStep, NonuniformIsEmpty) {
  const Vector t = (Vector(3) << 0.0, 1.0, 3.0).finished();
  EXPECT_FALSE(uniform_step(t).has_value());
}

TEST(UniformStep, TwoPoints) {
  const Vector t = (Vector(2) << 0.0, 0.5).finished();
  EXPECT_EQ(uniform_step(t), 0.5);
}

TEST(UniformStep, LongGeneratedGrid) {
  EXPECT_TRUE(uniform_step(arange_times(0.0, 10.0, 0.002)).has_value());
  EXPECT_FALSE(uniform_step((Vector(1) << 0.0).finished()).has_value());
}

TEST(TimeGrids, ArangeMatchesHalfOpenCount) {
  EXPECT_EQ(arange_times(0.0, 10.0, 0.002).size(), 5000);
  EXPECT_EQ(arange_times(0.0, 15.0, 0.002).size(), 7500);
  EXPECT_EQ(arange_times(0.0, 1.0, 0.3).size(), 4);
}

TEST(TimeGrids, StepExpandsToUniformTimes) {
  const Trajectory traj = trajectory_from_step(0.25, sample_states());
  EXPECT_EQ(traj.times(), (Vector(3) << 0.0, 0.25, 0.5).finished());
}

TEST(CoefficientMatrix, SupportIsNonzeroPattern) {
  Matrix v(2, 2);
  v << 0.0, 1.5, -2.0, 0.0;
  const CoefficientMatrix c(v);
  EXPECT_FALSE(c.support()(0, 0));
  EXPECT_TRUE(c.support()(0, 1));
  EXPECT_TRUE(c.support()(1, 0));
  EXPECT_EQ(c.nonzeros(), 2);
}

}  // namespace
}  // namespace sindy
