#include "se3pf/motion.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <vector>

using namespace se3pf;

namespace {

Mat3 rot_z(double a) {
  return Eigen::AngleAxisd(a, Vec3::UnitZ()).toRotationMatrix();
}

Pose random_pose(Rng& rng) {
  std::uniform_real_distribution<double> angle(-1.2, 1.2);
  std::uniform_real_distribution<double> t(-5.0, 5.0);
  Pose p;
  p.rotation = euler_to_rotation({angle(rng), angle(rng), angle(rng)});
  p.translation = Vec3(t(rng), t(rng), t(rng));
  return p;
}

}  // namespace

TEST(RotationToEuler, InvertsEulerToRotation) {
  Rng rng(7);
  std::uniform_real_distribution<double> rp(-kPi + 0.01, kPi - 0.01);
  std::uniform_real_distribution<double> pitch(-kPi / 2 + 0.01, kPi / 2 - 0.01);
  for (int i = 0; i < 2000; ++i) {
    const EulerAngles in{rp(rng), pitch(rng), rp(rng)};
    const EulerAngles out = rotation_to_euler(euler_to_rotation(in));
    EXPECT_NEAR(out.roll, in.roll, 1e-9);
    EXPECT_NEAR(out.pitch, in.pitch, 1e-9);
    EXPECT_NEAR(out.yaw, in.yaw, 1e-9);
  }
}

TEST(RotationToEuler, GimbalLockThrows) {
  EXPECT_THROW(rotation_to_euler(euler_to_rotation({0.3, kPi / 2, 0.1})),
               std::domain_error);
  EXPECT_THROW(rotation_to_euler(euler_to_rotation({0.0, -kPi / 2, 0.0})),
               std::domain_error);
}

TEST(DeriveControls, IdenticalPosesGiveZeroControl) {
  const std::vector<Pose> poses{Pose{}, Pose{}};
  const auto controls = derive_controls(poses);
  ASSERT_EQ(controls.size(), 1u);
  EXPECT_LT(controls[0].dt_vec.norm(), 1e-15);
  EXPECT_LT(controls[0].dr_vec.norm(), 1e-15);
}

TEST(DeriveControls, PureTranslation) {
  const std::vector<Pose> poses{Pose{Mat3::Identity(), Vec3::Zero()},
                                Pose{Mat3::Identity(), Vec3(1, 0, 0)}};
  const auto controls = derive_controls(poses);
  ASSERT_EQ(controls.size(), 1u);
  EXPECT_LT((controls[0].dt_vec - Vec3(1, 0, 0)).norm(), 1e-15);
  EXPECT_LT(controls[0].dr_vec.norm(), 1e-15);
}

TEST(DeriveControls, PureYawStep) {
  const std::vector<Pose> poses{Pose{Mat3::Identity(), Vec3(2, 2, 2)},
                                Pose{rot_z(0.1), Vec3(2, 2, 2)}};
  const auto controls = derive_controls(poses);
  ASSERT_EQ(controls.size(), 1u);
  EXPECT_LT(controls[0].dt_vec.norm(), 1e-15);
  EXPECT_NEAR(controls[0].dr_vec.z(), 0.1, 1e-12);
  // recomposition reproduces the relative rotation
  const Mat3 rel = euler_to_rotation(
      {controls[0].dr_vec.x(), controls[0].dr_vec.y(), controls[0].dr_vec.z()});
  EXPECT_LT((rel - rot_z(0.1)).norm(), 1e-9);
}

TEST(DeriveControls, TooShortTrajectoryThrows) {
  const std::vector<Pose> one{Pose{}};
  EXPECT_THROW(derive_controls(one), std::invalid_argument);
}

TEST(DeriveControls, GimbalDegenerateThrows) {
  const std::vector<Pose> poses{Pose{},
                                Pose{euler_to_rotation({0, kPi / 2, 0}), Vec3::Zero()}};
  EXPECT_THROW(derive_controls(poses), std::domain_error);
}

TEST(Propagate, ZeroControlIsIdentityMap) {
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const Pose p = random_pose(rng);
    const Pose out = propagate(p, Control{});
    EXPECT_LT((out.rotation - p.rotation).norm(), 1e-15);
    EXPECT_LT((out.translation - p.translation).norm(), 1e-15);
  }
}

TEST(Propagate, TranslationFromIdentity) {
  const Pose out = propagate(Pose{}, Control{Vec3(1, 2, 3), Vec3::Zero()});
  EXPECT_LT((out.translation - Vec3(1, 2, 3)).norm(), 1e-15);
  EXPECT_LT((out.rotation - Mat3::Identity()).norm(), 1e-15);
}

TEST(Propagate, RightMultipliesRotationAddsWorldTranslation) {
  const Pose start{rot_z(kPi / 2), Vec3::Zero()};
  const Pose out = propagate(start, Control{Vec3(1, 0, 0), Vec3(0, 0, kPi / 2)});
  EXPECT_LT((out.rotation - rot_z(kPi)).norm(), 1e-12);
  EXPECT_LT((out.translation - Vec3(1, 0, 0)).norm(), 1e-15);
}

TEST(Propagate, TranslationIndependentOfPoseRotation) {
  const Control c{Vec3(0.4, -0.2, 0.7), Vec3(0.1, 0.2, 0.3)};
  Rng rng(13);
  for (int i = 0; i < 50; ++i) {
    Pose p = random_pose(rng);
    const Vec3 t_before = p.translation;
    const Pose out = propagate(p, c);
    EXPECT_LT((out.translation - (t_before + c.dt_vec)).norm(), 1e-15);
  }
}

TEST(Propagate, RoundTripsDeriveControls) {
  Rng rng(17);
  for (int i = 0; i < 500; ++i) {
    const Pose a = random_pose(rng);
    const Pose b = random_pose(rng);
    std::vector<Control> controls;
    try {
      controls = derive_controls(std::vector<Pose>{a, b});
    } catch (const std::domain_error&) {
      continue;  // gimbal-degenerate draw
    }
    const Pose back = propagate(a, controls[0]);
    EXPECT_LT((back.rotation - b.rotation).norm(), 1e-9);
    EXPECT_LT((back.translation - b.translation).norm(), 1e-9);
  }
}

TEST(PerturbControl, ZeroFractionExact) {
  const Control c{Vec3(0.3, -0.4, 0.5), Vec3(0.01, -0.02, 0.03)};
  Rng rng(1);
  const Control out = perturb_control(c, NoiseFraction{0.0}, rng);
  EXPECT_EQ(out.dt_vec, c.dt_vec);
  EXPECT_EQ(out.dr_vec, c.dr_vec);
}

TEST(PerturbControl, ZeroComponentsStayZero) {
  const Control c{Vec3(0.0, 1.0, 0.0), Vec3(0.0, 0.0, 0.2)};
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const Control out = perturb_control(c, NoiseFraction{0.5}, rng);
    EXPECT_EQ(out.dt_vec.x(), 0.0);
    EXPECT_EQ(out.dt_vec.z(), 0.0);
    EXPECT_EQ(out.dr_vec.x(), 0.0);
    EXPECT_EQ(out.dr_vec.y(), 0.0);
    EXPECT_NE(out.dt_vec.y(), 0.0);  // noisy with probability one
  }
}

TEST(PerturbControl, MonteCarloSigmaMatchesConfiguredFraction) {
  const Control c{Vec3(1.0, 0.0, 0.0), Vec3::Zero()};
  Rng rng(3);
  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = perturb_control(c, NoiseFraction{0.05}, rng).dt_vec.x();
    sum += x;
    sum_sq += (x - 1.0) * (x - 1.0);
  }
  EXPECT_NEAR(sum / n, 1.0, 1e-3);
  const double sample_std = std::sqrt(sum_sq / (n - 1));
  EXPECT_GE(sample_std, 0.049);
  EXPECT_LE(sample_std, 0.051);
}

TEST(PerturbControl, DeterministicUnderSeed) {
  const Control c{Vec3(0.2, 0.4, -0.1), Vec3(0.05, -0.03, 0.02)};
  Rng a(42), b(42);
  for (int i = 0; i < 20; ++i) {
    const Control x = perturb_control(c, NoiseFraction{0.05}, a);
    const Control y = perturb_control(c, NoiseFraction{0.05}, b);
    EXPECT_EQ(x.dt_vec, y.dt_vec);
    EXPECT_EQ(x.dr_vec, y.dr_vec);
  }
}

TEST(PerturbControl, NegativeFractionThrows) {
  Rng rng(4);
  EXPECT_THROW(perturb_control(Control{}, NoiseFraction{-0.1}, rng),
               std::invalid_argument);
}
