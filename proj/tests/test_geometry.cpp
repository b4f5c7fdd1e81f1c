#include <gtest/gtest.h>

#include <cmath>

#include "sgrocc/geometry.hpp"
#include "sgrocc/rng.hpp"
#include "support.hpp"

using namespace sgrocc;

namespace {

CameraIntrinsics k100() { return {100.0, 100.0, 50.0, 50.0, 101, 101}; }

Pose random_pose(Rng& rng) {
  const Vec3 axis = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
  const Mat3 r = Eigen::AngleAxisd(rng.uniform(-3.0, 3.0), axis).toRotationMatrix();
  return {r, Vec3(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2))};
}

}  // namespace

TEST(Project, PrincipalPointRay) {
  const auto p = project_point(k100(), Pose::identity(), {0, 0, 2});
  EXPECT_DOUBLE_EQ(p.u, 50.0);
  EXPECT_DOUBLE_EQ(p.v, 50.0);
  EXPECT_DOUBLE_EQ(p.depth, 2.0);
}

TEST(Project, OffAxisPoint) {
  const auto p = project_point(k100(), Pose::identity(), {1, 0, 2});
  EXPECT_DOUBLE_EQ(p.u, 100.0);
  EXPECT_DOUBLE_EQ(p.v, 50.0);
  EXPECT_DOUBLE_EQ(p.depth, 2.0);
}

TEST(Project, BehindCameraRaises) {
  EXPECT_ERROR(BehindCamera, project_point(k100(), Pose::identity(), {0, 0, -1}));
  EXPECT_FALSE(try_project(k100(), Pose::identity(), {0, 0, -1}).has_value());
}

TEST(Backproject, InvertsProjectExamples) {
  const Vec3 a = backproject(k100(), Pose::identity(), 50, 50, 2);
  EXPECT_TRUE(a.isApprox(Vec3(0, 0, 2)));
  const Vec3 b = backproject(k100(), Pose::identity(), 100, 50, 2);
  EXPECT_NEAR((b - Vec3(1, 0, 2)).norm(), 0.0, 1e-15);
}

TEST(Backproject, ZeroDepthRaises) {
  EXPECT_ERROR(NonPositiveDepth, backproject(k100(), Pose::identity(), 10, 20, 0.0));
  EXPECT_ERROR(NonPositiveDepth, backproject(k100(), Pose::identity(), 10, 20, -1.0));
}

TEST(RayThrough, Examples) {
  EXPECT_TRUE(ray_through({0, 0, 0}, {0, 0, 2}).direction.isApprox(Vec3(0, 0, 1)));
  const Vec3 d = ray_through({0, 0, 0}, {1, 1, 1}).direction;
  for (int a = 0; a < 3; ++a) EXPECT_NEAR(d[a], 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_ERROR(DegenerateRay, ray_through({1, 2, 3}, {1, 2, 3}));
}

TEST(RayThrough, AlwaysUnitNorm) {
  Rng rng(11);
  for (int n = 0; n < 1000; ++n) {
    const Vec3 o(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5));
    const Vec3 p = o + Vec3(rng.normal(), rng.normal(), rng.normal()) * std::pow(10.0, rng.uniform(-3, 3));
    EXPECT_NEAR(ray_through(o, p).direction.norm(), 1.0, 1e-12);
  }
}

TEST(WorldToVoxel, Examples) {
  VoxelGridSpec spec;
  spec.dims = {10, 10, 10};
  spec.resolution = 0.08;
  EXPECT_EQ(world_to_voxel(spec, {0.001, 0.001, 0.001}), (VoxelIndex{0, 0, 0}));
  EXPECT_EQ(world_to_voxel(spec, {0.12, 0.0, 0.0}), (VoxelIndex{1, 0, 0}));
  EXPECT_FALSE(world_to_voxel(spec, {-0.01, 0, 0}).has_value());
  EXPECT_FALSE(world_to_voxel(spec, {0.8, 0.1, 0.1}).has_value());
}

TEST(WorldToVoxel, MatchesBruteForceAabbScan) {
  VoxelGridSpec spec;
  spec.origin = {-0.3, 0.2, 1.0};
  spec.dims = {8, 8, 8};
  spec.resolution = 0.125;
  Rng rng(5);
  for (int n = 0; n < 1000; ++n) {
    const Vec3 p = spec.origin + Vec3(rng.uniform(-0.2, 1.2), rng.uniform(-0.2, 1.2), rng.uniform(-0.2, 1.2));
    std::optional<VoxelIndex> brute;
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j)
        for (int k = 0; k < 8; ++k) {
          const Vec3 lo = spec.origin + spec.resolution * Vec3(i, j, k);
          const Vec3 hi = lo + Vec3::Constant(spec.resolution);
          if ((p.array() >= lo.array()).all() && (p.array() < hi.array()).all()) brute = VoxelIndex{i, j, k};
        }
    EXPECT_EQ(world_to_voxel(spec, p), brute);
  }
}

TEST(VoxelGridSpec, LinearRoundTrip) {
  VoxelGridSpec spec;
  spec.dims = {3, 4, 5};
  for (std::size_t idx = 0; idx < spec.size(); ++idx) EXPECT_EQ(spec.linear(spec.unlinear(idx)), idx);
  EXPECT_EQ(spec.linear(1, 0, 0), 1u);
  EXPECT_EQ(spec.linear(0, 1, 0), 3u);
  EXPECT_EQ(spec.linear(0, 0, 1), 12u);
}

TEST(Pose, RejectsNonOrthonormal) {
  Mat3 r = Mat3::Identity();
  r(0, 0) = 1.01;
  EXPECT_ERROR(InvalidSpec, Pose(r, Vec3::Zero()));
  EXPECT_ERROR(InvalidSpec, Pose(-Mat3::Identity(), Vec3::Zero()));
}

TEST(Pose, InverseRoundTrip) {
  Rng rng(3);
  for (int n = 0; n < 200; ++n) {
    const Pose pose = random_pose(rng);
    const Vec3 x(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
    EXPECT_LT((pose.inverse().to_camera(pose.to_camera(x)) - x).norm(), 1e-9);
    EXPECT_LT((pose.to_world(pose.to_camera(x)) - x).norm(), 1e-9);
    EXPECT_LT((pose.compose(pose.inverse()).to_camera(x) - x).norm(), 1e-9);
  }
}

TEST(Pose, LookAtPointsForward) {
  const Vec3 eye(1, 2, 1.5);
  const Vec3 target(3, 1, 1.0);
  const Pose p = Pose::look_at(eye, target);
  EXPECT_LT((p.camera_center() - eye).norm(), 1e-12);
  const Vec3 c = p.to_camera(target);
  EXPECT_NEAR(c.x(), 0.0, 1e-12);
  EXPECT_NEAR(c.y(), 0.0, 1e-12);
  EXPECT_NEAR(c.z(), (target - eye).norm(), 1e-12);
  // +y is image-down, so a point above the target lands at negative y.
  EXPECT_LT(p.to_camera(target + Vec3::UnitZ()).y(), 0.0);
}

TEST(Property, ProjectBackprojectRoundTrip) {
  const CameraIntrinsics k{96, 96, 63.5, 47.5, 128, 96};
  Rng rng(2024);
  int checked = 0;
  while (checked < 10000) {
    const Pose pose = random_pose(rng);
    const double u = rng.uniform(0, k.width - 1.0);
    const double v = rng.uniform(0, k.height - 1.0);
    const double d = rng.uniform(0.1, 10.0);
    const Vec3 world = pose.to_world(d * pixel_ray_camera(k, u, v));
    const auto pr = project_point(k, pose, world);
    const Vec3 back = backproject(k, pose, pr.u, pr.v, pr.depth);
    ASSERT_LT((back - world).cwiseAbs().maxCoeff(), 1e-9);
    ASSERT_NEAR(pr.u, u, 1e-9);
    ASSERT_NEAR(pr.v, v, 1e-9);
    ++checked;
  }
}

TEST(Intrinsics, Validate) {
  EXPECT_NO_THROW(k100().validate());
  auto bad = k100();
  bad.fx = 0;
  EXPECT_ERROR(InvalidSpec, bad.validate());
  bad = k100();
  bad.cx = 101;
  EXPECT_ERROR(InvalidSpec, bad.validate());
}
