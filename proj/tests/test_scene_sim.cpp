#include <gtest/gtest.h>

#include <cmath>
#include <map>

#include "sgrocc/scene_sim.hpp"
#include "support.hpp"

using namespace sgrocc;

namespace {

RoomSpec room(int n_objects) {
  RoomSpec r;
  r.size = {4.0, 4.0, 2.4};
  r.n_objects = n_objects;
  return r;
}

CameraIntrinsics cam() { return {48, 48, 31.5, 23.5, 64, 48}; }

double distance_to_solids(const SceneModel& s, const Vec3& p) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& solid : s.solids) best = std::min(best, solid.box.surface_distance(p));
  return best;
}

}  // namespace

TEST(BuildScene, EmptyRoomHasSixStructuralSolids) {
  const auto s = build_scene(0, room(0));
  ASSERT_EQ(s.solids.size(), 6u);
  for (const auto& solid : s.solids) EXPECT_TRUE(is_structural(solid.cls));
}

TEST(BuildScene, ObjectsAddOneSolidEach) {
  EXPECT_EQ(build_scene(0, room(3)).solids.size(), 9u);
}

TEST(BuildScene, DeterministicPerSeed) {
  EXPECT_EQ(build_scene(0, room(5)).bytes(), build_scene(0, room(5)).bytes());
  EXPECT_NE(build_scene(0, room(5)).bytes(), build_scene(1, room(5)).bytes());
}

TEST(BuildScene, SolidsInsideBounds) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto s = build_scene(seed, room(6));
    for (const auto& solid : s.solids) {
      EXPECT_TRUE(s.bounds.contains_closed(solid.box.lo, 1e-9));
      EXPECT_TRUE(s.bounds.contains_closed(solid.box.hi, 1e-9));
    }
  }
}

TEST(BuildScene, RejectsBadSpec) {
  auto r = room(0);
  r.thickness = 0;
  EXPECT_ERROR(InvalidSpec, build_scene(0, r));
}

TEST(RenderDepth, HeadOnWall) {
  const auto s = build_scene(0, room(0));
  // Camera 1 m in front of the x = 4 wall, looking along +x.
  const Vec3 eye(3.0, 2.0, 1.2);
  const Pose pose = Pose::look_at(eye, eye + Vec3::UnitX());
  const auto k = cam();
  const auto f = render_depth(s, k, pose);
  const int u = static_cast<int>(k.cx);
  const int v = static_cast<int>(k.cy);
  EXPECT_NEAR(f.depth_at(u, v), 1.0 / pixel_ray_camera(k, u, v).norm() * pixel_ray_camera(k, u, v).norm(), 1e-9);
  EXPECT_EQ(f.class_at(u, v), SemanticClass::wall);
  EXPECT_TRUE(f.normal_at(u, v).isApprox(Vec3(-1, 0, 0)));
}

TEST(RenderDepth, OpenDirectionIsInfinite) {
  SceneModel s;
  s.bounds = {Vec3(-1, -1, -1), Vec3(5, 5, 5)};
  s.solids.push_back({ShapeKind::slab, SemanticClass::floor, {Vec3(-1, -1, -1), Vec3(5, 5, 0)}});
  s.solids.push_back({ShapeKind::slab, SemanticClass::wall, {Vec3(-1, -1, 0), Vec3(0, 5, 5)}});
  const Vec3 eye(2, 2, 1);
  const auto f = render_depth(s, cam(), Pose::look_at(eye, eye + Vec3(0.3, 0.2, 1.0)));
  for (double d : f.depth) EXPECT_TRUE(std::isinf(d));
}

TEST(RenderDepth, ZeroNoiseMatchesNoiseless) {
  const auto s = build_scene(2, room(4));
  const Pose pose = Pose::look_at({2, 2, 1.4}, {3.5, 2.5, 0.8});
  const auto clean = render_depth(s, cam(), pose);
  const auto zero = render_depth(s, cam(), pose, DepthNoise{0.0, 99});
  EXPECT_EQ(clean.depth, zero.depth);
  const auto noisy = render_depth(s, cam(), pose, DepthNoise{0.01, 99});
  EXPECT_NE(clean.depth, noisy.depth);
}

TEST(RenderDepth, CameraOutsideRaises) {
  const auto s = build_scene(0, room(0));
  EXPECT_ERROR(CameraOutsideScene, render_depth(s, cam(), Pose::look_at({9, 2, 1}, {2, 2, 1})));
}

TEST(Property, DepthLiesOnSurfaceAndNormalsFaceCamera) {
  const auto s = build_scene(4, room(6));
  const auto k = cam();
  const Pose pose = Pose::look_at({2, 2, 1.4}, {0.5, 3.0, 0.6});
  const auto f = render_depth(s, k, pose);
  const Vec3 eye = pose.camera_center();
  int finite = 0;
  for (int v = 0; v < k.height; ++v)
    for (int u = 0; u < k.width; ++u) {
      const double d = f.depth_at(u, v);
      if (!std::isfinite(d)) continue;
      ++finite;
      const Vec3 p = backproject(k, pose, u, v, d);
      EXPECT_LT(distance_to_solids(s, p), 1e-6);
      EXPECT_NEAR(f.normal_at(u, v).norm(), 1.0, 1e-6);
      EXPECT_LT(f.normal_at(u, v).dot(p - eye), 0.0);
    }
  EXPECT_EQ(finite, k.width * k.height);
}

TEST(GtOccupancy, FloorAndMidAir) {
  const auto s = build_scene(0, room(0));
  VoxelGridSpec spec;
  spec.origin = {-0.08, -0.08, -0.08};
  spec.dims = {52, 52, 32};
  const auto g = gt_occupancy(s, spec);
  EXPECT_EQ(g.at(10, 10, 0), class_code(SemanticClass::floor));
  EXPECT_EQ(g.at(26, 26, 15), 0);
  EXPECT_EQ(g.at(0, 20, 10), class_code(SemanticClass::wall));
  EXPECT_EQ(g.at(20, 20, 31), class_code(SemanticClass::ceiling));
}

TEST(GtOccupancy, Deterministic) {
  const auto s = build_scene(1, room(6));
  VoxelGridSpec spec;
  spec.origin = {-0.08, -0.08, -0.08};
  spec.dims = {52, 52, 32};
  EXPECT_EQ(gt_occupancy(s, spec), gt_occupancy(s, spec));
}

TEST(GtOccupancy, GridOutsideRaises) {
  const auto s = build_scene(0, room(0));
  VoxelGridSpec spec;
  spec.origin = {-1, 0, 0};
  spec.dims = {8, 8, 8};
  EXPECT_ERROR(GridOutsideScene, gt_occupancy(s, spec));
}

TEST(Property, EmptyRoomShellFraction) {
  const auto s = build_scene(0, room(0));
  VoxelGridSpec spec;
  spec.origin = {-0.08, -0.08, -0.08};
  spec.resolution = 0.1;
  spec.dims = {41, 41, 25};
  const auto g = gt_occupancy(s, spec);
  std::size_t occ = 0;
  for (auto l : g.labels) occ += l != 0;
  const double measured = static_cast<double>(occ) / g.labels.size();
  const double analytic = 1.0 - (4.0 * 4.0 * 2.4) / (4.1 * 4.1 * 2.5);
  EXPECT_NEAR(measured, analytic, 0.02 * analytic);
}

TEST(Property, CenterLabelAgreesWithSupersampledMajority) {
  const auto s = build_scene(3, room(6));
  VoxelGridSpec spec;
  spec.origin = {-0.08, -0.08, -0.08};
  spec.dims = {26, 26, 15};
  spec.resolution = 0.16;
  const auto g = gt_occupancy(s, spec);
  int agree = 0;
  for (std::size_t idx = 0; idx < spec.size(); ++idx) {
    const auto vi = spec.unlinear(idx);
    std::map<int, int> votes;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c) {
          const Vec3 p = spec.origin + spec.resolution * Vec3(vi.i + (a + 0.5) / 3, vi.j + (b + 0.5) / 3,
                                                              vi.k + (c + 0.5) / 3);
          ++votes[class_code(label_at(s, p))];
        }
    const auto best = std::max_element(votes.begin(), votes.end(),
                                       [](const auto& x, const auto& y) { return x.second < y.second; });
    agree += best->first == g.labels[idx];
  }
  EXPECT_GE(agree, static_cast<int>(0.95 * spec.size()));
}

TEST(Trajectory, SingleFrameAtStart) {
  const auto s = build_scene(0, room(0));
  TrajectorySpec t;
  t.n_frames = 1;
  t.center = {2, 2, 1.4};
  const auto poses = gen_trajectory(s, t);
  ASSERT_EQ(poses.size(), 1u);
  EXPECT_LT((poses[0].camera_center() - Vec3(2.5, 2, 1.4)).norm(), 1e-12);
}

TEST(Trajectory, ClosedLoop) {
  const auto s = build_scene(0, room(0));
  TrajectorySpec t;
  t.center = {2, 2, 1.4};
  t.radius = 1.0;
  const auto poses = gen_trajectory(s, t);
  ASSERT_EQ(poses.size(), 30u);
  double max_step = 0.0;
  for (std::size_t i = 1; i < poses.size(); ++i) {
    max_step = std::max(max_step, (poses[i].camera_center() - poses[i - 1].camera_center()).norm());
    EXPECT_TRUE(s.bounds.contains_closed(poses[i].camera_center()));
  }
  EXPECT_LE(max_step, 0.3);
  EXPECT_LE((poses.front().camera_center() - poses.back().camera_center()).norm(), max_step + 1e-12);
}

TEST(Trajectory, ZeroRadiusSharesCenter) {
  const auto s = build_scene(0, room(0));
  TrajectorySpec t;
  t.center = {2, 2, 1.4};
  t.radius = 0.0;
  for (const auto& p : gen_trajectory(s, t)) EXPECT_LT((p.camera_center() - t.center).norm(), 1e-12);
}

TEST(Trajectory, LeavingBoundsRaises) {
  const auto s = build_scene(0, room(0));
  TrajectorySpec t;
  t.center = {2, 2, 1.4};
  t.radius = 3.0;
  t.n_frames = 60;
  EXPECT_ERROR(PathLeavesBounds, gen_trajectory(s, t));
}

TEST(PerturbPose, Contract) {
  const Pose pose = Pose::look_at({1, 2, 1.4}, {3, 3, 1});
  const Pose same = perturb_pose(pose, 0.0, 4);
  EXPECT_EQ(same.translation(), pose.translation());
  EXPECT_EQ(same.rotation(), pose.rotation());

  const double bound = 0.05 * pose.translation().norm();
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    const Pose p = perturb_pose(pose, 0.05, seed);
    EXPECT_LE((p.translation() - pose.translation()).cwiseAbs().maxCoeff(), bound);
    EXPECT_EQ(p.rotation(), pose.rotation());
  }
  EXPECT_EQ(perturb_pose(pose, 0.05, 9).translation(), perturb_pose(pose, 0.05, 9).translation());
  EXPECT_ERROR(FracOutOfRange, perturb_pose(pose, -0.1, 0));
  EXPECT_ERROR(FracOutOfRange, perturb_pose(pose, 0.5, 0));
}
