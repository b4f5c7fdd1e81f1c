#include <gtest/gtest.h>

#include <cmath>

#include "sgrocc/refiner.hpp"
#include "sgrocc/rng.hpp"
#include "support.hpp"

using namespace sgrocc;

namespace {

const CameraIntrinsics kCam{40, 40, 15.5, 11.5, 32, 24};

DepthFrame flat_depth(double d) {
  DepthFrame f(kCam.width, kCam.height);
  std::fill(f.depth.begin(), f.depth.end(), d);
  std::fill(f.normals.begin(), f.normals.end(), Vec3(0, 0, -1));
  std::fill(f.semantics.begin(), f.semantics.end(), SemanticClass::wall);
  return f;
}

Vec3 random_vec(Rng& rng, double r) { return {rng.uniform(-r, r), rng.uniform(-r, r), rng.uniform(-r, r)}; }

// Rows x cols anchors on the plane x = 0 with normal noise along x.
std::vector<GrmAnchor> noisy_wall(Rng& rng, int rows, int cols, double noise) {
  std::vector<GrmAnchor> out;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c)
      out.push_back({Vec3(rng.uniform(-noise, noise), 0.08 * c, 0.08 * r), SemanticClass::wall, Vec3::UnitX()});
  return out;
}

}  // namespace

TEST(RefineRay, Examples) {
  EXPECT_LT((refine_anchor_ray({0, 0, 2}, {0, 0, 0}, 0.5) - Vec3(0, 0, 2.5)).norm(), 1e-15);
  EXPECT_EQ(refine_anchor_ray({0.3, -1, 2}, {0, 0, 0}, 0.0), Vec3(0.3, -1, 2));
  EXPECT_LT((refine_anchor_ray({1, 1, 1}, {0, 0, 0}, std::sqrt(3.0)) - Vec3(2, 2, 2)).norm(), 1e-12);
  EXPECT_ERROR(ResidualTooLarge, refine_anchor_ray({0, 0, 1}, {0, 0, 0}, -1.5));
}

TEST(RefineFree, Examples) {
  EXPECT_EQ(refine_anchor_free({1, 2, 3}, Vec3::Zero()), Vec3(1, 2, 3));
  EXPECT_EQ(refine_anchor_free({1, 2, 3}, {0.1, 0, 0}), Vec3(1.1, 2, 3));
  EXPECT_ERROR(ResidualTooLarge, refine_anchor_free({1, 2, 3}, {0.3, 0, 0}));
}

TEST(Property, RaySearchIsOneDimensional) {
  Rng rng(21);
  for (int n = 0; n < 1000; ++n) {
    const Vec3 o = random_vec(rng, 3);
    const Vec3 p = o + random_vec(rng, 3) + Vec3(0.5, 0, 0);
    const Vec3 dir = ray_through(o, p).direction;
    const double dd = rng.uniform(-0.24, 0.24);
    const Vec3 r = refine_anchor_ray(p, o, dd);
    EXPECT_LT((r - o).cross(dir).norm(), 1e-9);
    // Range from the camera changes by exactly dd.
    EXPECT_NEAR((r - o).norm(), (p - o).norm() + dd, 1e-9);

    const Vec3 a = refine_anchor_ray(p, o, -0.1);
    const Vec3 b = refine_anchor_ray(p, o, 0.0);
    const Vec3 c = refine_anchor_ray(p, o, 0.1);
    EXPECT_LT((b - a).cross(c - a).norm(), 1e-9);
  }
}

TEST(DepthToRange, MovesCameraDepthToTarget) {
  Rng rng(4);
  const Pose pose = Pose::look_at({1, 1, 1}, {3, 2, 0.5});
  for (int n = 0; n < 200; ++n) {
    const Vec3 p = pose.to_world(Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(1, 4)));
    const double target = rng.uniform(1, 4);
    const Vec3 r = refine_anchor_ray(p, pose.camera_center(), depth_to_range_residual(pose, p, target));
    EXPECT_NEAR(pose.to_camera(r).z(), target, 1e-9);
  }
}

TEST(PredictResidual, Examples) {
  const auto wall = flat_depth(2.0);
  EXPECT_NEAR(predict_depth_residual({0, 0, 2.0}, wall, kCam, Pose::identity()), 0.0, 1e-12);
  EXPECT_NEAR(predict_depth_residual({0, 0, 1.9}, wall, kCam, Pose::identity()), 0.1, 1e-12);
  EXPECT_EQ(predict_depth_residual({0, 0, 1.0}, wall, kCam, Pose::identity(), 0.24), 0.24);
  EXPECT_EQ(predict_depth_residual({0, 0, 3.0}, wall, kCam, Pose::identity(), 0.24), -0.24);
}

TEST(PredictResidual, Errors) {
  EXPECT_ERROR(OutOfView, predict_depth_residual({5, 0, 1.0}, flat_depth(2.0), kCam, Pose::identity()));
  EXPECT_ERROR(OutOfView, predict_depth_residual({0, 0, -1.0}, flat_depth(2.0), kCam, Pose::identity()));
  EXPECT_ERROR(NoSurface, predict_depth_residual({0, 0, 1.0}, flat_depth(INFINITY), kCam, Pose::identity()));
}

TEST(Property, ResidualIsBounded) {
  Rng rng(6);
  DepthFrame depth = flat_depth(2.0);
  for (auto& d : depth.depth) d = rng.uniform(0.5, 6.0);
  for (int n = 0; n < 500; ++n) {
    const Vec3 p = backproject(kCam, Pose::identity(), rng.uniform(0, kCam.width - 1.0),
                               rng.uniform(0, kCam.height - 1.0), rng.uniform(1.0, 5.0));
    const double dm = rng.uniform(0.05, 0.5);
    EXPECT_LE(std::abs(predict_depth_residual(p, depth, kCam, Pose::identity(), dm)), dm);
  }
}

TEST(GrmWeight, Examples) {
  GrmStrategy s;
  EXPECT_EQ(grm_weight(SemanticClass::wall, s), 1.0);
  EXPECT_EQ(grm_weight(SemanticClass::chair, s), 0.1);
  s.kind = GrmKind::uniform;
  EXPECT_EQ(grm_weight(SemanticClass::chair, s), 0.5);
  s.kind = GrmKind::none;
  for (int c = 0; c < kNumClasses; ++c) EXPECT_EQ(grm_weight(static_cast<SemanticClass>(c), s), 0.0);
}

TEST(GrmLoss, Examples) {
  std::vector<GrmAnchor> two = {{Vec3(0, 0, 0), SemanticClass::wall, Vec3::UnitZ()},
                                {Vec3(0, 0, 0.1), SemanticClass::wall, Vec3::UnitZ()}};
  const GrmPairs pair = {{0, 1}};
  GrmStrategy uni{GrmKind::uniform, 1.0};
  EXPECT_NEAR(grm_loss(two, pair, uni).loss, 0.01, 1e-15);

  Rng rng(1);
  std::vector<GrmAnchor> flat;
  for (int i = 0; i < 20; ++i) flat.push_back({Vec3(rng.uniform(0, 1), rng.uniform(0, 1), 0.7), SemanticClass::floor, Vec3::UnitZ()});
  EXPECT_EQ(grm_loss(flat, build_adjacency(flat, 0.5), GrmStrategy{}).loss, 0.0);

  const auto none = grm_loss(two, pair, GrmStrategy{GrmKind::none});
  EXPECT_EQ(none.loss, 0.0);
  for (const auto& g : none.grads) EXPECT_EQ(g, Vec3::Zero());
}

TEST(GrmLoss, AdaptiveWallToChairRatio) {
  std::vector<GrmAnchor> a = {{Vec3(0, 0, 0), SemanticClass::wall, Vec3::UnitX()},
                              {Vec3(0.03, 0.08, 0), SemanticClass::wall, Vec3::UnitX()}};
  auto b = a;
  for (auto& x : b) x.cls = SemanticClass::chair;
  const GrmPairs pair = {{0, 1}};
  EXPECT_EQ(grm_loss(a, pair, GrmStrategy{}).loss, 10.0 * grm_loss(b, pair, GrmStrategy{}).loss);
}

TEST(GrmLoss, NonUnitNormalRaises) {
  std::vector<GrmAnchor> a = {{Vec3::Zero(), SemanticClass::wall, Vec3(0, 0, 2)}};
  EXPECT_ERROR(NonUnitNormal, grm_loss(a, {}, GrmStrategy{}));
}

TEST(Property, GrmGradientsMatchFiniteDifferences) {
  Rng rng(31);
  const double h = 1e-5;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<GrmAnchor> anchors;
    for (int i = 0; i < 12; ++i) {
      const auto cls = rng.uniform() < 0.5 ? SemanticClass::wall : SemanticClass::sofa;
      anchors.push_back({random_vec(rng, 0.2), cls, Vec3(rng.normal(), rng.normal(), rng.normal()).normalized()});
    }
    const auto pairs = build_adjacency(anchors, 0.3);
    const GrmStrategy s;
    const auto an = grm_loss(anchors, pairs, s);
    for (std::size_t i = 0; i < anchors.size(); ++i)
      for (int a = 0; a < 3; ++a) {
        auto up = anchors;
        auto dn = anchors;
        up[i].position[a] += h;
        dn[i].position[a] -= h;
        const double fd = (grm_loss(up, pairs, s).loss - grm_loss(dn, pairs, s).loss) / (2 * h);
        EXPECT_NEAR(an.grads[i][a], fd, 1e-5 * std::max(1.0, std::abs(fd)));
      }
  }
}

TEST(Property, DescentFlattensNoisyWall) {
  Rng rng(17);
  auto anchors = noisy_wall(rng, 6, 6, 0.03);
  const auto pairs = build_adjacency(anchors, 0.16);
  ASSERT_FALSE(pairs.empty());
  const auto curve = grm_descent(anchors, pairs, GrmStrategy{}, 1e-2, 500);
  for (std::size_t i = 1; i < curve.size(); ++i) {
    if (curve[i - 1] == 0.0) break;
    EXPECT_LT(curve[i], curve[i - 1]);
  }
  double worst = 0.0;
  for (const auto& [p, q] : pairs) worst = std::max(worst, std::abs(anchors[p].normal.dot(anchors[p].position - anchors[q].position)));
  EXPECT_LT(worst, 1e-3);
}

TEST(Adjacency, NearestSameClassWithinRadius) {
  std::vector<GrmAnchor> a = {{Vec3(0, 0, 0), SemanticClass::wall, Vec3::UnitX()},
                              {Vec3(0.05, 0, 0), SemanticClass::chair, Vec3::UnitX()},
                              {Vec3(0.1, 0, 0), SemanticClass::wall, Vec3::UnitX()},
                              {Vec3(0.5, 0, 0), SemanticClass::wall, Vec3::UnitX()}};
  const auto pairs = build_adjacency(a, 0.16);
  ASSERT_EQ(pairs.size(), 1u);
  EXPECT_EQ(pairs[0], (std::pair<std::size_t, std::size_t>{0, 2}));
}

TEST(Adjacency, MatchesBruteForce) {
  Rng rng(40);
  std::vector<GrmAnchor> a;
  for (int i = 0; i < 200; ++i)
    a.push_back({random_vec(rng, 0.5), rng.uniform() < 0.5 ? SemanticClass::wall : SemanticClass::bed, Vec3::UnitZ()});
  GrmPairs brute;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::optional<std::size_t> best;
    double bd = 0.16 * 0.16;
    for (std::size_t j = 0; j < a.size(); ++j) {
      if (j == i || a[j].cls != a[i].cls) continue;
      const double d2 = (a[j].position - a[i].position).squaredNorm();
      if (d2 < bd) {
        bd = d2;
        best = j;
      }
    }
    if (best) brute.emplace_back(std::min(i, *best), std::max(i, *best));
  }
  std::sort(brute.begin(), brute.end());
  brute.erase(std::unique(brute.begin(), brute.end()), brute.end());
  EXPECT_EQ(build_adjacency(a, 0.16), brute);
}

TEST(NormalFromDepth, FlatWallFacesCamera) {
  const auto n = normal_from_depth(flat_depth(2.0), kCam, Pose::identity(), 10, 10);
  ASSERT_TRUE(n.has_value());
  EXPECT_LT((*n - Vec3(0, 0, -1)).norm(), 1e-9);
  EXPECT_FALSE(normal_from_depth(flat_depth(INFINITY), kCam, Pose::identity(), 10, 10).has_value());
}
