#include <gtest/gtest.h>

#include <cmath>

#include "sgrocc/occupancy_eval.hpp"
#include "support.hpp"

using namespace sgrocc;

namespace {

VoxelGridSpec cube(int n, double res = 0.08) {
  VoxelGridSpec s;
  s.dims = {n, n, n};
  s.resolution = res;
  return s;
}

GaussianPrimitive primitive(const Vec3& p, double scale, SemanticClass cls, double mag = 4.0) {
  GaussianPrimitive g;
  g.position = p;
  g.scale = scale;
  g.logits = one_hot_logits(cls, mag);
  return g;
}

std::vector<GaussianPrimitive> random_prims(Rng& rng, const VoxelGridSpec& s, int n) {
  std::vector<GaussianPrimitive> out;
  const Vec3 span = s.upper() - s.origin;
  for (int i = 0; i < n; ++i) {
    GaussianPrimitive g;
    g.position = s.origin + Vec3(rng.uniform(-0.1, 1.1) * span.x(), rng.uniform(-0.1, 1.1) * span.y(),
                                 rng.uniform(-0.1, 1.1) * span.z());
    g.scale = rng.uniform(0.5, 2.5) * s.resolution;
    for (auto& l : g.logits) l = rng.uniform(-3, 3);
    out.push_back(g);
  }
  return out;
}

SemanticVoxelGrid slab(const VoxelGridSpec& s, int z0, int z1, std::uint8_t label) {
  SemanticVoxelGrid g(s);
  for (int k = z0; k <= z1; ++k)
    for (int j = 0; j < s.dims[1]; ++j)
      for (int i = 0; i < s.dims[0]; ++i) g.at(i, j, k) = label;
  return g;
}

// Independent boundary F1: explicit voxel lists and all-pairs Chebyshev search.
double brute_boundary_f1(const SemanticVoxelGrid& a, const SemanticVoxelGrid& b, int dist) {
  auto boundary = [](const SemanticVoxelGrid& g) {
    std::vector<VoxelIndex> out;
    const auto& s = g.spec;
    for (std::size_t idx = 0; idx < s.size(); ++idx) {
      if (!g.labels[idx]) continue;
      const auto v = s.unlinear(idx);
      const int nb[6][3] = {{v.i + 1, v.j, v.k}, {v.i - 1, v.j, v.k}, {v.i, v.j + 1, v.k},
                            {v.i, v.j - 1, v.k}, {v.i, v.j, v.k + 1}, {v.i, v.j, v.k - 1}};
      bool edge = false;
      for (const auto& n : nb) edge = edge || !s.in_bounds(n[0], n[1], n[2]) || g.at(n[0], n[1], n[2]) == 0;
      if (edge) out.push_back(v);
    }
    return out;
  };
  const auto pa = boundary(a);
  const auto pb = boundary(b);
  if (pa.empty() && pb.empty()) return 1.0;
  if (pa.empty() || pb.empty()) return 0.0;
  auto frac = [dist](const std::vector<VoxelIndex>& from, const std::vector<VoxelIndex>& to) {
    int hit = 0;
    for (const auto& x : from) {
      for (const auto& y : to) {
        if (std::max({std::abs(x.i - y.i), std::abs(x.j - y.j), std::abs(x.k - y.k)}) <= dist) {
          ++hit;
          break;
        }
      }
    }
    return static_cast<double>(hit) / from.size();
  };
  const double p = frac(pa, pb);
  const double r = frac(pb, pa);
  return p + r == 0.0 ? 0.0 : 2 * p * r / (p + r);
}

SemanticVoxelGrid random_grid(Rng& rng, const VoxelGridSpec& s, double fill) {
  SemanticVoxelGrid g(s);
  for (auto& l : g.labels) l = rng.uniform() < fill ? static_cast<std::uint8_t>(1 + rng.below(4)) : 0;
  return g;
}

}  // namespace

TEST(Decode, EmptyPoolIsEmptyGrid) {
  const auto g = decode_pool(std::vector<GaussianPrimitive>{}, cube(8));
  for (auto l : g.labels) EXPECT_EQ(l, 0);
}

TEST(Decode, SinglePrimitiveLabelsItsVoxel) {
  const auto s = cube(8);
  const auto g = decode_pool({primitive(s.center(3, 4, 5), s.resolution, SemanticClass::wall)}, s);
  EXPECT_EQ(g.at(3, 4, 5), class_code(SemanticClass::wall));
  // Face neighbors sit at weight exp(-0.5) ~ 0.61, above the 0.25 threshold;
  // two steps away drops to exp(-2) ~ 0.135.
  EXPECT_EQ(g.at(2, 4, 5), class_code(SemanticClass::wall));
  EXPECT_EQ(g.at(1, 4, 5), 0);
}

TEST(Decode, MatchesBruteForce) {
  Rng rng(4);
  for (int trial = 0; trial < 3; ++trial) {
    VoxelGridSpec s = cube(16, 0.1);
    s.origin = Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1));
    const auto prims = random_prims(rng, s, 100);
    for (double theta : {0.1, 0.25, 0.6}) EXPECT_EQ(decode_pool(prims, s, theta), decode_pool_bruteforce(prims, s, theta));
  }
}

TEST(Property, DecodeShiftEquivariance) {
  Rng rng(8);
  // Dyadic resolution and shifts keep every coordinate exactly representable.
  VoxelGridSpec s = cube(12, 0.125);
  const auto prims = random_prims(rng, s, 60);
  const auto base = decode_pool(prims, s);
  for (int n = 0; n < 5; ++n) {
    const Vec3 shift(std::ldexp(std::round(rng.uniform(-64, 64)), -4), std::ldexp(std::round(rng.uniform(-64, 64)), -4),
                     std::ldexp(std::round(rng.uniform(-64, 64)), -4));
    auto moved = prims;
    for (auto& g : moved) g.position += shift;
    VoxelGridSpec t = s;
    t.origin += shift;
    EXPECT_EQ(decode_pool(moved, t).labels, base.labels);
  }
}

TEST(ScIou, Examples) {
  const auto s = cube(4);
  SemanticVoxelGrid a(s);
  SemanticVoxelGrid b(s);
  EXPECT_EQ(sc_iou(a, a), 1.0);
  a.at(0, 0, 0) = 3;
  b.at(1, 0, 0) = 3;
  EXPECT_EQ(sc_iou(a, b), 0.0);
  a.at(2, 2, 2) = 2;
  b.at(2, 2, 2) = 5;
  EXPECT_DOUBLE_EQ(sc_iou(a, b), 1.0 / 3.0);
  SemanticVoxelGrid other(cube(5));
  EXPECT_ERROR(SpecMismatch, sc_iou(a, other));
}

TEST(Property, MetricsAreSymmetric) {
  Rng rng(13);
  const auto s = cube(10);
  for (int n = 0; n < 20; ++n) {
    const auto a = random_grid(rng, s, 0.3);
    const auto b = random_grid(rng, s, 0.3);
    EXPECT_EQ(sc_iou(a, b), sc_iou(b, a));
    EXPECT_EQ(boundary_f1(a, b), boundary_f1(b, a));
  }
}

TEST(Miou, PerfectPredictionWithThreeClasses) {
  const auto s = cube(4);
  SemanticVoxelGrid g(s);
  g.at(0, 0, 0) = 1;
  g.at(1, 0, 0) = 2;
  g.at(2, 0, 0) = 3;
  const auto m = miou(g, g);
  EXPECT_EQ(m.miou, 1.0);
  EXPECT_EQ(m.of(SemanticClass::ceiling), 1.0);
  EXPECT_FALSE(m.of(SemanticClass::sofa).has_value());
}

TEST(Miou, HandCountedGrid) {
  const auto s = cube(4);
  SemanticVoxelGrid gt(s);
  SemanticVoxelGrid pred(s);
  // wall: gt 4 voxels, pred hits 3 and adds 1 elsewhere -> 3 / (3 + 1 + 1)
  for (int i = 0; i < 4; ++i) gt.at(i, 0, 0) = 3;
  for (int i = 0; i < 3; ++i) pred.at(i, 0, 0) = 3;
  pred.at(0, 3, 3) = 3;
  // chair: gt 2, pred labels one of them table -> chair 1/2, table 0/1
  gt.at(0, 2, 0) = 5;
  gt.at(1, 2, 0) = 5;
  pred.at(0, 2, 0) = 5;
  pred.at(1, 2, 0) = 8;
  const auto m = miou(pred, gt);
  EXPECT_DOUBLE_EQ(*m.of(SemanticClass::wall), 3.0 / 5.0);
  EXPECT_DOUBLE_EQ(*m.of(SemanticClass::chair), 1.0 / 2.0);
  EXPECT_DOUBLE_EQ(*m.of(SemanticClass::table), 0.0);
  EXPECT_FALSE(m.of(SemanticClass::bed).has_value());
  EXPECT_DOUBLE_EQ(m.miou, (0.6 + 0.5 + 0.0) / 3.0);
  // Occupancy: gt 6, pred 6, overlap 5.
  EXPECT_DOUBLE_EQ(sc_iou(pred, gt), 5.0 / 7.0);
}

TEST(Miou, PerfectOccupancyWithWrongLabels) {
  const auto s = cube(4);
  const auto gt = slab(s, 0, 0, 2);
  const auto pred = slab(s, 0, 0, 3);
  EXPECT_EQ(sc_iou(pred, gt), 1.0);
  EXPECT_EQ(miou(pred, gt).miou, 0.0);
}

TEST(Miou, UndefinedWhenNothingOccupied) {
  SemanticVoxelGrid g(cube(4));
  EXPECT_TRUE(std::isnan(miou(g, g).miou));
}

TEST(BoundaryF1, ShiftedSlabs) {
  const auto s = cube(16);
  const auto gt = slab(s, 4, 5, 3);
  EXPECT_EQ(boundary_f1(gt, gt), 1.0);
  EXPECT_EQ(boundary_f1(slab(s, 5, 6, 3), gt), 1.0);
  EXPECT_EQ(boundary_f1(slab(s, 7, 8, 3), gt), 0.0);
}

TEST(BoundaryF1, MatchesBruteForce) {
  Rng rng(77);
  const auto s = cube(9);
  for (int n = 0; n < 15; ++n) {
    const auto a = random_grid(rng, s, rng.uniform(0.05, 0.6));
    const auto b = random_grid(rng, s, rng.uniform(0.05, 0.6));
    for (int d : {0, 1, 2}) EXPECT_NEAR(boundary_f1(a, b, d), brute_boundary_f1(a, b, d), 1e-12);
  }
}

TEST(Mask, RestrictsScoring) {
  const auto s = cube(4);
  SemanticVoxelGrid a(s);
  SemanticVoxelGrid b(s);
  a.at(0, 0, 0) = 3;
  b.at(0, 0, 0) = 3;
  a.at(3, 3, 3) = 3;
  VoxelMask mask(s.size(), 0);
  mask[s.linear(0, 0, 0)] = 1;
  EXPECT_EQ(sc_iou(a, b, &mask), 1.0);
  EXPECT_DOUBLE_EQ(sc_iou(a, b), 0.5);
}

TEST(Svox, RoundTrip) {
  Rng rng(2);
  VoxelGridSpec s;
  s.dims = {7, 5, 3};
  s.origin = {-0.08, 0.5, 1.25};
  s.resolution = 0.08;
  const auto g = random_grid(rng, s, 0.4);
  const auto bytes = encode_svox(g);
  const auto back = decode_svox(bytes);
  EXPECT_EQ(back.labels, g.labels);
  EXPECT_EQ(back.spec.dims, g.spec.dims);
  EXPECT_EQ(encode_svox(back), bytes);
  EXPECT_EQ(back.spec.resolution, static_cast<double>(0.08f));

  auto bad = bytes;
  bad[0] = 'X';
  EXPECT_ERROR(FormatError, decode_svox(bad));
  auto label = bytes;
  label.back() = 12;
  EXPECT_ERROR(FormatError, decode_svox(label));
  auto shortened = bytes;
  shortened.pop_back();
  EXPECT_ERROR(FormatError, decode_svox(shortened));
}
