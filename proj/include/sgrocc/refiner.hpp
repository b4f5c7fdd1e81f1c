#pragma once

// Anchor refinement along camera rays, the unconstrained 3D baseline and the
// class-weighted planar regularizer
//
//   L = sum_p kappa_p * (n_p . (P_p - P_adj))^2

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sgrocc/errors.hpp"
#include "sgrocc/geometry.hpp"
#include "sgrocc/lifter.hpp"
#include "sgrocc/scene_sim.hpp"

namespace sgrocc {

inline constexpr double kDefaultDeltaMax = 0.24;  // 3 voxels at 0.08 m

inline Vec3 refine_anchor_ray(const Vec3& p_init, const Vec3& o_cam, double delta_d) {
  const Ray ray = ray_through(o_cam, p_init);
  const double range = (p_init - o_cam).norm();
  if (!(delta_d > -range)) fail(ErrorCode::ResidualTooLarge, "ray residual would cross the camera");
  return p_init + delta_d * ray.direction;
}

inline Vec3 refine_anchor_free(const Vec3& p_init, const Vec3& dv, double vmax = kDefaultDeltaMax) {
  if (!(dv.cwiseAbs().maxCoeff() <= vmax)) fail(ErrorCode::ResidualTooLarge, "free displacement exceeds vmax");
  return p_init + dv;
}

// Range change along the ray through `p` that moves its camera depth to
// `target_depth`. Range and depth differ by the ray's |(x/z, y/z, 1)| factor.
inline double depth_to_range_residual(const Pose& pose, const Vec3& p, double target_depth) {
  const Vec3 c = pose.to_camera(p);
  if (!(c.z() > kMinDepth)) fail(ErrorCode::OutOfView, "anchor behind camera");
  const double stretch = c.norm() / c.z();
  return (target_depth - c.z()) * stretch;
}

// Residual that snaps the anchor onto the observed surface along its ray,
// clamped to +/- delta_max.
inline double predict_depth_residual(const Vec3& anchor, const DepthFrame& depth, const CameraIntrinsics& k,
                                     const Pose& pose, double delta_max = kDefaultDeltaMax) {
  const auto proj = try_project(k, pose, anchor);
  if (!proj || !k.contains(proj->u, proj->v)) fail(ErrorCode::OutOfView, "anchor projects outside the image");
  const auto d = sample_depth(depth, proj->u, proj->v);
  if (!d) fail(ErrorCode::OutOfView, "anchor projects outside the image");
  if (!std::isfinite(*d)) fail(ErrorCode::NoSurface, "no surface behind anchor pixel");
  return std::clamp(depth_to_range_residual(pose, anchor, *d), -delta_max, delta_max);
}

enum class GrmKind { none, uniform, semantic_adaptive };

inline const char* to_string(GrmKind k) {
  switch (k) {
    case GrmKind::none: return "none";
    case GrmKind::uniform: return "uniform";
    case GrmKind::semantic_adaptive: return "semantic_adaptive";
  }
  return "?";
}

struct GrmStrategy {
  GrmKind kind = GrmKind::semantic_adaptive;
  double uniform_weight = 0.5;
  std::array<double, kNumClasses> kappa = default_kappa();

  static std::array<double, kNumClasses> default_kappa() {
    std::array<double, kNumClasses> m{};
    for (int c = 1; c < kNumClasses; ++c) m[c] = is_structural(static_cast<SemanticClass>(c)) ? 1.0 : 0.1;
    return m;
  }

  void validate() const {
    if (!(uniform_weight >= 0.0 && uniform_weight <= 1.0)) fail(ErrorCode::InvalidSpec, "uniform GRM weight not in [0,1]");
    for (double w : kappa) {
      if (!(w >= 0.0 && w <= 1.0)) fail(ErrorCode::InvalidSpec, "kappa not in [0,1]");
    }
  }
};

inline double grm_weight(SemanticClass cls, const GrmStrategy& s) {
  switch (s.kind) {
    case GrmKind::none: return 0.0;
    case GrmKind::uniform: return s.uniform_weight;
    case GrmKind::semantic_adaptive: return s.kappa[static_cast<std::size_t>(class_code(cls))];
  }
  return 0.0;
}

struct GrmAnchor {
  Vec3 position = Vec3::Zero();
  SemanticClass cls = SemanticClass::empty;
  Vec3 normal = Vec3::UnitZ();
};

// (anchor, neighbor) index pairs with anchor < neighbor.
using GrmPairs = std::vector<std::pair<std::size_t, std::size_t>>;

// Each anchor links to its nearest same-class anchor within `radius`
// (ties: lowest index). Pairs are stored once, ordered.
inline GrmPairs build_adjacency(const std::vector<GrmAnchor>& anchors, double radius) {
  if (!(radius > 0.0)) fail(ErrorCode::InvalidSpec, "adjacency radius must be positive");
  struct KeyHash {
    std::size_t operator()(const std::array<std::int64_t, 3>& k) const {
      return static_cast<std::size_t>(k[0] * 73856093LL ^ k[1] * 19349663LL ^ k[2] * 83492791LL);
    }
  };
  auto cell_of = [radius](const Vec3& p) {
    return std::array<std::int64_t, 3>{static_cast<std::int64_t>(std::floor(p.x() / radius)),
                                       static_cast<std::int64_t>(std::floor(p.y() / radius)),
                                       static_cast<std::int64_t>(std::floor(p.z() / radius))};
  };
  std::unordered_map<std::array<std::int64_t, 3>, std::vector<std::size_t>, KeyHash> cells;
  for (std::size_t i = 0; i < anchors.size(); ++i) cells[cell_of(anchors[i].position)].push_back(i);

  GrmPairs pairs;
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < anchors.size(); ++i) {
    const auto c = cell_of(anchors[i].position);
    std::optional<std::size_t> best;
    double best_d2 = r2;
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = cells.find({c[0] + dx, c[1] + dy, c[2] + dz});
          if (it == cells.end()) continue;
          for (std::size_t j : it->second) {
            if (j == i || anchors[j].cls != anchors[i].cls) continue;
            const double d2 = (anchors[j].position - anchors[i].position).squaredNorm();
            if (d2 < best_d2 || (d2 == best_d2 && best && j < *best)) {
              best_d2 = d2;
              best = j;
            }
          }
        }
      }
    }
    if (best) pairs.emplace_back(std::min(i, *best), std::max(i, *best));
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  return pairs;
}

struct GrmResult {
  double loss = 0.0;
  std::vector<Vec3> grads;
};

// Pair (p, q) uses the normal and weight of p.
inline GrmResult grm_loss(const std::vector<GrmAnchor>& anchors, const GrmPairs& pairs, const GrmStrategy& s) {
  GrmResult r;
  r.grads.assign(anchors.size(), Vec3::Zero());
  for (const auto& a : anchors) {
    if (std::abs(a.normal.norm() - 1.0) > 1e-6) fail(ErrorCode::NonUnitNormal, "GRM normal is not unit length");
  }
  if (s.kind == GrmKind::none) return r;
  for (const auto& [p, q] : pairs) {
    if (p >= anchors.size() || q >= anchors.size()) fail(ErrorCode::InvalidSpec, "adjacency index out of range");
    const double kappa = grm_weight(anchors[p].cls, s);
    if (kappa == 0.0) continue;
    const Vec3& n = anchors[p].normal;
    const double e = n.dot(anchors[p].position - anchors[q].position);
    r.loss += kappa * e * e;
    const Vec3 g = 2.0 * kappa * e * n;
    r.grads[p] += g;
    r.grads[q] -= g;
  }
  return r;
}

// Plain gradient descent on the anchor positions; returns the loss before
// each step followed by the final loss.
inline std::vector<double> grm_descent(std::vector<GrmAnchor>& anchors, const GrmPairs& pairs, const GrmStrategy& s,
                                       double lr, int steps) {
  if (!(lr > 0.0) || steps < 0) fail(ErrorCode::InvalidSpec, "GRM descent needs lr > 0 and steps >= 0");
  std::vector<double> curve;
  curve.reserve(static_cast<std::size_t>(steps) + 1);
  for (int it = 0; it < steps; ++it) {
    const GrmResult r = grm_loss(anchors, pairs, s);
    curve.push_back(r.loss);
    for (std::size_t i = 0; i < anchors.size(); ++i) anchors[i].position -= lr * r.grads[i];
  }
  curve.push_back(grm_loss(anchors, pairs, s).loss);
  return curve;
}

// World-frame normal from depth-map finite differences, oriented toward the
// camera. Empty when the neighborhood lacks finite depth.
inline std::optional<Vec3> normal_from_depth(const DepthFrame& frame, const CameraIntrinsics& k, const Pose& pose,
                                             int u, int v) {
  auto point = [&](int uu, int vv) -> std::optional<Vec3> {
    if (!frame.inside(uu, vv)) return std::nullopt;
    const double d = frame.depth_at(uu, vv);
    if (!std::isfinite(d)) return std::nullopt;
    return d * pixel_ray_camera(k, uu, vv);
  };
  const auto c = point(u, v);
  if (!c) return std::nullopt;
  auto pick = [&](int du, int dv) -> std::optional<Vec3> {
    if (auto p = point(u + du, v + dv)) return *p - *c;
    if (auto p = point(u - du, v - dv)) return *c - *p;
    return std::nullopt;
  };
  const auto tu = pick(1, 0);
  const auto tv = pick(0, 1);
  if (!tu || !tv) return std::nullopt;
  Vec3 n = tu->cross(*tv);
  if (!(n.norm() > 1e-12)) return std::nullopt;
  n.normalize();
  if (n.dot(*c) > 0.0) n = -n;
  return pose.rotation().transpose() * n;
}

}  // namespace sgrocc
