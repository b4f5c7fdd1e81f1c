#pragma once

// Gaussian memory pool: tag lifecycle, visibility partition, hybrid
// confidence and the lambda-scaled update.
//
//   C_geo   = exp(-(d_proj - D)^2 / (2 sigma_geo^2))
//   C_sem   = clamp((max softmax(l / T) - tau_min) / (tau_max - tau_min), 0, 1)
//   C_final = [tag == 1] * C_geo * C_sem,   lambda = 1 - C_final

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sgrocc/errors.hpp"
#include "sgrocc/fusion_schedule.hpp"
#include "sgrocc/geometry.hpp"
#include "sgrocc/io.hpp"
#include "sgrocc/lifter.hpp"
#include "sgrocc/refiner.hpp"
#include "sgrocc/rng.hpp"
#include "sgrocc/scene_sim.hpp"

namespace sgrocc {

using Logits = std::array<double, kNumClasses>;

struct GaussianPrimitive {
  std::uint64_t id = 0;
  Vec3 position = Vec3::Zero();
  double scale = 0.04;
  Logits logits{};
  double tag = 0.0;
  double last_confidence = 0.0;
  // Last observed outward surface normal; runtime only, not serialized.
  Vec3 normal = Vec3::UnitZ();
};

struct GaussianPool {
  std::vector<GaussianPrimitive> primitives;
  int frame_counter = 0;
  VoxelGridSpec grid;
  std::uint64_t next_id = 1;

  std::size_t size() const { return primitives.size(); }
};

struct ConfidenceParams {
  double sigma_geo = 0.5;
  double temperature = 0.5;
  double tau_min = 0.2;
  double tau_max = 0.8;

  void validate() const {
    if (!(sigma_geo > 0.0)) fail(ErrorCode::InvalidSpec, "sigma_geo must be positive");
    if (!(temperature > 0.0)) fail(ErrorCode::InvalidSpec, "temperature must be positive");
    if (!(tau_min >= 0.0 && tau_min < tau_max && tau_max <= 1.0)) {
      fail(ErrorCode::InvalidSpec, "need 0 <= tau_min < tau_max <= 1");
    }
  }
};

enum class Visibility { visible_consistent, visible_conflicting, occluded, out_of_view };

inline const char* to_string(Visibility v) {
  switch (v) {
    case Visibility::visible_consistent: return "visible_consistent";
    case Visibility::visible_conflicting: return "visible_conflicting";
    case Visibility::occluded: return "occluded";
    case Visibility::out_of_view: return "out_of_view";
  }
  return "?";
}

// Observed depth at the pixel nearest to (u, v); empty outside the image.
inline std::optional<double> observed_depth(const DepthFrame& depth, double u, double v) {
  const int iu = static_cast<int>(std::lround(u));
  const int iv = static_cast<int>(std::lround(v));
  if (!(u >= 0.0 && v >= 0.0 && u <= depth.width - 1.0 && v <= depth.height - 1.0)) return std::nullopt;
  return depth.depth_at(iu, iv);
}

inline Visibility classify_visibility(const Vec3& p, const DepthFrame& depth, const CameraIntrinsics& k,
                                      const Pose& pose, const ConfidenceParams& c) {
  const auto proj = try_project(k, pose, p);
  if (!proj) return Visibility::out_of_view;
  const auto d = observed_depth(depth, proj->u, proj->v);
  if (!d) return Visibility::out_of_view;
  const double band = 3.0 * c.sigma_geo;
  if (proj->depth > *d + band) return Visibility::occluded;
  if (std::abs(proj->depth - *d) > band) return Visibility::visible_conflicting;
  return Visibility::visible_consistent;
}

struct VisibilityPartition {
  std::vector<std::size_t> visible_consistent;
  std::vector<std::size_t> visible_conflicting;
  std::vector<std::size_t> occluded;
  std::vector<std::size_t> out_of_view;
};

inline VisibilityPartition visibility_check(const GaussianPool& pool, const CameraIntrinsics& k, const Pose& pose,
                                            const DepthFrame& depth, const ConfidenceParams& c) {
  VisibilityPartition part;
  for (std::size_t i = 0; i < pool.primitives.size(); ++i) {
    switch (classify_visibility(pool.primitives[i].position, depth, k, pose, c)) {
      case Visibility::visible_consistent: part.visible_consistent.push_back(i); break;
      case Visibility::visible_conflicting: part.visible_conflicting.push_back(i); break;
      case Visibility::occluded: part.occluded.push_back(i); break;
      case Visibility::out_of_view: part.out_of_view.push_back(i); break;
    }
  }
  return part;
}

inline double geo_confidence(const Vec3& p, const DepthFrame& depth, const CameraIntrinsics& k, const Pose& pose,
                             const ConfidenceParams& c) {
  const auto proj = try_project(k, pose, p);
  if (!proj) fail(ErrorCode::OutOfView, "point behind camera");
  const auto d = observed_depth(depth, proj->u, proj->v);
  if (!d) fail(ErrorCode::OutOfView, "point projects outside the image");
  if (!std::isfinite(*d)) fail(ErrorCode::NoSurface, "no surface at projected pixel");
  const double r = proj->depth - *d;
  return std::exp(-(r * r) / (2.0 * c.sigma_geo * c.sigma_geo));
}

// geo_confidence with OutOfView / NoSurface mapped to 0.
inline double geo_confidence_or_zero(const Vec3& p, const DepthFrame& depth, const CameraIntrinsics& k,
                                     const Pose& pose, const ConfidenceParams& c) {
  try {
    return geo_confidence(p, depth, k, pose, c);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::OutOfView || e.code() == ErrorCode::NoSurface) return 0.0;
    throw;
  }
}

inline Logits softmax(const Logits& l, double temperature = 1.0) {
  const double m = *std::max_element(l.begin(), l.end());
  Logits p{};
  double z = 0.0;
  for (int i = 0; i < kNumClasses; ++i) {
    p[i] = std::exp((l[i] - m) / temperature);
    z += p[i];
  }
  for (double& x : p) x /= z;
  return p;
}

struct CalibratedSemantics {
  Logits prob{};
  double c_sem = 0.0;
};

inline CalibratedSemantics calibrate_semantic(const Logits& l, const ConfidenceParams& c) {
  CalibratedSemantics out;
  out.prob = softmax(l, c.temperature);
  const double top = *std::max_element(out.prob.begin(), out.prob.end());
  out.c_sem = std::clamp((top - c.tau_min) / (c.tau_max - c.tau_min), 0.0, 1.0);
  return out;
}

struct FinalConfidence {
  double c_final = 0.0;
  double lambda = 1.0;
};

inline FinalConfidence final_confidence(double tag, double c_geo, double c_sem) {
  const double old = tag == 1.0 ? 1.0 : 0.0;
  const double c = old * c_geo * c_sem;
  return {c, 1.0 - c};
}

enum class RefineMode { none, free3d, ray };

inline const char* to_string(RefineMode m) {
  switch (m) {
    case RefineMode::none: return "none";
    case RefineMode::free3d: return "free3d";
    case RefineMode::ray: return "ray";
  }
  return "?";
}

enum class NormalSource { ground_truth, from_depth };

struct AnchorUpdateConfig {
  GateParams gate;
  LiftMode lift_mode = LiftMode::soft_gating;
  SampleConfig samples;
  RefineMode refine = RefineMode::ray;
  double delta_max = kDefaultDeltaMax;
  int refine_iters = 3;
  double inset = 0.04;  // anchors sit this far behind the observed surface
  NormalSource normals = NormalSource::ground_truth;
};

struct SpawnConfig {
  int stride = 2;
  double logit_scale = 4.0;
  double scale = 0.04;
  double coverage_radius = 0.08;  // an existing anchor this close covers a candidate
  bool self_coverage = true;      // candidates spawned earlier in the same call also cover
  double jitter = 0.0;            // uniform +/- range offset along the ray (m)
  double inset = 0.0;             // range offset into the surface along the ray (m)
  std::uint64_t seed = 0;
};

struct MemoryConfig {
  ConfidenceParams confidence;
  AnchorUpdateConfig update;
  SpawnConfig spawn;
  std::size_t max_pool = 50000;
  double min_scale = 0.04;
  double max_scale = 0.32;
  std::optional<FusionWeights> fusion;

  void validate() const {
    confidence.validate();
    update.gate.validate();
    update.samples.validate();
    if (!(update.delta_max > 0.0)) fail(ErrorCode::InvalidSpec, "delta_max must be positive");
    if (update.refine_iters < 1) fail(ErrorCode::InvalidSpec, "refine_iters must be >= 1");
    if (!(update.inset >= 0.0) || !(spawn.inset >= 0.0)) fail(ErrorCode::InvalidSpec, "inset must be >= 0");
    if (spawn.stride < 1) fail(ErrorCode::InvalidSpec, "spawn stride must be >= 1");
    if (!(spawn.logit_scale > 0.0)) fail(ErrorCode::InvalidSpec, "logit_scale must be positive");
    if (!(spawn.scale >= min_scale && spawn.scale <= max_scale)) fail(ErrorCode::InvalidSpec, "spawn scale out of range");
    if (!(spawn.coverage_radius >= 0.0) || !(spawn.jitter >= 0.0)) fail(ErrorCode::InvalidSpec, "negative spawn parameter");
    if (max_pool < 1) fail(ErrorCode::InvalidSpec, "max_pool must be >= 1");
    if (fusion && fusion->dim() != kNumClasses) fail(ErrorCode::DimMismatch, "fusion weights must be 12-dimensional");
  }
};

// Sparse hash of anchor positions for radius queries.
class CoverageIndex {
 public:
  explicit CoverageIndex(double radius) : radius_(radius), cell_(radius > 0.0 ? radius : 1.0) {}

  void insert(const Vec3& p) { cells_[key(p)].push_back(p); }

  bool covered(const Vec3& p) const {
    if (!(radius_ > 0.0)) return false;
    const auto c = key(p);
    const double r2 = radius_ * radius_;
    for (std::int64_t dx = -1; dx <= 1; ++dx) {
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          const auto it = cells_.find({c[0] + dx, c[1] + dy, c[2] + dz});
          if (it == cells_.end()) continue;
          for (const Vec3& q : it->second) {
            if ((q - p).squaredNorm() <= r2) return true;
          }
        }
      }
    }
    return false;
  }

 private:
  using Key = std::array<std::int64_t, 3>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const {
      return static_cast<std::size_t>(k[0] * 73856093LL ^ k[1] * 19349663LL ^ k[2] * 83492791LL);
    }
  };
  Key key(const Vec3& p) const {
    return {static_cast<std::int64_t>(std::floor(p.x() / cell_)), static_cast<std::int64_t>(std::floor(p.y() / cell_)),
            static_cast<std::int64_t>(std::floor(p.z() / cell_))};
  }

  double radius_;
  double cell_;
  std::unordered_map<Key, std::vector<Vec3>, KeyHash> cells_;
};

inline Logits one_hot_logits(SemanticClass c, double magnitude) {
  Logits l{};
  l[static_cast<std::size_t>(class_code(c))] = magnitude;
  return l;
}

namespace detail {

// Range offset that puts a point `inset` meters behind a surface with
// outward normal n, seen along unit ray r.
inline double inset_range(double inset, const Vec3& n, const Vec3& r) {
  if (inset == 0.0 || n.squaredNorm() == 0.0) return 0.0;
  return inset / std::max(std::abs(n.dot(r)), 0.3);
}

}  // namespace detail

// One anchor per stride x stride block, backprojected from the depth at the
// block's central pixel. Blocks with missing depth or covered by `existing`
// are skipped. Ids are assigned from `next_id`.
inline std::vector<GaussianPrimitive> spawn_anchors(const DepthFrame& depth, const CameraIntrinsics& k,
                                                    const Pose& pose, const SpawnConfig& cfg,
                                                    CoverageIndex& existing, std::uint64_t& next_id,
                                                    int frame = 0) {
  if (cfg.stride < 1) fail(ErrorCode::InvalidSpec, "spawn stride must be >= 1");
  std::vector<GaussianPrimitive> out;
  Rng rng(mix_seed(cfg.seed, static_cast<std::uint64_t>(frame) + 0x5a11));
  const Vec3 eye = pose.camera_center();
  for (int v0 = 0; v0 < depth.height; v0 += cfg.stride) {
    for (int u0 = 0; u0 < depth.width; u0 += cfg.stride) {
      // Representative pixel: the block's central pixel, read without interpolation.
      const int iu = u0 + (std::min(cfg.stride, depth.width - u0) - 1) / 2;
      const int iv = v0 + (std::min(cfg.stride, depth.height - v0) - 1) / 2;
      const double jitter = cfg.jitter > 0.0 ? rng.uniform(-cfg.jitter, cfg.jitter) : 0.0;
      const double d = depth.depth_at(iu, iv);
      if (!std::isfinite(d)) continue;
      const Vec3 surface = backproject(k, pose, iu, iv, d);
      if (existing.covered(surface)) continue;
      const Vec3 dir = (surface - eye).normalized();
      const double shift = detail::inset_range(cfg.inset, depth.normal_at(iu, iv), dir) + jitter;
      GaussianPrimitive g;
      g.id = next_id++;
      g.position = surface + shift * dir;
      g.scale = cfg.scale;
      g.logits = one_hot_logits(depth.class_at(iu, iv), cfg.logit_scale);
      g.tag = 0.0;
      g.last_confidence = 0.0;
      g.normal = depth.normal_at(iu, iv);
      out.push_back(g);
      if (cfg.self_coverage) existing.insert(surface);
    }
  }
  return out;
}

// Everything the pool needs from one frame. `pose` is the pose estimate used
// for lifting and verification; `spawn_pose` places newly spawned anchors.
struct FrameInput {
  const DepthFrame* depth = nullptr;
  const FeatureMap* features = nullptr;
  CameraIntrinsics k;
  Pose pose;
  Pose spawn_pose;
};

struct AnchorEstimate {
  Vec3 position = Vec3::Zero();
  Logits logits{};
  Vec3 normal = Vec3::UnitZ();
  double gate_mass = 0.0;
};

// Class distribution of a lifted feature; gate mass missing from 1 counts as
// empty space. Returned as log-probabilities.
inline Logits lifted_logits(const VecX& feature, double mass) {
  Logits l{};
  double p0 = feature[0] + std::max(0.0, 1.0 - mass);
  for (int c = 0; c < kNumClasses; ++c) {
    const double p = c == 0 ? p0 : feature[c];
    l[static_cast<std::size_t>(c)] = std::log(std::max(p, 0.0) + 1e-6);
  }
  return l;
}

inline Vec3 surface_normal(const FrameInput& f, const Vec3& p, NormalSource src) {
  const auto proj = try_project(f.k, f.pose, p);
  if (!proj) return Vec3::Zero();
  const int iu = static_cast<int>(std::lround(proj->u));
  const int iv = static_cast<int>(std::lround(proj->v));
  if (!f.depth->inside(iu, iv)) return Vec3::Zero();
  if (src == NormalSource::ground_truth) return f.depth->normal_at(iu, iv);
  return normal_from_depth(*f.depth, f.k, f.pose, iu, iv).value_or(Vec3::Zero());
}

// Lift at the anchor, refine it toward the lifted surface for a few
// iterations (each total displacement clamped to delta_max), then lift once
// more at the refined position for semantics.
inline AnchorEstimate estimate_anchor(const Vec3& start, const FrameInput& f, const AnchorUpdateConfig& cfg) {
  const Vec3 eye = f.pose.camera_center();
  Vec3 p = start;
  double range_total = 0.0;
  Vec3 dv_total = Vec3::Zero();
  for (int it = 0; it < cfg.refine_iters && cfg.refine != RefineMode::none; ++it) {
    const LiftResult lr = lift_feature(p, *f.features, *f.depth, f.k, f.pose, cfg.gate, cfg.lift_mode, cfg.samples);
    const Vec3 n = surface_normal(f, p, cfg.normals);
    if (cfg.refine == RefineMode::ray) {
      const auto d = lr.lifted_depth();
      if (!d) break;
      const Vec3 dir = (p - eye).normalized();
      const double want = lr.gate_mass() * (depth_to_range_residual(f.pose, p, *d) + detail::inset_range(cfg.inset, n, dir));
      const double next = std::clamp(range_total + want, -cfg.delta_max, cfg.delta_max);
      p = refine_anchor_ray(p, eye, next - range_total);
      range_total = next;
    } else {
      Vec3 acc = Vec3::Zero();
      double wsum = 0.0;
      for (const auto& s : lr.samples) {
        if (!s.in_image || !std::isfinite(s.depth) || !(s.depth > 0.0)) continue;
        const double w = s.attention * s.gate;
        if (w == 0.0) continue;
        acc += w * backproject(f.k, f.pose, s.pixel.x(), s.pixel.y(), s.depth);
        wsum += w;
      }
      if (!(wsum > 1e-12)) break;
      const Vec3 target = acc / wsum - cfg.inset * n;
      dv_total = (dv_total + lr.gate_mass() * (target - p)).cwiseMax(-cfg.delta_max).cwiseMin(cfg.delta_max);
      p = refine_anchor_free(start, dv_total, cfg.delta_max);
    }
  }
  const LiftResult fin = lift_feature(p, *f.features, *f.depth, f.k, f.pose, cfg.gate, cfg.lift_mode, cfg.samples);
  AnchorEstimate est;
  est.position = p;
  est.gate_mass = fin.gate_mass();
  est.logits = lifted_logits(fin.feature, cfg.samples.normalize_gate && est.gate_mass > 0.0 ? 1.0 : est.gate_mass);
  est.normal = surface_normal(f, p, cfg.normals);
  return est;
}

struct UpdateReport {
  int frame = 0;
  std::size_t visible_consistent = 0;
  std::size_t visible_conflicting = 0;
  std::size_t occluded = 0;
  std::size_t out_of_view = 0;
  std::size_t frozen = 0;     // lambda <= 0.01
  std::size_t updated = 0;    // 0.01 < lambda, not re-initialized
  std::size_t reinitialized = 0;
  std::size_t dropped = 0;    // occluded new anchors and failed re-inits
  std::size_t spawned = 0;
  std::size_t evicted = 0;
  std::size_t pool_size = 0;
  double mean_lambda = 0.0;   // over anchors confidence-scored this frame
};

namespace detail {

inline Logits blend_logits(const Logits& old, const Logits& fresh, double lambda) {
  Logits out{};
  for (int c = 0; c < kNumClasses; ++c) out[c] = (1.0 - lambda) * old[c] + lambda * fresh[c];
  return out;
}

inline Logits fused_logits(const Logits& hist, const Logits& fresh, const std::optional<FusionWeights>& w) {
  if (!w) return fresh;
  VecX h(kNumClasses);
  VecX c(kNumClasses);
  for (int i = 0; i < kNumClasses; ++i) {
    h[i] = hist[i];
    c[i] = fresh[i];
  }
  const VecX f = fuse(h, c, *w);
  Logits out{};
  for (int i = 0; i < kNumClasses; ++i) out[i] = f[i];
  return out;
}

}  // namespace detail

inline UpdateReport update_pool(GaussianPool& pool, const FrameInput& f, const MemoryConfig& cfg) {
  cfg.validate();
  if (!f.depth || !f.features) fail(ErrorCode::InvalidSpec, "frame input is incomplete");
  UpdateReport rep;
  rep.frame = ++pool.frame_counter;
  const DepthFrame& depth = *f.depth;
  const double reinit_geo = std::exp(-4.5);
  double lambda_sum = 0.0;
  std::size_t lambda_count = 0;

  std::vector<GaussianPrimitive> next;
  next.reserve(pool.primitives.size());
  for (const GaussianPrimitive& g : pool.primitives) {
    const Visibility vis = classify_visibility(g.position, depth, f.k, f.pose, cfg.confidence);
    if (vis == Visibility::out_of_view) {
      ++rep.out_of_view;
      next.push_back(g);
      continue;
    }
    if (vis == Visibility::occluded) {
      ++rep.occluded;
      if (g.tag == 1.0) {
        next.push_back(g);
      } else {
        ++rep.dropped;
      }
      continue;
    }
    ++(vis == Visibility::visible_consistent ? rep.visible_consistent : rep.visible_conflicting);
    const double c_geo = geo_confidence_or_zero(g.position, depth, f.k, f.pose, cfg.confidence);
    const double c_sem = calibrate_semantic(g.logits, cfg.confidence).c_sem;
    const FinalConfidence fc = final_confidence(g.tag, c_geo, c_sem);
    lambda_sum += fc.lambda;
    ++lambda_count;

    if (fc.lambda > 0.5 && c_geo < reinit_geo) {
      // Re-initialize from the observed surface at the anchor's pixel.
      const auto proj = try_project(f.k, f.pose, g.position);
      const int iu = static_cast<int>(std::lround(proj->u));
      const int iv = static_cast<int>(std::lround(proj->v));
      const double d = depth.depth_at(iu, iv);
      if (!std::isfinite(d)) {
        ++rep.dropped;
        continue;
      }
      const Vec3 eye = f.spawn_pose.camera_center();
      const Vec3 surface = backproject(f.k, f.spawn_pose, iu, iv, d);
      const Vec3 dir = (surface - eye).normalized();
      GaussianPrimitive r = g;
      r.id = pool.next_id++;
      r.position = surface + detail::inset_range(cfg.spawn.inset, depth.normal_at(iu, iv), dir) * dir;
      r.logits = one_hot_logits(depth.class_at(iu, iv), cfg.spawn.logit_scale);
      r.tag = 0.0;
      r.last_confidence = 0.0;
      r.normal = depth.normal_at(iu, iv);
      next.push_back(r);
      ++rep.reinitialized;
      continue;
    }

    const AnchorEstimate est = estimate_anchor(g.position, f, cfg.update);
    GaussianPrimitive u = g;
    u.position = g.position + fc.lambda * (est.position - g.position);
    u.logits = detail::blend_logits(g.logits, detail::fused_logits(g.logits, est.logits, cfg.fusion), fc.lambda);
    if (est.normal.squaredNorm() > 0.0) u.normal = est.normal;
    u.tag = 1.0;
    u.last_confidence = fc.c_final;
    ++(fc.lambda <= 0.01 ? rep.frozen : rep.updated);
    next.push_back(u);
  }

  CoverageIndex coverage(cfg.spawn.coverage_radius);
  for (const auto& g : next) coverage.insert(g.position);
  std::vector<GaussianPrimitive> fresh =
      spawn_anchors(depth, f.k, f.spawn_pose, cfg.spawn, coverage, pool.next_id, rep.frame);
  if (fresh.size() > cfg.max_pool) fail(ErrorCode::PoolOverflow, "spawn request alone exceeds max_pool");
  rep.spawned = fresh.size();
  for (GaussianPrimitive& g : fresh) {
    // New anchors: tag 0, so C_final = 0 and lambda = 1.
    const FinalConfidence fc = final_confidence(g.tag, 0.0, 0.0);
    lambda_sum += fc.lambda;
    ++lambda_count;
    const AnchorEstimate est = estimate_anchor(g.position, f, cfg.update);
    g.position = est.position;
    g.logits = detail::blend_logits(g.logits, detail::fused_logits(g.logits, est.logits, cfg.fusion), fc.lambda);
    if (est.normal.squaredNorm() > 0.0) g.normal = est.normal;
    g.tag = 1.0;
    g.last_confidence = fc.c_final;
    next.push_back(g);
  }

  if (next.size() > cfg.max_pool) {
    // Evict lowest last_confidence first; ties evict the newest id.
    std::vector<std::size_t> order(next.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&next](std::size_t a, std::size_t b) {
      if (next[a].last_confidence != next[b].last_confidence) return next[a].last_confidence < next[b].last_confidence;
      return next[a].id > next[b].id;
    });
    std::vector<bool> evict(next.size(), false);
    const std::size_t n_evict = next.size() - cfg.max_pool;
    for (std::size_t i = 0; i < n_evict; ++i) evict[order[i]] = true;
    std::vector<GaussianPrimitive> kept;
    kept.reserve(cfg.max_pool);
    for (std::size_t i = 0; i < next.size(); ++i) {
      if (!evict[i]) kept.push_back(next[i]);
    }
    rep.evicted = n_evict;
    next = std::move(kept);
  }
  pool.primitives = std::move(next);
  rep.pool_size = pool.primitives.size();
  rep.mean_lambda = lambda_count ? lambda_sum / static_cast<double>(lambda_count) : 0.0;
  return rep;
}

// GPOOL1: magic, u32 count, then per primitive u64 id, 3 x f32 position,
// f32 scale, 12 x f32 logits, f32 tag, f32 confidence. Little-endian.
inline std::vector<std::uint8_t> encode_pool(const GaussianPool& pool) {
  io::ByteWriter w;
  w.magic("GPOOL1");
  w.u32(static_cast<std::uint32_t>(pool.primitives.size()));
  for (const auto& g : pool.primitives) {
    w.u64(g.id);
    for (int a = 0; a < 3; ++a) w.f32(g.position[a]);
    w.f32(g.scale);
    for (double l : g.logits) w.f32(l);
    w.f32(g.tag);
    w.f32(g.last_confidence);
  }
  return w.bytes();
}

inline GaussianPool decode_pool_snapshot(const std::vector<std::uint8_t>& bytes) {
  io::ByteReader r(bytes);
  r.expect_magic("GPOOL1");
  const std::uint32_t n = r.u32();
  GaussianPool pool;
  pool.primitives.resize(n);
  for (auto& g : pool.primitives) {
    g.id = r.u64();
    for (int a = 0; a < 3; ++a) g.position[a] = r.f32();
    g.scale = r.f32();
    for (double& l : g.logits) l = r.f32();
    g.tag = r.f32();
    g.last_confidence = r.f32();
    pool.next_id = std::max(pool.next_id, g.id + 1);
  }
  r.expect_end();
  return pool;
}

}  // namespace sgrocc
