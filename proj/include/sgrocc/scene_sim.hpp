#pragma once

// Procedural box-world rooms with analytic depth, normal, semantic and
// occupancy oracles.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "sgrocc/errors.hpp"
#include "sgrocc/geometry.hpp"
#include "sgrocc/rng.hpp"

namespace sgrocc {

inline constexpr int kNumClasses = 12;

enum class SemanticClass : std::uint8_t {
  empty = 0,
  ceiling = 1,
  floor = 2,
  wall = 3,
  window = 4,
  chair = 5,
  bed = 6,
  sofa = 7,
  table = 8,
  tvs = 9,
  furniture = 10,
  objects = 11,
};

inline constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "empty", "ceiling", "floor", "wall", "window", "chair", "bed", "sofa", "table", "tvs", "furniture", "objects"};

inline std::string_view class_name(SemanticClass c) { return kClassNames[static_cast<int>(c)]; }
inline int class_code(SemanticClass c) { return static_cast<int>(c); }

inline bool is_structural(SemanticClass c) {
  return c == SemanticClass::ceiling || c == SemanticClass::floor || c == SemanticClass::wall ||
         c == SemanticClass::window;
}

enum class ShapeKind : std::uint8_t { box = 0, slab = 1, panel = 2 };

struct Aabb {
  Vec3 lo = Vec3::Zero();
  Vec3 hi = Vec3::Zero();

  bool contains(const Vec3& p) const {
    return p.x() >= lo.x() && p.x() < hi.x() && p.y() >= lo.y() && p.y() < hi.y() && p.z() >= lo.z() &&
           p.z() < hi.z();
  }
  bool contains_closed(const Vec3& p, double eps = 0.0) const {
    return (p.array() >= lo.array() - eps).all() && (p.array() <= hi.array() + eps).all();
  }
  bool overlaps(const Aabb& o) const {
    return (lo.array() < o.hi.array()).all() && (o.lo.array() < hi.array()).all();
  }
  double volume() const { return (hi - lo).prod(); }

  // Euclidean distance from p to the box surface (0 on the surface).
  double surface_distance(const Vec3& p) const {
    const Vec3 outside = (lo - p).cwiseMax(p - hi).cwiseMax(0.0);
    if (outside.squaredNorm() > 0.0) return outside.norm();
    const Vec3 inside = (p - lo).cwiseMin(hi - p);
    return inside.minCoeff();
  }
};

struct Solid {
  ShapeKind shape = ShapeKind::box;
  SemanticClass cls = SemanticClass::objects;
  Aabb box;
};

struct RoomSpec {
  Vec3 size{4.0, 4.0, 2.4};  // interior extent (m)
  double thickness = 0.08;   // structural slab thickness (m)
  int n_objects = 0;
  double snap = 0.08;             // furniture extents snap to this lattice (0 = off)
  double wall_margin = 0.32;      // minimum gap between boxes and walls
  double center_clearance = 0.8;  // boxes keep out of this xy disc around the room center

  void validate() const {
    if (!(size.minCoeff() >= 1.0)) fail(ErrorCode::InvalidSpec, "room extent must be >= 1 m per axis");
    if (!(thickness > 0.0)) fail(ErrorCode::InvalidSpec, "slab thickness must be positive");
    if (n_objects < 0) fail(ErrorCode::InvalidSpec, "n_objects must be >= 0");
    if (snap < 0.0 || wall_margin < 0.0 || center_clearance < 0.0) {
      fail(ErrorCode::InvalidSpec, "negative placement parameter");
    }
  }
};

struct SceneModel {
  std::vector<Solid> solids;
  Aabb bounds;

  // Canonical byte encoding, used for determinism checks.
  std::vector<std::uint8_t> bytes() const {
    std::vector<std::uint8_t> out;
    auto put = [&out](const void* p, std::size_t n) {
      const auto* b = static_cast<const std::uint8_t*>(p);
      out.insert(out.end(), b, b + n);
    };
    auto put_vec = [&put](const Vec3& v) {
      for (int a = 0; a < 3; ++a) {
        const double x = v[a];
        put(&x, sizeof x);
      }
    };
    put_vec(bounds.lo);
    put_vec(bounds.hi);
    for (const auto& s : solids) {
      const std::uint8_t tag[2] = {static_cast<std::uint8_t>(s.shape), static_cast<std::uint8_t>(s.cls)};
      put(tag, 2);
      put_vec(s.box.lo);
      put_vec(s.box.hi);
    }
    return out;
  }

  void validate() const {
    bool has_floor = false;
    bool has_wall = false;
    for (const auto& s : solids) {
      if (!bounds.contains_closed(s.box.lo, 1e-9) || !bounds.contains_closed(s.box.hi, 1e-9)) {
        fail(ErrorCode::InvalidSpec, "solid outside scene bounds");
      }
      has_floor |= s.cls == SemanticClass::floor;
      has_wall |= s.cls == SemanticClass::wall;
    }
    if (!has_floor || !has_wall) fail(ErrorCode::InvalidSpec, "scene needs a floor and at least one wall");
  }
};

namespace detail {

inline double snap_to(double x, double step) { return step > 0.0 ? std::round(x / step) * step : x; }

struct ObjectTemplate {
  SemanticClass cls;
  Vec3 size;
};

inline constexpr std::array<SemanticClass, 6> kBoxClasses = {SemanticClass::chair, SemanticClass::bed,
                                                             SemanticClass::sofa,  SemanticClass::table,
                                                             SemanticClass::furniture, SemanticClass::objects};
inline constexpr std::array<SemanticClass, 2> kPanelClasses = {SemanticClass::window, SemanticClass::tvs};

inline Vec3 nominal_box_size(SemanticClass c) {
  switch (c) {
    case SemanticClass::chair: return {0.48, 0.48, 0.88};
    case SemanticClass::bed: return {1.44, 0.96, 0.56};
    case SemanticClass::sofa: return {1.28, 0.64, 0.8};
    case SemanticClass::table: return {0.96, 0.64, 0.72};
    case SemanticClass::furniture: return {0.64, 0.48, 1.2};
    default: return {0.4, 0.4, 0.4};
  }
}

}  // namespace detail

// Floor, ceiling and four walls (slabs outside the interior), then
// `n_objects` furniture items. Every fourth item starting at index 1 is a
// wall panel (window/tvs alternating); the rest are floor boxes cycling
// through chair, bed, sofa, table, furniture, objects.
inline SceneModel build_scene(std::uint64_t seed, const RoomSpec& spec) {
  spec.validate();
  const double th = spec.thickness;
  const Vec3 L = spec.size;
  SceneModel scene;
  scene.bounds = {Vec3(-th, -th, -th), L + Vec3(th, th, th)};

  auto add = [&scene](ShapeKind shape, SemanticClass cls, Vec3 lo, Vec3 hi) {
    scene.solids.push_back({shape, cls, {lo, hi}});
  };
  add(ShapeKind::slab, SemanticClass::floor, {-th, -th, -th}, {L.x() + th, L.y() + th, 0.0});
  add(ShapeKind::slab, SemanticClass::ceiling, {-th, -th, L.z()}, {L.x() + th, L.y() + th, L.z() + th});
  add(ShapeKind::slab, SemanticClass::wall, {-th, -th, 0.0}, {0.0, L.y() + th, L.z()});
  add(ShapeKind::slab, SemanticClass::wall, {L.x(), -th, 0.0}, {L.x() + th, L.y() + th, L.z()});
  add(ShapeKind::slab, SemanticClass::wall, {0.0, -th, 0.0}, {L.x(), 0.0, L.z()});
  add(ShapeKind::slab, SemanticClass::wall, {0.0, L.y(), 0.0}, {L.x(), L.y() + th, L.z()});

  Rng rng(mix_seed(seed, 0x5ce9e));
  const Vec2 center(L.x() / 2.0, L.y() / 2.0);
  std::vector<Aabb> placed;
  int box_count = 0;
  int panel_count = 0;
  for (int i = 0; i < spec.n_objects; ++i) {
    const bool panel = (i % 4) == 1;
    if (panel) {
      const SemanticClass cls = detail::kPanelClasses[panel_count++ % 2];
      const Vec2 extent = cls == SemanticClass::window ? Vec2(0.96, 0.96) : Vec2(0.96, 0.56);
      const double z0 = detail::snap_to(cls == SemanticClass::window ? 0.96 : 0.8, spec.snap);
      Aabb box;
      bool ok = false;
      for (int attempt = 0; attempt < 200 && !ok; ++attempt) {
        const int wall = static_cast<int>(rng.below(4));
        const double along_len = (wall < 2) ? L.y() : L.x();
        const double s = detail::snap_to(rng.uniform(0.16, along_len - extent.x() - 0.16), spec.snap);
        if (wall == 0) box = {{0.0, s, z0}, {th, s + extent.x(), z0 + extent.y()}};
        if (wall == 1) box = {{L.x() - th, s, z0}, {L.x(), s + extent.x(), z0 + extent.y()}};
        if (wall == 2) box = {{s, 0.0, z0}, {s + extent.x(), th, z0 + extent.y()}};
        if (wall == 3) box = {{s, L.y() - th, z0}, {s + extent.x(), L.y(), z0 + extent.y()}};
        ok = box.hi.z() < L.z() && std::none_of(placed.begin(), placed.end(), [&](const Aabb& o) {
               return o.overlaps(box);
             });
      }
      if (!ok) fail(ErrorCode::InvalidSpec, "could not place wall panel; room too crowded");
      placed.push_back(box);
      add(ShapeKind::panel, cls, box.lo, box.hi);
    } else {
      const SemanticClass cls = detail::kBoxClasses[box_count++ % 6];
      const Vec3 nominal = detail::nominal_box_size(cls);
      // Farthest the footprint can get from the center (corner placement);
      // the clearance is capped below it so large boxes still fit small rooms.
      const double reach = std::hypot(std::max(center.x() - spec.wall_margin - nominal.x(), 0.0),
                                      std::max(center.y() - spec.wall_margin - nominal.y(), 0.0));
      const double clearance = std::min(spec.center_clearance, 0.75 * reach);
      Aabb box;
      bool ok = false;
      for (int attempt = 0; attempt < 500 && !ok; ++attempt) {
        Vec3 size = nominal;
        if (rng.uniform() < 0.5) std::swap(size.x(), size.y());
        const double lo_x = spec.wall_margin;
        const double lo_y = spec.wall_margin;
        const double hi_x = L.x() - spec.wall_margin - size.x();
        const double hi_y = L.y() - spec.wall_margin - size.y();
        if (hi_x < lo_x || hi_y < lo_y || size.z() >= L.z()) break;
        const double x = detail::snap_to(rng.uniform(lo_x, hi_x), spec.snap);
        const double y = detail::snap_to(rng.uniform(lo_y, hi_y), spec.snap);
        box = {{x, y, 0.0}, {x + size.x(), y + size.y(), size.z()}};
        // Distance from the room center to the box footprint.
        const double dx = std::max({box.lo.x() - center.x(), 0.0, center.x() - box.hi.x()});
        const double dy = std::max({box.lo.y() - center.y(), 0.0, center.y() - box.hi.y()});
        const bool clear = std::hypot(dx, dy) >= clearance;
        const bool inside = box.lo.x() >= spec.wall_margin - 1e-9 && box.lo.y() >= spec.wall_margin - 1e-9 &&
                            box.hi.x() <= L.x() - spec.wall_margin + 1e-9 &&
                            box.hi.y() <= L.y() - spec.wall_margin + 1e-9;
        ok = clear && inside && std::none_of(placed.begin(), placed.end(), [&](const Aabb& o) {
               Aabb grown = o;
               grown.lo -= Vec3(0.16, 0.16, 0.0);
               grown.hi += Vec3(0.16, 0.16, 0.0);
               return grown.overlaps(box);
             });
      }
      if (!ok) fail(ErrorCode::InvalidSpec, "could not place object box; room too crowded");
      placed.push_back(box);
      add(ShapeKind::box, cls, box.lo, box.hi);
    }
  }
  scene.validate();
  return scene;
}

// Per-pixel oracle frame. Depth is camera-frame z; +inf marks "no hit".
struct DepthFrame {
  int width = 0;
  int height = 0;
  std::vector<double> depth;
  std::vector<Vec3> normals;
  std::vector<SemanticClass> semantics;

  DepthFrame() = default;
  DepthFrame(int w, int h)
      : width(w),
        height(h),
        depth(static_cast<std::size_t>(w) * h, std::numeric_limits<double>::infinity()),
        normals(static_cast<std::size_t>(w) * h, Vec3::Zero()),
        semantics(static_cast<std::size_t>(w) * h, SemanticClass::empty) {}

  std::size_t index(int u, int v) const { return static_cast<std::size_t>(v) * width + u; }
  double depth_at(int u, int v) const { return depth[index(u, v)]; }
  const Vec3& normal_at(int u, int v) const { return normals[index(u, v)]; }
  SemanticClass class_at(int u, int v) const { return semantics[index(u, v)]; }
  bool inside(int u, int v) const { return u >= 0 && v >= 0 && u < width && v < height; }
};

struct DepthNoise {
  double sigma = 0.0;  // meters
  std::uint64_t seed = 0;
};

struct RayHit {
  double t = std::numeric_limits<double>::infinity();
  Vec3 normal = Vec3::Zero();
  SemanticClass cls = SemanticClass::empty;
};

// Nearest entry intersection of origin + t * dir (t > 0) with the scene.
// Solids containing the origin are ignored.
inline RayHit cast_ray(const SceneModel& scene, const Vec3& origin, const Vec3& dir) {
  RayHit best;
  for (const auto& s : scene.solids) {
    double t_enter = -std::numeric_limits<double>::infinity();
    double t_exit = std::numeric_limits<double>::infinity();
    int enter_axis = -1;
    bool enter_from_low = true;
    bool miss = false;
    for (int a = 0; a < 3 && !miss; ++a) {
      if (dir[a] == 0.0) {
        if (origin[a] < s.box.lo[a] || origin[a] > s.box.hi[a]) miss = true;
        continue;
      }
      double t0 = (s.box.lo[a] - origin[a]) / dir[a];
      double t1 = (s.box.hi[a] - origin[a]) / dir[a];
      bool low = true;
      if (t0 > t1) {
        std::swap(t0, t1);
        low = false;
      }
      if (t0 > t_enter) {
        t_enter = t0;
        enter_axis = a;
        enter_from_low = low;
      }
      t_exit = std::min(t_exit, t1);
      if (t_enter > t_exit) miss = true;
    }
    if (miss || enter_axis < 0 || !(t_enter > 1e-9) || t_enter >= best.t) continue;
    best.t = t_enter;
    best.normal = Vec3::Zero();
    best.normal[enter_axis] = enter_from_low ? -1.0 : 1.0;
    best.cls = s.cls;
  }
  return best;
}

inline DepthFrame render_depth(const SceneModel& scene, const CameraIntrinsics& k, const Pose& pose,
                               const DepthNoise& noise = {}) {
  k.validate();
  const Vec3 eye = pose.camera_center();
  if (!scene.bounds.contains_closed(eye)) fail(ErrorCode::CameraOutsideScene, "camera center outside scene bounds");
  DepthFrame frame(k.width, k.height);
  const Mat3 world_from_cam = pose.rotation().transpose();
  for (int v = 0; v < k.height; ++v) {
    for (int u = 0; u < k.width; ++u) {
      const Vec3 dir = world_from_cam * pixel_ray_camera(k, u, v);
      const RayHit hit = cast_ray(scene, eye, dir);
      const std::size_t idx = frame.index(u, v);
      if (std::isfinite(hit.t)) {
        frame.depth[idx] = hit.t;
        frame.normals[idx] = hit.normal;
        frame.semantics[idx] = hit.cls;
      }
    }
  }
  if (noise.sigma > 0.0) {
    Rng rng(mix_seed(noise.seed, 0xde97));
    for (auto& d : frame.depth) {
      const double n = rng.normal();
      if (std::isfinite(d)) d = std::max(d + noise.sigma * n, 1e-3);
    }
  }
  return frame;
}

// Label of the smallest-volume solid containing p (ties: lowest index).
inline SemanticClass label_at(const SceneModel& scene, const Vec3& p) {
  SemanticClass label = SemanticClass::empty;
  double best = std::numeric_limits<double>::infinity();
  for (const auto& s : scene.solids) {
    if (!s.box.contains(p)) continue;
    const double vol = s.box.volume();
    if (vol < best) {
      best = vol;
      label = s.cls;
    }
  }
  return label;
}

struct SemanticVoxelGrid {
  VoxelGridSpec spec;
  std::vector<std::uint8_t> labels;

  SemanticVoxelGrid() = default;
  explicit SemanticVoxelGrid(const VoxelGridSpec& s) : spec(s), labels(s.size(), 0) {}

  std::uint8_t at(int i, int j, int k) const { return labels[spec.linear(i, j, k)]; }
  std::uint8_t& at(int i, int j, int k) { return labels[spec.linear(i, j, k)]; }
  bool occupied(std::size_t idx) const { return labels[idx] != 0; }

  friend bool operator==(const SemanticVoxelGrid& a, const SemanticVoxelGrid& b) {
    return a.spec == b.spec && a.labels == b.labels;
  }
};

inline SemanticVoxelGrid gt_occupancy(const SceneModel& scene, const VoxelGridSpec& spec) {
  spec.validate();
  if (!scene.bounds.contains_closed(spec.origin, 1e-9) || !scene.bounds.contains_closed(spec.upper(), 1e-9)) {
    fail(ErrorCode::GridOutsideScene, "voxel grid extends beyond scene bounds");
  }
  SemanticVoxelGrid grid(spec);
  for (int k = 0; k < spec.dims[2]; ++k) {
    for (int j = 0; j < spec.dims[1]; ++j) {
      for (int i = 0; i < spec.dims[0]; ++i) {
        grid.at(i, j, k) = static_cast<std::uint8_t>(label_at(scene, spec.center(i, j, k)));
      }
    }
  }
  return grid;
}

enum class LookMode { outward, target };

struct TrajectorySpec {
  int n_frames = 30;
  Vec3 center{2.0, 2.0, 1.4};
  double radius = 0.5;
  double start_angle = 0.0;             // radians
  double sweep = 2.0 * std::numbers::pi;  // radians covered by the n_frames samples
  LookMode look = LookMode::outward;
  Vec3 target{2.0, 2.0, 1.0};
  double pitch = 0.35;  // downward tilt for outward views (radians)

  void validate() const {
    if (n_frames < 1) fail(ErrorCode::InvalidSpec, "trajectory needs n_frames >= 1");
    if (radius < 0.0) fail(ErrorCode::InvalidSpec, "trajectory radius must be >= 0");
  }
};

// Frame i sits at angle start + sweep * i / n_frames on a horizontal circle.
inline std::vector<Pose> gen_trajectory(const SceneModel& scene, const TrajectorySpec& traj) {
  traj.validate();
  std::vector<Pose> poses;
  poses.reserve(static_cast<std::size_t>(traj.n_frames));
  Vec3 prev = Vec3::Zero();
  for (int i = 0; i < traj.n_frames; ++i) {
    const double theta = traj.start_angle + traj.sweep * static_cast<double>(i) / traj.n_frames;
    const Vec3 radial(std::cos(theta), std::sin(theta), 0.0);
    const Vec3 eye = traj.center + traj.radius * radial;
    if (!scene.bounds.contains_closed(eye)) fail(ErrorCode::PathLeavesBounds, "camera path leaves scene bounds");
    if (i > 0 && (eye - prev).norm() > 0.3 + 1e-12) {
      fail(ErrorCode::InvalidSpec, "consecutive camera centers more than 0.3 m apart");
    }
    prev = eye;
    Vec3 target = traj.target;
    if (traj.look == LookMode::outward) {
      target = eye + Vec3(std::cos(theta) * std::cos(traj.pitch), std::sin(theta) * std::cos(traj.pitch),
                          -std::sin(traj.pitch));
    }
    poses.push_back(Pose::look_at(eye, target));
  }
  return poses;
}

// Jitters the camera-from-world translation by U(-1, 1) * frac * |t| per
// axis; rotation is kept.
inline Pose perturb_pose(const Pose& pose, double frac, std::uint64_t seed) {
  if (!(frac >= 0.0 && frac <= 0.2)) fail(ErrorCode::FracOutOfRange, "perturbation fraction must be in [0, 0.2]");
  if (frac == 0.0) return pose;
  Rng rng(mix_seed(seed, 0x9053));
  const double mag = frac * pose.translation().norm();
  Vec3 delta;
  for (int a = 0; a < 3; ++a) delta[a] = rng.uniform(-1.0, 1.0) * mag;
  return {pose.rotation(), pose.translation() + delta};
}

}  // namespace sgrocc
