#pragma once

// Pinhole camera, rigid poses, rays and voxel-grid indexing.
//
// Camera frame: right-handed, +z forward, +x right, +y down. Pixel (u, v)
// addresses the pixel center at integer coordinates; depth is camera-frame z.

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Core>
#include <Eigen/Geometry>

#include "sgrocc/errors.hpp"

namespace sgrocc {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

inline constexpr double kMinDepth = 1e-6;

struct CameraIntrinsics {
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.0;
  double cy = 0.0;
  int width = 1;
  int height = 1;

  void validate() const {
    if (!(fx > 0.0) || !(fy > 0.0)) fail(ErrorCode::InvalidSpec, "focal lengths must be positive");
    if (width < 1 || height < 1) fail(ErrorCode::InvalidSpec, "image size must be positive");
    if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
      fail(ErrorCode::InvalidSpec, "principal point outside image");
    }
  }

  bool contains(double u, double v) const {
    return u >= 0.0 && v >= 0.0 && u <= width - 1.0 && v <= height - 1.0;
  }
};

// Camera-from-world rigid transform: x_cam = R * x_world + t.
class Pose {
 public:
  Pose() : rotation_(Mat3::Identity()), translation_(Vec3::Zero()) {}

  Pose(const Mat3& rotation, const Vec3& translation) : rotation_(rotation), translation_(translation) {
    const Mat3 gram = rotation_.transpose() * rotation_ - Mat3::Identity();
    if (gram.cwiseAbs().maxCoeff() > 1e-9 || std::abs(rotation_.determinant() - 1.0) > 1e-9) {
      fail(ErrorCode::InvalidSpec, "pose rotation is not a proper orthonormal matrix");
    }
    if (!translation_.allFinite()) fail(ErrorCode::InvalidSpec, "pose translation not finite");
  }

  static Pose identity() { return {}; }

  // Camera at `eye` looking at `target`, world +z up.
  static Pose look_at(const Vec3& eye, const Vec3& target, const Vec3& up = Vec3::UnitZ()) {
    Vec3 forward = target - eye;
    if (forward.norm() < 1e-12) fail(ErrorCode::InvalidSpec, "look_at target coincides with eye");
    forward.normalize();
    Vec3 right = forward.cross(up);
    if (right.norm() < 1e-9) fail(ErrorCode::InvalidSpec, "look_at direction parallel to up vector");
    right.normalize();
    const Vec3 down = forward.cross(right);
    Mat3 r;
    r.row(0) = right.transpose();
    r.row(1) = down.transpose();
    r.row(2) = forward.transpose();
    return Pose(r, -r * eye);
  }

  const Mat3& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }

  Vec3 camera_center() const { return -rotation_.transpose() * translation_; }
  Vec3 to_camera(const Vec3& world) const { return rotation_ * world + translation_; }
  Vec3 to_world(const Vec3& cam) const { return rotation_.transpose() * (cam - translation_); }

  Pose inverse() const { return {rotation_.transpose(), -rotation_.transpose() * translation_}; }

  // (this * other)(x) = this(other(x)).
  Pose compose(const Pose& other) const {
    return {rotation_ * other.rotation_, rotation_ * other.translation_ + translation_};
  }

 private:
  Mat3 rotation_;
  Vec3 translation_;
};

struct Ray {
  Vec3 origin = Vec3::Zero();
  Vec3 direction = Vec3::UnitZ();

  Vec3 at(double range) const { return origin + range * direction; }
};

struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

inline Projection project_point(const CameraIntrinsics& k, const Pose& pose, const Vec3& world) {
  const Vec3 c = pose.to_camera(world);
  if (!(c.z() > kMinDepth)) fail(ErrorCode::BehindCamera, "point behind camera");
  return {k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy, c.z()};
}

// Same as project_point but reports failure through an empty optional.
inline std::optional<Projection> try_project(const CameraIntrinsics& k, const Pose& pose, const Vec3& world) {
  const Vec3 c = pose.to_camera(world);
  if (!(c.z() > kMinDepth)) return std::nullopt;
  return Projection{k.fx * c.x() / c.z() + k.cx, k.fy * c.y() / c.z() + k.cy, c.z()};
}

// Unnormalized camera-frame ray through pixel (u, v) with unit z component.
inline Vec3 pixel_ray_camera(const CameraIntrinsics& k, double u, double v) {
  return {(u - k.cx) / k.fx, (v - k.cy) / k.fy, 1.0};
}

inline Vec3 backproject(const CameraIntrinsics& k, const Pose& pose, double u, double v, double depth) {
  if (!(depth > 0.0)) fail(ErrorCode::NonPositiveDepth, "backproject needs depth > 0");
  return pose.to_world(depth * pixel_ray_camera(k, u, v));
}

inline Ray ray_through(const Vec3& origin, const Vec3& point) {
  const Vec3 d = point - origin;
  const double n = d.norm();
  if (!(n > 1e-9)) fail(ErrorCode::DegenerateRay, "ray endpoints coincide");
  return {origin, d / n};
}

struct VoxelIndex {
  int i = 0;
  int j = 0;
  int k = 0;

  friend bool operator==(const VoxelIndex&, const VoxelIndex&) = default;
};

struct VoxelGridSpec {
  Vec3 origin = Vec3::Zero();
  std::array<int, 3> dims{60, 60, 36};
  double resolution = 0.08;

  void validate() const {
    if (!(resolution > 0.0)) fail(ErrorCode::InvalidSpec, "voxel resolution must be positive");
    for (int d : dims) {
      if (d < 1) fail(ErrorCode::InvalidSpec, "voxel dims must be >= 1");
    }
  }

  std::size_t size() const {
    return static_cast<std::size_t>(dims[0]) * static_cast<std::size_t>(dims[1]) * static_cast<std::size_t>(dims[2]);
  }

  // x-fastest linear ordering.
  std::size_t linear(int i, int j, int k) const {
    return static_cast<std::size_t>(i) +
           static_cast<std::size_t>(dims[0]) * (static_cast<std::size_t>(j) + static_cast<std::size_t>(dims[1]) * k);
  }
  std::size_t linear(const VoxelIndex& v) const { return linear(v.i, v.j, v.k); }

  VoxelIndex unlinear(std::size_t idx) const {
    const auto nx = static_cast<std::size_t>(dims[0]);
    const auto ny = static_cast<std::size_t>(dims[1]);
    return {static_cast<int>(idx % nx), static_cast<int>((idx / nx) % ny), static_cast<int>(idx / (nx * ny))};
  }

  bool in_bounds(int i, int j, int k) const {
    return i >= 0 && j >= 0 && k >= 0 && i < dims[0] && j < dims[1] && k < dims[2];
  }

  Vec3 center(int i, int j, int k) const {
    return origin + resolution * Vec3(i + 0.5, j + 0.5, k + 0.5);
  }
  Vec3 center(const VoxelIndex& v) const { return center(v.i, v.j, v.k); }

  Vec3 upper() const { return origin + resolution * Vec3(dims[0], dims[1], dims[2]); }

  friend bool operator==(const VoxelGridSpec& a, const VoxelGridSpec& b) {
    return a.origin == b.origin && a.dims == b.dims && a.resolution == b.resolution;
  }
};

// Half-open cells [lo, hi): boundary points belong to the higher cell.
inline std::optional<VoxelIndex> world_to_voxel(const VoxelGridSpec& spec, const Vec3& p) {
  const Vec3 rel = (p - spec.origin) / spec.resolution;
  if (!rel.allFinite()) return std::nullopt;
  for (int a = 0; a < 3; ++a) {
    if (rel[a] < 0.0 || rel[a] >= spec.dims[a]) return std::nullopt;
  }
  const int i = static_cast<int>(std::floor(rel.x()));
  const int j = static_cast<int>(std::floor(rel.y()));
  const int k = static_cast<int>(std::floor(rel.z()));
  if (!spec.in_bounds(i, j, k)) return std::nullopt;
  return VoxelIndex{i, j, k};
}

}  // namespace sgrocc
