#pragma once

// 2D -> 3D feature lifting with a Gaussian depth gate.
//
//   F3D(q) = sum_k A_k * G(d_proj, d_pred_k) * F2D(p_ref + dp_k)
//   G(a, b) = alpha * exp(-(a - b)^2 / (2 sigma^2))

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "sgrocc/errors.hpp"
#include "sgrocc/geometry.hpp"
#include "sgrocc/scene_sim.hpp"

namespace sgrocc {

using VecX = Eigen::VectorXd;

// One-hot class channels, then normalized u, v and depth.
inline constexpr int kFeatureChannels = kNumClasses + 3;
inline constexpr double kDepthNormalization = 10.0;  // meters mapped to 1.0

struct GateParams {
  double alpha = 1.0;
  double sigma = 0.5;

  static constexpr double kSigmaMin = 1e-3;

  void validate() const {
    if (!(alpha >= 0.0)) fail(ErrorCode::InvalidSpec, "gate alpha must be >= 0");
    if (!(sigma > 0.0)) fail(ErrorCode::InvalidSpec, "gate sigma must be > 0");
  }
};

enum class LiftMode { hard_projection, deformable_no_gate, hard_threshold, soft_gating };

inline const char* to_string(LiftMode m) {
  switch (m) {
    case LiftMode::hard_projection: return "hard_projection";
    case LiftMode::deformable_no_gate: return "deformable_no_gate";
    case LiftMode::hard_threshold: return "hard_threshold";
    case LiftMode::soft_gating: return "soft_gating";
  }
  return "?";
}

enum class OffsetPattern { grid, ring };

struct SampleConfig {
  int k = 16;
  OffsetPattern pattern = OffsetPattern::grid;
  double radius = 1.5;  // pixels
  double tau = 0.5;     // hard_threshold cut on G / alpha
  bool normalize_gate = false;
  // Externally supplied samples; when non-empty they replace the pattern and
  // the uniform 1/K attention.
  std::vector<Vec2> offsets;
  std::vector<double> attention;

  void validate() const {
    if (k < 1) fail(ErrorCode::InvalidSpec, "K must be >= 1");
    if (!(radius > 0.0)) fail(ErrorCode::InvalidSpec, "offset radius must be > 0");
    if (!(tau > 0.0 && tau <= 1.0)) fail(ErrorCode::InvalidSpec, "tau must be in (0, 1]");
    if (offsets.size() != attention.size()) fail(ErrorCode::InvalidSpec, "offsets/attention size mismatch");
  }
};

// Deterministic symmetric sampling pattern: a sqrt(K) x sqrt(K) lattice
// spanning [-radius, radius]^2, or K points evenly spaced on a circle.
inline std::vector<Vec2> gen_offsets(int k, OffsetPattern pattern, double radius) {
  if (k < 1) fail(ErrorCode::InvalidSpec, "K must be >= 1");
  if (!(radius > 0.0)) fail(ErrorCode::InvalidSpec, "radius must be > 0");
  if (k == 1) return {Vec2::Zero()};
  std::vector<Vec2> out;
  out.reserve(static_cast<std::size_t>(k));
  if (pattern == OffsetPattern::grid) {
    const int n = static_cast<int>(std::lround(std::sqrt(static_cast<double>(k))));
    if (n * n != k) fail(ErrorCode::BadPattern, "grid pattern needs a perfect-square K");
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < n; ++i) {
        out.emplace_back(-radius + 2.0 * radius * i / (n - 1), -radius + 2.0 * radius * j / (n - 1));
      }
    }
    return out;
  }
  for (int i = 0; i < k; ++i) {
    const double a = 2.0 * std::numbers::pi * i / k;
    out.emplace_back(radius * std::cos(a), radius * std::sin(a));
  }
  return out;
}

inline double gaussian_gate(double d_proj, double d_pred, const GateParams& g) {
  const double r = d_proj - d_pred;
  return g.alpha * std::exp(-(r * r) / (2.0 * g.sigma * g.sigma));
}

struct GateGradients {
  double d_alpha = 0.0;
  double d_sigma = 0.0;
  double d_pred = 0.0;
};

inline GateGradients gate_gradients(double d_proj, double d_pred, const GateParams& g) {
  const double r = d_proj - d_pred;
  const double s2 = g.sigma * g.sigma;
  const double kernel = std::exp(-(r * r) / (2.0 * s2));
  const double gate = g.alpha * kernel;
  return {kernel, gate * r * r / (s2 * g.sigma), gate * r / s2};
}

// Dense H x W x C feature image, channel-fastest.
struct FeatureMap {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(int w, int h, int c) : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, 0.0) {}

  double* at(int u, int v) { return data.data() + (static_cast<std::size_t>(v) * width + u) * channels; }
  const double* at(int u, int v) const {
    return data.data() + (static_cast<std::size_t>(v) * width + u) * channels;
  }
};

inline FeatureMap build_feature_map(const DepthFrame& frame) {
  FeatureMap fm(frame.width, frame.height, kFeatureChannels);
  const double su = frame.width > 1 ? 1.0 / (frame.width - 1) : 0.0;
  const double sv = frame.height > 1 ? 1.0 / (frame.height - 1) : 0.0;
  for (int v = 0; v < frame.height; ++v) {
    for (int u = 0; u < frame.width; ++u) {
      double* f = fm.at(u, v);
      f[class_code(frame.class_at(u, v))] = 1.0;
      f[kNumClasses] = u * su;
      f[kNumClasses + 1] = v * sv;
      const double d = frame.depth_at(u, v);
      f[kNumClasses + 2] = std::isfinite(d) ? d / kDepthNormalization : 0.0;
    }
  }
  return fm;
}

namespace detail {

struct BilinearTaps {
  int u[4];
  int v[4];
  double w[4];
};

inline std::optional<BilinearTaps> bilinear_taps(int width, int height, double u, double v) {
  if (!(u >= 0.0 && v >= 0.0 && u <= width - 1.0 && v <= height - 1.0)) return std::nullopt;
  const int u0 = static_cast<int>(std::floor(u));
  const int v0 = static_cast<int>(std::floor(v));
  const int u1 = std::min(u0 + 1, width - 1);
  const int v1 = std::min(v0 + 1, height - 1);
  const double fu = u - u0;
  const double fv = v - v0;
  return BilinearTaps{{u0, u1, u0, u1}, {v0, v0, v1, v1},
                      {(1 - fu) * (1 - fv), fu * (1 - fv), (1 - fu) * fv, fu * fv}};
}

}  // namespace detail

// Bilinear depth; +inf if any tap with positive weight has no surface.
inline std::optional<double> sample_depth(const DepthFrame& frame, double u, double v) {
  const auto taps = detail::bilinear_taps(frame.width, frame.height, u, v);
  if (!taps) return std::nullopt;
  double acc = 0.0;
  for (int t = 0; t < 4; ++t) {
    if (taps->w[t] == 0.0) continue;
    const double d = frame.depth_at(taps->u[t], taps->v[t]);
    if (!std::isfinite(d)) return std::numeric_limits<double>::infinity();
    acc += taps->w[t] * d;
  }
  return acc;
}

inline bool sample_features(const FeatureMap& fm, double u, double v, double* out) {
  const auto taps = detail::bilinear_taps(fm.width, fm.height, u, v);
  if (!taps) return false;
  std::fill(out, out + fm.channels, 0.0);
  for (int t = 0; t < 4; ++t) {
    if (taps->w[t] == 0.0) continue;
    const double* f = fm.at(taps->u[t], taps->v[t]);
    for (int c = 0; c < fm.channels; ++c) out[c] += taps->w[t] * f[c];
  }
  return true;
}

struct LiftSample {
  Vec2 pixel = Vec2::Zero();
  double attention = 0.0;
  double depth = std::numeric_limits<double>::infinity();  // sampled predicted depth
  double gate = 0.0;
  bool in_image = false;
};

struct LiftResult {
  VecX feature;
  Projection reference;
  std::vector<LiftSample> samples;

  // sum_k A_k G_k over in-image samples.
  double gate_mass() const {
    double m = 0.0;
    for (const auto& s : samples) m += s.in_image ? s.attention * s.gate : 0.0;
    return m;
  }

  // Gate-weighted mean of the finite sampled depths.
  std::optional<double> lifted_depth() const {
    double num = 0.0;
    double den = 0.0;
    for (const auto& s : samples) {
      if (!s.in_image || !std::isfinite(s.depth)) continue;
      const double w = s.attention * s.gate;
      num += w * s.depth;
      den += w;
    }
    if (!(den > 1e-12)) return std::nullopt;
    return num / den;
  }
};

inline LiftResult lift_feature(const Vec3& q, const FeatureMap& fm, const DepthFrame& depth, const CameraIntrinsics& k,
                               const Pose& pose, const GateParams& g, LiftMode mode, const SampleConfig& cfg) {
  LiftResult res;
  res.reference = project_point(k, pose, q);
  res.feature = VecX::Zero(fm.channels);
  const Vec2 p_ref(res.reference.u, res.reference.v);

  std::vector<Vec2> offsets;
  std::vector<double> attention;
  if (mode == LiftMode::hard_projection) {
    offsets = {Vec2::Zero()};
    attention = {1.0};
  } else if (!cfg.offsets.empty()) {
    offsets = cfg.offsets;
    attention = cfg.attention;
  } else {
    offsets = gen_offsets(cfg.k, cfg.pattern, cfg.radius);
    attention.assign(offsets.size(), 1.0 / static_cast<double>(offsets.size()));
  }

  std::vector<double> f2d(static_cast<std::size_t>(fm.channels));
  double weight_sum = 0.0;
  res.samples.reserve(offsets.size());
  for (std::size_t s = 0; s < offsets.size(); ++s) {
    LiftSample smp;
    smp.pixel = p_ref + offsets[s];
    smp.attention = attention[s];
    const auto d = sample_depth(depth, smp.pixel.x(), smp.pixel.y());
    if (d && sample_features(fm, smp.pixel.x(), smp.pixel.y(), f2d.data())) {
      smp.in_image = true;
      smp.depth = *d;
      switch (mode) {
        case LiftMode::hard_projection:
        case LiftMode::deformable_no_gate:
          smp.gate = 1.0;
          break;
        case LiftMode::soft_gating:
          smp.gate = gaussian_gate(res.reference.depth, smp.depth, g);
          break;
        case LiftMode::hard_threshold: {
          const double r = res.reference.depth - smp.depth;
          const double kernel = std::exp(-(r * r) / (2.0 * g.sigma * g.sigma));
          smp.gate = kernel >= cfg.tau ? 1.0 : 0.0;
          break;
        }
      }
      const double w = smp.attention * smp.gate;
      weight_sum += w;
      for (int c = 0; c < fm.channels; ++c) res.feature[c] += w * f2d[static_cast<std::size_t>(c)];
    }
    res.samples.push_back(smp);
  }
  if (cfg.normalize_gate) res.feature /= (weight_sum + 1e-8);
  return res;
}

}  // namespace sgrocc
