#pragma once

// Pool -> voxel decoding, SC-IoU / mIoU / boundary F1 and the SVOX1 format.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "sgrocc/errors.hpp"
#include "sgrocc/geometry.hpp"
#include "sgrocc/io.hpp"
#include "sgrocc/scene_sim.hpp"
#include "sgrocc/temporal_memory.hpp"

namespace sgrocc {

inline constexpr double kDefaultOccThreshold = 0.25;

namespace detail {

// Per-voxel label from accumulated class weights: empty below the occupancy
// threshold, otherwise the argmax (lowest code on ties, empty included).
inline std::uint8_t label_from_weights(const double* acc, double theta) {
  double total = 0.0;
  for (int c = 0; c < kNumClasses; ++c) total += acc[c];
  if (!(total >= theta)) return 0;
  int best = 0;
  for (int c = 1; c < kNumClasses; ++c) {
    if (acc[c] > acc[best]) best = c;
  }
  return static_cast<std::uint8_t>(best);
}

inline double kernel_weight(const Vec3& center, const GaussianPrimitive& g, bool& inside) {
  const double d2 = (center - g.position).squaredNorm();
  const double s2 = g.scale * g.scale;
  inside = d2 <= 9.0 * s2;
  return std::exp(-d2 / (2.0 * s2));
}

}  // namespace detail

// Spatially indexed decode: each primitive splats into the voxels whose
// centers lie within 3 * scale. Per-voxel sums run in pool order, so the
// result matches the brute-force decode bit for bit.
inline SemanticVoxelGrid decode_pool(const std::vector<GaussianPrimitive>& prims, const VoxelGridSpec& spec,
                                     double theta = kDefaultOccThreshold) {
  spec.validate();
  std::vector<double> acc(spec.size() * kNumClasses, 0.0);
  for (const auto& g : prims) {
    const Logits p = softmax(g.logits);
    const double reach = 3.0 * g.scale;
    std::array<int, 3> lo{};
    std::array<int, 3> hi{};
    bool empty = false;
    for (int a = 0; a < 3; ++a) {
      const double l = std::floor((g.position[a] - reach - spec.origin[a]) / spec.resolution - 0.5);
      const double h = std::ceil((g.position[a] + reach - spec.origin[a]) / spec.resolution - 0.5);
      if (!(l <= spec.dims[a] - 1) || !(h >= 0.0)) {
        empty = true;
        break;
      }
      lo[a] = static_cast<int>(std::max(0.0, l));
      hi[a] = static_cast<int>(std::min(static_cast<double>(spec.dims[a] - 1), h));
    }
    if (empty) continue;
    for (int k = lo[2]; k <= hi[2]; ++k) {
      for (int j = lo[1]; j <= hi[1]; ++j) {
        for (int i = lo[0]; i <= hi[0]; ++i) {
          bool inside = false;
          const double w = detail::kernel_weight(spec.center(i, j, k), g, inside);
          if (!inside) continue;
          double* a = acc.data() + spec.linear(i, j, k) * kNumClasses;
          for (int c = 0; c < kNumClasses; ++c) a[c] += p[c] * w;
        }
      }
    }
  }
  SemanticVoxelGrid grid(spec);
  for (std::size_t v = 0; v < spec.size(); ++v) {
    grid.labels[v] = detail::label_from_weights(acc.data() + v * kNumClasses, theta);
  }
  return grid;
}

inline SemanticVoxelGrid decode_pool(const GaussianPool& pool, const VoxelGridSpec& spec,
                                     double theta = kDefaultOccThreshold) {
  return decode_pool(pool.primitives, spec, theta);
}

// Reference decode: every voxel visits every primitive.
inline SemanticVoxelGrid decode_pool_bruteforce(const std::vector<GaussianPrimitive>& prims,
                                                const VoxelGridSpec& spec, double theta = kDefaultOccThreshold) {
  spec.validate();
  std::vector<Logits> probs;
  probs.reserve(prims.size());
  for (const auto& g : prims) probs.push_back(softmax(g.logits));
  SemanticVoxelGrid grid(spec);
  for (std::size_t v = 0; v < spec.size(); ++v) {
    const Vec3 c = spec.center(spec.unlinear(v));
    double acc[kNumClasses] = {};
    for (std::size_t n = 0; n < prims.size(); ++n) {
      bool inside = false;
      const double w = detail::kernel_weight(c, prims[n], inside);
      if (!inside) continue;
      for (int k = 0; k < kNumClasses; ++k) acc[k] += probs[n][k] * w;
    }
    grid.labels[v] = detail::label_from_weights(acc, theta);
  }
  return grid;
}

// Optional evaluation mask: nonzero entries are scored.
using VoxelMask = std::vector<std::uint8_t>;

namespace detail {

inline void check_same(const SemanticVoxelGrid& a, const SemanticVoxelGrid& b, const VoxelMask* mask) {
  if (!(a.spec == b.spec) || a.labels.size() != b.labels.size()) {
    fail(ErrorCode::SpecMismatch, "voxel grids have different specs");
  }
  if (mask && mask->size() != a.labels.size()) fail(ErrorCode::SpecMismatch, "mask size differs from grid");
}

inline bool scored(const VoxelMask* mask, std::size_t i) { return !mask || (*mask)[i] != 0; }

}  // namespace detail

inline double sc_iou(const SemanticVoxelGrid& pred, const SemanticVoxelGrid& gt, const VoxelMask* mask = nullptr) {
  detail::check_same(pred, gt, mask);
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    if (!detail::scored(mask, i)) continue;
    const bool p = pred.labels[i] != 0;
    const bool g = gt.labels[i] != 0;
    inter += (p && g) ? 1 : 0;
    uni += (p || g) ? 1 : 0;
  }
  return uni == 0 ? 1.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

struct ClassIou {
  std::array<std::optional<double>, kNumClasses - 1> per_class;  // codes 1..11
  double miou = std::numeric_limits<double>::quiet_NaN();        // NaN when no class is defined

  std::optional<double> of(SemanticClass c) const { return per_class[static_cast<std::size_t>(class_code(c) - 1)]; }
};

inline ClassIou miou(const SemanticVoxelGrid& pred, const SemanticVoxelGrid& gt, const VoxelMask* mask = nullptr) {
  detail::check_same(pred, gt, mask);
  std::array<std::size_t, kNumClasses> tp{};
  std::array<std::size_t, kNumClasses> fp{};
  std::array<std::size_t, kNumClasses> fn{};
  for (std::size_t i = 0; i < gt.labels.size(); ++i) {
    if (!detail::scored(mask, i)) continue;
    const int p = pred.labels[i];
    const int g = gt.labels[i];
    if (p == g) {
      ++tp[p];
    } else {
      ++fp[p];
      ++fn[g];
    }
  }
  ClassIou out;
  double sum = 0.0;
  int defined = 0;
  for (int c = 1; c < kNumClasses; ++c) {
    const std::size_t denom = tp[c] + fp[c] + fn[c];
    if (denom == 0) continue;
    const double iou = static_cast<double>(tp[c]) / static_cast<double>(denom);
    out.per_class[static_cast<std::size_t>(c - 1)] = iou;
    sum += iou;
    ++defined;
  }
  if (defined > 0) out.miou = sum / defined;
  return out;
}

// Occupied voxels with at least one empty 6-neighbor; the grid edge counts
// as empty.
inline std::vector<std::uint8_t> boundary_voxels(const SemanticVoxelGrid& g) {
  const auto& s = g.spec;
  std::vector<std::uint8_t> b(s.size(), 0);
  static constexpr int kOff[6][3] = {{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  for (int k = 0; k < s.dims[2]; ++k) {
    for (int j = 0; j < s.dims[1]; ++j) {
      for (int i = 0; i < s.dims[0]; ++i) {
        if (g.at(i, j, k) == 0) continue;
        for (const auto& o : kOff) {
          const int ii = i + o[0];
          const int jj = j + o[1];
          const int kk = k + o[2];
          if (!s.in_bounds(ii, jj, kk) || g.at(ii, jj, kk) == 0) {
            b[s.linear(i, j, k)] = 1;
            break;
          }
        }
      }
    }
  }
  return b;
}

inline double boundary_f1(const SemanticVoxelGrid& pred, const SemanticVoxelGrid& gt, int dist = 1,
                          const VoxelMask* mask = nullptr) {
  detail::check_same(pred, gt, mask);
  if (dist < 0) fail(ErrorCode::InvalidSpec, "boundary distance must be >= 0");
  auto bp = boundary_voxels(pred);
  auto bg = boundary_voxels(gt);
  if (mask) {
    for (std::size_t i = 0; i < bp.size(); ++i) {
      if (!(*mask)[i]) bp[i] = bg[i] = 0;
    }
  }
  const auto& s = gt.spec;
  auto matched = [&s, dist](const std::vector<std::uint8_t>& from, const std::vector<std::uint8_t>& to,
                            std::size_t& total) {
    std::size_t hit = 0;
    total = 0;
    for (std::size_t idx = 0; idx < from.size(); ++idx) {
      if (!from[idx]) continue;
      ++total;
      const VoxelIndex v = s.unlinear(idx);
      bool found = false;
      for (int dk = -dist; dk <= dist && !found; ++dk) {
        for (int dj = -dist; dj <= dist && !found; ++dj) {
          for (int di = -dist; di <= dist && !found; ++di) {
            const int i = v.i + di;
            const int j = v.j + dj;
            const int k = v.k + dk;
            found = s.in_bounds(i, j, k) && to[s.linear(i, j, k)] != 0;
          }
        }
      }
      hit += found ? 1 : 0;
    }
    return hit;
  };
  std::size_t n_pred = 0;
  std::size_t n_gt = 0;
  const std::size_t hit_pred = matched(bp, bg, n_pred);
  const std::size_t hit_gt = matched(bg, bp, n_gt);
  if (n_pred == 0 && n_gt == 0) return 1.0;
  if (n_pred == 0 || n_gt == 0) return 0.0;
  const double precision = static_cast<double>(hit_pred) / static_cast<double>(n_pred);
  const double recall = static_cast<double>(hit_gt) / static_cast<double>(n_gt);
  if (precision + recall == 0.0) return 0.0;
  return 2.0 * precision * recall / (precision + recall);
}

struct MetricReport {
  double sc_iou = 0.0;
  ClassIou classes;
  double boundary_f1 = 0.0;

  double miou() const { return classes.miou; }
};

inline MetricReport evaluate(const SemanticVoxelGrid& pred, const SemanticVoxelGrid& gt,
                             const VoxelMask* mask = nullptr) {
  return {sc_iou(pred, gt, mask), miou(pred, gt, mask), boundary_f1(pred, gt, 1, mask)};
}

// SVOX1: magic, u32 x 3 dims, f32 x 3 origin, f32 resolution, u8 label per
// voxel, x fastest. Little-endian.
inline std::vector<std::uint8_t> encode_svox(const SemanticVoxelGrid& g) {
  io::ByteWriter w;
  w.magic("SVOX1");
  for (int d : g.spec.dims) w.u32(static_cast<std::uint32_t>(d));
  for (int a = 0; a < 3; ++a) w.f32(g.spec.origin[a]);
  w.f32(g.spec.resolution);
  for (std::uint8_t l : g.labels) w.u8(l);
  return w.bytes();
}

inline SemanticVoxelGrid decode_svox(const std::vector<std::uint8_t>& bytes) {
  io::ByteReader r(bytes);
  r.expect_magic("SVOX1");
  VoxelGridSpec spec;
  for (int& d : spec.dims) {
    const std::uint32_t v = r.u32();
    if (v == 0 || v > (1u << 16)) fail(ErrorCode::FormatError, "implausible SVOX1 dimension");
    d = static_cast<int>(v);
  }
  for (int a = 0; a < 3; ++a) spec.origin[a] = r.f32();
  spec.resolution = r.f32();
  if (!(spec.resolution > 0.0)) fail(ErrorCode::FormatError, "SVOX1 resolution must be positive");
  SemanticVoxelGrid g(spec);
  if (r.remaining() != g.labels.size()) fail(ErrorCode::FormatError, "SVOX1 payload size mismatch");
  for (auto& l : g.labels) {
    l = r.u8();
    if (l >= kNumClasses) fail(ErrorCode::FormatError, "SVOX1 label out of range");
  }
  return g;
}

}  // namespace sgrocc
