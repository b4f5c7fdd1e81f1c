#pragma once

// Residual temporal fusion F = W_h F_hist + W_c F_curr + b, the two-phase
// differential learning-rate schedule, a toy trainer and finite-difference
// gradient checks.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "sgrocc/errors.hpp"
#include "sgrocc/lifter.hpp"
#include "sgrocc/refiner.hpp"
#include "sgrocc/rng.hpp"

namespace sgrocc {

using MatX = Eigen::MatrixXd;

struct FusionWeights {
  MatX w_h;
  MatX w_c;
  VecX b;

  int dim() const { return static_cast<int>(b.size()); }
};

enum class FusionInit { identity, random };

inline FusionWeights init_fusion_weights(int c, FusionInit mode, std::uint64_t seed = 0, double sigma_w = 0.5) {
  if (c < 1) fail(ErrorCode::InvalidSpec, "fusion dimension must be >= 1");
  FusionWeights w{MatX::Zero(c, c), MatX::Identity(c, c), VecX::Zero(c)};
  if (mode == FusionInit::random) {
    if (!(sigma_w >= 0.0)) fail(ErrorCode::InvalidSpec, "sigma_w must be >= 0");
    Rng rng(mix_seed(seed, 0xf05e));
    for (int i = 0; i < c; ++i) {
      for (int j = 0; j < c; ++j) w.w_h(i, j) = rng.normal(0.0, sigma_w);
    }
    for (int i = 0; i < c; ++i) {
      for (int j = 0; j < c; ++j) w.w_c(i, j) = rng.normal(0.0, sigma_w);
    }
    for (int i = 0; i < c; ++i) w.b[i] = rng.normal(0.0, sigma_w);
  }
  return w;
}

// Zero weights are skipped and the first live term seeds the sum, so the
// identity map copies F_curr bit for bit (signed zeros and non-finite
// values included).
inline VecX fuse(const VecX& f_hist, const VecX& f_curr, const FusionWeights& w) {
  const int c = w.dim();
  if (f_hist.size() != c || f_curr.size() != c || w.w_h.rows() != c || w.w_h.cols() != c || w.w_c.rows() != c ||
      w.w_c.cols() != c) {
    fail(ErrorCode::DimMismatch, "fusion operand dimensions disagree");
  }
  VecX out(c);
  for (int i = 0; i < c; ++i) {
    double acc = 0.0;
    bool live = false;
    auto add = [&](double term) {
      acc = live ? acc + term : term;
      live = true;
    };
    for (int j = 0; j < c; ++j) {
      if (w.w_h(i, j) != 0.0) add(w.w_h(i, j) * f_hist[j]);
    }
    for (int j = 0; j < c; ++j) {
      if (w.w_c(i, j) != 0.0) add(w.w_c(i, j) * f_curr[j]);
    }
    if (w.b[i] != 0.0) add(w.b[i]);
    out[i] = acc;
  }
  return out;
}

enum class ModuleGroup { backbone, spatial_expert, temporal_manager };

inline const char* to_string(ModuleGroup g) {
  switch (g) {
    case ModuleGroup::backbone: return "backbone";
    case ModuleGroup::spatial_expert: return "spatial_expert";
    case ModuleGroup::temporal_manager: return "temporal_manager";
  }
  return "?";
}

struct GroupMultipliers {
  double backbone = 0.0;
  double spatial = 0.0;
  double temporal = 1.0;

  double of(ModuleGroup g) const {
    switch (g) {
      case ModuleGroup::backbone: return backbone;
      case ModuleGroup::spatial_expert: return spatial;
      case ModuleGroup::temporal_manager: return temporal;
    }
    return 0.0;
  }
};

struct TrainingSchedule {
  int total_epochs = 15;
  int phase1_end = 5;
  double base_lr = 1e-4;
  GroupMultipliers phase1{0.0, 0.0, 1.0};
  GroupMultipliers phase2{0.0, 0.1, 1.0};
  int warmup_epochs = 0;  // linear warm-up of base_lr, 0 = off
  bool cosine = false;    // cosine decay of base_lr over the run

  void validate() const {
    if (!(phase1_end > 0 && phase1_end < total_epochs)) fail(ErrorCode::InvalidSpec, "need 0 < phase1_end < total_epochs");
    if (!(base_lr > 0.0)) fail(ErrorCode::InvalidSpec, "base_lr must be positive");
    for (const auto& m : {phase1, phase2}) {
      for (double x : {m.backbone, m.spatial, m.temporal}) {
        if (!(x >= 0.0 && x <= 1.0)) fail(ErrorCode::InvalidSpec, "lr multipliers must be in [0,1]");
      }
    }
    if (warmup_epochs < 0 || warmup_epochs > total_epochs) fail(ErrorCode::InvalidSpec, "warmup_epochs out of range");
  }

  int phase(int epoch) const { return epoch <= phase1_end ? 1 : 2; }
};

// base_lr after the optional warm-up / cosine modifiers.
inline double scheduled_base_lr(int epoch, const TrainingSchedule& s) {
  double lr = s.base_lr;
  if (s.warmup_epochs > 0 && epoch <= s.warmup_epochs) lr *= static_cast<double>(epoch) / s.warmup_epochs;
  if (s.cosine) {
    const double t = static_cast<double>(epoch - 1) / s.total_epochs;
    lr *= 0.5 * (1.0 + std::cos(std::numbers::pi * t));
  }
  return lr;
}

inline double lr_multiplier(ModuleGroup g, int epoch, const TrainingSchedule& s) {
  if (epoch < 1 || epoch > s.total_epochs) fail(ErrorCode::EpochOutOfRange, "epoch outside [1, total_epochs]");
  const GroupMultipliers& m = epoch <= s.phase1_end ? s.phase1 : s.phase2;
  return scheduled_base_lr(epoch, s) * m.of(g);
}

// One toy training example: a retrieved history vector, the lifting samples
// that build F_curr, and the one-hot oracle target.
struct ToySample {
  struct Tap {
    double attention = 0.0;
    double d_proj = 0.0;
    double d_pred = 0.0;
    int cls = 0;
  };
  VecX hist;
  std::vector<Tap> taps;
  int target = 0;
};

// Learnable state of the toy model, one block per module group.
struct ToyParams {
  double depth_scale = 1.0;  // backbone: multiplies predicted depths
  GateParams gate;           // spatial expert
  FusionWeights fusion;      // temporal manager
};

// F_curr = sum_k A_k G_k e_{c_k} + (1 - sum_k A_k G_k) e_empty
inline VecX toy_current_feature(const ToySample& s, const ToyParams& p, int c) {
  VecX f = VecX::Zero(c);
  double mass = 0.0;
  for (const auto& t : s.taps) {
    const double w = t.attention * gaussian_gate(t.d_proj, p.depth_scale * t.d_pred, p.gate);
    f[t.cls] += w;
    mass += w;
  }
  f[0] += 1.0 - mass;
  return f;
}

struct ToyGradients {
  double loss = 0.0;
  double quality = 0.0;  // argmax accuracy of the fused feature
  double d_depth_scale = 0.0;
  double d_alpha = 0.0;
  double d_sigma = 0.0;
  MatX d_w_h;
  MatX d_w_c;
  VecX d_b;
};

// Mean over samples of |fuse(hist, F_curr) - onehot(target)|^2 with exact
// analytic gradients for every group.
inline ToyGradients toy_loss(const std::vector<ToySample>& data, const ToyParams& p) {
  if (data.empty()) fail(ErrorCode::InvalidSpec, "toy dataset is empty");
  const int c = p.fusion.dim();
  ToyGradients g;
  g.d_w_h = MatX::Zero(c, c);
  g.d_w_c = MatX::Zero(c, c);
  g.d_b = VecX::Zero(c);
  const double inv_n = 1.0 / static_cast<double>(data.size());
  int correct = 0;
  for (const auto& s : data) {
    const VecX f_curr = toy_current_feature(s, p, c);
    const VecX fused = fuse(s.hist, f_curr, p.fusion);
    VecX target = VecX::Zero(c);
    target[s.target] = 1.0;
    const VecX diff = fused - target;
    g.loss += diff.squaredNorm() * inv_n;
    int arg = 0;
    for (int i = 1; i < c; ++i) {
      if (fused[i] > fused[arg]) arg = i;
    }
    correct += arg == s.target ? 1 : 0;

    const VecX delta = 2.0 * inv_n * diff;
    g.d_w_h += delta * s.hist.transpose();
    g.d_w_c += delta * f_curr.transpose();
    g.d_b += delta;
    const VecX d_curr = p.fusion.w_c.transpose() * delta;
    for (const auto& t : s.taps) {
      const double d_pred = p.depth_scale * t.d_pred;
      const GateGradients gg = gate_gradients(t.d_proj, d_pred, p.gate);
      const double back = t.attention * (d_curr[t.cls] - d_curr[0]);
      g.d_alpha += back * gg.d_alpha;
      g.d_sigma += back * gg.d_sigma;
      g.d_depth_scale += back * gg.d_pred * t.d_pred;
    }
  }
  g.quality = static_cast<double>(correct) * inv_n;
  return g;
}

struct EpochRecord {
  int epoch = 0;
  int phase = 0;
  double loss = 0.0;
  double proxy_quality = 0.0;
};

struct LossCurve {
  double initial_loss = 0.0;
  double initial_quality = 0.0;
  std::vector<EpochRecord> epochs;
  std::vector<ToyParams> epoch_params;  // parameters at the end of each epoch
  ToyParams final_params;
};

// Full-batch gradient descent. A group whose learning rate is 0 is not
// touched at all.
inline LossCurve train_fusion_toy(const std::vector<ToySample>& data, const ToyParams& init,
                                  const TrainingSchedule& sched, int steps_per_epoch) {
  sched.validate();
  if (data.empty()) fail(ErrorCode::InvalidSpec, "toy dataset is empty");
  if (steps_per_epoch < 1) fail(ErrorCode::InvalidSpec, "steps_per_epoch must be >= 1");
  LossCurve curve;
  ToyParams p = init;
  const ToyGradients g0 = toy_loss(data, p);
  curve.initial_loss = g0.loss;
  curve.initial_quality = g0.quality;
  for (int epoch = 1; epoch <= sched.total_epochs; ++epoch) {
    const double lr_b = lr_multiplier(ModuleGroup::backbone, epoch, sched);
    const double lr_s = lr_multiplier(ModuleGroup::spatial_expert, epoch, sched);
    const double lr_t = lr_multiplier(ModuleGroup::temporal_manager, epoch, sched);
    for (int step = 0; step < steps_per_epoch; ++step) {
      const ToyGradients g = toy_loss(data, p);
      if (!std::isfinite(g.loss)) fail(ErrorCode::Diverged, "toy loss is not finite; learning rate too high");
      if (lr_b != 0.0) p.depth_scale -= lr_b * g.d_depth_scale;
      if (lr_s != 0.0) {
        p.gate.alpha = std::max(0.0, p.gate.alpha - lr_s * g.d_alpha);
        p.gate.sigma = std::max(GateParams::kSigmaMin, p.gate.sigma - lr_s * g.d_sigma);
      }
      if (lr_t != 0.0) {
        p.fusion.w_h -= lr_t * g.d_w_h;
        p.fusion.w_c -= lr_t * g.d_w_c;
        p.fusion.b -= lr_t * g.d_b;
      }
    }
    const ToyGradients g = toy_loss(data, p);
    if (!std::isfinite(g.loss)) fail(ErrorCode::Diverged, "toy loss is not finite; learning rate too high");
    curve.epochs.push_back({epoch, sched.phase(epoch), g.loss, g.quality});
    curve.epoch_params.push_back(p);
  }
  curve.final_params = p;
  return curve;
}

enum class GradOp { gate, grm, fusion };

inline const char* to_string(GradOp op) {
  switch (op) {
    case GradOp::gate: return "gate";
    case GradOp::grm: return "grm";
    case GradOp::fusion: return "fusion";
  }
  return "?";
}

struct GradCheckReport {
  GradOp op = GradOp::gate;
  int trials = 0;
  std::size_t checked = 0;  // individual partial derivatives compared
  double max_rel_error = 0.0;
  double tol = 0.0;
  bool pass = false;
};

// |a - n| / max(|a|, |n|, 1e-4)
inline double grad_rel_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), 1e-4});
}

namespace detail {

inline std::vector<ToySample> random_toy_data(Rng& rng, int n, int c, int taps) {
  std::vector<ToySample> data(static_cast<std::size_t>(n));
  for (auto& s : data) {
    s.hist = VecX(c);
    for (int i = 0; i < c; ++i) s.hist[i] = rng.uniform(-1.0, 1.0);
    for (int k = 0; k < taps; ++k) {
      const double d = rng.uniform(0.5, 4.0);
      s.taps.push_back({1.0 / taps, d, d + rng.uniform(-0.6, 0.6), static_cast<int>(rng.below(static_cast<std::uint64_t>(c)))});
    }
    s.target = static_cast<int>(rng.below(static_cast<std::uint64_t>(c)));
  }
  return data;
}

}  // namespace detail

inline GradCheckReport check_gradients(GradOp op, int trials, double h, double tol, std::uint64_t seed = 1) {
  if (!(h > 0.0)) fail(ErrorCode::InvalidSpec, "finite-difference step must be positive");
  GradCheckReport rep;
  rep.op = op;
  rep.trials = trials;
  rep.tol = tol;
  Rng rng(mix_seed(seed, static_cast<std::uint64_t>(op) + 0x9c));
  auto record = [&rep](double a, double n) {
    rep.max_rel_error = std::max(rep.max_rel_error, grad_rel_error(a, n));
    ++rep.checked;
  };
  for (int t = 0; t < trials; ++t) {
    if (op == GradOp::gate) {
      GateParams g{rng.uniform(0.25, 2.0), rng.uniform(0.1, 1.5)};
      const double d_proj = rng.uniform(0.5, 5.0);
      const double d_pred = d_proj + rng.uniform(-2.5, 2.5) * g.sigma;
      const GateGradients a = gate_gradients(d_proj, d_pred, g);
      GateParams gp = g;
      GateParams gm = g;
      gp.alpha += h;
      gm.alpha -= h;
      record(a.d_alpha, (gaussian_gate(d_proj, d_pred, gp) - gaussian_gate(d_proj, d_pred, gm)) / (2 * h));
      gp = g;
      gm = g;
      gp.sigma += h;
      gm.sigma -= h;
      record(a.d_sigma, (gaussian_gate(d_proj, d_pred, gp) - gaussian_gate(d_proj, d_pred, gm)) / (2 * h));
      record(a.d_pred, (gaussian_gate(d_proj, d_pred + h, g) - gaussian_gate(d_proj, d_pred - h, g)) / (2 * h));
    } else if (op == GradOp::grm) {
      const int n = 2 + static_cast<int>(rng.below(7));
      std::vector<GrmAnchor> anchors(static_cast<std::size_t>(n));
      for (auto& a : anchors) {
        a.position = Vec3(rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2), rng.uniform(-0.2, 0.2));
        a.normal = Vec3(rng.normal(), rng.normal(), rng.normal()).normalized();
        a.cls = static_cast<SemanticClass>(1 + rng.below(kNumClasses - 1));
      }
      GrmPairs pairs;
      for (std::size_t i = 0; i < anchors.size(); ++i) {
        for (std::size_t j = i + 1; j < anchors.size(); ++j) {
          if (rng.uniform() < 0.6) pairs.emplace_back(i, j);
        }
      }
      GrmStrategy s;
      s.kind = rng.uniform() < 0.5 ? GrmKind::semantic_adaptive : GrmKind::uniform;
      const GrmResult a = grm_loss(anchors, pairs, s);
      for (std::size_t i = 0; i < anchors.size(); ++i) {
        for (int ax = 0; ax < 3; ++ax) {
          auto plus = anchors;
          auto minus = anchors;
          plus[i].position[ax] += h;
          minus[i].position[ax] -= h;
          record(a.grads[i][ax], (grm_loss(plus, pairs, s).loss - grm_loss(minus, pairs, s).loss) / (2 * h));
        }
      }
    } else {
      const int c = 2 + static_cast<int>(rng.below(4));
      const auto data = detail::random_toy_data(rng, 6, c, 4);
      ToyParams p;
      p.fusion = init_fusion_weights(c, FusionInit::random, rng.next_u64(), 0.5);
      const ToyGradients a = toy_loss(data, p);
      auto probe = [&](double& slot, double analytic) {
        const double keep = slot;
        slot = keep + h;
        const double lp = toy_loss(data, p).loss;
        slot = keep - h;
        const double lm = toy_loss(data, p).loss;
        slot = keep;
        record(analytic, (lp - lm) / (2 * h));
      };
      for (int i = 0; i < c; ++i) {
        for (int j = 0; j < c; ++j) {
          probe(p.fusion.w_h(i, j), a.d_w_h(i, j));
          probe(p.fusion.w_c(i, j), a.d_w_c(i, j));
        }
        probe(p.fusion.b[i], a.d_b[i]);
      }
    }
  }
  rep.pass = rep.max_rel_error <= tol;
  return rep;
}

}  // namespace sgrocc
