#pragma once

// Acceptance suite shared by the `check` subcommand and the acceptance test
// binary. Each criterion reports PASS/FAIL, a detail line and its runtime.
// The closed-form oracles below are written out longhand on purpose and do
// not call into the library.

#include <charconv>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sgrocc/pipeline.hpp"

namespace sgrocc::acceptance {

struct CriterionResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget = 0.0;
};

struct Inputs {
  RunConfig bench;
  RunConfig wall;
  std::string scratch_dir = "acceptance_scratch";
};

namespace oracle {

inline double gate(double dp, double dq, double a, double s) { return a * std::exp(-((dp - dq) * (dp - dq)) / (2.0 * s * s)); }

inline bool close(double got, double want, double rel) {
  if (got == want) return true;
  return std::abs(got - want) <= rel * std::max(std::abs(got), std::abs(want));
}

}  // namespace oracle

namespace detail {

inline std::string num(double v) { return io::fmt(v, 6); }

// Shortest text that reads back to the same double.
inline std::string shortest(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline double object_miou(const MetricReport& m) {
  double sum = 0.0;
  int n = 0;
  for (int c = 1; c < kNumClasses; ++c) {
    if (is_structural(static_cast<SemanticClass>(c))) continue;
    if (const auto& v = m.classes.per_class[static_cast<std::size_t>(c - 1)]) {
      sum += *v;
      ++n;
    }
  }
  return n ? sum / n : std::numeric_limits<double>::quiet_NaN();
}

inline double class_iou(const MetricReport& m, SemanticClass c) {
  const auto& v = m.classes.per_class[static_cast<std::size_t>(class_code(c) - 1)];
  return v ? *v : std::numeric_limits<double>::quiet_NaN();
}

}  // namespace detail

// 1: closed forms against longhand re-implementations.
inline CriterionResult equation_fidelity(const Inputs&) {
  CriterionResult r{1, "equation fidelity", false, "", 0.0, 5.0};
  constexpr int kTrials = 10000;
  constexpr double kRel = 1e-9;
  Rng rng(0xe9);
  std::map<std::string, int> bad;

  for (int i = 0; i < kTrials; ++i) {
    const double a = rng.uniform(0.0, 3.0);
    const double s = rng.uniform(0.05, 3.0);
    const double dp = rng.uniform(0.1, 8.0);
    const double dq = rng.uniform(0.1, 8.0);
    if (!oracle::close(gaussian_gate(dp, dq, {a, s}), oracle::gate(dp, dq, a, s), kRel)) ++bad["gate"];
  }

  {
    const int w = 16;
    const int h = 12;
    for (int i = 0; i < kTrials; ++i) {
      DepthFrame f(w, h);
      for (double& d : f.depth) d = rng.uniform(0.5, 5.0);
      const double fx = rng.uniform(8.0, 20.0);
      const double fy = rng.uniform(8.0, 20.0);
      const double cx = rng.uniform(6.0, 9.0);
      const double cy = rng.uniform(4.0, 7.0);
      const CameraIntrinsics k{fx, fy, cx, cy, w, h};
      const Vec3 eye(rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2));
      const Vec3 look = eye + Vec3(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(0.3, 1.0)).normalized();
      const Pose pose = Pose::look_at(eye, look);
      const int iu = static_cast<int>(rng.below(w));
      const int iv = static_cast<int>(rng.below(h));
      const double u = std::clamp(iu + rng.uniform(-0.45, 0.45), 1e-6, w - 1.0 - 1e-6);
      const double v = std::clamp(iv + rng.uniform(-0.45, 0.45), 1e-6, h - 1.0 - 1e-6);
      const double z = rng.uniform(0.3, 6.0);
      const Mat3& rot = pose.rotation();
      const Vec3 cam((u - cx) / fx * z, (v - cy) / fy * z, z);
      const Vec3 world = rot.transpose() * (cam - pose.translation());
      ConfidenceParams cp;
      cp.sigma_geo = rng.uniform(0.1, 1.0);
      const double dd = z - f.depth[static_cast<std::size_t>(iv * w + iu)];
      const double want = std::exp(-(dd * dd) / (2.0 * cp.sigma_geo * cp.sigma_geo));
      // Projection round-trips z to within a few ulps; allow for it through
      // the slope of the kernel.
      const double got = geo_confidence(world, f, k, pose, cp);
      const double slack = 1e-12 * std::abs(dd) / (cp.sigma_geo * cp.sigma_geo) * z;
      if (!oracle::close(got, want, kRel + slack)) ++bad["geo_confidence"];
    }
  }

  for (int i = 0; i < kTrials; ++i) {
    Logits l{};
    for (double& x : l) x = rng.normal(0.0, 3.0);
    ConfidenceParams cp;
    cp.temperature = rng.uniform(0.2, 2.0);
    cp.tau_min = rng.uniform(0.0, 0.4);
    cp.tau_max = rng.uniform(0.5, 1.0);
    double z = 0.0;
    std::array<double, kNumClasses> e{};
    for (int c = 0; c < kNumClasses; ++c) {
      e[c] = std::exp(l[c] / cp.temperature);
      z += e[c];
    }
    double top = 0.0;
    bool ok = true;
    const auto got = calibrate_semantic(l, cp);
    for (int c = 0; c < kNumClasses; ++c) {
      const double p = e[c] / z;
      top = std::max(top, p);
      ok = ok && oracle::close(got.prob[c], p, kRel);
    }
    double cs = (top - cp.tau_min) / (cp.tau_max - cp.tau_min);
    cs = cs < 0.0 ? 0.0 : (cs > 1.0 ? 1.0 : cs);
    ok = ok && (std::abs(got.c_sem - cs) <= kRel * std::max(1e-300, std::abs(cs)) || got.c_sem == cs ||
                std::abs(got.c_sem - cs) < 1e-15);
    if (!ok) ++bad["calibrate_semantic"];
  }

  for (int i = 0; i < kTrials; ++i) {
    const double tag = rng.uniform() < 0.5 ? 0.0 : 1.0;
    const double cg = rng.uniform();
    const double cs = rng.uniform();
    const auto got = final_confidence(tag, cg, cs);
    const double want = tag == 1.0 ? cg * cs : 0.0;
    if (!oracle::close(got.c_final, want, kRel) || !oracle::close(got.lambda, 1.0 - want, kRel)) ++bad["final_confidence"];
  }

  for (int i = 0; i < kTrials; ++i) {
    const Vec3 o(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
    const Vec3 p = o + Vec3(rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3));
    const double dx = p.x() - o.x();
    const double dy = p.y() - o.y();
    const double dz = p.z() - o.z();
    const double n = std::sqrt(dx * dx + dy * dy + dz * dz);
    if (n < 1e-3) continue;
    const double delta = rng.uniform(-0.9, 0.9) * n;
    const Vec3 got = refine_anchor_ray(p, o, delta);
    const Vec3 want(p.x() + delta * dx / n, p.y() + delta * dy / n, p.z() + delta * dz / n);
    // Relative to the scale of the points involved.
    const double scale = std::max({p.norm(), o.norm(), 1.0});
    if ((got - want).norm() > kRel * scale) ++bad["refine_anchor_ray"];
  }

  for (int i = 0; i < kTrials; ++i) {
    const int c = 1 + static_cast<int>(rng.below(12));
    FusionWeights w{MatX(c, c), MatX(c, c), VecX(c)};
    VecX fh(c), fc(c);
    for (int a = 0; a < c; ++a) {
      for (int b = 0; b < c; ++b) {
        w.w_h(a, b) = rng.normal();
        w.w_c(a, b) = rng.normal();
      }
      w.b[a] = rng.normal();
      fh[a] = rng.normal();
      fc[a] = rng.normal();
    }
    const VecX got = fuse(fh, fc, w);
    bool ok = true;
    for (int a = 0; a < c; ++a) {
      double acc = 0.0;
      double mag = 0.0;
      for (int b = 0; b < c; ++b) {
        acc += w.w_h(a, b) * fh[b];
        mag += std::abs(w.w_h(a, b) * fh[b]);
      }
      for (int b = 0; b < c; ++b) {
        acc += w.w_c(a, b) * fc[b];
        mag += std::abs(w.w_c(a, b) * fc[b]);
      }
      acc += w.b[a];
      mag += std::abs(w.b[a]);
      // Relative to the magnitude of the summands, which bounds the
      // cancellation error of any summation order.
      ok = ok && std::abs(got[a] - acc) <= kRel * mag;
    }
    if (!ok) ++bad["fuse"];
  }

  r.pass = bad.empty();
  r.detail = "6 operators x " + std::to_string(kTrials) + " trials";
  for (const auto& [name, n] : bad) r.detail += "; " + name + " mismatches=" + std::to_string(n);
  return r;
}

// 2: identity cold start.
inline CriterionResult identity_cold_start(const Inputs& in) {
  CriterionResult r{2, "identity cold start", false, "", 0.0, 30.0};
  Rng rng(0xc01d);
  int not_exact = 0;
  const FusionWeights id = init_fusion_weights(kNumClasses, FusionInit::identity);
  for (int i = 0; i < 10000; ++i) {
    VecX fh(kNumClasses), fc(kNumClasses);
    for (int c = 0; c < kNumClasses; ++c) {
      fh[c] = rng.normal(0.0, 10.0);
      fc[c] = rng.normal(0.0, 10.0);
    }
    const VecX out = fuse(fh, fc, id);
    if (std::memcmp(out.data(), fc.data(), sizeof(double) * kNumClasses) != 0) ++not_exact;
  }
  const Scenario sc = build_scenario(in.bench);
  const auto data = build_toy_dataset(in.bench, sc, 400);
  const double id_loss = toy_loss(data, toy_init(in.bench, FusionInit::identity, 0)).loss;
  double worst_random = std::numeric_limits<double>::infinity();
  bool ordered = true;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    ToyParams p = toy_init(in.bench, FusionInit::random, seed);
    p.fusion = init_fusion_weights(kNumClasses, FusionInit::random, seed, 0.5);
    const double l = toy_loss(data, p).loss;
    worst_random = std::min(worst_random, l);
    ordered = ordered && id_loss <= l;
  }
  r.pass = not_exact == 0 && ordered;
  r.detail = "bit-exact mismatches=" + std::to_string(not_exact) + "; samples=" + std::to_string(data.size()) +
             "; step-0 loss identity=" + detail::num(id_loss) + " min random=" + detail::num(worst_random);
  return r;
}

// 3: analytic against central differences.
inline CriterionResult gradient_checks(const Inputs&) {
  CriterionResult r{3, "gradient checks", true, "", 0.0, 30.0};
  for (GradOp op : {GradOp::gate, GradOp::grm, GradOp::fusion}) {
    const auto rep = check_gradients(op, 100, 1e-6, 1e-5);
    r.pass = r.pass && rep.pass && rep.trials >= 100;
    r.detail += std::string(r.detail.empty() ? "" : "; ") + to_string(op) + " max_rel=" + detail::num(rep.max_rel_error) +
                " over " + std::to_string(rep.checked);
  }
  return r;
}

inline const AblationRow& row(const std::vector<AblationRow>& rows, const std::string& name) {
  for (const auto& x : rows) {
    if (x.variant == name) return x;
  }
  fail(ErrorCode::InvalidSpec, "missing ablation row " + name);
}

inline RunConfig run_mode(RunConfig c, const char* mode) {
  c.ablation_run = mode;
  return c;
}

// 4: lifting ordering.
inline CriterionResult lift_ordering(const Inputs& in) {
  CriterionResult r{4, "lift-mode ordering", false, "", 0.0, 120.0};
  const auto rows = run_ablation(run_mode(in.bench, "local"), AblationAxis::lift_mode);
  const auto& soft = row(rows, "soft_gating").metrics;
  const auto& thr = row(rows, "hard_threshold").metrics;
  const auto& ng = row(rows, "deformable_no_gate").metrics;
  const auto& hp = row(rows, "hard_projection").metrics;
  bool ok = true;
  for (auto metric : {+[](const MetricReport& m) { return m.sc_iou; }, +[](const MetricReport& m) { return m.boundary_f1; }}) {
    ok = ok && metric(soft) >= metric(thr) && metric(thr) >= metric(ng) && metric(thr) >= metric(hp);
  }
  ok = ok && soft.sc_iou - hp.sc_iou >= 0.02;
  r.pass = ok;
  for (const auto& x : rows) {
    r.detail += (r.detail.empty() ? "" : "; ") + x.variant + " sc_iou=" + detail::num(x.metrics.sc_iou) +
                " bf1=" + detail::num(x.metrics.boundary_f1);
  }
  return r;
}

// 5: refinement ordering and pose-noise robustness.
inline CriterionResult refine_ordering(const Inputs& in) {
  CriterionResult r{5, "refine-mode ordering", false, "", 0.0, 180.0};
  const auto rows = run_ablation(run_mode(in.bench, "local"), AblationAxis::refine_mode);
  const double none = row(rows, "none").metrics.sc_iou;
  const double free3d = row(rows, "free3d").metrics.sc_iou;
  const double ray = row(rows, "ray").metrics.sc_iou;
  const double free_n = row(rows, "free3d+pose-noise").metrics.sc_iou;
  const double ray_n = row(rows, "ray+pose-noise").metrics.sc_iou;
  r.pass = ray >= free3d && free3d >= none && (ray - ray_n) <= (free3d - free_n);
  r.detail = "none=" + detail::num(none) + " free3d=" + detail::num(free3d) + " ray=" + detail::num(ray) +
             "; degradation ray=" + detail::num(ray - ray_n) + " free3d=" + detail::num(free3d - free_n);
  return r;
}

// 6: regularizer ordering on the wall-heavy scene.
inline CriterionResult grm_ordering(const Inputs& in) {
  CriterionResult r{6, "GRM ordering", false, "", 0.0, 120.0};
  const auto rows = run_ablation(in.wall, AblationAxis::grm_mode);
  const auto& none = row(rows, "none").metrics;
  const auto& uni = row(rows, "uniform").metrics;
  const auto& sa = row(rows, "semantic_adaptive").metrics;
  const double w_none = detail::class_iou(none, SemanticClass::wall);
  const double w_uni = detail::class_iou(uni, SemanticClass::wall);
  const double w_sa = detail::class_iou(sa, SemanticClass::wall);
  const double o_uni = detail::object_miou(uni);
  const double o_sa = detail::object_miou(sa);
  r.pass = w_sa >= w_uni && w_uni >= w_none && o_sa >= o_uni && (w_sa > w_uni || o_sa > o_uni);
  r.detail = "wall iou none=" + detail::num(w_none) + " uniform=" + detail::num(w_uni) + " adaptive=" + detail::num(w_sa) +
             "; object iou uniform=" + detail::num(o_uni) + " adaptive=" + detail::num(o_sa);
  return r;
}

// 7: interior maximum of boundary F1 over the gate width. Scored on the
// streaming run: a single view's boundary F1 sits at 1 for most widths.
inline CriterionResult sigma_inverted_u(const Inputs& in) {
  CriterionResult r{7, "sigma inverted-U", false, "", 0.0, 180.0};
  const auto rows = run_ablation(run_mode(in.bench, "embodied"), AblationAxis::sigma_sweep);
  std::size_t best = 0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].metrics.boundary_f1 > rows[best].metrics.boundary_f1) best = i;
  }
  r.pass = best != 0 && best + 1 != rows.size();
  for (const auto& x : rows) r.detail += (r.detail.empty() ? "" : "; ") + x.variant + " bf1=" + detail::num(x.metrics.boundary_f1);
  return r;
}

// Independent occlusion test: ray cast through the pixel nearest to the
// anchor's projection.
inline bool oracle_occluded(const Vec3& p, const SceneModel& scene, const CameraIntrinsics& k, const Pose& pose,
                            double band) {
  const Mat3& rot = pose.rotation();
  const Vec3 c = rot * p + pose.translation();
  if (!(c.z() > kMinDepth)) return false;
  const double u = k.fx * c.x() / c.z() + k.cx;
  const double v = k.fy * c.y() / c.z() + k.cy;
  const long iu = std::lround(u);
  const long iv = std::lround(v);
  if (iu < 0 || iv < 0 || iu >= k.width || iv >= k.height) return false;
  const Vec3 dir_cam((iu - k.cx) / k.fx, (iv - k.cy) / k.fy, 1.0);
  const Vec3 eye = pose.camera_center();
  const Vec3 dir_world = (rot.transpose() * dir_cam).normalized();
  const RayHit hit = cast_ray(scene, eye, dir_world);
  if (!std::isfinite(hit.t)) return false;
  const double surface_z = hit.t * (rot * dir_world).z();
  return c.z() > surface_z + band;
}

// 8: pool hygiene after the embodied run.
inline CriterionResult pool_hygiene(const Inputs& in) {
  CriterionResult r{8, "pool hygiene", false, "", 0.0, 120.0};
  const RunConfig& c = in.bench;
  const Scenario sc = build_scenario(c);
  const int n = c.trajectory.n_frames;
  const RunResult before = run_frames(c, n - 1, sc);
  const RunResult after = run_frames(c, n, sc);
  const Pose& last = after.poses.back();
  const double band = 3.0 * c.confidence.sigma_geo;
  std::set<std::uint64_t> kept;
  for (const auto& g : after.pool.primitives) kept.insert(g.id);
  std::size_t violations = 0;
  std::size_t occluded_checked = 0;
  for (const auto& g : before.pool.primitives) {
    if (!oracle_occluded(g.position, sc.scene, c.camera, last, band)) continue;
    ++occluded_checked;
    if (g.tag != 1.0 && kept.count(g.id)) ++violations;
  }
  for (const auto& g : after.pool.primitives) {
    if (g.tag != 1.0 && oracle_occluded(g.position, sc.scene, c.camera, last, band)) ++violations;
  }
  std::size_t max_size = 0;
  for (const auto& f : after.frames) max_size = std::max(max_size, f.update.pool_size);
  r.pass = violations == 0 && max_size <= c.max_pool;
  r.detail = "occluded anchors checked=" + std::to_string(occluded_checked) + " violations=" + std::to_string(violations) +
             "; max pool size=" + std::to_string(max_size) + " limit=" + std::to_string(c.max_pool);
  return r;
}

// 9: end-to-end quality and monotone accumulation.
inline CriterionResult end_to_end(const Inputs& in) {
  CriterionResult r{9, "end-to-end sanity", false, "", 0.0, 180.0};
  const RunResult res = run_embodied(in.bench);
  double worst_drop = 0.0;
  for (std::size_t i = 1; i < res.frames.size(); ++i) {
    worst_drop = std::max(worst_drop, res.frames[i - 1].metrics.sc_iou - res.frames[i].metrics.sc_iou);
  }
  const auto& m = res.final_metrics;
  r.pass = m.sc_iou >= 0.90 && m.miou() >= 0.80 && worst_drop <= 0.02;
  r.detail = "final sc_iou=" + detail::num(m.sc_iou) + " miou=" + detail::num(m.miou()) +
             " largest frame-to-frame drop=" + detail::num(worst_drop);
  return r;
}

// 10: schedule contract.
inline CriterionResult schedule_contract(const Inputs& in) {
  CriterionResult r{10, "schedule contract", false, "", 0.0, 1.0};
  TrainingSchedule s;
  s.base_lr = 1e-4;
  const double b = lr_multiplier(ModuleGroup::backbone, 8, s);
  const double sp = lr_multiplier(ModuleGroup::spatial_expert, 8, s);
  const double t = lr_multiplier(ModuleGroup::temporal_manager, 8, s);
  const bool lr_ok = b == 0.0 && sp == 1e-5 && t == 1e-4;

  const Scenario sc = build_scenario(in.bench);
  const auto data = build_toy_dataset(in.bench, sc, 100);
  const ToyParams init = toy_init(in.bench, FusionInit::identity, 0);
  const LossCurve curve = train_fusion_toy(data, init, s, 2);
  bool frozen = true;
  for (std::size_t e = 0; e < curve.epochs.size(); ++e) {
    if (curve.epochs[e].phase != 1) continue;
    const auto& p = curve.epoch_params[e];
    frozen = frozen && std::memcmp(&p.gate.alpha, &init.gate.alpha, sizeof(double)) == 0 &&
             std::memcmp(&p.gate.sigma, &init.gate.sigma, sizeof(double)) == 0;
  }
  r.pass = lr_ok && frozen;
  r.detail = "epoch 8 multipliers backbone=" + detail::shortest(b) + " spatial=" + detail::shortest(sp) +
             " temporal=" + detail::shortest(t) + "; spatial group frozen in phase 1=" + (frozen ? "yes" : "no");
  return r;
}

inline std::map<std::string, std::vector<std::uint8_t>> read_dir(const std::string& dir) {
  std::map<std::string, std::vector<std::uint8_t>> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file()) out[e.path().filename().string()] = io::read_file(e.path().string());
  }
  return out;
}

// 11: determinism and round-trips.
inline CriterionResult determinism(const Inputs& in) {
  CriterionResult r{11, "determinism and formats", false, "", 0.0, 120.0};
  std::vector<std::map<std::string, std::vector<std::uint8_t>>> outputs;
  for (int rep = 0; rep < 2; ++rep) {
    RunConfig c = in.bench;
    c.output_dir = (std::filesystem::path(in.scratch_dir) / ("determinism_" + std::to_string(rep))).string();
    std::filesystem::remove_all(c.output_dir);
    write_run_artifacts(run_local(c), c, "local", false);
    write_run_artifacts(run_embodied(c), c, "embodied", true);
    outputs.push_back(read_dir(c.output_dir));
  }
  bool identical = outputs[0] == outputs[1];
  std::size_t roundtrips = 0;
  std::size_t failures = 0;
  for (const auto& [name, bytes] : outputs[0]) {
    const auto ext = std::filesystem::path(name).extension().string();
    bool ok = true;
    try {
      if (ext == ".svox") {
        ok = encode_svox(decode_svox(bytes)) == bytes;
      } else if (ext == ".gpool") {
        ok = encode_pool(decode_pool_snapshot(bytes)) == bytes;
      } else if (ext == ".pgm") {
        ok = io::encode_pgm16(io::decode_pgm16(bytes)) == bytes;
      } else {
        continue;
      }
    } catch (const Error&) {
      ok = false;
    }
    ++roundtrips;
    if (!ok) ++failures;
  }
  r.pass = identical && failures == 0 && roundtrips > 0;
  r.detail = std::to_string(outputs[0].size()) + " files, byte-identical=" + (identical ? "yes" : "no") +
             "; binary round-trips=" + std::to_string(roundtrips) + " failures=" + std::to_string(failures);
  return r;
}

inline const std::vector<std::function<CriterionResult(const Inputs&)>>& criteria() {
  static const std::vector<std::function<CriterionResult(const Inputs&)>> all = {
      equation_fidelity, identity_cold_start, gradient_checks, lift_ordering,    refine_ordering,   grm_ordering,
      sigma_inverted_u,  pool_hygiene,        end_to_end,      schedule_contract, determinism};
  return all;
}

// A criterion passes only when its checks hold and it finishes within its
// runtime budget. Errors thrown inside a criterion count as failures.
inline CriterionResult run_one(int id, const Inputs& in) {
  const auto t0 = std::chrono::steady_clock::now();
  CriterionResult r;
  try {
    r = criteria().at(static_cast<std::size_t>(id - 1))(in);
  } catch (const std::exception& e) {
    r.id = id;
    r.name = "criterion " + std::to_string(id);
    r.pass = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.budget > 0.0 && r.seconds >= r.budget) {
    r.pass = false;
    r.detail += "; over runtime budget";
  }
  return r;
}

inline std::string format_line(const CriterionResult& r) {
  char head[96];
  std::snprintf(head, sizeof head, "[%s] %2d %-26s %7.2fs/%gs  ", r.pass ? "PASS" : "FAIL", r.id, r.name.c_str(),
                r.seconds, r.budget);
  return head + r.detail;
}

}  // namespace sgrocc::acceptance
