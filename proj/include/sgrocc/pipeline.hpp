#pragma once

// Run configuration, the streaming pipeline (local and embodied), ablation
// sweeps and artifact emission.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "sgrocc/errors.hpp"
#include "sgrocc/fusion_schedule.hpp"
#include "sgrocc/geometry.hpp"
#include "sgrocc/io.hpp"
#include "sgrocc/lifter.hpp"
#include "sgrocc/occupancy_eval.hpp"
#include "sgrocc/refiner.hpp"
#include "sgrocc/scene_sim.hpp"
#include "sgrocc/temporal_memory.hpp"

namespace sgrocc {

using json = nlohmann::json;

enum class GrmSite { local, global, both };

struct RunConfig {
  // Defaults describe the bench room: a 4.64 x 4.64 x 2.72 m interior whose
  // slabs fill a 60 x 60 x 36 grid at 0.08 m.
  RunConfig() {
    room.size = {4.64, 4.64, 2.72};
    room.n_objects = 6;
    trajectory.center = {2.32, 2.32, 1.4};
    trajectory.target = {2.32, 2.32, 1.0};
    grid.origin = Vec3::Constant(-0.08);
  }

  std::uint64_t seed = 7;
  std::string output_dir = "out";

  std::uint64_t scene_seed = 3;
  RoomSpec room;

  CameraIntrinsics camera{96.0, 96.0, 63.5, 47.5, 128, 96};
  double depth_noise = 0.0;  // sigma of additive depth noise (m)
  double pose_noise = 0.0;   // translation perturbation fraction
  TrajectorySpec trajectory;

  GateParams gate;
  LiftMode lift_mode = LiftMode::soft_gating;
  SampleConfig samples;

  RefineMode refine_mode = RefineMode::ray;
  double delta_max = kDefaultDeltaMax;
  int refine_iters = 3;
  double refine_inset = 0.04;
  NormalSource normals = NormalSource::ground_truth;
  GrmStrategy grm;
  int grm_steps = 100;
  double grm_lr = 0.01;
  double grm_radius = 0.16;
  GrmSite grm_site = GrmSite::both;

  ConfidenceParams confidence;
  std::size_t max_pool = 50000;
  SpawnConfig spawn;

  FusionInit fusion_init = FusionInit::identity;
  double fusion_sigma_w = 0.5;
  TrainingSchedule schedule;
  int steps_per_epoch = 20;

  VoxelGridSpec grid;
  double theta_occ = kDefaultOccThreshold;

  std::string ablation_run = "local";
  int snapshot_every = 5;
  bool write_pgm = true;
};

namespace config_detail {

[[noreturn]] inline void bad(const std::string& path, const std::string& what) {
  fail(ErrorCode::ConfigError, path + ": " + what);
}

inline double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad(path, "must be finite");
  return v;
}

inline long long as_int(const json& j, const std::string& path) {
  if (j.is_number_integer() || j.is_number_unsigned()) return j.get<long long>();
  if (j.is_number_float()) {
    const double v = j.get<double>();
    if (v == std::floor(v) && std::abs(v) < 9e15) return static_cast<long long>(v);
  }
  bad(path, "expected an integer");
}

inline bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) bad(path, "expected true or false");
  return j.get<bool>();
}

inline std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) bad(path, "expected a string");
  return j.get<std::string>();
}

inline Vec3 as_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) bad(path, "expected an array of 3 numbers");
  return {as_double(j[0], path), as_double(j[1], path), as_double(j[2], path)};
}

inline json vec3_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

template <typename E>
E as_enum(const json& j, const std::string& path, const std::vector<std::pair<std::string, E>>& table) {
  const std::string s = as_string(j, path);
  std::string allowed;
  for (const auto& [name, value] : table) {
    if (name == s) return value;
    allowed += (allowed.empty() ? "" : ", ") + name;
  }
  bad(path, "unknown value '" + s + "' (allowed: " + allowed + ")");
}

template <typename E>
std::string enum_name(E v, const std::vector<std::pair<std::string, E>>& table) {
  for (const auto& [name, value] : table) {
    if (value == v) return name;
  }
  return "?";
}

inline const std::vector<std::pair<std::string, LiftMode>> kLiftModes = {
    {"hard_projection", LiftMode::hard_projection},
    {"deformable_no_gate", LiftMode::deformable_no_gate},
    {"hard_threshold", LiftMode::hard_threshold},
    {"soft_gating", LiftMode::soft_gating}};
inline const std::vector<std::pair<std::string, OffsetPattern>> kPatterns = {{"grid", OffsetPattern::grid},
                                                                             {"ring", OffsetPattern::ring}};
inline const std::vector<std::pair<std::string, RefineMode>> kRefineModes = {
    {"none", RefineMode::none}, {"free3d", RefineMode::free3d}, {"ray", RefineMode::ray}};
inline const std::vector<std::pair<std::string, NormalSource>> kNormalSources = {
    {"ground_truth", NormalSource::ground_truth}, {"from_depth", NormalSource::from_depth}};
inline const std::vector<std::pair<std::string, GrmKind>> kGrmKinds = {
    {"none", GrmKind::none}, {"uniform", GrmKind::uniform}, {"semantic_adaptive", GrmKind::semantic_adaptive}};
inline const std::vector<std::pair<std::string, GrmSite>> kGrmSites = {
    {"local", GrmSite::local}, {"global", GrmSite::global}, {"both", GrmSite::both}};
inline const std::vector<std::pair<std::string, LookMode>> kLookModes = {{"outward", LookMode::outward},
                                                                        {"target", LookMode::target}};
inline const std::vector<std::pair<std::string, FusionInit>> kFusionInits = {{"identity", FusionInit::identity},
                                                                            {"random", FusionInit::random}};

struct Field {
  std::string path;
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&, const std::string&)> set;
};

#define SGROCC_NUM(PATH, MEMBER)                                                              \
  Field {                                                                                     \
    PATH, [](const RunConfig& c) { return json(c.MEMBER); },                                  \
        [](RunConfig& c, const json& j, const std::string& p) { c.MEMBER = as_double(j, p); } \
  }
#define SGROCC_INT(PATH, MEMBER, TYPE)                                                                  \
  Field {                                                                                               \
    PATH, [](const RunConfig& c) { return json(c.MEMBER); },                                            \
        [](RunConfig& c, const json& j, const std::string& p) { c.MEMBER = static_cast<TYPE>(as_int(j, p)); } \
  }
#define SGROCC_BOOL(PATH, MEMBER)                                                           \
  Field {                                                                                   \
    PATH, [](const RunConfig& c) { return json(c.MEMBER); },                                \
        [](RunConfig& c, const json& j, const std::string& p) { c.MEMBER = as_bool(j, p); } \
  }
#define SGROCC_VEC3(PATH, MEMBER)                                                           \
  Field {                                                                                   \
    PATH, [](const RunConfig& c) { return vec3_json(c.MEMBER); },                           \
        [](RunConfig& c, const json& j, const std::string& p) { c.MEMBER = as_vec3(j, p); } \
  }
#define SGROCC_ENUM(PATH, MEMBER, TABLE)                                                            \
  Field {                                                                                           \
    PATH, [](const RunConfig& c) { return json(enum_name(c.MEMBER, TABLE)); },                      \
        [](RunConfig& c, const json& j, const std::string& p) { c.MEMBER = as_enum(j, p, TABLE); } \
  }

inline const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f = {
        SGROCC_INT("seed", seed, std::uint64_t),
        Field{"output_dir", [](const RunConfig& c) { return json(c.output_dir); },
              [](RunConfig& c, const json& j, const std::string& p) { c.output_dir = as_string(j, p); }},
        SGROCC_INT("scene.seed", scene_seed, std::uint64_t),
        SGROCC_VEC3("scene.size", room.size),
        SGROCC_NUM("scene.thickness", room.thickness),
        SGROCC_INT("scene.n_objects", room.n_objects, int),
        SGROCC_NUM("scene.snap", room.snap),
        SGROCC_NUM("scene.wall_margin", room.wall_margin),
        SGROCC_NUM("scene.center_clearance", room.center_clearance),
        SGROCC_NUM("camera.fx", camera.fx),
        SGROCC_NUM("camera.fy", camera.fy),
        SGROCC_NUM("camera.cx", camera.cx),
        SGROCC_NUM("camera.cy", camera.cy),
        SGROCC_INT("camera.width", camera.width, int),
        SGROCC_INT("camera.height", camera.height, int),
        SGROCC_NUM("camera.depth_noise", depth_noise),
        SGROCC_NUM("camera.pose_noise", pose_noise),
        SGROCC_INT("trajectory.n_frames", trajectory.n_frames, int),
        SGROCC_VEC3("trajectory.center", trajectory.center),
        SGROCC_NUM("trajectory.radius", trajectory.radius),
        SGROCC_NUM("trajectory.start_angle", trajectory.start_angle),
        SGROCC_NUM("trajectory.sweep", trajectory.sweep),
        SGROCC_ENUM("trajectory.look", trajectory.look, kLookModes),
        SGROCC_VEC3("trajectory.target", trajectory.target),
        SGROCC_NUM("trajectory.pitch", trajectory.pitch),
        SGROCC_ENUM("lifter.mode", lift_mode, kLiftModes),
        SGROCC_INT("lifter.k", samples.k, int),
        SGROCC_ENUM("lifter.pattern", samples.pattern, kPatterns),
        SGROCC_NUM("lifter.radius", samples.radius),
        SGROCC_NUM("lifter.alpha", gate.alpha),
        SGROCC_NUM("lifter.sigma", gate.sigma),
        SGROCC_NUM("lifter.tau", samples.tau),
        SGROCC_BOOL("lifter.normalize_gate", samples.normalize_gate),
        SGROCC_ENUM("refiner.mode", refine_mode, kRefineModes),
        SGROCC_NUM("refiner.delta_max", delta_max),
        SGROCC_INT("refiner.iterations", refine_iters, int),
        SGROCC_NUM("refiner.inset", refine_inset),
        SGROCC_ENUM("refiner.normals", normals, kNormalSources),
        SGROCC_ENUM("refiner.grm", grm.kind, kGrmKinds),
        SGROCC_NUM("refiner.grm_uniform_weight", grm.uniform_weight),
        SGROCC_INT("refiner.grm_steps", grm_steps, int),
        SGROCC_NUM("refiner.grm_lr", grm_lr),
        SGROCC_NUM("refiner.grm_radius", grm_radius),
        SGROCC_ENUM("refiner.grm_call_site", grm_site, kGrmSites),
        SGROCC_NUM("memory.sigma_geo", confidence.sigma_geo),
        SGROCC_NUM("memory.temperature", confidence.temperature),
        SGROCC_NUM("memory.tau_min", confidence.tau_min),
        SGROCC_NUM("memory.tau_max", confidence.tau_max),
        SGROCC_INT("memory.max_pool", max_pool, std::size_t),
        SGROCC_INT("memory.stride", spawn.stride, int),
        SGROCC_NUM("memory.logit_scale", spawn.logit_scale),
        SGROCC_NUM("memory.scale", spawn.scale),
        SGROCC_NUM("memory.coverage_radius", spawn.coverage_radius),
        SGROCC_BOOL("memory.self_coverage", spawn.self_coverage),
        SGROCC_NUM("memory.spawn_jitter", spawn.jitter),
        SGROCC_NUM("memory.spawn_inset", spawn.inset),
        SGROCC_ENUM("fusion.init", fusion_init, kFusionInits),
        SGROCC_NUM("fusion.sigma_w", fusion_sigma_w),
        SGROCC_INT("schedule.total_epochs", schedule.total_epochs, int),
        SGROCC_INT("schedule.phase1_end", schedule.phase1_end, int),
        SGROCC_NUM("schedule.base_lr", schedule.base_lr),
        SGROCC_INT("schedule.warmup_epochs", schedule.warmup_epochs, int),
        SGROCC_BOOL("schedule.cosine", schedule.cosine),
        SGROCC_INT("schedule.steps_per_epoch", steps_per_epoch, int),
        SGROCC_VEC3("eval.origin", grid.origin),
        Field{"eval.dims",
              [](const RunConfig& c) { return json::array({c.grid.dims[0], c.grid.dims[1], c.grid.dims[2]}); },
              [](RunConfig& c, const json& j, const std::string& p) {
                if (!j.is_array() || j.size() != 3) bad(p, "expected an array of 3 integers");
                for (int a = 0; a < 3; ++a) c.grid.dims[a] = static_cast<int>(as_int(j[a], p));
              }},
        SGROCC_NUM("eval.resolution", grid.resolution),
        SGROCC_NUM("eval.theta_occ", theta_occ),
        Field{"output.ablation_run", [](const RunConfig& c) { return json(c.ablation_run); },
              [](RunConfig& c, const json& j, const std::string& p) {
                c.ablation_run = as_string(j, p);
                if (c.ablation_run != "local" && c.ablation_run != "embodied") bad(p, "must be local or embodied");
              }},
        SGROCC_INT("output.snapshot_every", snapshot_every, int),
        SGROCC_BOOL("output.pgm", write_pgm),
    };
    for (int c = 1; c < kNumClasses; ++c) {
      const std::string name(kClassNames[static_cast<std::size_t>(c)]);
      f.push_back(Field{"refiner.kappa." + name, [c](const RunConfig& rc) { return json(rc.grm.kappa[c]); },
                        [c](RunConfig& rc, const json& j, const std::string& p) { rc.grm.kappa[c] = as_double(j, p); }});
    }
    return f;
  }();
  return table;
}

#undef SGROCC_NUM
#undef SGROCC_INT
#undef SGROCC_BOOL
#undef SGROCC_VEC3
#undef SGROCC_ENUM

inline const Field* find_field(const std::string& path) {
  for (const auto& f : fields()) {
    if (f.path == path) return &f;
  }
  return nullptr;
}

inline void flatten(const json& j, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  if (j.is_object()) {
    for (const auto& [k, v] : j.items()) {
      const std::string path = prefix.empty() ? k : prefix + "." + k;
      // Leaves that are objects themselves do not exist; recurse.
      if (v.is_object()) {
        flatten(v, path, out);
      } else {
        out.emplace_back(path, v);
      }
    }
  }
}

}  // namespace config_detail

inline json config_to_json(const RunConfig& c) {
  json out = json::object();
  for (const auto& f : config_detail::fields()) out[json::json_pointer("/" + [&] {
    std::string p = f.path;
    for (auto& ch : p) {
      if (ch == '.') ch = '/';
    }
    return p;
  }())] = f.get(c);
  return out;
}

inline void apply_config_value(RunConfig& c, const std::string& path, const json& value) {
  const auto* f = config_detail::find_field(path);
  if (!f) fail(ErrorCode::ConfigError, "unknown config key '" + path + "'");
  f->set(c, value, path);
}

inline void apply_config_json(RunConfig& c, const json& j) {
  if (!j.is_object()) fail(ErrorCode::ConfigError, "config root must be a JSON object");
  std::vector<std::pair<std::string, json>> flat;
  config_detail::flatten(j, "", flat);
  for (const auto& [path, value] : flat) apply_config_value(c, path, value);
}

// `key=value`; the value is parsed as JSON when possible, else taken as a
// string.
inline void apply_override(RunConfig& c, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    fail(ErrorCode::ConfigError, "override must look like key=value: '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  apply_config_value(c, key, value);
}

inline VoxelGridSpec room_grid(const RoomSpec& room, double resolution) {
  VoxelGridSpec g;
  g.resolution = resolution;
  g.origin = Vec3::Constant(-room.thickness);
  for (int a = 0; a < 3; ++a) {
    g.dims[a] = static_cast<int>(std::lround((room.size[a] + 2.0 * room.thickness) / resolution));
  }
  return g;
}

struct Scenario {
  SceneModel scene;
  std::vector<Pose> poses;
  SemanticVoxelGrid gt;
};

inline Scenario build_scenario(const RunConfig& c) {
  Scenario s;
  s.scene = build_scene(c.scene_seed, c.room);
  s.poses = gen_trajectory(s.scene, c.trajectory);
  s.gt = gt_occupancy(s.scene, c.grid);
  return s;
}

// Range checks on every block; any failure is a ConfigError raised before
// compute starts.
inline void validate_config(const RunConfig& c) {
  try {
    c.room.validate();
    c.camera.validate();
    c.trajectory.validate();
    c.gate.validate();
    c.samples.validate();
    if (c.samples.pattern == OffsetPattern::grid) gen_offsets(c.samples.k, c.samples.pattern, c.samples.radius);
    c.grm.validate();
    c.confidence.validate();
    c.schedule.validate();
    c.grid.validate();
    if (!(c.depth_noise >= 0.0)) fail(ErrorCode::InvalidSpec, "camera.depth_noise must be >= 0");
    if (!(c.pose_noise >= 0.0 && c.pose_noise <= 0.2)) fail(ErrorCode::InvalidSpec, "camera.pose_noise must be in [0, 0.2]");
    if (!(c.delta_max > 0.0)) fail(ErrorCode::InvalidSpec, "refiner.delta_max must be positive");
    if (c.refine_iters < 1) fail(ErrorCode::InvalidSpec, "refiner.iterations must be >= 1");
    if (!(c.refine_inset >= 0.0)) fail(ErrorCode::InvalidSpec, "refiner.inset must be >= 0");
    if (c.grm_steps < 0 || !(c.grm_lr > 0.0) || !(c.grm_radius > 0.0)) {
      fail(ErrorCode::InvalidSpec, "GRM steps must be >= 0, lr and radius positive");
    }
    if (!(c.theta_occ > 0.0)) fail(ErrorCode::InvalidSpec, "eval.theta_occ must be positive");
    if (!(c.fusion_sigma_w >= 0.0)) fail(ErrorCode::InvalidSpec, "fusion.sigma_w must be >= 0");
    if (c.steps_per_epoch < 1) fail(ErrorCode::InvalidSpec, "schedule.steps_per_epoch must be >= 1");
    if (c.snapshot_every < 1) fail(ErrorCode::InvalidSpec, "output.snapshot_every must be >= 1");
    if (c.output_dir.empty()) fail(ErrorCode::InvalidSpec, "output_dir must not be empty");
    const double res = c.grid.resolution;
    if (!(c.spawn.scale >= 0.5 * res - 1e-12 && c.spawn.scale <= 4.0 * res + 1e-12)) {
      fail(ErrorCode::InvalidSpec, "memory.scale must lie in [0.5, 4] voxels");
    }
    build_scenario(c);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigError) throw;
    fail(ErrorCode::ConfigError, e.what());
  }
}

// Defaults, then the file, then OCC_SEED, then --set overrides.
inline RunConfig load_config(const std::optional<std::string>& path, const std::vector<std::string>& overrides) {
  RunConfig c;
  if (path) {
    std::vector<std::uint8_t> bytes;
    try {
      bytes = io::read_file(*path);
    } catch (const Error& e) {
      fail(ErrorCode::ConfigError, e.what());
    }
    const json j = json::parse(bytes.begin(), bytes.end(), nullptr, false);
    if (j.is_discarded()) fail(ErrorCode::ConfigError, "config is not valid JSON: " + *path);
    apply_config_json(c, j);
  }
  if (const char* env = std::getenv("OCC_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') fail(ErrorCode::ConfigError, "OCC_SEED must be a non-negative integer");
    c.seed = v;
  }
  for (const auto& o : overrides) apply_override(c, o);
  validate_config(c);
  return c;
}

inline MemoryConfig memory_config(const RunConfig& c) {
  MemoryConfig m;
  m.confidence = c.confidence;
  m.update.gate = c.gate;
  m.update.lift_mode = c.lift_mode;
  m.update.samples = c.samples;
  m.update.refine = c.refine_mode;
  m.update.delta_max = c.delta_max;
  m.update.refine_iters = c.refine_iters;
  m.update.inset = c.refine_inset;
  m.update.normals = c.normals;
  m.spawn = c.spawn;
  m.spawn.seed = mix_seed(c.seed, 0x59a);
  m.max_pool = c.max_pool;
  m.min_scale = 0.5 * c.grid.resolution;
  m.max_scale = 4.0 * c.grid.resolution;
  m.fusion = init_fusion_weights(kNumClasses, c.fusion_init, mix_seed(c.seed, 0xf0), c.fusion_sigma_w);
  return m;
}

// Voxels a camera has observed: centers seen in front of the visible
// surface, plus the voxel just behind each visible surface point. Either
// way the voxel center must project into the image.
inline void mark_observed(VoxelMask& mask, const VoxelGridSpec& spec, const DepthFrame& truth,
                          const CameraIntrinsics& k, const Pose& pose) {
  for (std::size_t v = 0; v < spec.size(); ++v) {
    if (mask[v]) continue;
    const auto proj = try_project(k, pose, spec.center(spec.unlinear(v)));
    if (!proj) continue;
    const auto d = observed_depth(truth, proj->u, proj->v);
    if (d && proj->depth < *d) mask[v] = 1;
  }
  const double push = 0.25 * spec.resolution;
  for (int y = 0; y < truth.height; ++y) {
    for (int x = 0; x < truth.width; ++x) {
      const double d = truth.depth_at(x, y);
      if (!std::isfinite(d)) continue;
      const Vec3 p = backproject(k, pose, x, y, d) - push * truth.normal_at(x, y);
      const auto idx = world_to_voxel(spec, p);
      if (!idx) continue;
      const std::size_t v = spec.linear(*idx);
      if (mask[v]) continue;
      // Only voxels whose centers fall inside the image are scored.
      const auto proj = try_project(k, pose, spec.center(*idx));
      if (proj && observed_depth(truth, proj->u, proj->v)) mask[v] = 1;
    }
  }
}

inline std::vector<GrmAnchor> grm_anchors(const std::vector<GaussianPrimitive>& prims,
                                          const std::vector<std::size_t>& which) {
  std::vector<GrmAnchor> out;
  out.reserve(which.size());
  for (std::size_t i : which) {
    const auto& g = prims[i];
    const auto it = std::max_element(g.logits.begin(), g.logits.end());
    out.push_back({g.position, static_cast<SemanticClass>(it - g.logits.begin()), g.normal});
  }
  return out;
}

// GRM descent over the selected, non-empty-labeled primitives; positions
// are written back. Returns the loss curve.
inline std::vector<double> apply_grm(std::vector<GaussianPrimitive>& prims, std::vector<std::size_t> which,
                                     const RunConfig& c) {
  if (c.grm.kind == GrmKind::none || c.grm_steps == 0) return {};
  which.erase(std::remove_if(which.begin(), which.end(),
                             [&prims](std::size_t i) {
                               const auto& l = prims[i].logits;
                               return std::max_element(l.begin(), l.end()) == l.begin() ||
                                      std::abs(prims[i].normal.norm() - 1.0) > 1e-6;
                             }),
              which.end());
  auto anchors = grm_anchors(prims, which);
  const GrmPairs pairs = build_adjacency(anchors, c.grm_radius);
  auto curve = grm_descent(anchors, pairs, c.grm, c.grm_lr, c.grm_steps);
  for (std::size_t n = 0; n < which.size(); ++n) prims[which[n]].position = anchors[n].position;
  return curve;
}

struct FrameRecord {
  int frame = 0;
  MetricReport metrics;
  UpdateReport update;
  double grm_loss_start = 0.0;
  double grm_loss_end = 0.0;
};

struct RunResult {
  std::vector<FrameRecord> frames;
  MetricReport final_metrics;
  SemanticVoxelGrid prediction;
  SemanticVoxelGrid ground_truth;
  VoxelMask observed;
  GaussianPool pool;
  std::vector<Pose> poses;
  std::vector<DepthFrame> depth_frames;  // first frame only, for debug output
  std::vector<std::vector<std::uint8_t>> snapshots;
  std::vector<int> snapshot_frames;
};

// Core streaming loop shared by local (one frame) and embodied runs.
inline RunResult run_frames(const RunConfig& c, int n_frames, const Scenario& sc) {
  if (n_frames < 1 || n_frames > static_cast<int>(sc.poses.size())) {
    fail(ErrorCode::InvalidSpec, "frame count exceeds trajectory");
  }
  const MemoryConfig mem = memory_config(c);
  RunResult out;
  out.ground_truth = sc.gt;
  out.observed.assign(c.grid.size(), 0);
  out.pool.grid = c.grid;
  for (int i = 0; i < n_frames; ++i) {
    const Pose& truth_pose = sc.poses[static_cast<std::size_t>(i)];
    const DepthFrame clean = render_depth(sc.scene, c.camera, truth_pose);
    const DepthFrame depth =
        c.depth_noise > 0.0 ? render_depth(sc.scene, c.camera, truth_pose, {c.depth_noise, mix_seed(c.seed, 100 + i)})
                            : clean;
    const Pose est_pose = perturb_pose(truth_pose, c.pose_noise, mix_seed(c.seed, 200 + i));
    const FeatureMap features = build_feature_map(depth);
    const FrameInput input{&depth, &features, c.camera, est_pose, truth_pose};

    FrameRecord rec;
    rec.frame = i + 1;
    rec.update = update_pool(out.pool, input, mem);

    if (c.grm_site != GrmSite::global) {
      std::vector<std::size_t> visible;
      for (std::size_t n = 0; n < out.pool.primitives.size(); ++n) {
        const Visibility v = classify_visibility(out.pool.primitives[n].position, depth, c.camera, est_pose, c.confidence);
        if (v == Visibility::visible_consistent || v == Visibility::visible_conflicting) visible.push_back(n);
      }
      const auto curve = apply_grm(out.pool.primitives, visible, c);
      if (!curve.empty()) {
        rec.grm_loss_start = curve.front();
        rec.grm_loss_end = curve.back();
      }
    }

    mark_observed(out.observed, c.grid, clean, c.camera, truth_pose);
    std::vector<GaussianPrimitive> decoded = out.pool.primitives;
    if (c.grm_site != GrmSite::local) {
      std::vector<std::size_t> all(decoded.size());
      for (std::size_t n = 0; n < all.size(); ++n) all[n] = n;
      apply_grm(decoded, all, c);
    }
    out.prediction = decode_pool(decoded, c.grid, c.theta_occ);
    rec.metrics = evaluate(out.prediction, sc.gt, &out.observed);
    for (const auto& v : {rec.metrics.sc_iou, rec.metrics.boundary_f1}) {
      if (!std::isfinite(v)) fail(ErrorCode::Diverged, "non-finite metric");
    }
    out.frames.push_back(rec);
    if (i == 0) out.depth_frames.push_back(depth);
    if ((i + 1) % c.snapshot_every == 0) {
      out.snapshots.push_back(encode_pool(out.pool));
      out.snapshot_frames.push_back(i + 1);
    }
    out.poses.push_back(est_pose);
  }
  out.final_metrics = out.frames.back().metrics;
  return out;
}

inline RunResult run_local(const RunConfig& c) { return run_frames(c, 1, build_scenario(c)); }

inline RunResult run_embodied(const RunConfig& c) {
  const Scenario sc = build_scenario(c);
  return run_frames(c, c.trajectory.n_frames, sc);
}

// ---- reports -------------------------------------------------------------

inline std::string metric_header() {
  std::string h = "sc_iou,miou,boundary_f1";
  for (int c = 1; c < kNumClasses; ++c) h += ",iou_" + std::string(kClassNames[static_cast<std::size_t>(c)]);
  return h;
}

inline std::string metric_cells(const MetricReport& m) {
  std::string s = io::fmt(m.sc_iou) + "," + (std::isnan(m.miou()) ? std::string() : io::fmt(m.miou())) + "," +
                  io::fmt(m.boundary_f1);
  for (const auto& v : m.classes.per_class) s += "," + (v ? io::fmt(*v) : std::string());
  return s;
}

inline std::string frames_csv(const RunResult& r) {
  std::ostringstream s;
  s << "frame," << metric_header()
    << ",pool_size,spawned,frozen,updated,reinitialized,dropped,evicted,occluded,out_of_view,mean_lambda,"
       "grm_loss_start,grm_loss_end\n";
  for (const auto& f : r.frames) {
    const auto& u = f.update;
    s << f.frame << "," << metric_cells(f.metrics) << "," << u.pool_size << "," << u.spawned << "," << u.frozen << ","
      << u.updated << "," << u.reinitialized << "," << u.dropped << "," << u.evicted << "," << u.occluded << ","
      << u.out_of_view << "," << io::fmt(u.mean_lambda) << "," << io::fmt(f.grm_loss_start) << ","
      << io::fmt(f.grm_loss_end) << "\n";
  }
  return s.str();
}

inline std::string summary_csv(const std::string& name, const MetricReport& m) {
  return "variant," + metric_header() + "\n" + name + "," + metric_cells(m) + "\n";
}

inline io::Pgm16 depth_pgm(const DepthFrame& d) {
  io::Pgm16 img{d.width, d.height, std::vector<std::uint16_t>(d.depth.size(), 0)};
  for (std::size_t i = 0; i < d.depth.size(); ++i) {
    const double mm = std::round(d.depth[i] * 1000.0);
    img.pixels[i] = std::isfinite(mm) ? static_cast<std::uint16_t>(std::clamp(mm, 0.0, 65535.0)) : 0;
  }
  return img;
}

// Bird's-eye view of occupied probability mass (1 - p_empty) per grid
// column, maximum over height, scaled to 16 bits.
inline io::Pgm16 gate_bev_pgm(const GaussianPool& pool, const VoxelGridSpec& spec) {
  io::Pgm16 img{spec.dims[0], spec.dims[1],
                std::vector<std::uint16_t>(static_cast<std::size_t>(spec.dims[0]) * spec.dims[1], 0)};
  for (const auto& g : pool.primitives) {
    const Vec3 rel = (g.position - spec.origin) / spec.resolution;
    const double fx = std::floor(rel.x());
    const double fy = std::floor(rel.y());
    if (!(fx >= 0 && fy >= 0 && fx < spec.dims[0] && fy < spec.dims[1])) continue;
    const double mass = 1.0 - softmax(g.logits)[0];
    const auto v = static_cast<std::uint16_t>(std::clamp(std::round(mass * 65535.0), 0.0, 65535.0));
    auto& px = img.pixels[static_cast<std::size_t>(fy) * spec.dims[0] + static_cast<std::size_t>(fx)];
    px = std::max(px, v);
  }
  return img;
}

inline void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorCode::IoError, "cannot create output directory " + dir + ": " + ec.message());
}

// Writes the artifacts of a run under output_dir with a name prefix and
// returns the written paths.
inline std::vector<std::string> write_run_artifacts(const RunResult& r, const RunConfig& c, const std::string& prefix,
                                                    bool per_frame) {
  ensure_dir(c.output_dir);
  std::vector<std::string> paths;
  auto put = [&](const std::string& name, const std::vector<std::uint8_t>& bytes) {
    const std::string p = (std::filesystem::path(c.output_dir) / name).string();
    io::write_file(p, bytes);
    paths.push_back(p);
  };
  auto text = [](const std::string& s) { return std::vector<std::uint8_t>(s.begin(), s.end()); };
  put(prefix + "_metrics.csv", text(summary_csv(prefix, r.final_metrics)));
  if (per_frame) put(prefix + "_frames.csv", text(frames_csv(r)));
  put(prefix + "_pred.svox", encode_svox(r.prediction));
  put(prefix + "_gt.svox", encode_svox(r.ground_truth));
  put(prefix + "_pool.gpool", encode_pool(r.pool));
  for (std::size_t i = 0; i < r.snapshots.size() && per_frame; ++i) {
    char name[64];
    std::snprintf(name, sizeof name, "%s_pool_%03d.gpool", prefix.c_str(), r.snapshot_frames[i]);
    put(name, r.snapshots[i]);
  }
  if (c.write_pgm && !r.depth_frames.empty()) {
    put(prefix + "_depth_000.pgm", io::encode_pgm16(depth_pgm(r.depth_frames.front())));
    put(prefix + "_gate_bev.pgm", io::encode_pgm16(gate_bev_pgm(r.pool, c.grid)));
  }
  return paths;
}

// ---- ablations -----------------------------------------------------------

enum class AblationAxis { lift_mode, refine_mode, grm_mode, sigma_sweep, k_sweep };

inline const std::vector<std::pair<std::string, AblationAxis>>& ablation_axes() {
  static const std::vector<std::pair<std::string, AblationAxis>> t = {{"lift_mode", AblationAxis::lift_mode},
                                                                      {"refine_mode", AblationAxis::refine_mode},
                                                                      {"grm_mode", AblationAxis::grm_mode},
                                                                      {"sigma_sweep", AblationAxis::sigma_sweep},
                                                                      {"k_sweep", AblationAxis::k_sweep}};
  return t;
}

inline AblationAxis parse_axis(const std::string& s) {
  return config_detail::as_enum(json(s), "axis", ablation_axes());
}

struct AblationVariant {
  std::string name;
  RunConfig config;
};

inline std::vector<AblationVariant> ablation_variants(const RunConfig& base, AblationAxis axis) {
  std::vector<AblationVariant> v;
  auto add = [&](const std::string& name, const std::function<void(RunConfig&)>& edit) {
    RunConfig c = base;
    edit(c);
    v.push_back({name, c});
  };
  switch (axis) {
    case AblationAxis::lift_mode:
      for (const auto& [name, mode] : config_detail::kLiftModes) {
        add(name, [mode = mode](RunConfig& c) { c.lift_mode = mode; });
      }
      break;
    case AblationAxis::refine_mode:
      add("none", [](RunConfig& c) { c.refine_mode = RefineMode::none; });
      add("free3d", [](RunConfig& c) { c.refine_mode = RefineMode::free3d; });
      add("ray", [](RunConfig& c) { c.refine_mode = RefineMode::ray; });
      add("free3d+pose-noise", [](RunConfig& c) {
        c.refine_mode = RefineMode::free3d;
        c.pose_noise = 0.05;
      });
      add("ray+pose-noise", [](RunConfig& c) {
        c.refine_mode = RefineMode::ray;
        c.pose_noise = 0.05;
      });
      break;
    case AblationAxis::grm_mode:
      for (const auto& [name, kind] : config_detail::kGrmKinds) {
        add(name, [kind = kind](RunConfig& c) { c.grm.kind = kind; });
      }
      break;
    case AblationAxis::sigma_sweep:
      for (double s : {0.1, 0.2, 0.5, 1.0, 2.0}) {
        add("sigma=" + io::fmt(s), [s](RunConfig& c) { c.gate.sigma = s; });
      }
      break;
    case AblationAxis::k_sweep:
      // Ring pattern: 8, 24 and 32 are not perfect squares.
      for (int k : {4, 8, 16, 24, 32}) {
        add("k=" + std::to_string(k), [k](RunConfig& c) {
          c.samples.k = k;
          c.samples.pattern = OffsetPattern::ring;
        });
      }
      break;
  }
  return v;
}

struct AblationRow {
  std::string variant;
  MetricReport metrics;
};

inline std::vector<AblationRow> run_ablation(const RunConfig& base, AblationAxis axis) {
  std::vector<AblationRow> rows;
  for (const auto& var : ablation_variants(base, axis)) {
    validate_config(var.config);
    const RunResult r = base.ablation_run == "embodied" ? run_embodied(var.config) : run_local(var.config);
    rows.push_back({var.name, r.final_metrics});
  }
  return rows;
}

inline std::string ablation_csv(const std::vector<AblationRow>& rows) {
  std::string s = "variant," + metric_header() + "\n";
  for (const auto& r : rows) s += r.variant + "," + metric_cells(r.metrics) + "\n";
  return s;
}

// ---- toy fusion dataset --------------------------------------------------

// Samples drawn from the first two frames of the scenario: history is the
// lifted class distribution of each frame-1 anchor, the current taps come
// from frame 2, the target is the anchor's ground-truth voxel label.
inline std::vector<ToySample> build_toy_dataset(const RunConfig& c, const Scenario& sc, std::size_t max_samples) {
  if (sc.poses.size() < 2) fail(ErrorCode::InvalidSpec, "toy dataset needs at least two poses");
  const MemoryConfig mem = memory_config(c);
  std::array<DepthFrame, 2> frames{render_depth(sc.scene, c.camera, sc.poses[0]),
                                   render_depth(sc.scene, c.camera, sc.poses[1])};
  const FeatureMap feat0 = build_feature_map(frames[0]);
  CoverageIndex cov(mem.spawn.coverage_radius);
  std::uint64_t next_id = 1;
  const auto anchors = spawn_anchors(frames[0], c.camera, sc.poses[0], mem.spawn, cov, next_id);
  std::vector<ToySample> data;
  const std::size_t step = std::max<std::size_t>(1, anchors.size() / std::max<std::size_t>(1, max_samples));
  for (std::size_t n = 0; n < anchors.size() && data.size() < max_samples; n += step) {
    const Vec3& p = anchors[n].position;
    const auto proj1 = try_project(c.camera, sc.poses[1], p);
    if (!proj1 || !c.camera.contains(proj1->u, proj1->v)) continue;
    const auto vox = world_to_voxel(c.grid, p);
    if (!vox) continue;
    const LiftResult h = lift_feature(p, feat0, frames[0], c.camera, sc.poses[0], c.gate, LiftMode::soft_gating, c.samples);
    ToySample s;
    s.hist = VecX::Zero(kNumClasses);
    const double mass = h.gate_mass();
    for (int k = 0; k < kNumClasses; ++k) s.hist[k] = h.feature[k];
    s.hist[0] += std::max(0.0, 1.0 - mass);
    const LiftResult cur =
        lift_feature(p, build_feature_map(frames[1]), frames[1], c.camera, sc.poses[1], c.gate, LiftMode::soft_gating, c.samples);
    for (const auto& t : cur.samples) {
      if (!t.in_image || !std::isfinite(t.depth)) continue;
      const int iu = static_cast<int>(std::lround(t.pixel.x()));
      const int iv = static_cast<int>(std::lround(t.pixel.y()));
      s.taps.push_back({t.attention, cur.reference.depth, t.depth, class_code(frames[1].class_at(iu, iv))});
    }
    s.target = sc.gt.labels[c.grid.linear(*vox)];
    data.push_back(std::move(s));
  }
  if (data.empty()) fail(ErrorCode::InvalidSpec, "toy dataset came out empty");
  return data;
}

inline ToyParams toy_init(const RunConfig& c, FusionInit mode, std::uint64_t seed) {
  ToyParams p;
  p.gate = c.gate;
  p.fusion = init_fusion_weights(kNumClasses, mode, seed, c.fusion_sigma_w);
  return p;
}

inline std::string loss_curve_csv(const LossCurve& lc) {
  std::string s = "epoch,phase,loss,proxy_quality\n0,0," + io::fmt(lc.initial_loss) + "," + io::fmt(lc.initial_quality) + "\n";
  for (const auto& e : lc.epochs) {
    s += std::to_string(e.epoch) + "," + std::to_string(e.phase) + "," + io::fmt(e.loss) + "," +
         io::fmt(e.proxy_quality) + "\n";
  }
  return s;
}

}  // namespace sgrocc
