// occ: command-line front end for the occupancy pipeline.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sgrocc/acceptance.hpp"
#include "sgrocc/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitAcceptance = 4;

int exit_code_for(const sgrocc::Error& e) {
  using sgrocc::ErrorCode;
  switch (e.code()) {
    case ErrorCode::ConfigError:
    case ErrorCode::IoError:
    case ErrorCode::FormatError:
    case ErrorCode::InvalidSpec:
    case ErrorCode::CameraOutsideScene:
    case ErrorCode::GridOutsideScene:
    case ErrorCode::PathLeavesBounds:
    case ErrorCode::FracOutOfRange:
    case ErrorCode::BadPattern:
      return kExitConfig;
    default:
      return kExitNumeric;
  }
}

void print_metrics(const std::string& label, const sgrocc::MetricReport& m) {
  std::printf("%s sc_iou=%.6f miou=%.6f boundary_f1=%.6f\n", label.c_str(), m.sc_iou, m.miou(), m.boundary_f1);
}

void print_paths(const std::vector<std::string>& paths) {
  for (const auto& p : paths) std::printf("wrote %s\n", p.c_str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming monocular 3D semantic occupancy: runs, ablations and checks"};
  app.require_subcommand(1);

  std::optional<std::string> config_path;
  std::vector<std::string> overrides;
  auto add_config_opts = [&](CLI::App* sub) {
    sub->add_option("-c,--config", config_path, "JSON run configuration");
    sub->add_option("--set", overrides, "override a config key, e.g. --set lifter.sigma=0.2")->take_all();
  };

  auto* local = app.add_subcommand("run-local", "single-frame prediction and evaluation");
  add_config_opts(local);
  auto* embodied = app.add_subcommand("run-embodied", "streaming run over the trajectory");
  add_config_opts(embodied);
  auto* ablate = app.add_subcommand("ablate", "run one ablation axis and write a comparison CSV");
  add_config_opts(ablate);
  std::string axis;
  ablate->add_option("axis", axis, "lift_mode | refine_mode | grm_mode | sigma_sweep | k_sweep")->required();

  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference check of analytic gradients");
  std::string op = "all";
  int trials = 100;
  double step = 1e-6;
  double tol = 1e-5;
  std::uint64_t grad_seed = 1;
  gradcheck->add_option("--op", op, "gate | grm | fusion | all");
  gradcheck->add_option("--trials", trials, "random configurations per operator");
  gradcheck->add_option("--step", step, "central-difference step");
  gradcheck->add_option("--tol", tol, "relative tolerance");
  gradcheck->add_option("--seed", grad_seed, "sampling seed");

  auto* check = app.add_subcommand("check", "run the acceptance suite");
  std::string bench_path = SGROCC_CONFIG_DIR "/bench_room.json";
  std::string wall_path = SGROCC_CONFIG_DIR "/wall_heavy.json";
  std::vector<int> only;
  std::string scratch = "acceptance_scratch";
  check->add_option("--bench", bench_path, "bench configuration");
  check->add_option("--wall", wall_path, "wall-heavy configuration");
  check->add_option("--only", only, "criterion ids to run (default: all)");
  check->add_option("--scratch", scratch, "directory for temporary artifacts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (local->parsed()) {
      const auto cfg = sgrocc::load_config(config_path, overrides);
      const auto res = sgrocc::run_local(cfg);
      print_metrics("local", res.final_metrics);
      print_paths(sgrocc::write_run_artifacts(res, cfg, "local", false));
    } else if (embodied->parsed()) {
      const auto cfg = sgrocc::load_config(config_path, overrides);
      const auto res = sgrocc::run_embodied(cfg);
      for (const auto& f : res.frames) print_metrics("frame " + std::to_string(f.frame), f.metrics);
      print_metrics("final", res.final_metrics);
      print_paths(sgrocc::write_run_artifacts(res, cfg, "embodied", true));
    } else if (ablate->parsed()) {
      const auto cfg = sgrocc::load_config(config_path, overrides);
      const auto ax = sgrocc::parse_axis(axis);
      const auto rows = sgrocc::run_ablation(cfg, ax);
      const std::string csv = sgrocc::ablation_csv(rows);
      std::fputs(csv.c_str(), stdout);
      sgrocc::ensure_dir(cfg.output_dir);
      const std::string path = (std::filesystem::path(cfg.output_dir) / ("ablation_" + axis + ".csv")).string();
      sgrocc::io::write_text(path, csv);
      std::printf("wrote %s\n", path.c_str());
    } else if (gradcheck->parsed()) {
      std::vector<sgrocc::GradOp> ops;
      if (op == "all" || op == "gate") ops.push_back(sgrocc::GradOp::gate);
      if (op == "all" || op == "grm") ops.push_back(sgrocc::GradOp::grm);
      if (op == "all" || op == "fusion") ops.push_back(sgrocc::GradOp::fusion);
      if (ops.empty()) {
        std::fprintf(stderr, "error: --op must be gate, grm, fusion or all\n");
        return kExitConfig;
      }
      bool all_pass = true;
      for (auto o : ops) {
        const auto rep = sgrocc::check_gradients(o, trials, step, tol, grad_seed);
        std::printf("[%s] %s partials=%zu max_rel_error=%.3e tol=%.1e\n", rep.pass ? "PASS" : "FAIL",
                    sgrocc::to_string(o), rep.checked, rep.max_rel_error, rep.tol);
        all_pass = all_pass && rep.pass;
      }
      return all_pass ? kExitOk : kExitAcceptance;
    } else if (check->parsed()) {
      sgrocc::acceptance::Inputs in;
      in.bench = sgrocc::load_config(bench_path, {});
      in.wall = sgrocc::load_config(wall_path, {});
      in.scratch_dir = scratch;
      bool all_pass = true;
      const int n = static_cast<int>(sgrocc::acceptance::criteria().size());
      for (int id = 1; id <= n; ++id) {
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        const auto r = sgrocc::acceptance::run_one(id, in);
        std::printf("%s\n", sgrocc::acceptance::format_line(r).c_str());
        std::fflush(stdout);
        all_pass = all_pass && r.pass;
      }
      return all_pass ? kExitOk : kExitAcceptance;
    }
  } catch (const sgrocc::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNumeric;
  }
  return kExitOk;
}
