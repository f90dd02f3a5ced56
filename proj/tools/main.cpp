// bimorph - batch CLI: generate, preprocess, optimize, simulate, evaluate,
// compare
// SPDX-License-Identifier: Apache-2.0
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <future>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bimorph/config.hpp"
#include "bimorph/io.hpp"

namespace fs = std::filesystem;
using namespace bimorph;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct CommonOpts {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::optional<int> jobs;
  std::string task;  // restrict generate/preprocess to one task label
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_task) {
  cmd->add_option("--config", opts.config_path, "run configuration (JSON)");
  cmd->add_option("--seed", opts.seed, "override the configured RNG seed");
  cmd->add_option("--out", opts.out_dir,
                  "output directory (default: timestamped under ./runs)");
  cmd->add_option("--jobs", opts.jobs, "worker threads for fan-out stages");
  if (with_task) {
    cmd->add_option("--task", opts.task, "restrict to one task label");
  }
}

RunConfig load_config(const CommonOpts& opts) {
  RunConfig cfg = opts.config_path.empty()
                      ? RunConfig()
                      : RunConfig::load_file(opts.config_path);
  if (opts.seed) cfg.seed = *opts.seed;
  if (opts.jobs) cfg.jobs = *opts.jobs;
  if (cfg.jobs < 1) throw ConfigError("jobs must be >= 1");
  return cfg;
}

// Explicit --out is used verbatim (callers own it and may re-run in place);
// the default is a fresh timestamped directory so nothing gets overwritten.
fs::path run_dir(const CommonOpts& opts, const std::string& cmd) {
  if (!opts.out_dir.empty()) {
    fs::create_directories(opts.out_dir);
    return opts.out_dir;
  }
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", std::gmtime(&tt));
  fs::path dir = fs::path("runs") / (cmd + "-" + stamp);
  for (int k = 1; fs::exists(dir); ++k) {
    dir = fs::path("runs") / (cmd + "-" + std::string(stamp) + "-" +
                              std::to_string(k));
  }
  fs::create_directories(dir);
  return dir;
}

void archive_config(const RunConfig& cfg, const fs::path& dir) {
  write_text_file(dir / "config.json", cfg.to_json().dump(2) + "\n");
}

std::vector<TaskLabel> selected_tasks(const CommonOpts& opts) {
  if (opts.task.empty()) {
    return {kAllTaskLabels, kAllTaskLabels + 4};
  }
  return {parse_task_label(opts.task)};
}

int cmd_generate(const CommonOpts& opts) {
  const RunConfig cfg = load_config(opts);
  const fs::path dir = run_dir(opts, "generate");
  archive_config(cfg, dir);
  for (TaskLabel label : selected_tasks(opts)) {
    const int idx = static_cast<int>(label);
    const RawTrajectory traj =
        synthesize_task(label, cfg.generator, cfg.seed + idx);
    const fs::path file = dir / ("trajectory_" + to_string(label) + ".csv");
    write_trajectory_csv(file, traj);
    std::cout << "wrote " << file.string() << " (" << traj.samples.size()
              << " samples)\n";
  }
  return kExitOk;
}

int cmd_preprocess(const CommonOpts& opts, const std::string& in_dir) {
  const RunConfig cfg = load_config(opts);
  const fs::path dir = run_dir(opts, "preprocess");
  archive_config(cfg, dir);

  std::vector<PoseCloud> uniform_clouds;
  for (TaskLabel label : selected_tasks(opts)) {
    const fs::path file =
        fs::path(in_dir) / ("trajectory_" + to_string(label) + ".csv");
    const RawTrajectory traj = read_trajectory_csv(file, label);
    const PoseCloud local = extract_local_variation(traj, cfg.pipeline.window);
    const int idx = static_cast<int>(label);
    const PoseCloud uniform =
        cluster_resample(local, cfg.pipeline.grid_cell,
                         cfg.pipeline.target_count, cfg.seed + 10 + idx);
    const fs::path out = dir / ("cloud_" + to_string(label) + ".csv");
    write_cloud_csv(out, uniform);
    std::cout << "wrote " << out.string() << " (occupancy ratio "
              << occupancy_ratio(uniform, cfg.pipeline.grid_cell) << ")\n";
    uniform_clouds.push_back(uniform);
  }
  if (uniform_clouds.size() > 1) {
    // Equal task shares: the pooled cloud concatenates the per-task uniform
    // clouds instead of re-voxelizing, which would weight tasks by their
    // workspace volume.
    const PoseCloud all = merge_clouds(uniform_clouds);
    const fs::path out = dir / "cloud_all_tasks.csv";
    write_cloud_csv(out, all);
    std::cout << "wrote " << out.string() << "\n";
  }
  return kExitOk;
}

int cmd_optimize(const CommonOpts& opts, const std::string& cloud_path) {
  const RunConfig cfg = load_config(opts);
  const fs::path dir = run_dir(opts, "optimize");
  archive_config(cfg, dir);

  const PoseCloud cloud = read_cloud_csv(cloud_path);
  AnnealSettings settings = cfg.anneal;
  settings.rng_seed = cfg.seed;
  const auto [best, trace] =
      anneal(DesignVector::anthropomorphic(), cloud, settings);

  write_design_json(dir / "design.json", cfg.make_bilateral(best));
  write_anneal_trace_csv(dir / "anneal_trace.csv", trace);
  const double best_cost =
      trace.rows.empty() ? design_cost(best, cloud, settings.ik,
                                       settings.w1_diag, settings.w2)
                         : trace.rows.back().best_cost;
  std::cout << "optimized design written to "
            << (dir / "design.json").string() << "\n"
            << "iterations: " << trace.rows.size()
            << "  best cost: " << best_cost << "\n";
  return kExitOk;
}

void emit_trace_outputs(const fs::path& dir, const std::string& stem,
                        const MotionTrace& trace) {
  write_motion_trace_csv(dir / (stem + ".csv"), trace);
  const DexterityReport rep = evaluate_trace(trace);
  std::vector<std::pair<double, double>> dext, h, scale;
  for (std::size_t i = 0; i < trace.steps.size(); ++i) {
    const TraceStep& s = trace.steps[i];
    dext.emplace_back(s.state.time, rep.composite[i]);
    h.emplace_back(s.state.time, s.h_value);
    scale.emplace_back(s.state.time, s.scale_base);
  }
  write_series(dir / (stem + "_dext.dat"), dext);
  write_series(dir / (stem + "_H.dat"), h);
  write_series(dir / (stem + "_scaleK.dat"), scale);
}

MotionTrace run_transition(const RunConfig& cfg, const BilateralDesign& sys,
                           bool informed) {
  const Vec3 wrist = sys.arm.joint(sys.arm.wrist_index()).axis_point;
  return simulate_transition(sys, wrist, cfg.fixture.w1, cfg.fixture.w2,
                             cfg.fixture.duration, cfg.fixture.dt, informed,
                             cfg.transition);
}

int cmd_simulate(const CommonOpts& opts, const std::string& design_path,
                 bool informed) {
  const RunConfig cfg = load_config(opts);
  const fs::path dir = run_dir(opts, "simulate");
  archive_config(cfg, dir);

  const BilateralDesign sys = read_design_json(design_path);
  const MotionTrace trace = run_transition(cfg, sys, informed);
  const std::string stem =
      informed ? "transition_informed" : "transition_uninformed";
  emit_trace_outputs(dir, stem, trace);

  const DexterityReport rep = evaluate_trace(trace);
  double max_track = 0.0;
  for (const TraceStep& s : trace.steps) {
    max_track = std::max(max_track, (s.v_achieved - s.v_desired).norm());
  }
  std::cout << "steps: " << trace.steps.size()
            << "  composite std: " << rep.std_dev
            << "  max twist tracking error: " << max_track << "\n";
  return kExitOk;
}

int cmd_evaluate(const CommonOpts& opts, const std::string& design_path,
                 const std::string& cloud_path) {
  const RunConfig cfg = load_config(opts);
  const fs::path dir = run_dir(opts, "evaluate");
  archive_config(cfg, dir);

  const BilateralDesign sys = read_design_json(design_path);
  const PoseCloud cloud = read_cloud_csv(cloud_path);
  const Vec3 anchor = sys.arm.joint(sys.arm.wrist_index()).axis_point;
  const DexterityReport rep =
      evaluate_cloud(sys.arm, anchor, cloud, cfg.anneal.ik);

  write_dexterity_csv(dir / "dexterity_report.csv", rep);
  write_text_file(dir / "dexterity_summary.json",
                  dexterity_summary_json(rep).dump(2) + "\n");
  std::cout << "composite mean: " << rep.mean << "  std: " << rep.std_dev
            << "\n";
  return kExitOk;
}

int cmd_compare(const CommonOpts& opts,
                const std::vector<std::string>& design_paths,
                const std::vector<std::string>& cloud_paths) {
  const RunConfig cfg = load_config(opts);
  const fs::path dir = run_dir(opts, "compare");
  archive_config(cfg, dir);

  std::vector<BilateralDesign> designs;
  for (const std::string& p : design_paths) {
    designs.push_back(read_design_json(p));
  }

  Json summary;
  summary["schema"] = "bimorph-compare-v1";
  summary["clouds"] = Json::object();

  for (const std::string& cloud_path : cloud_paths) {
    const PoseCloud cloud = read_cloud_csv(cloud_path);
    const std::string cloud_name = fs::path(cloud_path).stem().string();

    // Metric sweeps fan out across designs; results are index-ordered so
    // the outcome does not depend on scheduling.
    std::vector<std::future<std::vector<PointMetrics>>> futures;
    for (std::size_t d = 0; d < designs.size(); ++d) {
      const BilateralDesign& sys = designs[d];
      const auto policy =
          cfg.jobs > 1 ? std::launch::async : std::launch::deferred;
      futures.push_back(std::async(policy, [&sys, &cloud, &cfg] {
        const Vec3 anchor = sys.arm.joint(sys.arm.wrist_index()).axis_point;
        return cloud_point_metrics(sys.arm, anchor, cloud, cfg.anneal.ik);
      }));
    }
    std::vector<std::vector<PointMetrics>> metric_sets;
    for (auto& f : futures) metric_sets.push_back(f.get());

    const std::vector<DexterityReport> reports =
        evaluate_points_pooled(metric_sets);
    Json per_cloud = Json::object();
    for (std::size_t d = 0; d < designs.size(); ++d) {
      const std::string name = fs::path(design_paths[d]).stem().string() +
                               "#" + std::to_string(d);
      per_cloud[name] = {{"mean", reports[d].mean},
                         {"std", reports[d].std_dev}};
      std::cout << cloud_name << "  " << name
                << "  composite mean: " << reports[d].mean << "\n";
      write_dexterity_csv(
          dir / ("report_" + cloud_name + "_d" + std::to_string(d) + ".csv"),
          reports[d]);
    }
    summary["clouds"][cloud_name] = per_cloud;
  }

  // Workspace transition on the first design, both modes; the stds are
  // compared on jointly normalized composites.
  if (!designs.empty()) {
    const MotionTrace informed = run_transition(cfg, designs.front(), true);
    const MotionTrace uninformed = run_transition(cfg, designs.front(), false);
    emit_trace_outputs(dir, "transition_informed", informed);
    emit_trace_outputs(dir, "transition_uninformed", uninformed);
    const auto [rep_inf, rep_unf] = compare_traces(informed, uninformed);
    const double ratio = rep_unf.std_dev > 0.0
                             ? rep_inf.std_dev / rep_unf.std_dev
                             : std::numeric_limits<double>::infinity();
    summary["transition"] = {{"informed_std", rep_inf.std_dev},
                             {"uninformed_std", rep_unf.std_dev},
                             {"ratio", ratio}};
    std::cout << "informed/uninformed dexterity std ratio: " << ratio << "\n";
  }

  write_text_file(dir / "compare_summary.json", summary.dump(2) + "\n");
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bimorph: data-driven bilateral manipulator morphology "
               "optimization and design-informed motion"};
  app.require_subcommand(1);

  CommonOpts gen_o, pre_o, opt_o, sim_o, eval_o, cmp_o;
  std::string in_dir, cloud_path, design_path, eval_cloud;
  std::vector<std::string> cmp_designs, cmp_clouds;
  bool informed = true;

  CLI::App* generate = app.add_subcommand(
      "generate", "synthesize the four task trajectory CSVs");
  add_common(generate, gen_o, true);

  CLI::App* preprocess = app.add_subcommand(
      "preprocess", "extract local variations and resample to pose clouds");
  add_common(preprocess, pre_o, true);
  preprocess->add_option("--in", in_dir, "directory with trajectory CSVs")
      ->required();

  CLI::App* optimize = app.add_subcommand(
      "optimize", "anneal the arm morphology against a pose cloud");
  add_common(optimize, opt_o, false);
  optimize->add_option("--cloud", cloud_path, "pose cloud CSV")->required();

  CLI::App* simulate = app.add_subcommand(
      "simulate", "run the workspace transition for one design");
  add_common(simulate, sim_o, false);
  simulate->add_option("--design", design_path, "design JSON")->required();
  simulate->add_option("--informed", informed,
                       "use the design-informed null-space goal");

  CLI::App* evaluate = app.add_subcommand(
      "evaluate", "dexterity report of a design over a cloud");
  add_common(evaluate, eval_o, false);
  evaluate->add_option("--design", design_path, "design JSON")->required();
  evaluate->add_option("--cloud", eval_cloud, "pose cloud CSV")->required();

  CLI::App* compare = app.add_subcommand(
      "compare", "compare designs across clouds plus the transition study");
  add_common(compare, cmp_o, false);
  compare->add_option("--designs", cmp_designs, "design JSON files")
      ->required();
  compare->add_option("--clouds", cmp_clouds, "pose cloud CSVs")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (generate->parsed()) return cmd_generate(gen_o);
    if (preprocess->parsed()) return cmd_preprocess(pre_o, in_dir);
    if (optimize->parsed()) return cmd_optimize(opt_o, cloud_path);
    if (simulate->parsed()) return cmd_simulate(sim_o, design_path, informed);
    if (evaluate->parsed()) return cmd_evaluate(eval_o, design_path, eval_cloud);
    if (compare->parsed()) return cmd_compare(cmp_o, cmp_designs, cmp_clouds);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const UnknownLabel& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitConfig;
}
