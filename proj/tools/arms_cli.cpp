// arms: batch evaluation, DWA grid search, dataset generation and plotting.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "arms/errors.hpp"
#include "arms/harness.hpp"
#include "arms/trajectory.hpp"

namespace {

constexpr int kConfigErrorExit = 2;
constexpr int kRuntimeErrorExit = 1;

void print_summary(const arms::MetricsSummary& m) {
  using arms::TerminationReason;
  std::printf("episodes %zu  steps %zu\n", m.episodes, m.steps);
  std::printf("SR %.2f %%  HD %.4f m  SD %.4f m  RT %.4f ms  MW %.4f\n", m.sr, m.hd, m.sd, m.rt, m.mw);
  std::printf("success %zu  collision %zu  personal_space %zu  timeout %zu\n", m.count(TerminationReason::success),
              m.count(TerminationReason::collision), m.count(TerminationReason::personal_space),
              m.count(TerminationReason::timeout));
}

int run_evaluate(const std::string& config_path, const std::string& out, unsigned workers) {
  arms::RunConfig config = arms::load_run_config(config_path);
  if (workers > 0) config.workers = workers;
  const std::filesystem::path out_dir = out.empty() ? config.out_dir : std::filesystem::path(out);
  if (out_dir.empty()) throw arms::ConfigError("no output directory: pass --out or set \"out\" in the config");
  const auto result = arms::evaluate(config, {config.workers, out_dir, false});
  std::printf("controller %s\n", std::string(arms::to_string(config.controller)).c_str());
  print_summary(result.summary);
  std::printf("records written to %s\n", out_dir.string().c_str());
  return 0;
}

int run_gridsearch(const std::string& config_path, unsigned workers) {
  arms::RunConfig config = arms::load_run_config(config_path);
  if (workers > 0) config.workers = workers;
  const auto& g = config.gridsearch;
  const auto train = arms::make_dataset(config, g.episodes, g.seed);
  const std::size_t combos = g.indices.empty() ? g.lattice.size() : g.indices.size();
  std::printf("grid search: %zu combinations x %zu episodes\n", combos, train.size());
  const auto result = arms::dwa_grid_search(config, train, g.lattice, g.indices, config.workers);
  std::filesystem::path csv = g.csv;
  if (csv.empty() && !config.out_dir.empty()) {
    std::filesystem::create_directories(config.out_dir);
    csv = config.out_dir / "dwa_grid.csv";
  }
  if (!csv.empty()) {
    arms::write_grid_csv(csv, result);
    std::printf("results written to %s\n", csv.string().c_str());
  }
  const auto& b = result.best;
  const auto& row = *std::find_if(result.rows.begin(), result.rows.end(),
                                  [&](const auto& r) { return r.index == result.best_index; });
  std::printf("best index %zu: v_max %g accel %g desired_distance %g follow_gain %g avoid_gain %g "
              "avoid_clearance %g personal_space %g obstacle_buffer %g obstacle_free_clearance %g\n",
              result.best_index, b.v_max, b.accel, b.desired_distance, b.follow_gain, b.avoid_gain, b.avoid_clearance,
              b.personal_space, b.obstacle_buffer, b.obstacle_free_clearance);
  std::printf("SR %.2f %%  HD %.4f m  SD %.4f m\n", row.summary.sr, row.summary.hd, row.summary.sd);
  return 0;
}

int run_dataset(const std::string& config_path, const std::string& out, unsigned workers) {
  arms::RunConfig config = arms::load_run_config(config_path);
  if (workers > 0) config.workers = workers;
  const auto entries = arms::make_dataset(config, config.episodes, config.seed);
  std::vector<arms::HumanTrajectory> trajectories;
  double total_steps = 0.0;
  for (const auto& e : entries) {
    trajectories.push_back(e.trajectory);
    total_steps += static_cast<double>(e.trajectory.episode_length());
  }
  std::printf("episodes %zu  mean length %.2f steps  mean speed %.4f m/s  max speed %.4f m/s\n", entries.size(),
              total_steps / static_cast<double>(entries.size()), arms::mean_speed(trajectories),
              arms::max_speed(trajectories));
  const std::filesystem::path dir = out.empty() ? config.out_dir : std::filesystem::path(out);
  if (!dir.empty()) {
    std::filesystem::create_directories(dir);
    for (const auto& e : entries) {
      char stem[32];
      std::snprintf(stem, sizeof(stem), "trajectory_%05zu", e.index);
      arms::write_trajectory_file(dir / (std::string(stem) + ".csv"), e);
      if (config.write_maps) {
        std::snprintf(stem, sizeof(stem), "map_%05zu.pgm", e.index);
        arms::write_pgm(e.scenario.map, dir / stem);
      }
    }
    std::printf("dataset written to %s\n", dir.string().c_str());
  }
  return 0;
}

int run_plot(const std::string& records, const std::string& out) {
  const std::filesystem::path dir(records);
  if (!std::filesystem::is_directory(dir)) throw arms::ConfigError("not a directory: " + records);
  const std::filesystem::path out_dir = out.empty() ? dir / "plots" : std::filesystem::path(out);
  const std::size_t n = arms::emit_plots(dir, out_dir);
  if (n == 0) throw arms::ConfigError("no episode records found in " + records);
  std::printf("plotted %zu episodes into %s\n", n, out_dir.string().c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Human-following navigation testbed: evaluation, DWA tuning, datasets and plots"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out;
  std::string records;
  unsigned workers = 0;

  auto* evaluate = app.add_subcommand("evaluate", "Run a configured controller over a generated dataset");
  evaluate->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
  evaluate->add_option("--out", out, "Output directory for per-episode CSVs");
  evaluate->add_option("--workers", workers, "Parallel episodes (overrides the config)");

  auto* gridsearch = app.add_subcommand("gridsearch", "Exhaustive DWA parameter search on a training split");
  gridsearch->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
  gridsearch->add_option("--workers", workers, "Parallel episodes (overrides the config)");

  auto* dataset = app.add_subcommand("dataset", "Generate scenarios and human trajectories");
  dataset->add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
  dataset->add_option("--out", out, "Directory for trajectory files and maps");
  dataset->add_option("--workers", workers, "Parallel generation (overrides the config)");

  auto* plot = app.add_subcommand("plot", "Render SVG plots from per-episode CSVs");
  plot->add_option("--records", records, "Directory written by evaluate")->required();
  plot->add_option("--out", out, "Plot directory (default <records>/plots)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigErrorExit;
  }

  try {
    if (*evaluate) return run_evaluate(config_path, out, workers);
    if (*gridsearch) return run_gridsearch(config_path, workers);
    if (*dataset) return run_dataset(config_path, out, workers);
    if (*plot) return run_plot(records, out);
  } catch (const arms::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kConfigErrorExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeErrorExit;
  }
  return 0;
}
