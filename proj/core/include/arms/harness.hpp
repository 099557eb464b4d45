#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "arms/controllers.hpp"
#include "arms/episode.hpp"
#include "arms/safety_filter.hpp"
#include "arms/switcher.hpp"
#include "arms/trajectory.hpp"
#include "arms/world.hpp"

namespace arms {

enum class ControllerKind { pure_pursuit, dwa, follower, mpc, arms };

std::string_view to_string(ControllerKind kind);
ControllerKind parse_controller_kind(std::string_view text);

struct GridSearchConfig {
  std::size_t episodes = 50;
  std::uint64_t seed = 20240;
  DwaLattice lattice;
  std::vector<std::size_t> indices;  ///< empty = whole lattice
  std::filesystem::path csv;         ///< results table; empty = not written
};

struct RunConfig {
  std::vector<ScenarioSpec> scenarios{ScenarioSpec{}};
  std::size_t episodes = 300;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  DatasetOptions dataset;
  bool write_maps = false;  ///< dataset subcommand: also write PGM maps

  ControllerKind controller = ControllerKind::arms;
  FollowerConfig follower;
  FilterParams filter;
  SwitchPolicy switch_policy = default_learned_gate();
  double eta = 0.2;
  double alpha_initial = 1.0;
  PurePursuitParams pure_pursuit;
  DwaParams dwa;
  MpcParams mpc;  ///< mpc.filter is kept equal to `filter`
  EpisodeParams episode;
  double sd_range = 2.0;  ///< steps with d <= sd_range count toward SD

  GridSearchConfig gridsearch;
  std::filesystem::path out_dir;
};

/// Parses a JSON run configuration. Relative paths resolve against
/// `base_dir`. Unknown keys, bad values and missing weight files raise
/// ConfigError.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

/// Fresh controller for one episode.
std::unique_ptr<Controller> make_controller(const RunConfig& config);

/// Per-episode partial sums; the summary is a fold over these in index order.
struct EpisodeStats {
  std::size_t index = 0;
  TerminationReason reason = TerminationReason::running;
  std::size_t steps = 0;
  double sum_distance = 0.0;
  double sum_safe_distance = 0.0;
  std::size_t safe_steps = 0;
  double sum_rt_ms = 0.0;
  double sum_alpha_bar = 0.0;
};

EpisodeStats episode_stats(std::size_t index, std::span<const StepRecord> records, TerminationReason reason,
                           double sd_range = 2.0);

struct MetricsSummary {
  double sr = 0.0;  ///< percent
  double hd = 0.0;  ///< m
  double sd = 0.0;  ///< m
  double rt = 0.0;  ///< ms per step
  double mw = 0.0;  ///< mean alpha_bar
  std::size_t episodes = 0;
  std::size_t steps = 0;
  std::array<std::size_t, 5> by_reason{};  ///< indexed by TerminationReason

  std::size_t count(TerminationReason r) const { return by_reason[static_cast<std::size_t>(r)]; }
};

MetricsSummary summarize(std::span<const EpisodeStats> episodes);

struct EvaluationResult {
  MetricsSummary summary;
  std::vector<EpisodeStats> episodes;
  std::vector<EpisodeResult> runs;  ///< filled when keep_records is set
};

struct EvaluateOptions {
  unsigned workers = 1;
  std::filesystem::path out_dir;  ///< per-episode CSVs and summary.csv; empty = none
  bool keep_records = false;
};

/// Runs every dataset entry with a fresh controller. Results do not depend
/// on the worker count apart from the timing columns.
EvaluationResult evaluate(const RunConfig& config, std::span<const DatasetEntry> dataset,
                          const EvaluateOptions& options);
/// Builds the dataset from `config` first.
EvaluationResult evaluate(const RunConfig& config, const EvaluateOptions& options);

std::vector<DatasetEntry> make_dataset(const RunConfig& config, std::size_t episodes, std::uint64_t seed);

std::filesystem::path episode_csv_name(std::size_t index);
/// Recomputes the summary from the per-episode CSVs in `dir`.
MetricsSummary summarize_directory(const std::filesystem::path& dir, double sd_range = 2.0);
void write_summary_csv(const std::filesystem::path& path, const MetricsSummary& summary);

/// Mean alpha_bar over every step of every episode.
double compute_switch_weight_stat(std::span<const EpisodeResult> runs);
double compute_switch_weight_stat(std::span<const std::vector<StepRecord>> episodes);

struct GridSearchRow {
  std::size_t index = 0;
  DwaParams params;
  MetricsSummary summary;
};

struct GridSearchResult {
  std::size_t best_index = 0;
  DwaParams best;
  std::vector<GridSearchRow> rows;
};

/// Evaluates the DWA controller for every lattice index in `indices` (the
/// whole lattice when empty) on `train`. Best = highest SR, then highest SD,
/// then lowest index.
GridSearchResult dwa_grid_search(const RunConfig& config, std::span<const DatasetEntry> train,
                                 const DwaLattice& lattice, std::span<const std::size_t> indices,
                                 unsigned workers = 1);
void write_grid_csv(const std::filesystem::path& path, const GridSearchResult& result);

/// Top-down SVG of one episode: obstacles, human and robot polylines and a
/// d_ref circle around the final human position.
void write_trajectory_svg(const std::filesystem::path& path, const EpisodeFile& episode, double d_ref = 1.1);
/// alpha_bar against time.
void write_alpha_svg(const std::filesystem::path& path, const EpisodeFile& episode);
/// Writes both plots for every episode CSV in `records_dir`; returns the
/// number of episodes plotted.
std::size_t emit_plots(const std::filesystem::path& records_dir, const std::filesystem::path& out_dir);

}  // namespace arms
