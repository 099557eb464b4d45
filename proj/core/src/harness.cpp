#include "arms/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "arms/errors.hpp"
#include "arms/rng.hpp"
#include "text_io.hpp"

namespace arms {
namespace {

constexpr std::uint64_t kNoiseStream = 0x6e6f697365;

/// Runs fn(i) for i in [0, n) on up to `workers` threads and rethrows the
/// first failure.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn fn) {
  const unsigned threads = static_cast<unsigned>(std::min<std::size_t>(std::max(1u, workers), n));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto body = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
        return;
      }
    }
  };
  if (threads <= 1) {
    body();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(body);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

EpisodeStats episode_stats(std::size_t index, std::span<const StepRecord> records, TerminationReason reason,
                           double sd_range) {
  EpisodeStats s;
  s.index = index;
  s.reason = reason;
  s.steps = records.size();
  for (const auto& r : records) {
    s.sum_distance += r.distance;
    if (r.distance <= sd_range) {
      s.sum_safe_distance += r.distance;
      ++s.safe_steps;
    }
    s.sum_rt_ms += r.rt_ms;
    s.sum_alpha_bar += r.alpha_bar;
  }
  return s;
}

MetricsSummary summarize(std::span<const EpisodeStats> episodes) {
  MetricsSummary m;
  double sum_d = 0.0;
  double sum_sd = 0.0;
  double sum_rt = 0.0;
  double sum_alpha = 0.0;
  std::size_t safe_steps = 0;
  for (const auto& e : episodes) {
    ++m.by_reason[static_cast<std::size_t>(e.reason)];
    m.steps += e.steps;
    sum_d += e.sum_distance;
    sum_sd += e.sum_safe_distance;
    safe_steps += e.safe_steps;
    sum_rt += e.sum_rt_ms;
    sum_alpha += e.sum_alpha_bar;
  }
  m.episodes = episodes.size();
  if (m.episodes > 0) {
    m.sr = 100.0 * static_cast<double>(m.count(TerminationReason::success)) / static_cast<double>(m.episodes);
  }
  if (m.steps > 0) {
    const auto steps = static_cast<double>(m.steps);
    m.hd = sum_d / steps;
    m.rt = sum_rt / steps;
    m.mw = sum_alpha / steps;
  }
  if (safe_steps > 0) m.sd = sum_sd / static_cast<double>(safe_steps);
  return m;
}

std::vector<DatasetEntry> make_dataset(const RunConfig& config, std::size_t episodes, std::uint64_t seed) {
  return generate_dataset(config.scenarios, episodes, seed, config.dataset, config.workers);
}

std::filesystem::path episode_csv_name(std::size_t index) {
  char name[32];
  std::snprintf(name, sizeof(name), "episode_%05zu.csv", index);
  return name;
}

EvaluationResult evaluate(const RunConfig& config, std::span<const DatasetEntry> dataset,
                          const EvaluateOptions& options) {
  EvaluationResult result;
  const std::size_t n = dataset.size();
  result.episodes.resize(n);
  if (options.keep_records) result.runs.resize(n);
  if (!options.out_dir.empty()) std::filesystem::create_directories(options.out_dir);

  parallel_for(n, options.workers, [&](std::size_t i) {
    const DatasetEntry& entry = dataset[i];
    auto controller = make_controller(config);
    EpisodeResult run = run_episode(entry.scenario, entry.trajectory, *controller, config.episode,
                                    mix_seed(entry.spec.rng_seed, kNoiseStream));
    result.episodes[i] = episode_stats(entry.index, run.records, run.reason, config.sd_range);
    if (!options.out_dir.empty()) {
      EpisodeFile file;
      file.index = entry.index;
      file.spec = entry.spec;
      file.map_width = entry.scenario.map.width();
      file.map_height = entry.scenario.map.height();
      file.obstacles.assign(entry.scenario.map.obstacles().begin(), entry.scenario.map.obstacles().end());
      file.reason = run.reason;
      file.records = run.records;
      write_episode_csv(options.out_dir / episode_csv_name(entry.index), file);
    }
    if (options.keep_records) result.runs[i] = std::move(run);
  });

  result.summary = summarize(result.episodes);
  if (!options.out_dir.empty()) write_summary_csv(options.out_dir / "summary.csv", result.summary);
  return result;
}

EvaluationResult evaluate(const RunConfig& config, const EvaluateOptions& options) {
  const auto dataset = make_dataset(config, config.episodes, config.seed);
  return evaluate(config, dataset, options);
}

MetricsSummary summarize_directory(const std::filesystem::path& dir, double sd_range) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind("episode_", 0) == 0 && entry.path().extension() == ".csv") {
      files.push_back(entry.path());
    }
  }
  std::vector<EpisodeStats> stats;
  stats.reserve(files.size());
  for (const auto& f : files) {
    const EpisodeFile ep = read_episode_csv(f);
    stats.push_back(episode_stats(ep.index, ep.records, ep.reason, sd_range));
  }
  std::sort(stats.begin(), stats.end(), [](const auto& a, const auto& b) { return a.index < b.index; });
  return summarize(stats);
}

void write_summary_csv(const std::filesystem::path& path, const MetricsSummary& m) {
  using detail::format_double;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "episodes,steps,SR,HD,SD,RT,MW,success,collision,personal_space,timeout\n";
  out << m.episodes << ',' << m.steps << ',' << format_double(m.sr) << ',' << format_double(m.hd) << ','
      << format_double(m.sd) << ',' << format_double(m.rt) << ',' << format_double(m.mw) << ','
      << m.count(TerminationReason::success) << ',' << m.count(TerminationReason::collision) << ','
      << m.count(TerminationReason::personal_space) << ',' << m.count(TerminationReason::timeout) << '\n';
}

double compute_switch_weight_stat(std::span<const std::vector<StepRecord>> episodes) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& records : episodes) {
    for (const auto& r : records) sum += r.alpha_bar;
    n += records.size();
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

double compute_switch_weight_stat(std::span<const EpisodeResult> runs) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& run : runs) {
    for (const auto& r : run.records) sum += r.alpha_bar;
    n += run.records.size();
  }
  return n > 0 ? sum / static_cast<double>(n) : 0.0;
}

GridSearchResult dwa_grid_search(const RunConfig& config, std::span<const DatasetEntry> train,
                                 const DwaLattice& lattice, std::span<const std::size_t> indices,
                                 unsigned workers) {
  std::vector<std::size_t> order(indices.begin(), indices.end());
  if (order.empty()) {
    order.resize(lattice.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  }
  if (order.empty()) throw ConfigError("grid search over an empty lattice");

  GridSearchResult result;
  RunConfig run = config;
  run.controller = ControllerKind::dwa;
  for (std::size_t index : order) {
    run.dwa = lattice.at(index, config.episode.dt);
    const EvaluationResult eval = evaluate(run, train, {workers, {}, false});
    result.rows.push_back({index, run.dwa, eval.summary});
  }
  const GridSearchRow* best = &result.rows.front();
  for (const auto& row : result.rows) {
    const auto& a = row.summary;
    const auto& b = best->summary;
    if (a.sr > b.sr || (a.sr == b.sr && (a.sd > b.sd || (a.sd == b.sd && row.index < best->index)))) best = &row;
  }
  result.best_index = best->index;
  result.best = best->params;
  return result;
}

void write_grid_csv(const std::filesystem::path& path, const GridSearchResult& result) {
  using detail::format_double;
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << "index,v_max,accel,desired_distance,follow_gain,avoid_gain,avoid_clearance,personal_space,"
         "obstacle_buffer,obstacle_free_clearance,SR,HD,SD,RT\n";
  for (const auto& row : result.rows) {
    const DwaParams& p = row.params;
    out << row.index;
    for (double v : {p.v_max, p.accel, p.desired_distance, p.follow_gain, p.avoid_gain, p.avoid_clearance,
                     p.personal_space, p.obstacle_buffer, p.obstacle_free_clearance, row.summary.sr, row.summary.hd,
                     row.summary.sd, row.summary.rt}) {
      out << ',' << format_double(v);
    }
    out << '\n';
  }
}

}  // namespace arms
