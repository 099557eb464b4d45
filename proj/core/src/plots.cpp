#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>

#include "arms/errors.hpp"
#include "arms/harness.hpp"
#include "text_io.hpp"

namespace arms {
namespace {

using detail::format_double;

constexpr double kPixelsPerMeter = 60.0;
constexpr double kMargin = 30.0;

struct Bounds {
  double min_x = std::numeric_limits<double>::infinity();
  double min_y = std::numeric_limits<double>::infinity();
  double max_x = -std::numeric_limits<double>::infinity();
  double max_y = -std::numeric_limits<double>::infinity();

  void add(Vec2 p, double pad = 0.0) {
    min_x = std::min(min_x, p.x - pad);
    min_y = std::min(min_y, p.y - pad);
    max_x = std::max(max_x, p.x + pad);
    max_y = std::max(max_y, p.y + pad);
  }
};

std::string points(const std::vector<Vec2>& pts) {
  std::string s;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i) s += ' ';
    s += format_double(pts[i].x) + ',' + format_double(pts[i].y);
  }
  return s;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << text;
}

}  // namespace

void write_trajectory_svg(const std::filesystem::path& path, const EpisodeFile& episode, double d_ref) {
  if (episode.records.empty()) throw ConfigError("cannot plot an episode without steps");
  std::vector<Vec2> robot;
  std::vector<Vec2> human;
  for (const auto& r : episode.records) {
    robot.push_back(r.robot);
    human.push_back(r.human);
  }
  const Vec2 last_human = human.back();

  Bounds b;
  if (episode.map_width > 0.0 && episode.map_height > 0.0) {
    b.add({0.0, 0.0});
    b.add({episode.map_width, episode.map_height});
  }
  for (Vec2 p : robot) b.add(p);
  for (Vec2 p : human) b.add(p);
  b.add(last_human, d_ref);

  const double width = (b.max_x - b.min_x) * kPixelsPerMeter + 2 * kMargin;
  const double height = (b.max_y - b.min_y) * kPixelsPerMeter + 2 * kMargin;
  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_double(width) << "\" height=\""
      << format_double(height) << "\" viewBox=\"0 0 " << format_double(width) << ' ' << format_double(height)
      << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << format_double(width) << "\" height=\"" << format_double(height)
      << "\" fill=\"white\"/>\n";
  // World coordinates inside the group, y pointing up.
  svg << "<g transform=\"translate(" << format_double(kMargin - b.min_x * kPixelsPerMeter) << ' '
      << format_double(height - kMargin + b.min_y * kPixelsPerMeter) << ") scale("
      << format_double(kPixelsPerMeter) << ' ' << format_double(-kPixelsPerMeter) << ")\">\n";
  if (episode.map_width > 0.0 && episode.map_height > 0.0) {
    svg << "<rect class=\"map\" x=\"0\" y=\"0\" width=\"" << format_double(episode.map_width) << "\" height=\""
        << format_double(episode.map_height)
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\" vector-effect=\"non-scaling-stroke\"/>\n";
  }
  for (const auto& obstacle : episode.obstacles) {
    if (const auto* c = std::get_if<Circle>(&obstacle)) {
      svg << "<circle class=\"obstacle\" cx=\"" << format_double(c->center.x) << "\" cy=\""
          << format_double(c->center.y) << "\" r=\"" << format_double(c->radius) << "\" fill=\"#777777\"/>\n";
    } else {
      const auto& w = std::get<Wall>(obstacle);
      const double h = w.thickness / 2.0;
      const double x0 = std::min(w.a.x, w.b.x) - h;
      const double y0 = std::min(w.a.y, w.b.y) - h;
      svg << "<rect class=\"obstacle\" x=\"" << format_double(x0) << "\" y=\"" << format_double(y0)
          << "\" width=\"" << format_double(std::abs(w.b.x - w.a.x) + w.thickness) << "\" height=\""
          << format_double(std::abs(w.b.y - w.a.y) + w.thickness) << "\" fill=\"#777777\"/>\n";
    }
  }
  svg << "<circle class=\"band\" cx=\"" << format_double(last_human.x) << "\" cy=\"" << format_double(last_human.y)
      << "\" r=\"" << format_double(d_ref)
      << "\" fill=\"none\" stroke=\"#2a9d8f\" stroke-dasharray=\"4 3\" vector-effect=\"non-scaling-stroke\"/>\n";
  svg << "<polyline class=\"human\" points=\"" << points(human)
      << "\" fill=\"none\" stroke=\"#e76f51\" stroke-width=\"2\" vector-effect=\"non-scaling-stroke\"/>\n";
  svg << "<polyline class=\"robot\" points=\"" << points(robot)
      << "\" fill=\"none\" stroke=\"#264653\" stroke-width=\"2\" vector-effect=\"non-scaling-stroke\"/>\n";
  svg << "</g>\n";
  svg << "<text x=\"" << format_double(kMargin) << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">episode "
      << episode.index << ": " << to_string(episode.reason) << "</text>\n";
  svg << "</svg>\n";
  write_file(path, svg.str());
}

void write_alpha_svg(const std::filesystem::path& path, const EpisodeFile& episode) {
  if (episode.records.empty()) throw ConfigError("cannot plot an episode without steps");
  const double t_end = std::max(episode.records.back().t, 1e-9);
  constexpr double plot_w = 600.0;
  constexpr double plot_h = 200.0;
  const double width = plot_w + 2 * kMargin;
  const double height = plot_h + 2 * kMargin;
  std::vector<Vec2> pts;
  for (const auto& r : episode.records) pts.push_back({r.t, r.alpha_bar});

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_double(width) << "\" height=\""
      << format_double(height) << "\" viewBox=\"0 0 " << format_double(width) << ' ' << format_double(height)
      << "\">\n";
  svg << "<rect x=\"0\" y=\"0\" width=\"" << format_double(width) << "\" height=\"" << format_double(height)
      << "\" fill=\"white\"/>\n";
  svg << "<g transform=\"translate(" << format_double(kMargin) << ' ' << format_double(kMargin + plot_h)
      << ") scale(" << format_double(plot_w / t_end) << ' ' << format_double(-plot_h) << ")\">\n";
  svg << "<polyline class=\"axes\" points=\"0,1 0,0 " << format_double(t_end)
      << ",0\" fill=\"none\" stroke=\"black\" vector-effect=\"non-scaling-stroke\"/>\n";
  svg << "<polyline class=\"alpha_bar\" points=\"" << points(pts)
      << "\" fill=\"none\" stroke=\"#264653\" stroke-width=\"1.5\" vector-effect=\"non-scaling-stroke\"/>\n";
  svg << "</g>\n";
  svg << "<text x=\"" << format_double(kMargin) << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">"
      << "alpha_bar vs t [s], episode " << episode.index << "</text>\n";
  svg << "</svg>\n";
  write_file(path, svg.str());
}

std::size_t emit_plots(const std::filesystem::path& records_dir, const std::filesystem::path& out_dir) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(records_dir)) {
    const auto name = entry.path().filename().string();
    if (entry.is_regular_file() && name.rfind("episode_", 0) == 0 && entry.path().extension() == ".csv") {
      files.push_back(entry.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::filesystem::create_directories(out_dir);
  std::size_t plotted = 0;
  for (const auto& f : files) {
    const EpisodeFile ep = read_episode_csv(f);
    if (ep.records.empty()) continue;
    const std::string stem = f.stem().string();
    write_trajectory_svg(out_dir / (stem + "_trajectory.svg"), ep);
    write_alpha_svg(out_dir / (stem + "_alpha.svg"), ep);
    ++plotted;
  }
  return plotted;
}

}  // namespace arms
