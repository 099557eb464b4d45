#include "arms/world.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>

#include "arms/errors.hpp"
#include "arms/rng.hpp"

namespace arms {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Box {
  Vec2 lo;
  Vec2 hi;
};

Box wall_box(const Wall& w) {
  const double half = 0.5 * w.thickness;
  Box box{{std::min(w.a.x, w.b.x), std::min(w.a.y, w.b.y)}, {std::max(w.a.x, w.b.x), std::max(w.a.y, w.b.y)}};
  if (w.a.y == w.b.y) {
    box.lo.y -= half;
    box.hi.y += half;
  } else {
    box.lo.x -= half;
    box.hi.x += half;
  }
  return box;
}

double box_signed_distance(const Box& box, Vec2 p) {
  const Vec2 center = 0.5 * (box.lo + box.hi);
  const Vec2 half = 0.5 * (box.hi - box.lo);
  const Vec2 q{std::abs(p.x - center.x) - half.x, std::abs(p.y - center.y) - half.y};
  const double outside = std::hypot(std::max(q.x, 0.0), std::max(q.y, 0.0));
  const double inside = std::min(std::max(q.x, q.y), 0.0);
  return outside + inside;
}

// Distance along the ray to the first intersection with the circle, or +inf.
double ray_circle(Vec2 origin, Vec2 dir, const Circle& c) {
  const Vec2 oc = origin - c.center;
  const double b = dot(oc, dir);
  const double cc = squared_norm(oc) - c.radius * c.radius;
  const double disc = b * b - cc;
  if (disc < 0.0) return kInf;
  const double t = -b - std::sqrt(disc);
  return t >= 0.0 ? t : kInf;
}

// Slab test; the origin is known to be outside the box.
double ray_box(Vec2 origin, Vec2 dir, const Box& box) {
  double t_enter = -kInf;
  double t_exit = kInf;
  const double o[2] = {origin.x, origin.y};
  const double d[2] = {dir.x, dir.y};
  const double lo[2] = {box.lo.x, box.lo.y};
  const double hi[2] = {box.hi.x, box.hi.y};
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (o[axis] < lo[axis] || o[axis] > hi[axis]) return kInf;
      continue;
    }
    double t1 = (lo[axis] - o[axis]) / d[axis];
    double t2 = (hi[axis] - o[axis]) / d[axis];
    if (t1 > t2) std::swap(t1, t2);
    t_enter = std::max(t_enter, t1);
    t_exit = std::min(t_exit, t2);
  }
  if (t_enter > t_exit || t_exit < 0.0) return kInf;
  return std::max(t_enter, 0.0);
}

double ray_boundary(Vec2 origin, Vec2 dir, double width, double height) {
  double t = kInf;
  if (dir.x > 0.0) t = std::min(t, (width - origin.x) / dir.x);
  if (dir.x < 0.0) t = std::min(t, -origin.x / dir.x);
  if (dir.y > 0.0) t = std::min(t, (height - origin.y) / dir.y);
  if (dir.y < 0.0) t = std::min(t, -origin.y / dir.y);
  return t;
}

const std::array<Vec2, kLidarBeams>& beam_directions() {
  static const std::array<Vec2, kLidarBeams> table = [] {
    std::array<Vec2, kLidarBeams> dirs{};
    for (std::size_t i = 0; i < kLidarBeams; ++i) dirs[i] = from_angle(LidarScan::bearing(i));
    return dirs;
  }();
  return table;
}

bool cell_touches(const Obstacle& obstacle, Vec2 cell_lo, Vec2 cell_hi) {
  if (const auto* c = std::get_if<Circle>(&obstacle)) {
    const Vec2 nearest{std::clamp(c->center.x, cell_lo.x, cell_hi.x), std::clamp(c->center.y, cell_lo.y, cell_hi.y)};
    return distance(nearest, c->center) < c->radius;
  }
  const Box box = wall_box(std::get<Wall>(obstacle));
  return box.lo.x < cell_hi.x && box.hi.x > cell_lo.x && box.lo.y < cell_hi.y && box.hi.y > cell_lo.y;
}

}  // namespace

Vec2 LidarScan::direction(std::size_t beam) { return beam_directions()[beam]; }

double signed_distance(const Obstacle& obstacle, Vec2 p) {
  if (const auto* c = std::get_if<Circle>(&obstacle)) return distance(p, c->center) - c->radius;
  return box_signed_distance(wall_box(std::get<Wall>(obstacle)), p);
}

std::array<int, 2> GridMask::cell_of(Vec2 p) const {
  const int col = std::clamp(static_cast<int>(std::floor(p.x / resolution)), 0, cols - 1);
  const int row = std::clamp(static_cast<int>(std::floor(p.y / resolution)), 0, rows - 1);
  return {col, row};
}

WorldMap::WorldMap(double width_m, double height_m, double resolution, std::vector<Obstacle> obstacles)
    : width_(width_m), height_(height_m), obstacles_(std::move(obstacles)) {
  if (!(width_m > 0.0) || !(height_m > 0.0)) throw ConfigError("WorldMap: width and height must be positive");
  if (!(resolution > 0.0)) throw ConfigError("WorldMap: resolution must be positive");
  for (const auto& obstacle : obstacles_) {
    if (const auto* c = std::get_if<Circle>(&obstacle)) {
      if (!(c->radius > 0.0)) throw ConfigError("WorldMap: circle radius must be positive");
    } else {
      const auto& w = std::get<Wall>(obstacle);
      if (w.a == w.b) throw ConfigError("WorldMap: wall endpoints must be distinct");
      if (w.a.x != w.b.x && w.a.y != w.b.y) throw ConfigError("WorldMap: walls must be axis-aligned");
      if (w.thickness < 0.0) throw ConfigError("WorldMap: wall thickness must be non-negative");
    }
  }

  grid_.resolution = resolution;
  grid_.cols = std::max(1, static_cast<int>(std::ceil(width_m / resolution - 1e-9)));
  grid_.rows = std::max(1, static_cast<int>(std::ceil(height_m / resolution - 1e-9)));
  grid_.blocked.assign(static_cast<std::size_t>(grid_.cols) * grid_.rows, 0);
  for (int row = 0; row < grid_.rows; ++row) {
    for (int col = 0; col < grid_.cols; ++col) {
      bool occupied = row == 0 || col == 0 || row == grid_.rows - 1 || col == grid_.cols - 1;
      const Vec2 lo{col * resolution, row * resolution};
      const Vec2 hi{(col + 1) * resolution, (row + 1) * resolution};
      for (std::size_t k = 0; !occupied && k < obstacles_.size(); ++k) occupied = cell_touches(obstacles_[k], lo, hi);
      grid_.blocked[static_cast<std::size_t>(row) * grid_.cols + col] = occupied ? 1 : 0;
    }
  }
}

double WorldMap::clearance_at(Vec2 p) const {
  double best = std::min({p.x, width_ - p.x, p.y, height_ - p.y});
  for (const auto& obstacle : obstacles_) best = std::min(best, signed_distance(obstacle, p));
  return best;
}

GridMask WorldMap::inflated(double inflation) const {
  GridMask mask = grid_;
  for (int row = 0; row < mask.rows; ++row) {
    for (int col = 0; col < mask.cols; ++col) {
      const bool boundary = row == 0 || col == 0 || row == mask.rows - 1 || col == mask.cols - 1;
      const bool blocked = boundary || clearance_at(mask.center(col, row)) < inflation;
      mask.blocked[static_cast<std::size_t>(row) * mask.cols + col] = blocked ? 1 : 0;
    }
  }
  return mask;
}

LidarScan raycast(const WorldMap& map, const Pose2& pose, double max_range) {
  const Vec2 origin = pose.position;
  if (!map.in_bounds(origin)) throw InvalidQuery("raycast: pose outside map bounds");
  for (const auto& obstacle : map.obstacles()) {
    if (signed_distance(obstacle, origin) <= 0.0) throw InvalidQuery("raycast: pose inside an obstacle");
  }

  // Boxes are precomputed once per scan; circles are tested directly.
  std::vector<Box> boxes;
  std::vector<Circle> circles;
  for (const auto& obstacle : map.obstacles()) {
    if (const auto* c = std::get_if<Circle>(&obstacle)) {
      circles.push_back(*c);
    } else {
      boxes.push_back(wall_box(std::get<Wall>(obstacle)));
    }
  }

  LidarScan scan;
  scan.max_range = max_range;
  scan.ranges.resize(kLidarBeams);
  const auto& dirs = beam_directions();
  const double c = std::cos(pose.heading);
  const double s = std::sin(pose.heading);
  for (std::size_t i = 0; i < kLidarBeams; ++i) {
    const Vec2 dir{c * dirs[i].x - s * dirs[i].y, s * dirs[i].x + c * dirs[i].y};
    double t = ray_boundary(origin, dir, map.width(), map.height());
    for (const auto& circle : circles) t = std::min(t, ray_circle(origin, dir, circle));
    for (const auto& box : boxes) t = std::min(t, ray_box(origin, dir, box));
    scan.ranges[i] = std::min(t, max_range);
  }
  return scan;
}

LidarScan raycast(const WorldMap& map, const Pose2& pose, double max_range, double sigma, Rng& rng) {
  LidarScan scan = raycast(map, pose, max_range);
  if (sigma > 0.0) {
    for (double& r : scan.ranges) r = std::clamp(r + sigma * rng.normal(), 1e-6, max_range);
  }
  return scan;
}

std::size_t PolarImage::count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

PolarImage rasterize_polar(const LidarScan& scan) {
  PolarImage image;
  const std::size_t n = scan.ranges.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t angular = i * kPolarBins / n;
    const double fraction = scan.ranges[i] / scan.max_range;
    const auto radial = static_cast<std::size_t>(
        std::clamp(std::floor(fraction * static_cast<double>(kPolarBins)), 0.0, static_cast<double>(kPolarBins - 1)));
    image.cells[angular * kPolarBins + radial] = 1;
  }
  return image;
}

Clearance clearance_and_direction(const LidarScan& scan, double robot_radius) {
  const auto it = std::min_element(scan.ranges.begin(), scan.ranges.end());
  const auto beam = static_cast<std::size_t>(std::distance(scan.ranges.begin(), it));
  return {*it - robot_radius, LidarScan::direction(beam), beam};
}

void write_pgm(const WorldMap& map, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open " + path.string() + " for writing");
  const GridMask& grid = map.occupancy();
  out << "P5\n" << grid.cols << ' ' << grid.rows << "\n255\n";
  for (int row = grid.rows - 1; row >= 0; --row) {
    for (int col = 0; col < grid.cols; ++col) out.put(static_cast<char>(grid.at(col, row) ? 0 : 255));
  }
}

}  // namespace arms
