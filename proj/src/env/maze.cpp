#include "dac/env/maze.hpp"

#include "dac/harness/csv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace dac::env {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// Parameter t in [0, 1] at which the segment p + t d first touches the closed
/// rectangle, or +inf when it does not.
double segment_entry(const Rect& r, double px, double py, double dx, double dy) {
  double t_lo = -kInf;
  double t_hi = kInf;
  const double lo[2] = {r.x0, r.y0};
  const double hi[2] = {r.x1, r.y1};
  const double p[2] = {px, py};
  const double d[2] = {dx, dy};
  for (int k = 0; k < 2; ++k) {
    if (d[k] == 0.0) {
      if (p[k] < lo[k] || p[k] > hi[k]) return kInf;
      continue;
    }
    double t1 = (lo[k] - p[k]) / d[k];
    double t2 = (hi[k] - p[k]) / d[k];
    if (t1 > t2) std::swap(t1, t2);
    t_lo = std::max(t_lo, t1);
    t_hi = std::min(t_hi, t2);
  }
  if (t_lo > t_hi || t_hi < 0.0 || t_lo > 1.0) return kInf;
  return std::max(t_lo, 0.0);
}

}  // namespace

void MazeConfig::validate() const {
  require(side > 0.0 && wall_thickness > 0.0 && wall_thickness < side / 2.0, "maze side and wall thickness invalid");
  require(door_width > 0.0 && door_width < side / 2.0 - wall_thickness, "door width must be smaller than a room side");
  require(start_x > 0.0 && start_x < side / 2.0 && start_y > 0.0 && start_y < side / 2.0,
          "maze start must lie inside the lower-left room");
  require(horizon > 0, "maze horizon must be positive");
  require(skin > 0.0 && skin < 0.1, "maze skin margin must be small and positive");
}

MazeGeometry::MazeGeometry(MazeConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  const double w0 = cfg_.side / 2.0;
  const double w1 = w0 + cfg_.wall_thickness;
  const double low_mid = w0 / 2.0;
  const double high_mid = (w1 + cfg_.side) / 2.0;
  const double h = cfg_.door_width / 2.0;
  // Vertical wall x in [w0, w1], doors centered on each room's y-span.
  walls_.push_back({w0, 0.0, w1, low_mid - h});
  walls_.push_back({w0, low_mid + h, w1, high_mid - h});
  walls_.push_back({w0, high_mid + h, w1, cfg_.side});
  // Horizontal wall y in [w0, w1], doors centered on each room's x-span.
  walls_.push_back({0.0, w0, low_mid - h, w1});
  walls_.push_back({low_mid + h, w0, w0, w1});
  walls_.push_back({w1, w0, high_mid - h, w1});
  walls_.push_back({high_mid + h, w0, cfg_.side, w1});
}

bool MazeGeometry::inside_bounds(double x, double y) const {
  return x >= 0.0 && x <= cfg_.side && y >= 0.0 && y <= cfg_.side;
}

bool MazeGeometry::is_free(double x, double y) const {
  if (!inside_bounds(x, y)) return false;
  return std::none_of(walls_.begin(), walls_.end(), [&](const Rect& r) { return r.contains(x, y); });
}

int MazeGeometry::room_of(double x, double y) const {
  if (!is_free(x, y)) return -1;
  const double w0 = cfg_.side / 2.0;
  const double w1 = w0 + cfg_.wall_thickness;
  const int col = x < w0 ? 0 : (x > w1 ? 1 : -1);
  const int row = y < w0 ? 0 : (y > w1 ? 1 : -1);
  if (col < 0 || row < 0) return -1;
  return 2 * row + col;
}

Vec MazeGeometry::move(const Vec& position, const Vec& action) const {
  require(position.size() == 2 && action.size() == 2, "maze positions and actions are two-dimensional");
  const Vec a = clamp_action(action, 1.0);
  const double px = position[0], py = position[1];
  const double dx = a[0], dy = a[1];
  const double len = std::hypot(dx, dy);
  if (len == 0.0) return position;

  double t_hit = kInf;
  for (const Rect& r : walls_) t_hit = std::min(t_hit, segment_entry(r, px, py, dx, dy));
  // Leaving the square through a face.
  if (dx < 0.0) t_hit = std::min(t_hit, (0.0 - px) / dx);
  if (dx > 0.0) t_hit = std::min(t_hit, (cfg_.side - px) / dx);
  if (dy < 0.0) t_hit = std::min(t_hit, (0.0 - py) / dy);
  if (dy > 0.0) t_hit = std::min(t_hit, (cfg_.side - py) / dy);

  double t = 1.0;
  if (t_hit <= 1.0) t = std::max(0.0, t_hit - cfg_.skin / len);
  Vec out(2);
  out << px + t * dx, py + t * dy;
  // Grazing approaches can round onto a wall face; staying put keeps the state free.
  if (!is_free(out[0], out[1])) return position;
  return out;
}

int MazeGeometry::free_cell_count() const {
  constexpr int kSub = 16;
  const int n = static_cast<int>(std::ceil(cfg_.side));
  int free_cells = 0;
  for (int cy = 0; cy < n; ++cy) {
    for (int cx = 0; cx < n; ++cx) {
      bool any = false;
      for (int i = 0; i <= kSub && !any; ++i) {
        const double ox = i == kSub ? 1.0 - 1e-9 : static_cast<double>(i) / kSub;
        for (int j = 0; j <= kSub && !any; ++j) {
          const double oy = j == kSub ? 1.0 - 1e-9 : static_cast<double>(j) / kSub;
          any = is_free(cx + ox, cy + oy);
        }
      }
      free_cells += any ? 1 : 0;
    }
  }
  return free_cells;
}

Maze::Maze(MazeConfig cfg) : geom_(cfg) { reset(); }

Vec Maze::reset() {
  pos_ = Vec(2);
  pos_ << geom_.config().start_x, geom_.config().start_y;
  t_ = 0;
  return pos_;
}

StepResult Maze::step(const Vec& action) {
  pos_ = geom_.move(pos_, action);
  ++t_;
  StepResult r;
  r.next_state = pos_;
  r.reward = 0.0;
  r.terminal = false;
  r.truncated = t_ >= geom_.config().horizon;
  return r;
}

VisitationGrid::VisitationGrid(int width, int height)
    : width_(width), height_(height), counts_(static_cast<std::size_t>(width) * height, 0) {
  require(width > 0 && height > 0, "visitation grid dimensions must be positive");
}

VisitationGrid VisitationGrid::for_maze(const MazeConfig& cfg) {
  const int n = static_cast<int>(std::ceil(cfg.side));
  return VisitationGrid(n, n);
}

void VisitationGrid::record(const Vec& state) {
  require(state.size() == 2, "visitation grid expects (x, y) states");
  const double x = state[0], y = state[1];
  require(x >= 0.0 && y >= 0.0 && x <= width_ && y <= height_, "state lies outside the visitation grid");
  const int cx = std::min(static_cast<int>(std::floor(x)), width_ - 1);
  const int cy = std::min(static_cast<int>(std::floor(y)), height_ - 1);
  auto& c = counts_[index(cx, cy)];
  if (c == 0) ++unique_;
  ++c;
  ++total_;
}

void VisitationGrid::write_csv(std::ostream& out) const {
  out << harness::schema_line("visitation-grid") << '\n';
  for (int cy = 0; cy < height_; ++cy) {
    for (int cx = 0; cx < width_; ++cx) {
      if (cx > 0) out << ',';
      out << counts_[index(cx, cy)];
    }
    out << '\n';
  }
}

VisitationGrid VisitationGrid::read_csv(std::istream& in) {
  harness::expect_schema(in, "visitation-grid");
  std::vector<std::vector<std::uint64_t>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::uint64_t> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stoull(cell));
    if (!rows.empty()) require(row.size() == rows.front().size(), "ragged visitation grid CSV");
    rows.push_back(std::move(row));
  }
  require(!rows.empty() && !rows.front().empty(), "empty visitation grid CSV");
  VisitationGrid g(static_cast<int>(rows.front().size()), static_cast<int>(rows.size()));
  for (int cy = 0; cy < g.height_; ++cy) {
    for (int cx = 0; cx < g.width_; ++cx) {
      const auto c = rows[cy][cx];
      g.counts_[g.index(cx, cy)] = c;
      g.total_ += c;
      g.unique_ += c > 0 ? 1 : 0;
    }
  }
  return g;
}

void VisitationGrid::write_pgm(std::ostream& out) const {
  const auto peak = *std::max_element(counts_.begin(), counts_.end());
  const double denom = std::log1p(static_cast<double>(peak));
  out << "P2\n" << width_ << ' ' << height_ << "\n255\n";
  for (int cy = height_ - 1; cy >= 0; --cy) {
    for (int cx = 0; cx < width_; ++cx) {
      const auto c = counts_[index(cx, cy)];
      const int level = denom > 0.0 ? static_cast<int>(std::lround(255.0 * std::log1p(static_cast<double>(c)) / denom)) : 0;
      if (cx > 0) out << ' ';
      out << level;
    }
    out << '\n';
  }
}

}  // namespace dac::env
