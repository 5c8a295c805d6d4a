#pragma once

#include "dac/env/environment.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace dac::env {

struct MazeConfig {
  double side = 100.0;
  double wall_thickness = 1.0;
  double door_width = 4.0;
  double start_x = 0.5;
  double start_y = 0.5;
  int horizon = 1000;
  double skin = 1e-3;

  void validate() const;
};

struct Rect {
  double x0, y0, x1, y1;
  bool contains(double x, double y) const { return x >= x0 && x <= x1 && y >= y0 && y <= y1; }
};

/// Four rooms separated by one vertical and one horizontal wall of the given
/// thickness, placed at side/2. Each of the four wall segments between the
/// crossing and the outer boundary has one door centered on its room.
class MazeGeometry {
 public:
  explicit MazeGeometry(MazeConfig cfg = {});

  const MazeConfig& config() const { return cfg_; }
  const std::vector<Rect>& walls() const { return walls_; }

  bool inside_bounds(double x, double y) const;
  bool is_free(double x, double y) const;

  /// Room index: 0 lower-left, 1 lower-right, 2 upper-left, 3 upper-right,
  /// -1 inside a wall or door passage.
  int room_of(double x, double y) const;

  /// Straight-line move from (x, y) by the clamped action. The agent stops a
  /// skin distance short of the first wall or boundary face it would cross.
  Vec move(const Vec& position, const Vec& action) const;

  /// Number of 1x1 cells with any free point. Computed by dense subsampling,
  /// so it can only overestimate.
  int free_cell_count() const;

 private:
  MazeConfig cfg_;
  std::vector<Rect> walls_;
};

class Maze final : public Environment {
 public:
  explicit Maze(MazeConfig cfg = {});

  Vec reset() override;
  StepResult step(const Vec& action) override;
  int state_dim() const override { return 2; }
  int action_dim() const override { return 2; }
  std::string name() const override { return "maze"; }
  EnvPtr clone() const override { return std::make_unique<Maze>(*this); }

  const MazeGeometry& geometry() const { return geom_; }
  const Vec& position() const { return pos_; }

 private:
  MazeGeometry geom_;
  Vec pos_;
  int t_ = 0;
};

/// Visit counts on the unit grid covering [0, width) x [0, height).
class VisitationGrid {
 public:
  VisitationGrid(int width, int height);
  static VisitationGrid for_maze(const MazeConfig& cfg);

  void record(const Vec& state);
  std::uint64_t count(int cx, int cy) const { return counts_[index(cx, cy)]; }
  std::uint64_t total() const { return total_; }
  int unique_cells() const { return unique_; }
  int width() const { return width_; }
  int height() const { return height_; }

  /// One line per grid row from y = 0 upward, values separated by commas.
  void write_csv(std::ostream& out) const;
  static VisitationGrid read_csv(std::istream& in);
  /// Plain (P2) graymap with the top row at the largest y. Intensity is
  /// log(1 + count) scaled to 0..255.
  void write_pgm(std::ostream& out) const;

 private:
  std::size_t index(int cx, int cy) const { return static_cast<std::size_t>(cy) * width_ + cx; }

  int width_;
  int height_;
  std::vector<std::uint64_t> counts_;
  std::uint64_t total_ = 0;
  int unique_ = 0;
};

}  // namespace dac::env
