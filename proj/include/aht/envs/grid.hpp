#pragma once

#include <array>
#include <compare>
#include <cstdlib>
#include <deque>
#include <vector>

namespace aht::envs {

struct Cell {
  int row = 0;
  int col = 0;

  auto operator<=>(const Cell&) const = default;
};

// Grid directions in action order: up, down, left, right.
inline constexpr std::array<Cell, 4> kDirections{{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};

inline Cell offset(Cell c, int dir) { return {c.row + kDirections[dir].row, c.col + kDirections[dir].col}; }

inline int manhattan(Cell a, Cell b) { return std::abs(a.row - b.row) + std::abs(a.col - b.col); }

inline bool adjacent(Cell a, Cell b) { return manhattan(a, b) == 1; }

// Direction index d with offset(a, d) == b, or -1.
inline int direction_to(Cell a, Cell b) {
  for (int d = 0; d < 4; ++d)
    if (offset(a, d) == b) return d;
  return -1;
}

struct PathStep {
  bool reachable = false;
  int distance = -1;
  int first_direction = -1;  // -1 when the start already satisfies the goal
};

// Breadth-first search from `start` over cells accepted by `passable`,
// expanding neighbours in direction order so ties resolve to the lowest
// direction index. The start cell itself need not be passable.
template <typename Passable, typename Goal>
PathStep shortest_step(int rows, int cols, Cell start, Passable&& passable, Goal&& goal) {
  if (goal(start)) return {true, 0, -1};
  std::vector<int> first(static_cast<std::size_t>(rows * cols), -2);
  std::vector<int> dist(static_cast<std::size_t>(rows * cols), 0);
  auto id = [cols](Cell c) { return static_cast<std::size_t>(c.row * cols + c.col); };
  std::deque<Cell> queue{start};
  first[id(start)] = -1;
  while (!queue.empty()) {
    const Cell c = queue.front();
    queue.pop_front();
    for (int d = 0; d < 4; ++d) {
      const Cell n = offset(c, d);
      if (n.row < 0 || n.col < 0 || n.row >= rows || n.col >= cols) continue;
      if (first[id(n)] != -2 || !passable(n)) continue;
      first[id(n)] = c == start ? d : first[id(c)];
      dist[id(n)] = dist[id(c)] + 1;
      if (goal(n)) return {true, dist[id(n)], first[id(n)]};
      queue.push_back(n);
    }
  }
  return {};
}

}  // namespace aht::envs
