#include "oirl/environments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <limits>
#include <sstream>

#include "oirl/error.hpp"

namespace oirl {

int chebyshev(const Cell& a, const Cell& b) {
  return std::max(std::abs(a.row - b.row), std::abs(a.col - b.col));
}

namespace {

// Layout of the default 16 x 16 home. Digits mark furniture hotspots.
constexpr const char* kDefaultHome =
    "################\n"
    "#......#.......#\n"
    "#.3....#.....2.#\n"
    "#......#.......#\n"
    "#......#.......#\n"
    "#..........#####\n"
    "#......#.......#\n"
    "####.###.......#\n"
    "#.........5....#\n"
    "#..............#\n"
    "#....#######.###\n"
    "#....#.........#\n"
    "#.4..#.........#\n"
    "#..............#\n"
    "#....#......2..#\n"
    "################\n";

Cell step(const Cell& c, std::size_t action) {
  switch (action) {
    case kUp: return {c.row - 1, c.col};
    case kDown: return {c.row + 1, c.col};
    case kLeft: return {c.row, c.col - 1};
    default: return {c.row, c.col + 1};
  }
}

struct GridGeometry {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<char> wall;           // height x width
  std::vector<Cell> cells;          // state -> cell
  std::vector<long> index;          // cell -> state, -1 for walls

  bool blocked(const Cell& c) const {
    if (c.row < 0 || c.col < 0 || c.row >= static_cast<int>(height) ||
        c.col >= static_cast<int>(width)) {
      return true;
    }
    return wall[c.row * width + c.col] != 0;
  }
  std::size_t state_of(const Cell& c) const {
    return static_cast<std::size_t>(index[c.row * width + c.col]);
  }
};

GridGeometry make_geometry(std::size_t width, std::size_t height, std::vector<char> wall) {
  GridGeometry g{width, height, std::move(wall), {}, {}};
  g.index.assign(width * height, -1);
  for (int r = 0; r < static_cast<int>(height); ++r) {
    for (int c = 0; c < static_cast<int>(width); ++c) {
      if (g.wall[r * width + c]) continue;
      g.index[r * width + c] = static_cast<long>(g.cells.size());
      g.cells.push_back({r, c});
    }
  }
  if (g.cells.empty()) throw InvalidModel("grid has no free cells");
  return g;
}

// Chosen action executes with probability 1 - noise + noise/4, each other
// action with noise/4; blocked moves stay in place.
TabularMDP grid_mdp(const GridGeometry& g, double noise, double discount) {
  if (!(noise >= 0.0 && noise <= 1.0)) throw InvalidModel("noise must lie in [0, 1]");
  const std::size_t n = g.cells.size();
  std::vector<double> p(n * kGridActions * n, 0.0);
  const double slip = noise / static_cast<double>(kGridActions);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t chosen = 0; chosen < kGridActions; ++chosen) {
      double* row = p.data() + (s * kGridActions + chosen) * n;
      for (std::size_t actual = 0; actual < kGridActions; ++actual) {
        const double prob = actual == chosen ? 1.0 - noise + slip : slip;
        if (prob == 0.0) continue;
        const Cell to = step(g.cells[s], actual);
        row[g.blocked(to) ? s : g.state_of(to)] += prob;
      }
    }
  }
  return validate_mdp(TabularMDP(n, kGridActions, discount, std::move(p)));
}

void check_width(std::size_t width) {
  if (width < 2) throw InvalidModel("grid width must be at least 2");
}

}  // namespace

EnvBundle make_gridworld(const GridSpec& spec) {
  check_width(spec.width);
  const std::size_t n_cells = spec.width * spec.width;
  std::vector<char> wall(n_cells, 0);
  for (const auto& c : spec.walls) {
    if (c.row < 0 || c.col < 0 || c.row >= static_cast<int>(spec.width) ||
        c.col >= static_cast<int>(spec.width)) {
      throw InvalidModel("wall outside the grid");
    }
    wall[c.row * spec.width + c.col] = 1;
  }
  GridGeometry g = make_geometry(spec.width, spec.width, std::move(wall));
  const Cell corner{0, static_cast<int>(spec.width) - 1};
  if (g.blocked(corner)) throw InvalidModel("the upper-right corner cannot be a wall");

  const std::size_t n = g.cells.size();
  RewardTable reward(n, 0.0);
  reward[g.state_of(corner)] = 1.0;
  FeatureMatrix phi(n, n_cells, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    phi(s, g.cells[s].row * spec.width + g.cells[s].col) = 1.0;
  }
  return {"gridworld",
          grid_mdp(g, spec.noise, spec.discount),
          std::move(reward),
          std::move(phi),
          spec.width,
          spec.width,
          g.cells,
          {},
          {}};
}

double objectworld_reward(const Cell& cell, const std::vector<WorldObject>& objects) {
  int near_first = std::numeric_limits<int>::max();
  int near_second = std::numeric_limits<int>::max();
  for (const auto& o : objects) {
    const int d = chebyshev(cell, o.cell);
    if (o.outer_color == 0) near_first = std::min(near_first, d);
    if (o.outer_color == 1) near_second = std::min(near_second, d);
  }
  if (near_first > 3) return 0.0;
  return near_second <= 2 ? 1.0 : -1.0;
}

EnvBundle make_objectworld(const ObjectworldSpec& spec) {
  check_width(spec.width);
  if (spec.n_objects == 0) throw InvalidModel("objectworld needs at least one object");
  if (spec.n_colors == 0) throw InvalidModel("objectworld needs at least one color");
  const std::size_t n_cells = spec.width * spec.width;
  if (spec.n_objects > n_cells) throw InvalidModel("more objects than cells");

  GridGeometry g = make_geometry(spec.width, spec.width, std::vector<char>(n_cells, 0));
  Rng rng(spec.seed);
  std::vector<char> taken(n_cells, 0);
  std::vector<WorldObject> objects;
  for (std::size_t i = 0; i < spec.n_objects; ++i) {
    std::size_t idx;
    do {
      idx = rng.index(n_cells);
    } while (taken[idx]);
    taken[idx] = 1;
    WorldObject o;
    o.cell = g.cells[idx];
    o.inner_color = static_cast<int>(rng.index(spec.n_colors));
    // The first objects cover the outer colors in order, so both reward-relevant
    // colors are present whenever there are enough objects and colors.
    o.outer_color = i < spec.n_colors ? static_cast<int>(i)
                                      : static_cast<int>(rng.index(spec.n_colors));
    objects.push_back(o);
  }

  const std::size_t n = g.cells.size();
  const double cap = static_cast<double>(spec.width);
  RewardTable reward(n);
  FeatureMatrix phi(n, 2 * spec.n_colors, cap);
  for (std::size_t s = 0; s < n; ++s) {
    reward[s] = objectworld_reward(g.cells[s], objects);
    for (const auto& o : objects) {
      const double d = chebyshev(g.cells[s], o.cell);
      double& inner = phi(s, 2 * o.inner_color);
      double& outer = phi(s, 2 * o.outer_color + 1);
      inner = std::min(inner, d);
      outer = std::min(outer, d);
    }
  }
  return {"objectworld",
          grid_mdp(g, spec.noise, spec.discount),
          std::move(reward),
          std::move(phi),
          spec.width,
          spec.width,
          g.cells,
          std::move(objects),
          {}};
}

HomeLayout parse_home_layout(const std::string& text) {
  HomeLayout layout;
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    lines.push_back(line);
  }
  if (lines.empty()) throw InvalidModel("home layout is empty");
  layout.height = lines.size();
  layout.width = lines.front().size();
  for (std::size_t r = 0; r < lines.size(); ++r) {
    if (lines[r].size() != layout.width) {
      throw InvalidModel("home layout row " + std::to_string(r) + " has a different width");
    }
    for (std::size_t c = 0; c < layout.width; ++c) {
      const char ch = lines[r][c];
      if (ch == '#') {
        layout.wall.push_back(1);
      } else if (ch == '.') {
        layout.wall.push_back(0);
      } else if (ch >= '1' && ch <= '9') {
        layout.wall.push_back(0);
        layout.hotspots.push_back({{static_cast<int>(r), static_cast<int>(c)},
                                   static_cast<double>(ch - '0')});
      } else {
        std::ostringstream msg;
        msg << "unexpected character '" << ch << "' at row " << r << ", column " << c;
        throw InvalidModel(msg.str());
      }
    }
  }
  return layout;
}

HomeLayout default_home_layout() { return parse_home_layout(kDefaultHome); }

EnvBundle make_cleaning_home(const CleaningSpec& spec) {
  const HomeLayout& layout = spec.layout;
  if (layout.wall.size() != layout.width * layout.height || layout.width == 0) {
    throw InvalidModel("home layout is malformed");
  }
  if (layout.hotspots.empty()) throw InvalidModel("home layout has no hotspots");
  for (const auto& h : layout.hotspots) {
    if (h.cell.row < 0 || h.cell.col < 0 || h.cell.row >= static_cast<int>(layout.height) ||
        h.cell.col >= static_cast<int>(layout.width) || layout.is_wall(h.cell)) {
      throw InvalidModel("hotspot outside the free space");
    }
    if (!(h.weight > 0.0)) throw InvalidModel("hotspot weights must be positive");
  }
  GridGeometry g = make_geometry(layout.width, layout.height, layout.wall);
  const std::size_t n = g.cells.size();

  std::vector<char> seen(n, 0);
  std::deque<std::size_t> frontier{0};
  seen[0] = 1;
  while (!frontier.empty()) {
    const std::size_t s = frontier.front();
    frontier.pop_front();
    for (std::size_t a = 0; a < kGridActions; ++a) {
      const Cell to = step(g.cells[s], a);
      if (g.blocked(to)) continue;
      const std::size_t next = g.state_of(to);
      if (!seen[next]) {
        seen[next] = 1;
        frontier.push_back(next);
      }
    }
  }
  std::ostringstream unreachable;
  std::size_t n_unreachable = 0;
  for (std::size_t s = 0; s < n; ++s) {
    if (seen[s]) continue;
    unreachable << (n_unreachable++ ? ", " : "") << "(" << g.cells[s].row << ","
                << g.cells[s].col << ")";
  }
  if (n_unreachable) {
    throw InvalidModel("free space is disconnected; unreachable cells: " + unreachable.str());
  }

  RewardTable reward(n, 0.0);
  const double radius = spec.hotspot_radius;
  for (std::size_t s = 0; s < n; ++s) {
    for (const auto& h : layout.hotspots) {
      const double d = chebyshev(g.cells[s], h.cell);
      if (d <= radius) reward[s] = std::max(reward[s], h.weight * (1.0 - d / (radius + 1.0)));
    }
  }
  const double peak = *std::max_element(reward.begin(), reward.end());
  for (double& r : reward) r /= peak;

  const double scale = static_cast<double>(std::max(layout.width, layout.height));
  FeatureMatrix phi(n, 2 + layout.hotspots.size());
  for (std::size_t s = 0; s < n; ++s) {
    phi(s, 0) = g.cells[s].row / scale;
    phi(s, 1) = g.cells[s].col / scale;
    for (std::size_t h = 0; h < layout.hotspots.size(); ++h) {
      phi(s, 2 + h) = chebyshev(g.cells[s], layout.hotspots[h].cell) / scale;
    }
  }
  return {"cleaning",
          grid_mdp(g, spec.noise, spec.discount),
          std::move(reward),
          std::move(phi),
          layout.width,
          layout.height,
          g.cells,
          {},
          layout.hotspots};
}

ObservationStream::ObservationStream(const EnvBundle& env, std::size_t teleport_every,
                                     std::uint64_t seed)
    : mdp_(&env.mdp), teleport_every_(teleport_every), rng_(seed) {
  if (teleport_every_ == 0) throw InvalidModel("teleport_every must be at least 1");
  policy_ = greedy_policy(exact_value_iteration(env.mdp, env.true_reward).q);
}

Observation ObservationStream::next() {
  if (t_ % static_cast<long long>(teleport_every_) == 0) {
    state_ = rng_.index(mdp_->n_states());
  }
  ++t_;
  Observation obs{state_, policy_[state_], t_};
  state_ = sample_next_state(*mdp_, state_, obs.action, rng_);
  return obs;
}

std::vector<Observation> generate_observations(const EnvBundle& env, std::size_t count,
                                               std::size_t teleport_every, std::uint64_t seed) {
  if (count == 0) throw InvalidModel("observation count must be at least 1");
  ObservationStream stream(env, teleport_every, seed);
  std::vector<Observation> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(stream.next());
  return out;
}

}  // namespace oirl
