#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "oirl/learner.hpp"
#include "oirl/mdp.hpp"
#include "oirl/reward_model.hpp"
#include "oirl/rng.hpp"

namespace oirl {

struct Cell {
  int row = 0;  // 0 is the top row
  int col = 0;

  friend bool operator==(const Cell&, const Cell&) = default;
};

/// Actions of every grid environment, in index order.
enum GridAction : std::size_t { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };
inline constexpr std::size_t kGridActions = 4;

int chebyshev(const Cell& a, const Cell& b);

struct GridSpec {
  std::size_t width = 10;
  double noise = 0.3;  // probability that a uniformly random action replaces the chosen one
  double discount = 0.9;
  std::vector<Cell> walls;
};

struct WorldObject {
  Cell cell;
  int inner_color = 0;
  int outer_color = 0;
};

struct ObjectworldSpec {
  std::size_t width = 10;
  std::size_t n_objects = 2;
  std::size_t n_colors = 2;
  double noise = 0.3;
  double discount = 0.9;
  std::uint64_t seed = 0;
};

struct Hotspot {
  Cell cell;
  double weight = 1.0;
};

/// Home floor plan: '#' wall, '.' free, '1'-'9' free cell next to furniture with that weight.
struct HomeLayout {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<char> wall;  // row-major, height x width
  std::vector<Hotspot> hotspots;

  bool is_wall(const Cell& c) const { return wall[c.row * width + c.col] != 0; }
};

HomeLayout parse_home_layout(const std::string& text);
HomeLayout default_home_layout();

struct CleaningSpec {
  HomeLayout layout = default_home_layout();
  double noise = 0.3;
  double discount = 0.9;
  int hotspot_radius = 2;  // Chebyshev radius of a hotspot's reward neighborhood
};

/**
 * A benchmark environment: the MDP, its ground-truth reward and features.
 * States are the free cells of the grid, in row-major order; `cells[s]`
 * locates state s.
 */
struct EnvBundle {
  std::string name;
  TabularMDP mdp;
  RewardTable true_reward;
  FeatureMatrix features;
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<Cell> cells;
  std::vector<WorldObject> objects;  // objectworld only
  std::vector<Hotspot> hotspots;     // cleaning home only
};

/// N x N grid, reward 1 in the upper-right corner, one-hot position features.
EnvBundle make_gridworld(const GridSpec& spec);

/**
 * N x N grid with randomly placed colored objects. Reward +1 within 3 cells of
 * an object of outer color 0 and within 2 cells of one of outer color 1, -1
 * when only the first holds, 0 otherwise (Chebyshev distance). Features: for
 * each color c, distance to the nearest object of inner color c then of outer
 * color c, capped at N.
 */
EnvBundle make_objectworld(const ObjectworldSpec& spec);

/// Objectworld reward of one cell given the placed objects.
double objectworld_reward(const Cell& cell, const std::vector<WorldObject>& objects);

/**
 * Home with walls. Wall cells are not states; moving into one leaves the
 * agent in place. True reward: max over hotspots of
 * weight * (1 - d / (radius + 1)) for d <= radius, normalized to max 1.
 * Features: normalized row, normalized column, then the normalized Chebyshev
 * distance to each hotspot. Throws InvalidModel listing unreachable cells if
 * the free space is disconnected.
 */
EnvBundle make_cleaning_home(const CleaningSpec& spec);

/**
 * Simulated agent following the greedy policy of the exact solve on the true
 * reward. Its state is resampled uniformly every `teleport_every`
 * observations (including the first); otherwise it moves by the MDP's noisy
 * transitions. Emits the chosen action, before transition noise.
 */
class ObservationStream {
 public:
  ObservationStream(const EnvBundle& env, std::size_t teleport_every, std::uint64_t seed);

  Observation next();

  const std::vector<std::size_t>& policy() const { return policy_; }

 private:
  const TabularMDP* mdp_;
  std::vector<std::size_t> policy_;
  std::size_t teleport_every_;
  Rng rng_;
  std::size_t state_ = 0;
  long long t_ = 0;
};

std::vector<Observation> generate_observations(const EnvBundle& env, std::size_t count,
                                               std::size_t teleport_every, std::uint64_t seed);

}  // namespace oirl
