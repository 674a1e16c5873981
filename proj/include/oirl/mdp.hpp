#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "oirl/matrix.hpp"
#include "oirl/rng.hpp"

namespace oirl {

/// Reward per state, r[s]. The reward is collected on arrival in s.
using RewardTable = std::vector<double>;

/**
 * Finite MDP with a dense transition tensor P[s][a][s'].
 *
 * The constructor only checks shapes; `validate_mdp` checks that every row is
 * a probability distribution and that the discount lies in [0, 1). All
 * generators and loaders in this library return validated MDPs.
 *
 * Alongside the dense tensor the MDP keeps, per (s, a), the list of
 * successors with nonzero probability in increasing state order. Backups walk
 * this list; skipping exact zeros leaves every sum bitwise unchanged.
 */
class TabularMDP {
 public:
  struct Successor {
    std::uint32_t state;
    double prob;
  };

  TabularMDP(std::size_t n_states, std::size_t n_actions, double discount,
             std::vector<double> transitions);

  std::size_t n_states() const { return n_states_; }
  std::size_t n_actions() const { return n_actions_; }
  double discount() const { return discount_; }

  double prob(std::size_t s, std::size_t a, std::size_t next) const {
    return transitions_[(s * n_actions_ + a) * n_states_ + next];
  }
  std::span<const double> row(std::size_t s, std::size_t a) const {
    return {transitions_.data() + (s * n_actions_ + a) * n_states_, n_states_};
  }
  const std::vector<double>& transitions() const { return transitions_; }

  std::span<const Successor> successors(std::size_t s, std::size_t a) const {
    const std::size_t i = s * n_actions_ + a;
    return {successors_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
  }

 private:
  std::size_t n_states_;
  std::size_t n_actions_;
  double discount_;
  std::vector<double> transitions_;
  std::vector<Successor> successors_;
  std::vector<std::size_t> offsets_;
};

struct SolveResult {
  std::vector<double> v;  // V[s]
  Matrix q;               // Q[s][a]
  std::size_t iterations = 0;
  double final_residual = 0.0;
};

struct SolveOptions {
  double threshold = 1e-6;  // sup-norm of successive iterates
  std::size_t max_iterations = 10000;
  std::vector<double>* residuals = nullptr;  // if set, receives each sweep's residual
};

/// Returns `mdp` if its rows are stochastic (within 1e-9) and 0 <= discount < 1.
/// Throws InvalidModel naming the offending (s, a) otherwise.
TabularMDP validate_mdp(const TabularMDP& mdp);

/// Throws InvalidModel unless `r` has one finite entry per state.
void validate_reward(const TabularMDP& mdp, std::span<const double> r);

/**
 * Hard-max value iteration with synchronous backups:
 * Q[s][a] = sum_s' P[s][a][s'] (r[s'] + gamma max_a' Q[s'][a']).
 *
 * The returned V is max_a Q exactly (first maximal action on ties).
 * Throws ConvergenceError if the cap is reached.
 */
SolveResult exact_value_iteration(const TabularMDP& mdp, std::span<const double> r,
                                  const SolveOptions& options = {});

/// Greedy action per state, lowest index on ties.
std::vector<std::size_t> greedy_policy(const Matrix& q);

/// pi[s][a] proportional to exp(b Q[s][a]), max-shifted per row.
Matrix boltzmann_policy(const Matrix& q, double b);

/// Draws s' ~ P[s][a][.] by inverse CDF.
std::size_t sample_next_state(const TabularMDP& mdp, std::size_t s, std::size_t a, Rng& rng);

}  // namespace oirl
