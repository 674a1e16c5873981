#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "oirl/bellman.hpp"
#include "oirl/matrix.hpp"
#include "oirl/mdp.hpp"
#include "oirl/reward_model.hpp"
#include "oirl/smooth_max.hpp"

namespace oirl {

struct LearnerConfig {
  double confidence = 1.0;  // b in the Boltzmann action model
  ApproxSpec approx{ApproxKind::GSoft, 100.0};
  double learning_rate = 1e-5;
  std::size_t n_restarts = 30;
  SolveOptions value_solve{};
  SolveOptions gradient_solve{};
  std::uint64_t seed = 0;
  std::size_t threads = 1;  // restart-level workers; results do not depend on it
  bool warm_start = true;
  double init_scale = 1.0;  // multiplies the init_params ranges
};

void validate_config(const LearnerConfig& cfg);

/// One observed state-action pair; t is its 1-based ordinal in the stream.
struct Observation {
  std::size_t state = 0;
  std::size_t action = 0;
  long long t = 0;

  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Per-restart parameters, score and the solver caches at the current theta.
struct RestartState {
  std::vector<double> theta;
  double score = 0.0;  // running mean of post-step log-likelihoods
  long long scored = 0;
  std::uint64_t seed = 0;

  std::vector<double> v;  // approximate V at theta
  Matrix q;               // approximate Q at theta
  Matrix dv;              // last converged dV (warm start)
  RewardTable r;
  Matrix jacobian;

  std::size_t value_sweeps = 0;
  std::size_t gradient_sweeps = 0;
  SmoothMaxStats stats;
};

struct LearnerState {
  std::vector<RestartState> restarts;
  long long t = 0;  // observations processed

  /// Bytes held by the state's buffers (capacity, not size).
  std::size_t footprint_bytes() const;
};

struct ObserveOutcome {
  std::size_t best_restart = 0;
  double best_score = 0.0;
  RewardTable best_reward;
};

/// L = b Q[s][a] - log sum_a' exp(b Q[s][a']), max-shifted.
double action_log_likelihood(const Matrix& q, std::size_t s, std::size_t a, double b);

/// grad L = b dQ[s][a] - b sum_a' pi[s][a'] dQ[s][a'], pi = boltzmann_policy(q, b).
std::vector<double> log_likelihood_gradient(const Matrix& q, const Matrix& dq, std::size_t s,
                                            std::size_t a, double b);

/// Same with the action distribution at s supplied by the caller.
std::vector<double> log_likelihood_gradient(std::span<const double> pi_row, const Matrix& dq,
                                            std::size_t s, std::size_t a, std::size_t n_actions,
                                            double b);

/// Index of the highest score, lowest index on ties.
std::size_t select_restart(std::span<const double> scores);

/// Fresh state: restart i draws theta from init_params with derive_seed(cfg.seed, i)
/// and cfg.init_scale.
LearnerState init_learner(const LearnerConfig& cfg, const RewardModel& architecture);

/**
 * One step of the online algorithm for a single observation. For every
 * restart: gradient of the observation's log-likelihood through smoothed value
 * iteration and Bellman gradient iteration, one ascent step on theta, then
 * the log-likelihood at the new theta feeds the restart's running-mean score.
 * Returns the reward of the best-scoring restart.
 *
 * Solver failures are rethrown as LearnerError tagged with the lowest failing
 * restart index and the observation ordinal.
 */
ObserveOutcome observe(LearnerState& state, const Observation& obs, const LearnerConfig& cfg,
                       const TabularMDP& mdp, const FeatureMatrix& phi,
                       const RewardModel& architecture);

/// Convenience owner of the learner inputs and state.
class OnlineLearner {
 public:
  OnlineLearner(TabularMDP mdp, FeatureMatrix phi, RewardModel architecture, LearnerConfig cfg);

  ObserveOutcome observe(const Observation& obs);

  const LearnerState& state() const { return state_; }
  const LearnerConfig& config() const { return cfg_; }
  const RewardModel& architecture() const { return architecture_; }
  const TabularMDP& mdp() const { return mdp_; }
  const FeatureMatrix& features() const { return phi_; }

  /// Model of restart i with its current theta.
  RewardModel model(std::size_t restart) const;

 private:
  TabularMDP mdp_;
  FeatureMatrix phi_;
  RewardModel architecture_;
  LearnerConfig cfg_;
  LearnerState state_;
};

}  // namespace oirl
