#include "oirl/learner.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <sstream>

#include "oirl/error.hpp"
#include "oirl/parallel.hpp"
#include "oirl/rng.hpp"

namespace oirl {

void validate_config(const LearnerConfig& cfg) {
  if (!(cfg.confidence > 0.0)) throw InvalidModel("confidence b must be positive");
  if (!(cfg.learning_rate >= 0.0)) throw InvalidModel("learning rate must be non-negative");
  if (cfg.n_restarts == 0) throw InvalidModel("need at least one restart");
  if (!(cfg.init_scale >= 0.0)) throw InvalidModel("initialization scale must be non-negative");
  if (!(cfg.value_solve.threshold > 0.0) || !(cfg.gradient_solve.threshold > 0.0)) {
    throw InvalidModel("solver thresholds must be positive");
  }
  validate_approx(cfg.approx);
}

std::size_t LearnerState::footprint_bytes() const {
  std::size_t bytes = restarts.capacity() * sizeof(RestartState);
  for (const auto& rs : restarts) {
    bytes += sizeof(double) * (rs.theta.capacity() + rs.v.capacity() + rs.q.data().capacity() +
                               rs.dv.data().capacity() + rs.r.capacity() +
                               rs.jacobian.data().capacity());
  }
  return bytes;
}

double action_log_likelihood(const Matrix& q, std::size_t s, std::size_t a, double b) {
  if (s >= q.rows() || a >= q.cols()) throw ShapeMismatch("observation outside the Q table");
  if (!(b > 0.0)) throw InvalidModel("confidence b must be positive");
  const auto row = q.row(s);
  double m = row[0];
  for (double x : row) {
    if (!std::isfinite(x)) throw InvalidModel("non-finite Q entry at state " + std::to_string(s));
    m = std::max(m, x);
  }
  double z = 0.0;
  for (double x : row) z += std::exp(b * (x - m));
  return b * (row[a] - m) - std::log(z);
}

std::vector<double> log_likelihood_gradient(std::span<const double> pi_row, const Matrix& dq,
                                            std::size_t s, std::size_t a, std::size_t n_actions,
                                            double b) {
  if (pi_row.size() != n_actions || dq.rows() < (s + 1) * n_actions || a >= n_actions) {
    throw ShapeMismatch("log-likelihood gradient inputs disagree in shape");
  }
  const std::size_t dim = dq.cols();
  std::vector<double> grad(dim, 0.0);
  for (std::size_t alt = 0; alt < n_actions; ++alt) {
    const auto row = dq.row(s * n_actions + alt);
    const double w = pi_row[alt];
    for (std::size_t j = 0; j < dim; ++j) grad[j] -= w * row[j];
  }
  const auto chosen = dq.row(s * n_actions + a);
  for (std::size_t j = 0; j < dim; ++j) grad[j] = b * (chosen[j] + grad[j]);
  return grad;
}

std::vector<double> log_likelihood_gradient(const Matrix& q, const Matrix& dq, std::size_t s,
                                            std::size_t a, double b) {
  if (s >= q.rows() || a >= q.cols() || dq.rows() != q.rows() * q.cols()) {
    throw ShapeMismatch("log-likelihood gradient inputs disagree in shape");
  }
  Matrix row_q(1, q.cols());
  std::copy(q.row(s).begin(), q.row(s).end(), row_q.row(0).begin());
  const Matrix pi = boltzmann_policy(row_q, b);
  return log_likelihood_gradient(pi.row(0), dq, s, a, q.cols(), b);
}

std::size_t select_restart(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] > scores[best]) best = i;
  }
  return best;
}

LearnerState init_learner(const LearnerConfig& cfg, const RewardModel& architecture) {
  validate_config(cfg);
  validate_model(architecture);
  LearnerState state;
  state.restarts.resize(cfg.n_restarts);
  for (std::size_t i = 0; i < cfg.n_restarts; ++i) {
    auto& rs = state.restarts[i];
    rs.seed = derive_seed(cfg.seed, i);
    rs.theta = init_params(architecture.kind, architecture.layers, rs.seed, cfg.init_scale);
  }
  return state;
}

namespace {

void refresh_value(RestartState& rs, const LearnerConfig& cfg, const TabularMDP& mdp,
                   const FeatureMatrix& phi, const RewardModel& architecture) {
  RewardModel model{architecture.kind, architecture.layers, rs.theta};
  reward_and_jacobian(model, phi, rs.r, rs.jacobian);
  const bool warm = cfg.warm_start && rs.v.size() == mdp.n_states();
  SolveResult sol = approximate_value_iteration(mdp, rs.r, cfg.approx, cfg.value_solve,
                                                warm ? std::span<const double>(rs.v)
                                                     : std::span<const double>(),
                                                &rs.stats);
  rs.value_sweeps += sol.iterations;
  rs.v = std::move(sol.v);
  rs.q = std::move(sol.q);
}

void step_restart(RestartState& rs, const Observation& obs, const LearnerConfig& cfg,
                  const TabularMDP& mdp, const FeatureMatrix& phi,
                  const RewardModel& architecture) {
  if (rs.q.size() == 0) refresh_value(rs, cfg, mdp, phi, architecture);

  const bool warm = cfg.warm_start && rs.dv.size() != 0;
  GradResult grad = bellman_gradient_iteration(mdp, rs.q, rs.jacobian, cfg.approx,
                                               cfg.gradient_solve, warm ? &rs.dv : nullptr,
                                               &rs.stats);
  rs.gradient_sweeps += grad.iterations;
  const auto dl = log_likelihood_gradient(rs.q, grad.dq, obs.state, obs.action, cfg.confidence);
  for (std::size_t j = 0; j < rs.theta.size(); ++j) rs.theta[j] += cfg.learning_rate * dl[j];
  rs.dv = std::move(grad.dv);

  refresh_value(rs, cfg, mdp, phi, architecture);
  const double ll = action_log_likelihood(rs.q, obs.state, obs.action, cfg.confidence);
  ++rs.scored;
  rs.score += (ll - rs.score) / static_cast<double>(rs.scored);
}

}  // namespace

ObserveOutcome observe(LearnerState& state, const Observation& obs, const LearnerConfig& cfg,
                       const TabularMDP& mdp, const FeatureMatrix& phi,
                       const RewardModel& architecture) {
  if (obs.state >= mdp.n_states() || obs.action >= mdp.n_actions()) {
    std::ostringstream msg;
    msg << "observation (" << obs.state << ", " << obs.action << ") outside the MDP";
    throw ShapeMismatch(msg.str());
  }
  if (phi.rows() != mdp.n_states()) throw ShapeMismatch("feature matrix needs one row per state");
  if (state.restarts.empty()) throw InvalidModel("learner state has no restarts");

  const std::size_t n = state.restarts.size();
  std::vector<std::exception_ptr> failures(n);
  parallel_for(n, cfg.threads, [&](std::size_t i) {
    try {
      step_restart(state.restarts[i], obs, cfg, mdp, phi, architecture);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  });
  for (std::size_t i = 0; i < n; ++i) {
    if (!failures[i]) continue;
    std::string what = "unknown error";
    try {
      std::rethrow_exception(failures[i]);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    std::ostringstream msg;
    msg << "restart " << i << " failed at observation " << obs.t << ": " << what;
    throw LearnerError(msg.str(), i, obs.t);
  }

  ++state.t;
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) scores[i] = state.restarts[i].score;
  const std::size_t best = select_restart(scores);
  return {best, scores[best], state.restarts[best].r};
}

OnlineLearner::OnlineLearner(TabularMDP mdp, FeatureMatrix phi, RewardModel architecture,
                             LearnerConfig cfg)
    : mdp_(validate_mdp(mdp)),
      phi_(std::move(phi)),
      architecture_(std::move(architecture)),
      cfg_(cfg),
      state_(init_learner(cfg_, architecture_)) {
  validate_features(phi_);
  if (phi_.rows() != mdp_.n_states() || phi_.cols() != architecture_.n_features()) {
    throw ShapeMismatch("feature matrix shape does not match the MDP and reward model");
  }
}

ObserveOutcome OnlineLearner::observe(const Observation& obs) {
  return oirl::observe(state_, obs, cfg_, mdp_, phi_, architecture_);
}

RewardModel OnlineLearner::model(std::size_t restart) const {
  return {architecture_.kind, architecture_.layers, state_.restarts.at(restart).theta};
}

}  // namespace oirl
