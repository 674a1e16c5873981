#include "oirl/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "oirl/error.hpp"

namespace oirl {

namespace {

constexpr double kRowTolerance = 1e-9;

}  // namespace

TabularMDP::TabularMDP(std::size_t n_states, std::size_t n_actions, double discount,
                       std::vector<double> transitions)
    : n_states_(n_states),
      n_actions_(n_actions),
      discount_(discount),
      transitions_(std::move(transitions)) {
  if (n_states_ == 0 || n_actions_ == 0) {
    throw InvalidModel("MDP needs at least one state and one action");
  }
  if (transitions_.size() != n_states_ * n_actions_ * n_states_) {
    std::ostringstream msg;
    msg << "transition tensor has " << transitions_.size() << " entries, expected "
        << n_states_ * n_actions_ * n_states_;
    throw ShapeMismatch(msg.str());
  }
  offsets_.reserve(n_states_ * n_actions_ + 1);
  offsets_.push_back(0);
  for (std::size_t i = 0; i < n_states_ * n_actions_; ++i) {
    const double* row = transitions_.data() + i * n_states_;
    for (std::size_t next = 0; next < n_states_; ++next) {
      if (row[next] != 0.0) {
        successors_.push_back({static_cast<std::uint32_t>(next), row[next]});
      }
    }
    offsets_.push_back(successors_.size());
  }
}

TabularMDP validate_mdp(const TabularMDP& mdp) {
  const double gamma = mdp.discount();
  if (!(gamma >= 0.0 && gamma < 1.0)) {
    std::ostringstream msg;
    msg << "discount " << gamma << " outside [0, 1)";
    throw InvalidModel(msg.str());
  }
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      double sum = 0.0;
      for (std::size_t next = 0; next < mdp.n_states(); ++next) {
        const double p = mdp.prob(s, a, next);
        if (!(p >= 0.0 && p <= 1.0)) {
          std::ostringstream msg;
          msg << "P[" << s << "][" << a << "][" << next << "] = " << p << " is not a probability";
          throw InvalidModel(msg.str());
        }
        sum += p;
      }
      if (std::abs(sum - 1.0) > kRowTolerance) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "transition row (s=" << s << ", a=" << a << ") sums to " << sum;
        throw InvalidModel(msg.str());
      }
    }
  }
  return mdp;
}

void validate_reward(const TabularMDP& mdp, std::span<const double> r) {
  if (r.size() != mdp.n_states()) {
    std::ostringstream msg;
    msg << "reward table has " << r.size() << " entries for " << mdp.n_states() << " states";
    throw ShapeMismatch(msg.str());
  }
  for (std::size_t s = 0; s < r.size(); ++s) {
    if (!std::isfinite(r[s])) {
      throw InvalidModel("reward of state " + std::to_string(s) + " is not finite");
    }
  }
}

namespace {

// Q[s][a] = sum_s' P[s][a][s'] * target[s'], target = r + gamma V.
void assemble_q(const TabularMDP& mdp, const std::vector<double>& target, Matrix& q) {
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      double acc = 0.0;
      for (const auto& succ : mdp.successors(s, a)) acc += succ.prob * target[succ.state];
      q(s, a) = acc;
    }
  }
}

}  // namespace

SolveResult exact_value_iteration(const TabularMDP& mdp, std::span<const double> r,
                                  const SolveOptions& options) {
  validate_reward(mdp, r);
  if (!(options.threshold > 0.0)) throw InvalidModel("solve threshold must be positive");

  const std::size_t n = mdp.n_states();
  const double gamma = mdp.discount();
  std::vector<double> v(n, 0.0), next_v(n), target(n);
  Matrix q(n, mdp.n_actions());

  std::size_t it = 0;
  double diff = 0.0;
  while (true) {
    for (std::size_t s = 0; s < n; ++s) target[s] = r[s] + gamma * v[s];
    assemble_q(mdp, target, q);
    diff = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      const auto row = q.row(s);
      next_v[s] = *std::max_element(row.begin(), row.end());
      diff = std::max(diff, std::abs(next_v[s] - v[s]));
    }
    v.swap(next_v);
    ++it;
    if (options.residuals) options.residuals->push_back(diff);
    if (!std::isfinite(diff)) {
      throw ConvergenceError("exact value iteration diverged", it, diff);
    }
    if (diff <= options.threshold) break;
    if (it >= options.max_iterations) {
      std::ostringstream msg;
      msg << "exact value iteration did not converge in " << it << " iterations (residual "
          << diff << ")";
      throw ConvergenceError(msg.str(), it, diff);
    }
  }

  for (std::size_t s = 0; s < n; ++s) target[s] = r[s] + gamma * v[s];
  assemble_q(mdp, target, q);
  for (std::size_t s = 0; s < n; ++s) {
    const auto row = q.row(s);
    v[s] = *std::max_element(row.begin(), row.end());
  }
  return {std::move(v), std::move(q), it, diff};
}

std::vector<std::size_t> greedy_policy(const Matrix& q) {
  std::vector<std::size_t> policy(q.rows());
  for (std::size_t s = 0; s < q.rows(); ++s) {
    const auto row = q.row(s);
    policy[s] = static_cast<std::size_t>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return policy;
}

Matrix boltzmann_policy(const Matrix& q, double b) {
  if (!(b > 0.0)) throw InvalidModel("confidence b must be positive");
  Matrix pi(q.rows(), q.cols());
  for (std::size_t s = 0; s < q.rows(); ++s) {
    const auto row = q.row(s);
    const double m = *std::max_element(row.begin(), row.end());
    if (!std::isfinite(m)) throw InvalidModel("non-finite Q row at state " + std::to_string(s));
    double z = 0.0;
    for (std::size_t a = 0; a < q.cols(); ++a) {
      if (!std::isfinite(row[a])) {
        throw InvalidModel("non-finite Q entry at state " + std::to_string(s));
      }
      pi(s, a) = std::exp(b * (row[a] - m));
      z += pi(s, a);
    }
    for (std::size_t a = 0; a < q.cols(); ++a) pi(s, a) /= z;
  }
  return pi;
}

std::size_t sample_next_state(const TabularMDP& mdp, std::size_t s, std::size_t a, Rng& rng) {
  const auto succ = mdp.successors(s, a);
  const double u = rng.uniform01();
  double cdf = 0.0;
  for (const auto& e : succ) {
    cdf += e.prob;
    if (u < cdf) return e.state;
  }
  return succ.back().state;  // u beyond the rounded total
}

}  // namespace oirl
