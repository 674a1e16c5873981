#include "oirl/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "oirl/error.hpp"

namespace oirl {

namespace {

[[noreturn]] void throw_not_converged(const char* what, std::size_t it, double diff) {
  std::ostringstream msg;
  if (std::isfinite(diff)) {
    msg << what << " did not converge in " << it << " iterations (residual " << diff << ")";
  } else {
    msg << what << " diverged after " << it << " iterations";
  }
  throw ConvergenceError(msg.str(), it, diff);
}

// Row-compressed operator M[s][s'] = sum_a w_a(s) P[s][a][s'].
struct MixedOperator {
  std::vector<std::size_t> offsets;
  std::vector<std::uint32_t> cols;
  std::vector<double> vals;
};

MixedOperator mix_transitions(const TabularMDP& mdp, const Matrix& weights) {
  const std::size_t n = mdp.n_states();
  MixedOperator m;
  m.offsets.reserve(n + 1);
  m.offsets.push_back(0);
  std::vector<double> dense(n, 0.0);
  std::vector<char> touched(n, 0);
  std::vector<std::uint32_t> cols;
  for (std::size_t s = 0; s < n; ++s) {
    cols.clear();
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      const double w = weights(s, a);
      if (w == 0.0) continue;
      for (const auto& succ : mdp.successors(s, a)) {
        if (!touched[succ.state]) {
          touched[succ.state] = 1;
          cols.push_back(succ.state);
        }
        dense[succ.state] += w * succ.prob;
      }
    }
    std::sort(cols.begin(), cols.end());
    for (auto c : cols) {
      m.cols.push_back(c);
      m.vals.push_back(dense[c]);
      dense[c] = 0.0;
      touched[c] = 0;
    }
    m.offsets.push_back(m.cols.size());
  }
  return m;
}

}  // namespace

SolveResult approximate_value_iteration(const TabularMDP& mdp, std::span<const double> r,
                                        const ApproxSpec& spec, const SolveOptions& options,
                                        std::span<const double> initial_v, SmoothMaxStats* stats) {
  validate_reward(mdp, r);
  validate_approx(spec);
  if (!(options.threshold > 0.0)) throw InvalidModel("solve threshold must be positive");
  const std::size_t n = mdp.n_states();
  const std::size_t n_actions = mdp.n_actions();
  const double gamma = mdp.discount();

  std::vector<double> v(n, 0.0), next_v(n), target(n), backup(n_actions);
  if (!initial_v.empty()) {
    if (initial_v.size() != n) throw ShapeMismatch("initial V has the wrong length");
    std::copy(initial_v.begin(), initial_v.end(), v.begin());
  }

  std::size_t it = 0;
  double diff = 0.0;
  while (true) {
    for (std::size_t s = 0; s < n; ++s) target[s] = r[s] + gamma * v[s];
    diff = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t a = 0; a < n_actions; ++a) {
        double acc = 0.0;
        for (const auto& succ : mdp.successors(s, a)) acc += succ.prob * target[succ.state];
        backup[a] = acc;
      }
      for (double b : backup) {
        if (!std::isfinite(b)) throw_not_converged("approximate value iteration", it, b);
      }
      next_v[s] = approx_max(backup, spec, stats);
      diff = std::max(diff, std::abs(next_v[s] - v[s]));
    }
    v.swap(next_v);
    ++it;
    if (options.residuals) options.residuals->push_back(diff);
    if (!std::isfinite(diff)) throw_not_converged("approximate value iteration", it, diff);
    if (diff <= options.threshold) break;
    if (it >= options.max_iterations) throw_not_converged("approximate value iteration", it, diff);
  }

  Matrix q(n, n_actions);
  for (std::size_t s = 0; s < n; ++s) target[s] = r[s] + gamma * v[s];
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < n_actions; ++a) {
      double acc = 0.0;
      for (const auto& succ : mdp.successors(s, a)) acc += succ.prob * target[succ.state];
      q(s, a) = acc;
    }
  }
  return {std::move(v), std::move(q), it, diff};
}

GradResult bellman_gradient_iteration(const TabularMDP& mdp, const Matrix& q,
                                      const Matrix& reward_jacobian, const ApproxSpec& spec,
                                      const SolveOptions& options, const Matrix* initial_dv,
                                      SmoothMaxStats* stats) {
  validate_approx(spec);
  if (!(options.threshold > 0.0)) throw InvalidModel("solve threshold must be positive");
  const std::size_t n = mdp.n_states();
  const std::size_t n_actions = mdp.n_actions();
  const std::size_t dim = reward_jacobian.cols();
  const double gamma = mdp.discount();
  if (q.rows() != n || q.cols() != n_actions) {
    throw ShapeMismatch("Q table shape does not match the MDP");
  }
  if (reward_jacobian.rows() != n) {
    throw ShapeMismatch("reward Jacobian needs one row per state");
  }
  for (double j : reward_jacobian.data()) {
    if (!std::isfinite(j)) throw InvalidModel("reward Jacobian has a non-finite entry");
  }

  Matrix weights(n, n_actions);
  for (std::size_t s = 0; s < n; ++s) approx_max_weights(q.row(s), spec, weights.row(s), stats);
  const MixedOperator mixed = mix_transitions(mdp, weights);

  Matrix dv(n, dim, 0.0);
  if (initial_dv != nullptr && initial_dv->size() != 0) {
    if (initial_dv->rows() != n || initial_dv->cols() != dim) {
      throw ShapeMismatch("initial dV has the wrong shape");
    }
    dv = *initial_dv;
  }
  Matrix next_dv(n, dim), target(n, dim);

  const double* jac = reward_jacobian.data().data();
  std::size_t it = 0;
  double diff = 0.0;
  while (true) {
    {
      double* t = target.data().data();
      const double* d = dv.data().data();
      for (std::size_t i = 0; i < n * dim; ++i) t[i] = jac[i] + gamma * d[i];
    }
    diff = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      double* out = next_dv.data().data() + s * dim;
      std::fill(out, out + dim, 0.0);
      for (std::size_t e = mixed.offsets[s]; e < mixed.offsets[s + 1]; ++e) {
        const double w = mixed.vals[e];
        const double* src = target.data().data() + mixed.cols[e] * dim;
        for (std::size_t j = 0; j < dim; ++j) out[j] += w * src[j];
      }
      const double* old = dv.data().data() + s * dim;
      for (std::size_t j = 0; j < dim; ++j) diff = std::max(diff, std::abs(out[j] - old[j]));
    }
    std::swap(dv, next_dv);
    ++it;
    if (options.residuals) options.residuals->push_back(diff);
    if (!std::isfinite(diff)) throw_not_converged("Bellman gradient iteration", it, diff);
    if (diff <= options.threshold) break;
    if (it >= options.max_iterations) throw_not_converged("Bellman gradient iteration", it, diff);
  }

  {
    double* t = target.data().data();
    const double* d = dv.data().data();
    for (std::size_t i = 0; i < n * dim; ++i) t[i] = jac[i] + gamma * d[i];
  }
  Matrix dq(n * n_actions, dim, 0.0);
  for (std::size_t s = 0; s < n; ++s) {
    for (std::size_t a = 0; a < n_actions; ++a) {
      double* out = dq.data().data() + (s * n_actions + a) * dim;
      for (const auto& succ : mdp.successors(s, a)) {
        const double* src = target.data().data() + succ.state * dim;
        for (std::size_t j = 0; j < dim; ++j) out[j] += succ.prob * src[j];
      }
    }
  }
  return {std::move(dv), std::move(dq), it, diff};
}

}  // namespace oirl
