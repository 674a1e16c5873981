#pragma once

#include <cstddef>
#include <span>

#include "oirl/matrix.hpp"
#include "oirl/mdp.hpp"
#include "oirl/smooth_max.hpp"

namespace oirl {

/// Parameter gradients of the smoothed value and action-value tables.
struct GradResult {
  Matrix dv;  // n_states x dim(theta)
  Matrix dq;  // (n_states * n_actions) x dim(theta), row s * n_actions + a
  std::size_t iterations = 0;
  double final_residual = 0.0;

  std::span<const double> dq_row(std::size_t s, std::size_t a, std::size_t n_actions) const {
    return dq.row(s * n_actions + a);
  }
};

/**
 * Smoothed value iteration with synchronous sweeps:
 *
 *   V'[s] = approx_max_a sum_s' P[s][a][s'] (r[s'] + gamma V[s'])
 *
 * until the sup-norm change is at most `options.threshold`, then
 * Q[s][a] = sum_s' P[s][a][s'] (r[s'] + gamma V[s']) from the final V.
 *
 * `initial_v` (empty for zeros) seeds the iteration; the fixed point does not
 * depend on it. Throws ConvergenceError on divergence or at the cap.
 */
SolveResult approximate_value_iteration(const TabularMDP& mdp, std::span<const double> r,
                                        const ApproxSpec& spec, const SolveOptions& options = {},
                                        std::span<const double> initial_v = {},
                                        SmoothMaxStats* stats = nullptr);

/**
 * Bellman gradient iteration. With w(s) = approx_max_weights(Q[s][.]) frozen
 * from the given Q, iterates
 *
 *   dV'[s] = sum_a w_a(s) sum_s' P[s][a][s'] (J[s'] + gamma dV[s'])
 *
 * until the largest entrywise change is at most `options.threshold`, then
 * dQ[s][a] = sum_s' P[s][a][s'] (J[s'] + gamma dV[s']).
 *
 * `q` should come from approximate_value_iteration with the same spec and
 * `reward_jacobian` is dr[s]/dtheta_j (n_states x dim(theta)). `initial_dv`
 * (nullptr for zeros) seeds the iteration.
 */
GradResult bellman_gradient_iteration(const TabularMDP& mdp, const Matrix& q,
                                      const Matrix& reward_jacobian, const ApproxSpec& spec,
                                      const SolveOptions& options = {},
                                      const Matrix* initial_dv = nullptr,
                                      SmoothMaxStats* stats = nullptr);

}  // namespace oirl
