#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "oirl/matrix.hpp"
#include "oirl/mdp.hpp"

namespace oirl {

/// Phi[s][f]: one row of features per state.
using FeatureMatrix = Matrix;

enum class ModelKind { Linear, MLP };

std::string to_string(ModelKind kind);
ModelKind parse_model_kind(const std::string& name);

/**
 * Parameterized reward r(s, theta) over a feature matrix.
 *
 * `layers` is the architecture: {n_features} for Linear, and
 * {n_features, hidden..., 1} for MLP. MLP hidden units use tanh, the output
 * unit is linear. theta is flat and layer-major; each layer stores its
 * weights W[out][in] row-major followed by its biases b[out].
 */
struct RewardModel {
  ModelKind kind = ModelKind::Linear;
  std::vector<std::size_t> layers;
  std::vector<double> theta;

  std::size_t n_features() const { return layers.front(); }
};

std::size_t parameter_count(ModelKind kind, const std::vector<std::size_t>& layers);

/// Architecture for a linear model over `n_features` features, theta zeroed.
RewardModel linear_model(std::size_t n_features);
/// Architecture n_features -> hidden... -> 1, theta zeroed.
RewardModel mlp_model(std::size_t n_features, const std::vector<std::size_t>& hidden);

/// Throws unless layers and theta are consistent with `kind`.
void validate_model(const RewardModel& model);

/// Throws InvalidModel unless every feature is finite.
void validate_features(const FeatureMatrix& phi);

/**
 * Deterministic initial parameters. Linear: uniform in [-1, 1]. MLP: weights
 * uniform in +-sqrt(6 / (fan_in + fan_out)), biases 0. `scale` multiplies
 * both ranges.
 */
std::vector<double> init_params(ModelKind kind, const std::vector<std::size_t>& layers,
                                std::uint64_t seed, double scale = 1.0);

RewardTable reward(const RewardModel& model, const FeatureMatrix& phi);

/// J[s][j] = d r(s) / d theta_j.
Matrix reward_jacobian(const RewardModel& model, const FeatureMatrix& phi);

/// Both at once; one forward and one backward pass per state.
void reward_and_jacobian(const RewardModel& model, const FeatureMatrix& phi, RewardTable& r,
                         Matrix& jacobian);

}  // namespace oirl
