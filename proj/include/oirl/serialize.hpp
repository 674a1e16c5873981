#pragma once

#include <json.hpp>

#include "oirl/bellman.hpp"
#include "oirl/environments.hpp"
#include "oirl/mdp.hpp"
#include "oirl/reward_model.hpp"

namespace oirl {

using Json = nlohmann::json;

/// {"n_states", "n_actions", "discount", "transitions": [[[...]]]}
Json mdp_to_json(const TabularMDP& mdp);
/// Parses and validates; throws InvalidModel on malformed documents.
TabularMDP mdp_from_json(const Json& doc);

Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& doc);

Json solve_result_to_json(const SolveResult& result);
Json grad_result_to_json(const GradResult& result, std::size_t n_actions);

/// {"kind", "layers", "theta"}; reloads bit-exactly.
Json model_to_json(const RewardModel& model);
RewardModel model_from_json(const Json& doc);

/// MDP document plus "name", "width", "height", "cells", "true_reward", "features".
Json env_to_json(const EnvBundle& env);

}  // namespace oirl
