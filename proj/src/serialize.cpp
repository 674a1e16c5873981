#include "oirl/serialize.hpp"

#include "oirl/error.hpp"

namespace oirl {

Json mdp_to_json(const TabularMDP& mdp) {
  Json transitions = Json::array();
  for (std::size_t s = 0; s < mdp.n_states(); ++s) {
    Json per_action = Json::array();
    for (std::size_t a = 0; a < mdp.n_actions(); ++a) {
      const auto row = mdp.row(s, a);
      per_action.push_back(std::vector<double>(row.begin(), row.end()));
    }
    transitions.push_back(std::move(per_action));
  }
  return {{"n_states", mdp.n_states()},
          {"n_actions", mdp.n_actions()},
          {"discount", mdp.discount()},
          {"transitions", std::move(transitions)}};
}

TabularMDP mdp_from_json(const Json& doc) {
  try {
    const auto n = doc.at("n_states").get<std::size_t>();
    const auto n_actions = doc.at("n_actions").get<std::size_t>();
    const auto discount = doc.at("discount").get<double>();
    const auto& t = doc.at("transitions");
    if (t.size() != n) throw ShapeMismatch("transitions must have n_states entries");
    std::vector<double> p;
    p.reserve(n * n_actions * n);
    for (const auto& per_action : t) {
      if (per_action.size() != n_actions) {
        throw ShapeMismatch("each state needs n_actions transition rows");
      }
      for (const auto& row : per_action) {
        if (row.size() != n) throw ShapeMismatch("each transition row needs n_states entries");
        for (const auto& x : row) p.push_back(x.get<double>());
      }
    }
    return validate_mdp(TabularMDP(n, n_actions, discount, std::move(p)));
  } catch (const nlohmann::json::exception& e) {
    throw InvalidModel(std::string("malformed MDP document: ") + e.what());
  }
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    rows.push_back(std::vector<double>(row.begin(), row.end()));
  }
  return rows;
}

Matrix matrix_from_json(const Json& doc) {
  const std::size_t rows = doc.size();
  const std::size_t cols = rows ? doc.front().size() : 0;
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (doc[r].size() != cols) throw ShapeMismatch("ragged matrix document");
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = doc[r][c].get<double>();
  }
  return m;
}

Json solve_result_to_json(const SolveResult& result) {
  return {{"v", result.v},
          {"q", matrix_to_json(result.q)},
          {"iterations", result.iterations},
          {"final_residual", result.final_residual}};
}

Json grad_result_to_json(const GradResult& result, std::size_t n_actions) {
  Json dq = Json::array();
  const std::size_t n = n_actions ? result.dq.rows() / n_actions : 0;
  for (std::size_t s = 0; s < n; ++s) {
    Json per_action = Json::array();
    for (std::size_t a = 0; a < n_actions; ++a) {
      const auto row = result.dq_row(s, a, n_actions);
      per_action.push_back(std::vector<double>(row.begin(), row.end()));
    }
    dq.push_back(std::move(per_action));
  }
  return {{"dv", matrix_to_json(result.dv)},
          {"dq", std::move(dq)},
          {"iterations", result.iterations},
          {"final_residual", result.final_residual}};
}

Json model_to_json(const RewardModel& model) {
  return {{"kind", to_string(model.kind)}, {"layers", model.layers}, {"theta", model.theta}};
}

RewardModel model_from_json(const Json& doc) {
  try {
    RewardModel m{parse_model_kind(doc.at("kind").get<std::string>()),
                  doc.at("layers").get<std::vector<std::size_t>>(),
                  doc.at("theta").get<std::vector<double>>()};
    validate_model(m);
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidModel(std::string("malformed model document: ") + e.what());
  }
}

Json env_to_json(const EnvBundle& env) {
  Json doc = mdp_to_json(env.mdp);
  doc["name"] = env.name;
  doc["width"] = env.width;
  doc["height"] = env.height;
  Json cells = Json::array();
  for (const auto& c : env.cells) cells.push_back({c.row, c.col});
  doc["cells"] = std::move(cells);
  doc["true_reward"] = env.true_reward;
  doc["features"] = matrix_to_json(env.features);
  if (!env.objects.empty()) {
    Json objects = Json::array();
    for (const auto& o : env.objects) {
      objects.push_back({{"row", o.cell.row},
                         {"col", o.cell.col},
                         {"inner_color", o.inner_color},
                         {"outer_color", o.outer_color}});
    }
    doc["objects"] = std::move(objects);
  }
  if (!env.hotspots.empty()) {
    Json hotspots = Json::array();
    for (const auto& h : env.hotspots) {
      hotspots.push_back({{"row", h.cell.row}, {"col", h.cell.col}, {"weight", h.weight}});
    }
    doc["hotspots"] = std::move(hotspots);
  }
  return doc;
}

}  // namespace oirl
