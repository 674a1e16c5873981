#include "oirl/reward_model.hpp"

#include <cmath>
#include <sstream>

#include "oirl/error.hpp"
#include "oirl/rng.hpp"

namespace oirl {

std::string to_string(ModelKind kind) { return kind == ModelKind::Linear ? "linear" : "mlp"; }

ModelKind parse_model_kind(const std::string& name) {
  if (name == "linear") return ModelKind::Linear;
  if (name == "mlp") return ModelKind::MLP;
  throw InvalidModel("unknown reward model '" + name + "' (expected linear or mlp)");
}

std::size_t parameter_count(ModelKind kind, const std::vector<std::size_t>& layers) {
  if (layers.empty()) throw InvalidModel("reward model has no layers");
  if (kind == ModelKind::Linear) return layers.front();
  std::size_t count = 0;
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) count += (layers[l] + 1) * layers[l + 1];
  return count;
}

RewardModel linear_model(std::size_t n_features) {
  RewardModel m{ModelKind::Linear, {n_features}, {}};
  m.theta.assign(n_features, 0.0);
  return m;
}

RewardModel mlp_model(std::size_t n_features, const std::vector<std::size_t>& hidden) {
  RewardModel m{ModelKind::MLP, {n_features}, {}};
  m.layers.insert(m.layers.end(), hidden.begin(), hidden.end());
  m.layers.push_back(1);
  m.theta.assign(parameter_count(ModelKind::MLP, m.layers), 0.0);
  return m;
}

void validate_model(const RewardModel& model) {
  if (model.layers.empty() || model.layers.front() == 0) {
    throw InvalidModel("reward model needs a positive feature count");
  }
  if (model.kind == ModelKind::Linear && model.layers.size() != 1) {
    throw InvalidModel("linear reward model takes a single layer size");
  }
  if (model.kind == ModelKind::MLP) {
    if (model.layers.size() < 2 || model.layers.back() != 1) {
      throw InvalidModel("MLP architecture must end in a single output unit");
    }
    for (auto width : model.layers) {
      if (width == 0) throw InvalidModel("MLP layer widths must be positive");
    }
  }
  const std::size_t expected = parameter_count(model.kind, model.layers);
  if (model.theta.size() != expected) {
    std::ostringstream msg;
    msg << "theta has " << model.theta.size() << " entries, architecture needs " << expected;
    throw ShapeMismatch(msg.str());
  }
}

void validate_features(const FeatureMatrix& phi) {
  for (double f : phi.data()) {
    if (!std::isfinite(f)) throw InvalidModel("feature matrix has a non-finite entry");
  }
}

std::vector<double> init_params(ModelKind kind, const std::vector<std::size_t>& layers,
                                std::uint64_t seed, double scale) {
  if (!(scale >= 0.0)) throw InvalidModel("initialization scale must be non-negative");
  Rng rng(seed);
  std::vector<double> theta;
  theta.reserve(parameter_count(kind, layers));
  if (kind == ModelKind::Linear) {
    for (std::size_t i = 0; i < layers.front(); ++i) theta.push_back(scale * rng.uniform(-1.0, 1.0));
    return theta;
  }
  for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
    const std::size_t fan_in = layers[l], fan_out = layers[l + 1];
    const double limit = scale * std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < fan_in * fan_out; ++i) theta.push_back(rng.uniform(-limit, limit));
    theta.insert(theta.end(), fan_out, 0.0);
  }
  return theta;
}

namespace {

void check_shapes(const RewardModel& model, const FeatureMatrix& phi) {
  validate_model(model);
  if (phi.cols() != model.n_features()) {
    std::ostringstream msg;
    msg << "feature matrix has " << phi.cols() << " columns, model expects "
        << model.n_features();
    throw ShapeMismatch(msg.str());
  }
}

// Forward and (optionally) backward pass of the MLP for every state.
class MlpPass {
 public:
  explicit MlpPass(const RewardModel& model) : model_(model) {
    const auto& layers = model.layers;
    activations_.resize(layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l) activations_[l].resize(layers[l]);
    deltas_.resize(layers.size());
    for (std::size_t l = 0; l < layers.size(); ++l) deltas_[l].resize(layers[l]);
    std::size_t off = 0;
    for (std::size_t l = 0; l + 1 < layers.size(); ++l) {
      weight_offset_.push_back(off);
      off += layers[l] * layers[l + 1];
      bias_offset_.push_back(off);
      off += layers[l + 1];
    }
  }

  double forward(std::span<const double> x) {
    const auto& layers = model_.layers;
    const auto& theta = model_.theta;
    std::copy(x.begin(), x.end(), activations_[0].begin());
    const std::size_t n_layers = layers.size() - 1;
    for (std::size_t l = 0; l < n_layers; ++l) {
      const std::size_t in = layers[l], out = layers[l + 1];
      const double* w = theta.data() + weight_offset_[l];
      const double* b = theta.data() + bias_offset_[l];
      const auto& h = activations_[l];
      auto& z = activations_[l + 1];
      for (std::size_t o = 0; o < out; ++o) {
        double acc = b[o];
        for (std::size_t i = 0; i < in; ++i) acc += w[o * in + i] * h[i];
        z[o] = (l + 1 < n_layers) ? std::tanh(acc) : acc;
      }
    }
    return activations_.back()[0];
  }

  // Writes d output / d theta for the input of the last forward() call.
  void backward(std::span<double> grad) {
    const auto& layers = model_.layers;
    const auto& theta = model_.theta;
    const std::size_t n_layers = layers.size() - 1;
    deltas_.back()[0] = 1.0;
    for (std::size_t l = n_layers; l-- > 0;) {
      const std::size_t in = layers[l], out = layers[l + 1];
      const double* w = theta.data() + weight_offset_[l];
      const auto& h = activations_[l];
      const auto& delta = deltas_[l + 1];
      double* gw = grad.data() + weight_offset_[l];
      double* gb = grad.data() + bias_offset_[l];
      for (std::size_t o = 0; o < out; ++o) {
        for (std::size_t i = 0; i < in; ++i) gw[o * in + i] = delta[o] * h[i];
        gb[o] = delta[o];
      }
      if (l == 0) break;
      auto& below = deltas_[l];
      for (std::size_t i = 0; i < in; ++i) {
        double acc = 0.0;
        for (std::size_t o = 0; o < out; ++o) acc += w[o * in + i] * delta[o];
        below[i] = acc * (1.0 - h[i] * h[i]);  // h = tanh(.) on hidden layers
      }
    }
  }

 private:
  const RewardModel& model_;
  std::vector<std::vector<double>> activations_;
  std::vector<std::vector<double>> deltas_;
  std::vector<std::size_t> weight_offset_;
  std::vector<std::size_t> bias_offset_;
};

}  // namespace

RewardTable reward(const RewardModel& model, const FeatureMatrix& phi) {
  check_shapes(model, phi);
  RewardTable r(phi.rows(), 0.0);
  if (model.kind == ModelKind::Linear) {
    for (std::size_t s = 0; s < phi.rows(); ++s) {
      const auto x = phi.row(s);
      double acc = 0.0;
      for (std::size_t f = 0; f < x.size(); ++f) acc += x[f] * model.theta[f];
      r[s] = acc;
    }
    return r;
  }
  MlpPass pass(model);
  for (std::size_t s = 0; s < phi.rows(); ++s) r[s] = pass.forward(phi.row(s));
  return r;
}

void reward_and_jacobian(const RewardModel& model, const FeatureMatrix& phi, RewardTable& r,
                         Matrix& jacobian) {
  if (model.kind == ModelKind::Linear) {
    r = reward(model, phi);
    jacobian = phi;
    return;
  }
  check_shapes(model, phi);
  r.assign(phi.rows(), 0.0);
  if (jacobian.rows() != phi.rows() || jacobian.cols() != model.theta.size()) {
    jacobian = Matrix(phi.rows(), model.theta.size());
  }
  MlpPass pass(model);
  for (std::size_t s = 0; s < phi.rows(); ++s) {
    r[s] = pass.forward(phi.row(s));
    pass.backward(jacobian.row(s));
  }
}

Matrix reward_jacobian(const RewardModel& model, const FeatureMatrix& phi) {
  RewardTable r;
  Matrix j;
  reward_and_jacobian(model, phi, r, j);
  return j;
}

}  // namespace oirl
