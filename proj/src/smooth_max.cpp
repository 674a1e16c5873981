#include "oirl/smooth_max.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "oirl/error.hpp"

namespace oirl {

namespace {

void check_values(std::span<const double> values) {
  if (values.empty()) throw InvalidModel("approx_max of an empty vector");
  for (double v : values) {
    if (!std::isfinite(v)) throw InvalidModel("approx_max of a non-finite value");
  }
}

double clamped(double v) { return v < kPNormFloor ? kPNormFloor : v; }

// Max of the clamped entries and S = sum_i (x_i / m)^k, with 1 <= S <= n.
struct PNormParts {
  double m;
  double s;
};

PNormParts pnorm_parts(std::span<const double> values, double k, SmoothMaxStats* stats) {
  double m = kPNormFloor;
  for (double v : values) {
    if (v < kPNormFloor && stats) ++stats->clamp_events;
    m = std::max(m, clamped(v));
  }
  double s = 0.0;
  for (double v : values) s += std::pow(clamped(v) / m, k);
  return {m, s};
}

// Max of the entries and S = sum_i exp(k (a_i - m)), with 1 <= S <= n.
struct GSoftParts {
  double m;
  double s;
};

GSoftParts gsoft_parts(std::span<const double> values, double k) {
  const double m = *std::max_element(values.begin(), values.end());
  double s = 0.0;
  for (double v : values) s += std::exp(k * (v - m));
  return {m, s};
}

}  // namespace

void validate_approx(const ApproxSpec& spec) {
  if (!(spec.k > 0.0) || !std::isfinite(spec.k)) {
    throw InvalidModel("approximation sharpness k must be positive and finite");
  }
  if (spec.kind == ApproxKind::PNorm && spec.k < 1.0) {
    std::ostringstream msg;
    msg << "p-norm approximation needs k >= 1 (got " << spec.k << ")";
    throw InvalidModel(msg.str());
  }
}

std::string to_string(ApproxKind kind) { return kind == ApproxKind::PNorm ? "pnorm" : "gsoft"; }

ApproxKind parse_approx_kind(const std::string& name) {
  if (name == "pnorm") return ApproxKind::PNorm;
  if (name == "gsoft") return ApproxKind::GSoft;
  throw InvalidModel("unknown approximation '" + name + "' (expected pnorm or gsoft)");
}

double approx_max(std::span<const double> values, const ApproxSpec& spec, SmoothMaxStats* stats) {
  check_values(values);
  if (spec.kind == ApproxKind::PNorm) {
    const auto [m, s] = pnorm_parts(values, spec.k, stats);
    return m * std::pow(s, 1.0 / spec.k);
  }
  const auto [m, s] = gsoft_parts(values, spec.k);
  return m + std::log(s) / spec.k;
}

void approx_max_weights(std::span<const double> values, const ApproxSpec& spec,
                        std::span<double> weights, SmoothMaxStats* stats) {
  check_values(values);
  if (weights.size() != values.size()) throw ShapeMismatch("weight buffer length mismatch");
  const double k = spec.k;
  if (spec.kind == ApproxKind::PNorm) {
    const auto [m, s] = pnorm_parts(values, k, stats);
    // (sum a^k)^((1-k)/k) a_i^(k-1) = S^((1-k)/k) (a_i/m)^(k-1)
    const double scale = std::pow(s, (1.0 - k) / k);
    for (std::size_t i = 0; i < values.size(); ++i) {
      weights[i] = values[i] < kPNormFloor ? 0.0 : scale * std::pow(values[i] / m, k - 1.0);
    }
    return;
  }
  const auto [m, s] = gsoft_parts(values, k);
  for (std::size_t i = 0; i < values.size(); ++i) weights[i] = std::exp(k * (values[i] - m)) / s;
}

std::vector<double> approx_max_weights(std::span<const double> values, const ApproxSpec& spec,
                                       SmoothMaxStats* stats) {
  std::vector<double> w(values.size());
  approx_max_weights(values, spec, w, stats);
  return w;
}

double approx_max_gap(std::span<const double> values, const ApproxSpec& spec) {
  check_values(values);
  if (spec.kind == ApproxKind::PNorm) {
    // m S^(1/k) - max(values); the clamp only ever raises the result
    const auto [m, s] = pnorm_parts(values, spec.k, nullptr);
    const double raw_max = *std::max_element(values.begin(), values.end());
    return (m - raw_max) + m * std::expm1(std::log(s) / spec.k);
  }
  const auto [m, s] = gsoft_parts(values, spec.k);
  return std::log(s) / spec.k;
}

}  // namespace oirl
