#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace oirl {

enum class ApproxKind { PNorm, GSoft };

/// Which differentiable stand-in for max is used, and how sharp it is.
struct ApproxSpec {
  ApproxKind kind = ApproxKind::GSoft;
  double k = 100.0;
};

/// p-norm inputs below this floor are clamped to it.
inline constexpr double kPNormFloor = 1e-8;

/// Counts p-norm clamp events; owned by the caller, never shared between threads.
struct SmoothMaxStats {
  std::size_t clamp_events = 0;
};

/// Throws InvalidModel unless k > 0 (and k >= 1 for p-norm).
void validate_approx(const ApproxSpec& spec);

std::string to_string(ApproxKind kind);
ApproxKind parse_approx_kind(const std::string& name);

/**
 * Smooth upper approximation of max(values).
 *
 *   PNorm: (sum_i a_i^k)^(1/k), evaluated as m (sum_i (a_i/m)^k)^(1/k)
 *   GSoft: log(sum_i exp(k a_i)) / k, evaluated as m + log(sum_i exp(k (a_i - m))) / k
 *
 * For p-norm, entries below kPNormFloor are clamped and counted in `stats`.
 */
double approx_max(std::span<const double> values, const ApproxSpec& spec,
                  SmoothMaxStats* stats = nullptr);

/// d approx_max / d values[i], written into `weights` (same length as values).
/// Clamped p-norm entries get weight 0.
void approx_max_weights(std::span<const double> values, const ApproxSpec& spec,
                        std::span<double> weights, SmoothMaxStats* stats = nullptr);

std::vector<double> approx_max_weights(std::span<const double> values, const ApproxSpec& spec,
                                       SmoothMaxStats* stats = nullptr);

/// approx_max(values) - max(values), computed without the cancellation of the
/// subtraction. Never negative; for GSoft it is at most log(n) / k.
double approx_max_gap(std::span<const double> values, const ApproxSpec& spec);

}  // namespace oirl
