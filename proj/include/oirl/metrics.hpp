#pragma once

#include <optional>
#include <span>

namespace oirl {

/// Pearson correlation; nullopt when either input is constant (undefined).
std::optional<double> pearson_correlation(std::span<const double> a, std::span<const double> b);

/// Per-cell probability floor used by the cleaning cost.
inline constexpr double kAllocationFloor = 1e-6;

/**
 * Relative energy of cleaning with effort allocated according to `belief`
 * when dirt is distributed as `true_dirt`.
 *
 * Both tables are shifted to be nonnegative (belief by its minimum), normalized
 * to sum 1, floored at kAllocationFloor per cell and renormalized. The cost is
 * the number of full sweeps needed until the dirtiest-relative-to-effort cell
 * is clean, max_s dirt(s) / allocation(s), divided by the same quantity for
 * the optimal allocation (= dirt), so the optimal strategy costs exactly 1.
 * Throws InvalidModel when the dirt is all zero.
 */
double cleaning_energy_cost(std::span<const double> belief, std::span<const double> true_dirt);

}  // namespace oirl
