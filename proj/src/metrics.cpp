#include "oirl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "oirl/error.hpp"

namespace oirl {

std::optional<double> pearson_correlation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ShapeMismatch("correlation inputs differ in length");
  if (a.size() < 2) throw ShapeMismatch("correlation needs at least two entries");
  const double n = static_cast<double>(a.size());
  double mean_a = 0.0, mean_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    mean_a += a[i];
    mean_b += b[i];
  }
  mean_a /= n;
  mean_b /= n;
  double saa = 0.0, sbb = 0.0, sab = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a, db = b[i] - mean_b;
    saa += da * da;
    sbb += db * db;
    sab += da * db;
  }
  if (saa == 0.0 || sbb == 0.0) return std::nullopt;
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

namespace {

std::vector<double> allocation(std::span<const double> x, bool shift_by_min) {
  std::vector<double> p(x.begin(), x.end());
  for (double v : p) {
    if (!std::isfinite(v)) throw InvalidModel("cleaning cost input is not finite");
  }
  const double lo = *std::min_element(p.begin(), p.end());
  if (shift_by_min || lo < 0.0) {
    for (double& v : p) v -= lo;
  }
  double total = 0.0;
  for (double v : p) total += v;
  if (total == 0.0) {
    std::fill(p.begin(), p.end(), 1.0 / static_cast<double>(p.size()));
  } else {
    for (double& v : p) v /= total;
  }
  total = 0.0;
  for (double& v : p) {
    v = std::max(v, kAllocationFloor);
    total += v;
  }
  for (double& v : p) v /= total;
  return p;
}

double sweeps(const std::vector<double>& dirt, const std::vector<double>& effort) {
  double worst = 0.0;
  for (std::size_t s = 0; s < dirt.size(); ++s) worst = std::max(worst, dirt[s] / effort[s]);
  return worst;
}

}  // namespace

double cleaning_energy_cost(std::span<const double> belief, std::span<const double> true_dirt) {
  if (belief.size() != true_dirt.size() || belief.empty()) {
    throw ShapeMismatch("cleaning cost inputs differ in length");
  }
  if (std::all_of(true_dirt.begin(), true_dirt.end(), [](double d) { return d == 0.0; })) {
    throw InvalidModel("dirt distribution is all zero");
  }
  const auto dirt = allocation(true_dirt, false);
  const auto effort = allocation(belief, true);
  return sweeps(dirt, effort) / sweeps(dirt, dirt);
}

}  // namespace oirl
