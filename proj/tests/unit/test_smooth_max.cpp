#include <doctest.h>

#include <cmath>
#include <vector>

#include "oirl/error.hpp"
#include "oirl/smooth_max.hpp"
#include "test_support.hpp"

using namespace oirl;

namespace {

const ApproxSpec kPNorm1{ApproxKind::PNorm, 1.0};

double hard_max(const std::vector<double>& v) { return *std::max_element(v.begin(), v.end()); }

}  // namespace

TEST_SUITE("smooth-bellman") {
  TEST_CASE("approx_max examples") {
    const std::vector<double> single{3.0};
    for (double k : {1.0, 2.0, 10.0, 100.0}) {
      CHECK(std::abs(approx_max(single, {ApproxKind::PNorm, k}) - 3.0) <= 1e-12);
      CHECK(std::abs(approx_max(single, {ApproxKind::GSoft, k}) - 3.0) <= 1e-12);
    }
    const std::vector<double> v{1.0, 2.0};
    CHECK(approx_max(v, kPNorm1) == doctest::Approx(3.0).epsilon(1e-15));
    // 1025^(1/10), direct evaluation
    CHECK(approx_max(v, {ApproxKind::PNorm, 10.0}) == doctest::Approx(2.0001952267223593).epsilon(1e-14));
    const std::vector<double> equal{1.0, 1.0};
    CHECK(approx_max(equal, {ApproxKind::GSoft, 1.0}) == doctest::Approx(1.6931471805599454).epsilon(1e-14));
  }

  TEST_CASE("approx_max rejects empty and non-finite input") {
    CHECK_THROWS_AS(approx_max(std::vector<double>{}, ApproxSpec{}), InvalidModel);
    CHECK_THROWS_AS(approx_max(std::vector<double>{1.0, NAN}, ApproxSpec{}), InvalidModel);
    CHECK_THROWS_AS(validate_approx({ApproxKind::PNorm, 0.5}), InvalidModel);
    CHECK_THROWS_AS(validate_approx({ApproxKind::GSoft, 0.0}), InvalidModel);
    CHECK_NOTHROW(validate_approx({ApproxKind::GSoft, 0.5}));
  }

  TEST_CASE("no overflow at k=100 with values near 1e2") {
    const std::vector<double> v{120.0, 95.0, 119.5, -80.0};
    const double g = approx_max(v, {ApproxKind::GSoft, 100.0});
    CHECK(std::isfinite(g));
    CHECK(g >= 120.0);
    const double p = approx_max(v, {ApproxKind::PNorm, 100.0});
    CHECK(std::isfinite(p));
    CHECK(p >= 120.0);
  }

  TEST_CASE("p-norm clamps negative entries and counts them") {
    SmoothMaxStats stats;
    const std::vector<double> v{-2.0, 0.5, -1e-3};
    const double m = approx_max(v, {ApproxKind::PNorm, 4.0}, &stats);
    CHECK(stats.clamp_events == 2);
    CHECK(m >= 0.5);
    const auto w = approx_max_weights(v, {ApproxKind::PNorm, 4.0}, &stats);
    CHECK(stats.clamp_events == 4);
    CHECK(w[0] == 0.0);
    CHECK(w[2] == 0.0);
    CHECK(w[1] > 0.0);
  }

  TEST_CASE("weights examples") {
    const std::vector<double> ones{1.0, 1.0};
    const auto w = approx_max_weights(ones, {ApproxKind::PNorm, 2.0});
    CHECK(w[0] == doctest::Approx(0.7071067811865475).epsilon(1e-14));
    CHECK(w[1] == doctest::Approx(0.7071067811865475).epsilon(1e-14));

    const std::vector<double> v{0.0, 1.0};
    CHECK(approx_max_weights(v, {ApproxKind::GSoft, 100.0})[1] >= 0.99);
    CHECK(approx_max_weights(v, {ApproxKind::PNorm, 100.0})[1] >= 0.99);
  }

  TEST_CASE("weights are the derivative of approx_max") {
    Rng rng(8);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t n = 1 + rng.index(6);
      std::vector<double> v(n);
      for (double& x : v) x = rng.uniform(0.1, 10.0);
      for (ApproxKind kind : {ApproxKind::PNorm, ApproxKind::GSoft}) {
        for (double k : {1.0, 2.0, 10.0, 100.0}) {
          const ApproxSpec spec{kind, k};
          const auto w = approx_max_weights(v, spec);
          for (std::size_t i = 0; i < n; ++i) {
            const double h = 1e-6;
            auto plus = v, minus = v;
            plus[i] += h;
            minus[i] -= h;
            const double fd = (approx_max(plus, spec) - approx_max(minus, spec)) / (2 * h);
            CHECK(testing::close(w[i], fd, 1e-5, 1e-8));
          }
        }
      }
    }
  }

  TEST_CASE("gap is nonnegative, monotone in k and bounded for g-soft") {
    Rng rng(1000);
    const std::vector<double> pnorm_ks{1, 2, 5, 10, 50, 100};
    const std::vector<double> gsoft_ks{0.5, 1, 2, 5, 10, 50, 100};
    for (int trial = 0; trial < 1000; ++trial) {
      const std::size_t n = 1 + rng.index(8);
      std::vector<double> v(n);
      for (double& x : v) x = rng.uniform(0.0, 10.0);

      double prev = INFINITY;
      for (double k : pnorm_ks) {
        const ApproxSpec spec{ApproxKind::PNorm, k};
        const double gap = approx_max_gap(v, spec);
        CHECK(gap >= -1e-12);
        CHECK(approx_max(v, spec) - hard_max(v) >= -1e-12);
        CHECK(gap <= prev + 1e-12);
        prev = gap;
      }
      prev = INFINITY;
      for (double k : gsoft_ks) {
        const ApproxSpec spec{ApproxKind::GSoft, k};
        const double gap = approx_max_gap(v, spec);
        CHECK(gap >= -1e-12);
        CHECK(approx_max(v, spec) - hard_max(v) >= -1e-12);
        CHECK(gap <= std::log(static_cast<double>(n)) / k);
        CHECK(gap <= prev + 1e-12);
        prev = gap;
      }
      const bool distinct = n > 1 && std::adjacent_find(v.begin(), v.end()) == v.end();
      if (distinct) {
        for (ApproxKind kind : {ApproxKind::PNorm, ApproxKind::GSoft}) {
          CHECK(approx_max_gap(v, {kind, 100.0}) <= approx_max_gap(v, {kind, 1.0}) / 10.0);
        }
      }
    }
  }

  TEST_CASE("weights form a distribution for g-soft and are nonnegative for p-norm") {
    Rng rng(4);
    for (int trial = 0; trial < 300; ++trial) {
      const std::size_t n = 1 + rng.index(6);
      std::vector<double> v(n);
      for (double& x : v) x = rng.uniform(-20.0, 20.0);
      const auto g = approx_max_weights(v, {ApproxKind::GSoft, rng.uniform(0.1, 100.0)});
      double total = 0.0;
      for (double w : g) {
        CHECK(w >= 0.0);
        total += w;
      }
      CHECK(std::abs(total - 1.0) <= 1e-12);
      for (double& x : v) x = std::abs(x);
      for (double w : approx_max_weights(v, {ApproxKind::PNorm, rng.uniform(1.0, 100.0)})) {
        CHECK(w >= 0.0);
      }
    }
  }
}
