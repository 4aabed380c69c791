#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fpp/distributions.hpp"
#include "fpp/error.hpp"
#include "fpp/numeric.hpp"

using fpp::DistributionSpec;

namespace {

double simpson_gamma(int n, double x) {
  const int N = 20000;
  const double h = x / N;
  double fact = 1.0;
  for (int k = 2; k < n; ++k) fact *= k;
  auto f = [&](double y) { return std::pow(y, n - 1) * std::exp(-y) / fact; };
  double s = f(0.0) + f(x);
  for (int i = 1; i < N; ++i) s += f(i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST_CASE("gamma cdf closed forms") {
  for (double x : {0.0, 1e-6, 0.01, 0.5, 1.0, 3.0, 20.0}) {
    CHECK(fpp::gamma_cdf(1, x) == doctest::Approx(-std::expm1(-x)).epsilon(1e-12));
  }
  CHECK(fpp::gamma_cdf(2, 1.0) == doctest::Approx(1.0 - 2.0 / std::exp(1.0)).epsilon(1e-12));
}

TEST_CASE("gamma cdf matches quadrature") {
  for (int n = 1; n <= 6; ++n) {
    for (double x : {0.05, 0.3, 1.0, 1.7, 2.0}) {
      CHECK(std::abs(fpp::gamma_cdf(n, x) - simpson_gamma(n, x)) < 1e-10);
    }
  }
}

TEST_CASE("log gamma cdf stays finite in deep underflow") {
  const double lg = fpp::log_gamma_cdf(12, 1e-30);
  CHECK(std::isfinite(lg));
  CHECK(lg < -700.0);
}

TEST_CASE("shortest repr round trips") {
  for (double v : {0.1, 1.0 / 3.0, 6.38e-4, 268337.0, 1e-300, -2.5}) {
    CHECK(std::stod(fpp::shortest_repr(v)) == v);
  }
  CHECK(fpp::shortest_repr(0.1) == "0.1");
}

TEST_CASE("strict comparisons carry a margin") {
  CHECK(fpp::strictly_less(1.0, 2.0));
  CHECK_FALSE(fpp::strictly_less(1.0, 1.0));
  CHECK_FALSE(fpp::strictly_less(1.0, 1.0 + 1e-15));
}

TEST_CASE("compensated sum recovers small addends") {
  fpp::CompensatedSum s;
  s.add(1e16);
  for (int i = 0; i < 1000; ++i) s.add(1.0);
  s.add(-1e16);
  CHECK(s.value() == 1000.0);
}

TEST_CASE("small-x constants") {
  const auto e = DistributionSpec::exponential(1.0);
  CHECK(e.small_x().a == 1.0);
  CHECK(std::isfinite(e.small_x().C));
  CHECK(e.small_x().eps0 > 0.0);
  CHECK(fpp::small_x_violation(e, e.small_x().a, e.small_x().C, e.small_x().eps0) <= 0.0);

  const auto u = DistributionSpec::uniform(0.0, 2.0);
  CHECK(u.small_x().a == doctest::Approx(0.5));
  CHECK(u.small_x().C == 0.0);

  const auto s = DistributionSpec::shifted(0.5, e);
  CHECK(s.small_x().a == 0.0);
  CHECK(s.small_x().regime == fpp::SlopeRegime::zero);
}

TEST_CASE("parse and id agree") {
  for (const char* text : {"exponential:1.0", "uniform:0:1", "shifted:0.5:exponential:1.0", "deterministic:1.0",
                           "exponential:2.5", "custom:0,0;1,0.5;2,1"}) {
    const auto spec = DistributionSpec::parse(text);
    const auto again = DistributionSpec::parse(spec.id());
    CHECK(again.id() == spec.id());
    CHECK(again.mean() == spec.mean());
  }
  CHECK_THROWS_AS(DistributionSpec::parse("lognormal:1"), fpp::Error);
}

TEST_CASE("quantile is monotone and inverts the cdf") {
  for (const char* text : {"exponential:1.0", "uniform:0:1", "shifted:0.5:exponential:1.0", "custom:0,0;1,0.5;2,1"}) {
    const auto spec = DistributionSpec::parse(text);
    double prev = -1.0;
    for (int i = 0; i < 1000; ++i) {
      const double u = i / 1000.0;
      const double q = spec.quantile(u);
      CHECK(q >= prev);
      prev = q;
    }
    for (double x : {0.1, 0.7, 1.3}) {
      const double F = spec.cdf(x);
      if (F > 0.0 && F < 1.0) CHECK(spec.quantile(F) <= x + 1e-12);
    }
  }
}

TEST_CASE("quantile transform passes Kolmogorov-Smirnov") {
  const auto spec = DistributionSpec::exponential(1.0);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  const int N = 100000;
  std::vector<double> xs(N);
  for (auto& x : xs) x = spec.quantile(U(rng));
  std::sort(xs.begin(), xs.end());
  double D = 0.0;
  for (int i = 0; i < N; ++i) {
    const double F = spec.cdf(xs[i]);
    D = std::max({D, (i + 1.0) / N - F, F - static_cast<double>(i) / N});
  }
  CHECK(D < 1.628 / std::sqrt(static_cast<double>(N)));
}

TEST_CASE("expected minimum") {
  const auto e = DistributionSpec::exponential(1.0);
  const auto u = DistributionSpec::uniform(0.0, 1.0);
  const auto c = DistributionSpec::deterministic(2.5);
  for (int d : {1, 2, 5, 50, 1000}) {
    CHECK(fpp::expected_min(e, d).value == doctest::Approx(1.0 / d).epsilon(1e-12));
    CHECK(fpp::expected_min(u, d).value == doctest::Approx(1.0 / (d + 1)).epsilon(1e-10));
    CHECK(fpp::expected_min(c, d).value == 2.5);
  }
  const auto custom = DistributionSpec::parse("custom:0,0;1,0.5;2,1");
  CHECK(fpp::expected_min(custom, 1).value == doctest::Approx(custom.mean()).epsilon(1e-10));
}

TEST_CASE("d times expected minimum stays bounded") {
  for (const char* text : {"exponential:1.0", "uniform:0:1", "custom:0,0;1,0.5;2,1"}) {
    const auto spec = DistributionSpec::parse(text);
    double worst = 0.0;
    for (int d = 2; d <= 4096; d *= 2) {
      const auto em = fpp::expected_min(spec, d);
      worst = std::max(worst, d * em.value);
      REQUIRE(em.split.has_value());
      CHECK(em.value <= em.split->total() * (1 + 1e-12));
      CHECK(d * em.split->total() < 50.0);
    }
    CHECK(worst < 5.0);
  }
}

TEST_CASE("partial-sum sandwich") {
  const auto u = DistributionSpec::uniform(0.0, 1.0);
  const auto b = fpp::sn_cdf_bounds(u, 3, 0.2);
  CHECK(b.lower == doctest::Approx(0.008 / 6.0));
  CHECK(b.upper == b.lower);

  const auto e = DistributionSpec::exponential(1.0);
  const auto s = fpp::sn_cdf_bounds(e, 3, 0.01);
  const double exact = fpp::gamma_cdf(3, 0.01);
  CHECK(s.lower <= exact);
  CHECK(exact <= s.upper);

  for (double x : {1e-6, 1e-3, 0.02, e.small_x().eps0}) {
    const auto one = fpp::sn_cdf_bounds(e, 1, x);
    CHECK(one.lower <= e.cdf(x));
    CHECK(e.cdf(x) <= one.upper);
  }
  CHECK_THROWS_WITH_AS(fpp::sn_cdf_bounds(e, 2, 0.5), doctest::Contains("outside-validity-interval"), fpp::Error);
}

TEST_CASE("partial-sum sandwich against sampling") {
  const auto u = DistributionSpec::uniform(0.0, 1.0);
  const auto e = DistributionSpec::exponential(1.0);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (const auto* spec : {&u, &e}) {
    for (int n = 1; n <= 3; ++n) {
      const double x = spec->small_x().eps0 / 2.0;
      const int N = 2'000'000;
      int hits = 0;
      for (int i = 0; i < N; ++i) {
        double s = 0.0;
        for (int k = 0; k < n && s <= x; ++k) s += spec->quantile(U(rng));
        if (s <= x) ++hits;
      }
      const double p = static_cast<double>(hits) / N;
      const double se = std::sqrt(std::max(p * (1 - p), 1.0 / N) / N);
      const auto b = fpp::sn_cdf_bounds(*spec, n, x);
      CHECK(p >= b.lower - 3 * se);
      CHECK(p <= b.upper + 3 * se);
    }
  }
}
