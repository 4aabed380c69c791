#include <doctest.h>

#include <cmath>
#include <string>

#include "fpp/certifier.hpp"
#include "fpp/combinatorics.hpp"
#include "fpp/error.hpp"
#include "oracles.hpp"

TEST_CASE("self-avoiding walk counts") {
  for (int d = 1; d <= 4; ++d) {
    CHECK(fpp::saw_count(1, d) == static_cast<std::uint64_t>(2 * d));
    CHECK(fpp::saw_count(2, d) == static_cast<std::uint64_t>(2 * d * (2 * d - 1)));
  }
  CHECK(fpp::saw_count(5, 2) == oracle::naive_saw_count(5, 2));
  CHECK(fpp::saw_count(5, 2) == 284);
  CHECK(fpp::saw_count(4, 3) == oracle::naive_saw_count(4, 3));
  CHECK_THROWS_WITH_AS(fpp::saw_count(30, 3), doctest::Contains("enumeration-too-large"), fpp::Error);
}

TEST_CASE("connective constant bounds") {
  const auto x = fpp::xi_bounds(2, 5);
  CHECK(x.lower_const == doctest::Approx(3.0 - std::log(3.0)));
  CHECK(x.root_count == doctest::Approx(std::pow(284.0, 0.2)));
  CHECK(x.holds);
  CHECK(fpp::xi_bounds(10, 2).expansion == doctest::Approx(19.0 - 1.0 / 20 - 3.0 / 400));
}

TEST_CASE("overlap tables") {
  const auto one = fpp::rw_overlap_stats(1, 1, fpp::OverlapMode::exact());
  CHECK(one.overlap_prob(1) == doctest::Approx(0.5));

  const auto s = fpp::rw_overlap_stats(2, 3, fpp::OverlapMode::exact());
  double mass = 0.0;
  for (const auto& [key, prob] : s.table) {
    if (key.second > 0 || key.first == 0) mass += prob;
  }
  CHECK(mass == doctest::Approx(s.sa_pair_prob).epsilon(1e-12));
  CHECK(s.sa_pair_prob == doctest::Approx(std::pow(36.0 / 64.0, 2)).epsilon(1e-12));
}

TEST_CASE("overlap event inclusion is strict from three steps") {
  for (int p = 2; p <= 3; ++p) {
    for (int n = 3; n <= 4; ++n) {
      const auto s = fpp::rw_overlap_stats(p, n, fpp::OverlapMode::exact());
      for (int l = 1; l <= n; ++l) {
        CHECK(s.joint_prob(l - 1) <= s.overlap_prob(l - 1));
        if (s.overlap_prob(l - 1) > 0.0) CHECK(s.joint_prob(l - 1) < s.overlap_prob(l - 1));
      }
    }
  }
}

TEST_CASE("overlap sampling stays under the slackened bound") {
  const int p = 25;
  const int n = 5;
  const std::uint64_t N = 2'000'000;
  const auto s = fpp::rw_overlap_stats(p, n, fpp::OverlapMode::sampled(N, 17));
  for (int l = 1; l <= n; ++l) {
    const double prob = s.overlap_prob(l);
    const double se = std::sqrt(std::max(prob * (1 - prob), 1.0 / N) / N);
    CHECK(prob <= std::pow(1.0 / (2 * p), l) * (1 + 10 / std::sqrt(static_cast<double>(p))) + 3 * se);
  }
}

TEST_CASE("overlap sampling is reproducible") {
  const auto a = fpp::rw_overlap_stats(4, 3, fpp::OverlapMode::sampled(10000, 3));
  const auto b = fpp::rw_overlap_stats(4, 3, fpp::OverlapMode::sampled(10000, 3));
  CHECK(fpp::overlap_csv(a) == fpp::overlap_csv(b));
}

TEST_CASE("overlap csv layout") {
  const auto s = fpp::rw_overlap_stats(2, 2, fpp::OverlapMode::exact());
  const std::string csv = fpp::overlap_csv(s);
  CHECK(csv.rfind("p,n,l,K,prob,bound,ratio\n", 0) == 0);
  CHECK(fpp::overlap_csv(s, false).find("p,n,l") == std::string::npos);
}

TEST_CASE("exact overlap table against the bubble factor") {
  const auto s = fpp::rw_overlap_stats(3, 4, fpp::OverlapMode::exact());
  const double bound = std::pow(1.0 / 6.0, 2) * fpp::overlap_terms_unguarded(4, 3, 2).total;
  CHECK(s.overlap_prob(2) <= bound);
}

TEST_CASE("pattern counting") {
  const auto eq = fpp::pattern_count_bound(1, 1, 2);
  CHECK(eq.lhs == 8.0);
  CHECK(eq.rhs == 8.0);
  CHECK(eq.holds);
  CHECK(fpp::pattern_count_bound(3, 2, 5).holds);
  CHECK(fpp::pattern_count_bound(5, 5, 6).holds);
}

TEST_CASE("random walk return facts") {
  const auto a = fpp::rw_return_facts(1, 2);
  CHECK(a.max_point_prob == 0.5);
  CHECK(a.point_holds);
  CHECK(fpp::rw_return_facts(2, 1).max_point_prob == 0.25);
  const auto c = fpp::rw_return_facts(2, 4);
  CHECK(c.two_step_return_prob <= 0.25);
  CHECK(c.return_holds);
}

TEST_CASE("hyperplane path counts") {
  CHECK(fpp::path_count_bound(5, 2, 3, 0.0).bound == doctest::Approx(std::pow(6.0, 5)));
  CHECK(fpp::path_count_bound(4, 4, 3, std::log(6.0)).bound < std::pow(6.0, 4));
  const double exact = fpp::paths_ending_on_hyperplane(3, 1, 2);
  for (int i = 0; i <= 200; ++i) CHECK(exact <= fpp::path_count_bound(3, 1, 2, i * 0.05).bound * (1 + 1e-12));
}

TEST_CASE("optimal rho matches a grid scan") {
  const std::int64_t k = 40;
  const std::int64_t n = 10;
  const std::int64_t d = 5;
  const double rho = fpp::optimal_rho(k, n, d);
  const double at = fpp::path_count_bound(k, n, d, rho).log_bound;
  double best = at;
  for (int i = 0; i <= 10000; ++i) best = std::min(best, fpp::path_count_bound(k, n, d, i * 1e-3).log_bound);
  CHECK(std::abs(at - best) <= 1e-9 * std::abs(best));
}

TEST_CASE("diagonal path counts") {
  const auto b = fpp::diagonal_count_bound(12, 2, 4);
  CHECK(std::isfinite(b.log_binomial_form));
  CHECK(std::isfinite(b.log_closed_form));
  CHECK(fpp::diagonal_count_bound(3, 2, 4).log_binomial_form == -INFINITY);
}
