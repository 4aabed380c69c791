#include <doctest.h>

#include <cmath>

#include "fpp/distributions.hpp"
#include "fpp/engine.hpp"
#include "fpp/estimators.hpp"

using fpp::DistributionSpec;

TEST_CASE("deterministic weights estimate exactly") {
  const auto one = DistributionSpec::deterministic(1.0);
  const auto r = fpp::estimate_mu_e1(2, one, 10, 3, 1);
  CHECK(r.mean == 1.0);
  CHECK(r.std_error == 0.0);
  CHECK(r.exact_fraction == 1.0);
  CHECK(r.certificate_grade());
  CHECK(r.flags().empty());

  const auto p = fpp::estimate_mu_e1_point(3, one, 4, 3, 1);
  CHECK(p.mean == 1.0);

  const auto star = fpp::estimate_mu_star(4, one, 1, 3, 1);
  CHECK(star.mean == 2.0);

  const auto greedy = fpp::greedy_diagonal_bound(9, DistributionSpec::deterministic(0.5), 3, 3, 1);
  CHECK(greedy.mean == 1.5);
}

TEST_CASE("shifted laws keep every replica above the shift") {
  const auto spec = DistributionSpec::parse("shifted:0.5:exponential:1.0");
  const auto r = fpp::estimate_mu_e1(3, spec, 4, 20, 3);
  for (double v : r.samples) CHECK(v >= 0.5);
}

TEST_CASE("seed derivation depends only on master and replica") {
  CHECK(fpp::derive_seed(1, 0) == fpp::derive_seed(1, 0));
  CHECK(fpp::derive_seed(1, 0) != fpp::derive_seed(1, 1));
  CHECK(fpp::derive_seed(1, 0) != fpp::derive_seed(2, 0));
  const auto spec = DistributionSpec::exponential(1.0);
  const auto small = fpp::estimate_mu_e1(3, spec, 3, 5, 9);
  const auto large = fpp::estimate_mu_e1(3, spec, 3, 10, 9);
  for (int i = 0; i < 5; ++i) CHECK(small.samples[i] == large.samples[i]);
}

TEST_CASE("worker count does not change results") {
  const auto spec = DistributionSpec::exponential(1.0);
  fpp::EstimatorOptions one;
  fpp::EstimatorOptions four;
  four.workers = 4;
  const auto a = fpp::estimate_mu_e1(4, spec, 3, 12, 5, one);
  const auto b = fpp::estimate_mu_e1(4, spec, 3, 12, 5, four);
  CHECK(a.samples == b.samples);
  CHECK(a.mean == b.mean);
  CHECK(a.std_error == b.std_error);
}

TEST_CASE("re-running with disjoint seeds agrees within four standard errors") {
  const auto spec = DistributionSpec::exponential(1.0);
  const auto a = fpp::estimate_mu_e1(2, spec, 20, 200, 1000);
  const auto b = fpp::estimate_mu_e1(2, spec, 20, 200, 2000);
  CHECK(std::abs(a.mean - b.mean) <= 4.0 * std::hypot(a.std_error, b.std_error));
}

TEST_CASE("greedy diagonal walk matches its expectation") {
  const auto e = DistributionSpec::exponential(1.0);
  const auto u = DistributionSpec::uniform(0.0, 1.0);
  const auto ge = fpp::greedy_diagonal_bound(9, e, 5, 2000, 4);
  CHECK(std::abs(ge.mean - 1.0 / 3.0) <= 4.0 * ge.std_error);
  const auto gu = fpp::greedy_diagonal_bound(9, u, 5, 2000, 4);
  CHECK(std::abs(gu.mean - 0.3) <= 4.0 * gu.std_error);
}

TEST_CASE("geodesics do not beat the greedy walk") {
  const auto spec = DistributionSpec::exponential(1.0);
  const auto star = fpp::estimate_mu_star(6, spec, 2, 60, 8);
  const auto greedy = fpp::greedy_diagonal_bound(6, spec, 2, 60, 8);
  CHECK(star.mean <= greedy.mean + 4.0 * std::hypot(star.std_error, greedy.std_error));
  const double s = std::sqrt(6.0);
  CHECK(star.mean >= 0.3313 / s - 4.0 * star.std_error);
}

TEST_CASE("subadditivity in expectation") {
  const auto spec = DistributionSpec::exponential(1.0);
  const auto t2 = fpp::estimate_mu_e1_point(2, spec, 2, 200, 21);
  const auto t3 = fpp::estimate_mu_e1_point(2, spec, 3, 200, 22);
  const auto t5 = fpp::estimate_mu_e1_point(2, spec, 5, 200, 23);
  const double se = std::sqrt(25 * t5.std_error * t5.std_error + 4 * t2.std_error * t2.std_error +
                              9 * t3.std_error * t3.std_error);
  CHECK(5 * t5.mean <= 2 * t2.mean + 3 * t3.mean + 3 * se);
}

TEST_CASE("slab mean dominates the first hyperplane") {
  const auto spec = DistributionSpec::exponential(1.0);
  const auto slab = fpp::estimate_slab_mean(3, spec, 30, 5);
  const auto b1 = fpp::estimate_mu_e1(3, spec, 1, 30, 5);
  for (int i = 0; i < 30; ++i) CHECK(slab.samples[i] >= b1.samples[i]);
}

TEST_CASE("capped replicas are flagged") {
  const auto spec = DistributionSpec::exponential(1.0);
  fpp::EstimatorOptions opts;
  opts.caps.max_settled = 3;
  opts.box_margin.reset();
  const auto r = fpp::estimate_mu_e1(5, spec, 4, 4, 1, opts);
  CHECK(r.exact_fraction < 1.0);
  CHECK_FALSE(r.certificate_grade());
  REQUIRE_FALSE(r.flags().empty());
  CHECK(r.flags().front() == "non-certificate-grade");
}

TEST_CASE("default distances") {
  CHECK(fpp::default_mu_n(4) == 3);
  CHECK(fpp::default_mu_n(10) == 5);
  CHECK(fpp::default_mu_n(1) == 1);
  CHECK(fpp::kDefaultMuStarN == 3);
}
