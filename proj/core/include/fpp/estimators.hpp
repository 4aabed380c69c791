#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fpp/distributions.hpp"
#include "fpp/engine.hpp"

namespace fpp {

enum class Quantity { mu_e1, mu_star, slab_mean, greedy_diag };

std::string quantity_name(Quantity q);

struct EstimateRecord {
  Quantity quantity;
  std::string target;  ///< target kind the replicas ran against
  std::uint32_t d;
  std::int64_t n;
  int replicas;
  double mean;       ///< over exact samples; NaN when there are none
  double std_error;  ///< normal-approximation standard error of the mean
  double exact_fraction;
  std::uint64_t master_seed;
  std::vector<double> samples;  ///< per-replica normalized values, replica order
  std::vector<bool> exact;

  /// exact_fraction == 1
  bool certificate_grade() const { return exact_fraction == 1.0; }
  /// "non-certificate-grade" when some replica was cut by a cap
  std::vector<std::string> flags() const;
};

struct EstimatorOptions {
  SearchCaps caps;
  /// Worker threads for replica farming; results do not depend on it.
  unsigned workers = 1;
  /// Box |x_i| <= n + box_margin for mu(e_1) runs, doubled until exact.
  std::optional<std::int64_t> box_margin = 20;
};

/// Seed of replica r; depends only on (master, r).
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t replica);

/// Calls fn(r) for r in [0, replicas) on `workers` threads; out[r] = fn(r).
std::vector<PassageSample> farm_replicas(int replicas, unsigned workers,
                                         const std::function<PassageSample(int)>& fn);

/// Folds samples (value already normalized) into a record.
EstimateRecord summarize(Quantity q, std::string target, std::uint32_t d, std::int64_t n, std::uint64_t master_seed,
                         const std::vector<double>& values, const std::vector<bool>& exact);

/// b_n / n over replicas.
EstimateRecord estimate_mu_e1(std::uint32_t d, const DistributionSpec& spec, std::int64_t n, int replicas,
                              std::uint64_t master_seed, const EstimatorOptions& opts = {});
/// T(0, n e_1) / n over replicas.
EstimateRecord estimate_mu_e1_point(std::uint32_t d, const DistributionSpec& spec, std::int64_t n, int replicas,
                                    std::uint64_t master_seed, const EstimatorOptions& opts = {});
/// T(J_n) / n, J_n = {sum x_i = n * ceil(sqrt d)}.
EstimateRecord estimate_mu_star(std::uint32_t d, const DistributionSpec& spec, std::int64_t n, int replicas,
                                std::uint64_t master_seed, const EstimatorOptions& opts = {});
/// Mean slab passage time s~_{0,1}; n is reported as 1.
EstimateRecord estimate_slab_mean(std::uint32_t d, const DistributionSpec& spec, int replicas,
                                  std::uint64_t master_seed, const EstimatorOptions& opts = {});

/// Weight of the greedy positive-direction walk of n * ceil(sqrt d) steps.
double greedy_diagonal_walk(std::uint32_t d, const DistributionSpec& spec, std::int64_t n, std::uint64_t seed);
/// T(greedy walk) / n over replicas; expected value ceil(sqrt d) * E Y.
EstimateRecord greedy_diagonal_bound(std::uint32_t d, const DistributionSpec& spec, std::int64_t n, int replicas,
                                     std::uint64_t master_seed, unsigned workers = 1);

/// ceil(2 log d), at least 1.
std::int64_t default_mu_n(std::uint32_t d);
inline constexpr std::int64_t kDefaultMuStarN = 3;

}  // namespace fpp
