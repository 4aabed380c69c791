#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace fpp {

inline constexpr std::uint64_t kSawBudget = 1'000'000'000ULL;

/// Number of n-step self-avoiding walks in Z^d from the origin.
/// Throws "enumeration-too-large" when 2d(2d-1)^(n-1) >= budget.
std::uint64_t saw_count(int n, int d, std::uint64_t budget = kSawBudget);

struct XiBounds {
  double lower_const;  ///< 2d - 1 - log(2d - 1)
  double root_count;   ///< C_{n,d}^(1/n)
  double expansion;    ///< 2d - 1 - 1/(2d) - 3/(2d)^2
  bool holds;          ///< root_count >= lower_const
};

XiBounds xi_bounds(int d, int n);

struct OverlapMode {
  enum Kind { exact_enumeration, monte_carlo } kind = exact_enumeration;
  std::uint64_t samples = 0;
  std::uint64_t seed = 0;

  static OverlapMode exact() { return {}; }
  static OverlapMode sampled(std::uint64_t samples, std::uint64_t seed) { return {monte_carlo, samples, seed}; }
};

/// Overlap structure of two independent simple random walks of n steps in Z^p.
struct OverlapStats {
  int p;
  int n;
  OverlapMode mode;
  /// (l, K) -> P(both self-avoiding, l shared edges in K runs); l = 0 has K = 0
  std::map<std::pair<int, int>, double> table;
  /// l -> P(both self-avoiding, l shared edges, S_n = S'_n)
  std::map<int, double> joint_endpoint;
  double sa_pair_prob = 0.0;

  /// P(both self-avoiding, l shared edges), summed over K.
  double overlap_prob(int l) const;
  double joint_prob(int l) const;
};

inline constexpr double kOverlapBudget = 1e9;

/// Exact mode needs (2p)^(2n) < budget; throws "enumeration-too-large" otherwise.
OverlapStats rw_overlap_stats(int p, int n, const OverlapMode& mode, double budget = kOverlapBudget);

/// Rows (p, n, l, K, prob, bound, ratio) with bound = (1/2p)^l; K = 0 rows hold the sum over K.
std::string overlap_csv(const OverlapStats& stats, bool header = true);

struct PatternCount {
  double lhs;  ///< l^(K-1) [C(n,K) K!]^2 2^K
  double rhs;  ///< (2 l n^2)^K / l
  bool holds;  ///< decided in exact integer arithmetic
};

PatternCount pattern_count_bound(int l, int K, int n);

struct ReturnFacts {
  double max_point_prob;        ///< max_t P(S_m = t)
  double two_step_return_prob;  ///< P(S_2 != 0, S_m = 0)
  double point_bound;           ///< 1/(2p)
  double return_bound;          ///< (m-2)^2/(2p)^2
  bool point_holds;
  bool return_holds;
};

inline constexpr double kReturnBudget = 1e8;

ReturnFacts rw_return_facts(int p, int m, double budget = kReturnBudget);

struct PathCountBound {
  double log_bound;
  double bound;
};

/// (2d)^k min(1, exp(-n rho + (k/d)(cosh rho - 1))), evaluated in log space.
PathCountBound path_count_bound(std::int64_t k, std::int64_t n, std::int64_t d, double rho);
/// Minimizer asinh(n d / k) of the exponent over rho >= 0.
double optimal_rho(std::int64_t k, std::int64_t n, std::int64_t d);
/// Number of k-step walks in Z^d from 0 ending on {x_1 = n}.
double paths_ending_on_hyperplane(std::int64_t k, std::int64_t n, std::int64_t d);

struct DiagonalCountBound {
  double log_binomial_form;  ///< log[(2d)^k (m/k) C(k, (k+m)/2) 2^-k], m = n ceil(sqrt d)
  double log_closed_form;    ///< log[m^(-1/2) (2 d y / ((y+1)^((y+1)/2y) (y-1)^((y-1)/2y)))^k], y = k/m
};

/// Bounds on the number of k-step self-avoiding walks from 0 to J_n; -inf when k < m or parity differs.
DiagonalCountBound diagonal_count_bound(std::int64_t k, std::int64_t n, std::int64_t d);

}  // namespace fpp
