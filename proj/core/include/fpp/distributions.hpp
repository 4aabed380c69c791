#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace fpp {

/// Behaviour of P(tau <= x) / x as x -> 0.
enum class SlopeRegime { zero, finite_positive, infinite };

/// Constants (a, C, eps0) with |P(tau <= x)/x - a| <= C / |log x| on (0, eps0].
struct SmallXParams {
  SlopeRegime regime = SlopeRegime::finite_positive;
  double a = 0.0;  ///< +inf when regime == infinite
  double C = 0.0;
  double eps0 = 0.0;
};

class DistributionSpec;

namespace law {
struct Exponential {
  double rate;
};
struct Uniform {
  double lo;
  double hi;
};
struct Shifted {
  double offset;
  std::shared_ptr<const DistributionSpec> base;
};
struct Deterministic {
  double value;
};
/// Piecewise-linear CDF through the knots (x[i], F[i]); F reaches 1 at the last knot.
struct CdfTable {
  std::vector<double> x;
  std::vector<double> F;
};
}  // namespace law

using LawKind = std::variant<law::Exponential, law::Uniform, law::Shifted, law::Deterministic, law::CdfTable>;

/// An edge-weight law together with its verified small-x constants.
///
/// Immutable after construction. Construction validates the parameters and
/// checks the small-x inequality numerically on a dense grid, so every live
/// instance satisfies it.
class DistributionSpec {
 public:
  static DistributionSpec exponential(double rate);
  static DistributionSpec uniform(double lo, double hi);
  static DistributionSpec shifted(double offset, const DistributionSpec& base);
  static DistributionSpec deterministic(double value);
  static DistributionSpec custom(std::vector<double> x, std::vector<double> F);

  /// Parses `exponential:1.0`, `uniform:0:1`, `shifted:0.5:exponential:1.0`,
  /// `deterministic:1.0` or `custom:x0,F0;x1,F1;...`.
  static DistributionSpec parse(std::string_view text);

  /// Canonical textual form; parse(id()) reproduces the law.
  std::string id() const;

  double cdf(double x) const;
  double survival(double x) const;
  /// Generalized inverse inf{x : F(x) >= u} for u in [0, 1).
  double quantile(double u) const;
  double mean() const;

  const SmallXParams& small_x() const { return small_x_; }
  const LawKind& kind() const { return kind_; }
  bool is_exponential() const { return std::holds_alternative<law::Exponential>(kind_); }

 private:
  explicit DistributionSpec(LawKind kind);
  LawKind kind_;
  SmallXParams small_x_;
};

/// Largest absolute violation of the small-x inequality over a grid of
/// `points` abscissae in (0, eps0]; <= 0 means the inequality holds.
double small_x_violation(const DistributionSpec& spec, double a, double C, double eps0, int points = 10000);

SmallXParams small_x_params(const DistributionSpec& spec);

/// Three-term bound E Y <= term1 + term2 + term3 (each O(1/d)) for a > 0.
struct MinSplitBound {
  double eps;        ///< slack in P(tau <= t) >= a(1 - eps) t
  double cutoff;     ///< right end of the linear-CDF region
  double markov_at;  ///< Markov tail starts here
  double near_zero;
  double middle;
  double markov_tail;
  double total() const { return near_zero + middle + markov_tail; }
};

struct ExpectedMin {
  double value;  ///< E min(t_1, ..., t_d)
  std::optional<MinSplitBound> split;
};

/// E Y for Y = min of d i.i.d. copies, plus the O(1/d) split when a in (0, inf) and d >= 2.
ExpectedMin expected_min(const DistributionSpec& spec, int d);

/// Sandwich for P(S_n <= x), S_n a sum of n i.i.d. copies.
struct SnCdfBounds {
  double lower;
  double upper;
  double log_lower;
  double log_upper;
};

SnCdfBounds sn_cdf_bounds(const DistributionSpec& spec, int n, double x);

/// CDF of Gamma(n, 1) at x.
double gamma_cdf(int n, double x);
double log_gamma_cdf(int n, double x);

}  // namespace fpp
