#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fpp/distributions.hpp"

namespace fpp {

/// Which partial-sum CDF the upper-bound pipeline uses.
/// `exponential` evaluates Gamma CDFs exactly and needs an exponential law;
/// `generic` uses the small-x sandwich with the stored (a, C, eps0).
enum class Pipeline { automatic, exponential, generic };

std::string pipeline_name(Pipeline p);
/// `automatic` resolves to `exponential` for exponential laws.
Pipeline resolve_pipeline(Pipeline p, const DistributionSpec& spec);

/// One checkable inequality and the number it was decided on.
struct Precondition {
  std::string name;
  bool satisfied;
  double value;
};

bool all_satisfied(const std::vector<Precondition>& list);
/// Name of the first failed precondition, empty when all hold.
std::string first_failed(const std::vector<Precondition>& list);

struct BoundParams {
  std::int64_t d = 0;
  double delta = 0.0;
  double eta = 0.0;
  double B = 0.0;
  std::int64_t n = 0;  ///< floor(log d)
  double x = 0.0;      ///< log d / (2 (1 - delta) a d)
  std::int64_t m = 0;  ///< floor(d / (delta^(1+eta) log d))
  std::int64_t p = 0;  ///< d - m
  double y = 0.0;      ///< B delta log d / (2 a d)
  double A = 0.0;
  std::vector<Precondition> validity;

  bool valid() const { return all_satisfied(validity); }
};

/// Fills the derived fields; A is left at 0 and validity holds the structural checks.
BoundParams make_bound_params(std::int64_t d, double delta, double eta, double B, const DistributionSpec& spec);

/// 2 n C / (|log x| - C) with n, x as in BoundParams. Throws "precondition-f-denominator" when |log x| <= C.
double f_aC(double delta, std::int64_t d, double a, double C);

struct GEta {
  double exact;    ///< (n-1)(log(2p-1) + 1) / (2p-1-log(2p-1))
  double display;  ///< ((log d)^2 + log 2 log d) / (2d(1 - 1/(delta^(1+eta) log d)) - 1 - log 2d); +inf when the denominator is not positive
};

/// Throws "precondition-p" when p < 2.
GEta g_eta(double delta, double eta, std::int64_t d);

struct OverlapTerms {
  double I, II, III, IV, V;
  double total;  ///< 1 + I + II + III + IV + V
};

/// Requires 1 <= l <= n-1 and l n^2 / p < 1 ("series-divergence" otherwise).
OverlapTerms overlap_terms(std::int64_t n, std::int64_t p, std::int64_t l);
double overlap_correction(std::int64_t n, std::int64_t p, std::int64_t l);
/// Same terms without the convergence gate; the finite sums are defined for any p >= 1.
OverlapTerms overlap_terms_unguarded(std::int64_t n, std::int64_t p, std::int64_t l);

struct AdmissibleA {
  double A = 0.0;           ///< +inf when a precondition fails
  double A_product = 0.0;   ///< generic only: the e^(f g^2) reading of the prefactor; NaN otherwise
  Pipeline pipeline = Pipeline::exponential;
  double inv_first_moment = 0.0;  ///< upper bound on 1 / E N
  double f = 0.0;
  double g = 0.0;
  double series = 0.0;  ///< sum over overlaps, before the prefactor
  std::vector<Precondition> validity;

  bool valid() const { return all_satisfied(validity); }
};

AdmissibleA admissible_A(std::int64_t d, double delta, double eta, const DistributionSpec& spec,
                         Pipeline pipeline = Pipeline::automatic);

struct UpsilonParts {
  double value;
  double first_term;  ///< (log d / 2ad)(B delta + 1/(1-delta))
  double tail;        ///< base^exponent * E tau
  double tail_base;
  std::int64_t exponent;
  bool degenerate_tail;  ///< base >= 1: the tail is at least E tau
};

/// Needs params.A finite and > 1. Generic pipeline throws "y-out-of-range" unless y <= min(eps0, e^-C).
UpsilonParts upsilon(const BoundParams& params, const DistributionSpec& spec, Pipeline pipeline = Pipeline::automatic);

struct GridSpec {
  double delta_lo = 0.01;
  double delta_hi = 0.99;
  int delta_points = 99;
  double B_lo = 0.1;
  double B_hi = 100.0;
  int B_points = 61;
  std::vector<double> etas{1e-3, 1e-2, 1e-1};
  bool refine = true;
  /// delta grid for the closed-form lower bounds: i / (points + 1)
  int lower_delta_points = 999;
  unsigned workers = 1;

  std::vector<double> deltas() const;
  std::vector<double> lower_deltas() const;
  std::vector<double> Bs() const;
};

struct UpperCertificate {
  double upsilon;
  BoundParams params;
  UpsilonParts parts;
  AdmissibleA A;
  Pipeline pipeline;
  std::int64_t cells;  ///< (delta, eta, B) cells evaluated
};

/// Grid minimum of upsilon; throws "no-valid-certificate-at-d" when no cell is admissible.
UpperCertificate optimize_upper(std::int64_t d, const DistributionSpec& spec, const GridSpec& grid = {},
                                Pipeline pipeline = Pipeline::automatic);

struct LowerBound {
  double bound;  ///< NaN when invalid
  double delta;
  bool valid;
  std::vector<Precondition> preconditions;
  std::map<std::string, double> witnesses;
};

/// (1 - delta) log d / (2 a d) when the summability gate and the partial-sum lemma's conditions hold.
LowerBound lower_bound_mu(std::int64_t d, const DistributionSpec& spec, double delta,
                          Pipeline pipeline = Pipeline::automatic);

struct AlphaStar {
  double alpha;      ///< nonzero root of coth a = a
  double companion;  ///< sqrt(alpha^2 - 1) / 2
  double residual;   ///< coth(alpha) - alpha
};

AlphaStar alpha_star();

struct InfIdentity {
  double argmin;
  double inf_value;  ///< inf over y >= 1 of (y+1)^((y+1)/2y) (y-1)^((y-1)/2y)
  double target;     ///< e sqrt(alpha^2 - 1)
  double residual;
};

InfIdentity alpha_star_inf_identity();

/// (sqrt(alpha^2-1) / (2 a sqrt d))(1 - delta); exponential laws also accept delta = 0 for d >= 2.
LowerBound mu_star_lower(std::int64_t d, const DistributionSpec& spec, double delta,
                         Pipeline pipeline = Pipeline::automatic);

struct ShapeOptions {
  GridSpec grid;
  Pipeline pipeline = Pipeline::automatic;
  /// Fixed delta for the mu(e_1) lower bound instead of the grid scan.
  std::optional<double> lower_delta;
  /// Fixed delta for the mu* lower bound instead of the grid scan.
  std::optional<double> mustar_delta;
  bool compute_upper = true;
  bool compute_lower = true;
};

struct ShapeCertificate {
  std::int64_t d;
  std::string spec_id;
  Pipeline pipeline;
  double mu_upper;      ///< +inf when no admissible upper tuple
  double mu_lower;      ///< NaN when no valid delta
  double mustar_lower;  ///< NaN when no valid delta
  double mustar_upper;  ///< sqrt d * E Y
  bool ball_excluded;
  bool cube_strict;
  bool diamond_strict;
  std::optional<UpperCertificate> upper;
  std::optional<LowerBound> lower;
  std::optional<LowerBound> mustar;
  std::vector<Precondition> all_preconditions;
  GridSpec grid;
};

/// Throws "unsupported-regime" unless the law has a finite positive small-x slope.
ShapeCertificate shape_certificate(std::int64_t d, const DistributionSpec& spec, const ShapeOptions& options = {});

enum class Verdict { ball_excluded, cube_strict, diamond_strict };

std::string verdict_name(Verdict v);
Verdict parse_verdict(const std::string& text);

struct ThresholdOptions {
  ShapeOptions shape;
  std::int64_t start = 2;
  std::int64_t limit = 10'000'000;
  int spot_checks = 20;
};

struct ThresholdResult {
  std::int64_t threshold;
  std::vector<std::pair<std::int64_t, bool>> scanned;      ///< every d evaluated, in order
  std::vector<std::pair<std::int64_t, bool>> spot_checks;  ///< larger d re-checked after the bisection
};

/// Doubling from `start`, bisection, then spot checks above the answer; a failed spot check restarts the
/// search above it. Throws "threshold-not-found" past `limit`.
ThresholdResult find_threshold(const DistributionSpec& spec, Verdict verdict, const ThresholdOptions& options = {});

}  // namespace fpp
