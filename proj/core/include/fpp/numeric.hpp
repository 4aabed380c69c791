#pragma once

#include <cstdint>
#include <span>
#include <string>

namespace fpp {

inline constexpr double kGateMargin = 1e-12;

/// a < b with a relative margin of kGateMargin; a certificate never hinges on rounding.
bool strictly_less(double a, double b);

/// Neumaier-compensated summation.
class CompensatedSum {
 public:
  void add(double v);
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

double log_factorial(std::int64_t n);
double log_binomial(std::int64_t n, std::int64_t k);
/// log(exp(a) + exp(b)).
double log_add(double a, double b);

/// Regularized lower incomplete gamma P(s, x) for real s > 0.
double regularized_gamma_p(double s, double x);
/// log P(s, x); finite even when P underflows.
double log_regularized_gamma_p(double s, double x);

/// Shortest decimal string that round-trips to the same double.
std::string shortest_repr(double v);

/// 64-bit mixer (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);
/// Seeded hash of a byte string; stable across platforms and releases.
std::uint64_t hash_bytes(std::span<const std::uint8_t> bytes, std::uint64_t seed);

}  // namespace fpp
