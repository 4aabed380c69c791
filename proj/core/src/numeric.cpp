#include "fpp/numeric.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <cmath>
#include <limits>

#include "fpp/error.hpp"

namespace fpp {

bool strictly_less(double a, double b) {
  if (std::isnan(a) || std::isnan(b)) return false;
  if (std::isinf(b)) return b > 0 && !std::isinf(a);
  if (std::isinf(a)) return a < 0;
  return a < b - kGateMargin * std::max(std::abs(a), std::abs(b));
}

void CompensatedSum::add(double v) {
  const double t = sum_ + v;
  if (std::abs(sum_) >= std::abs(v)) {
    comp_ += (sum_ - t) + v;
  } else {
    comp_ += (v - t) + sum_;
  }
  sum_ = t;
}

double log_factorial(std::int64_t n) {
  if (n < 0) throw Error("domain", "log_factorial of negative integer");
  return std::lgamma(static_cast<double>(n) + 1.0);
}

double log_binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return -std::numeric_limits<double>::infinity();
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log1p(std::exp(-std::abs(a - b)));
}

namespace {

// log of the series part: P(s,x) = exp(s log x - x - lgamma(s+1)) * sum_k x^k / ((s+1)...(s+k))
double log_gamma_p_series(double s, double x) {
  double term = 1.0;
  CompensatedSum sum;
  sum.add(1.0);
  for (int k = 1; k < 100000; ++k) {
    term *= x / (s + k);
    sum.add(term);
    if (term < sum.value() * 1e-17) break;
  }
  return s * std::log(x) - x - std::lgamma(s + 1.0) + std::log(sum.value());
}

// Q(s,x) by the Legendre continued fraction (modified Lentz).
double gamma_q_continued_fraction(double s, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 100000; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(s * std::log(x) - x - std::lgamma(s)) * h;
}

}  // namespace

double log_regularized_gamma_p(double s, double x) {
  if (!(s > 0.0)) throw Error("domain", "incomplete gamma requires shape > 0");
  if (x < 0.0 || std::isnan(x)) throw Error("domain", "incomplete gamma requires x >= 0");
  if (x == 0.0) return -std::numeric_limits<double>::infinity();
  if (std::isinf(x)) return 0.0;
  if (x < s + 1.0) return log_gamma_p_series(s, x);
  return std::log1p(-gamma_q_continued_fraction(s, x));
}

double regularized_gamma_p(double s, double x) {
  if (!(s > 0.0)) throw Error("domain", "incomplete gamma requires shape > 0");
  if (x < 0.0 || std::isnan(x)) throw Error("domain", "incomplete gamma requires x >= 0");
  if (x == 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < s + 1.0) return std::exp(log_gamma_p_series(s, x));
  return 1.0 - gamma_q_continued_fraction(s, x);
}

std::string shortest_repr(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw Error("internal", "to_chars failed");
  return std::string(buf.data(), ptr);
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

namespace {
std::uint64_t byteswap64(std::uint64_t v) {
  std::uint64_t r = 0;
  for (int b = 0; b < 8; ++b) r |= ((v >> (8 * b)) & 0xFF) << (8 * (7 - b));
  return r;
}
}  // namespace

std::uint64_t hash_bytes(std::span<const std::uint8_t> bytes, std::uint64_t seed) {
  std::uint64_t h = mix64(seed ^ (0xA0761D6478BD642FULL * (bytes.size() + 1)));
  std::size_t i = 0;
  for (; i + 8 <= bytes.size(); i += 8) {
    std::uint64_t w;
    std::memcpy(&w, bytes.data() + i, 8);
    if constexpr (std::endian::native == std::endian::big) w = byteswap64(w);
    h = mix64(h ^ w) * 0xE7037ED1A0B428DBULL;
  }
  std::uint64_t tail = 0;
  for (int b = 0; i < bytes.size(); ++i, ++b) tail |= static_cast<std::uint64_t>(bytes[i]) << (8 * b);
  return mix64(h ^ tail ^ 0x8EBC6AF09C88C6E3ULL);
}

}  // namespace fpp
