#include "fpp/distributions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "fpp/error.hpp"
#include "fpp/numeric.hpp"

namespace fpp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Fixed constant stored for exponential laws; eps0 is then the largest
// value of 0.1 * 0.9^k on which the inequality checks out.
constexpr double kExponentialC = 0.5;
constexpr double kDefaultEps0 = 0.1;
constexpr double kMaxEps0 = 0.5;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double parse_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) throw Error("usage", "not a number: '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

double table_cdf(const law::CdfTable& t, double x) {
  if (x < t.x.front()) return 0.0;
  if (x >= t.x.back()) return 1.0;
  const auto it = std::upper_bound(t.x.begin(), t.x.end(), x);
  const auto i = static_cast<std::size_t>(it - t.x.begin()) - 1;
  const double w = (x - t.x[i]) / (t.x[i + 1] - t.x[i]);
  return t.F[i] + w * (t.F[i + 1] - t.F[i]);
}

double table_quantile(const law::CdfTable& t, double u) {
  if (u <= t.F.front()) return t.x.front();
  for (std::size_t i = 0; i + 1 < t.x.size(); ++i) {
    if (u <= t.F[i + 1] && t.F[i + 1] > t.F[i]) {
      if (u <= t.F[i]) return t.x[i];
      return t.x[i] + (u - t.F[i]) / (t.F[i + 1] - t.F[i]) * (t.x[i + 1] - t.x[i]);
    }
  }
  return t.x.back();
}

// integral over [0, inf) of (1 - F)^power for a piecewise-linear F
double table_survival_power_integral(const law::CdfTable& t, int power) {
  CompensatedSum sum;
  sum.add(t.x.front());  // F = 0 on [0, x0)
  for (std::size_t i = 0; i + 1 < t.x.size(); ++i) {
    const double dx = t.x[i + 1] - t.x[i];
    const double s0 = 1.0 - t.F[i];
    const double s1 = 1.0 - t.F[i + 1];
    if (s0 == s1) {
      sum.add(std::pow(s0, power) * dx);
    } else {
      const double slope = (s0 - s1) / dx;
      sum.add((std::pow(s0, power + 1) - std::pow(s1, power + 1)) / (slope * (power + 1)));
    }
  }
  return sum.value();
}

SmallXParams fixed_zero_regime(double flat_until) {
  // F vanishes on [0, flat_until); stay clear of any atom at the endpoint
  return {SlopeRegime::zero, 0.0, 0.0, std::min(0.5 * flat_until, kMaxEps0)};
}

}  // namespace

DistributionSpec::DistributionSpec(LawKind kind) : kind_(std::move(kind)) {
  small_x_ = std::visit(
      Overloaded{
          [&](const law::Exponential& e) -> SmallXParams {
            SmallXParams p{SlopeRegime::finite_positive, e.rate, kExponentialC, kDefaultEps0};
            while (small_x_violation(*this, p.a, p.C, p.eps0) > 0.0) {
              p.eps0 *= 0.9;
              if (p.eps0 < 1e-12) throw Error("unverifiable-local-behavior", "no eps0 for exponential law");
            }
            return p;
          },
          [&](const law::Uniform& u) -> SmallXParams {
            if (u.lo > 0.0) return fixed_zero_regime(u.lo);
            return {SlopeRegime::finite_positive, 1.0 / u.hi, 0.0, std::min(u.hi, kMaxEps0)};
          },
          [&](const law::Shifted& s) -> SmallXParams {
            if (s.offset > 0.0) return fixed_zero_regime(s.offset);
            return s.base->small_x();
          },
          [&](const law::Deterministic& c) -> SmallXParams {
            if (c.value > 0.0) return fixed_zero_regime(c.value);
            return {SlopeRegime::infinite, kInf, 0.0, kMaxEps0};
          },
          [&](const law::CdfTable& t) -> SmallXParams {
            if (t.x.front() > 0.0) {
              if (t.F.front() > 0.0) {
                throw Error("unverifiable-local-behavior",
                            "custom CDF has mass below its first knot with no shape information near 0");
              }
              return fixed_zero_regime(t.x.front());
            }
            if (t.F.front() > 0.0) return {SlopeRegime::infinite, kInf, 0.0, std::min(t.x[1], kMaxEps0)};
            const double slope = (t.F[1] - t.F[0]) / (t.x[1] - t.x[0]);
            if (slope == 0.0) return fixed_zero_regime(t.x[1]);
            return {SlopeRegime::finite_positive, slope, 0.0, std::min(t.x[1], kMaxEps0)};
          },
      },
      kind_);

  if (small_x_.regime != SlopeRegime::infinite && small_x_violation(*this, small_x_.a, small_x_.C, small_x_.eps0) > 0.0) {
    throw Error("unverifiable-local-behavior", "small-x inequality fails for " + id());
  }
}

DistributionSpec DistributionSpec::exponential(double rate) {
  if (!(rate > 0.0) || std::isinf(rate)) throw Error("usage", "exponential rate must be positive and finite");
  return DistributionSpec(law::Exponential{rate});
}

DistributionSpec DistributionSpec::uniform(double lo, double hi) {
  if (!(lo >= 0.0) || !(hi > lo) || std::isinf(hi)) throw Error("usage", "uniform requires 0 <= lo < hi < inf");
  return DistributionSpec(law::Uniform{lo, hi});
}

DistributionSpec DistributionSpec::shifted(double offset, const DistributionSpec& base) {
  if (!(offset >= 0.0) || std::isinf(offset)) throw Error("usage", "shift offset must be finite and >= 0");
  return DistributionSpec(law::Shifted{offset, std::make_shared<const DistributionSpec>(base)});
}

DistributionSpec DistributionSpec::deterministic(double value) {
  if (!(value >= 0.0) || std::isinf(value)) throw Error("usage", "deterministic value must be finite and >= 0");
  return DistributionSpec(law::Deterministic{value});
}

DistributionSpec DistributionSpec::custom(std::vector<double> x, std::vector<double> F) {
  if (x.size() < 2 || x.size() != F.size()) throw Error("usage", "custom CDF needs >= 2 knots (x, F)");
  if (x.front() < 0.0) throw Error("usage", "custom CDF support must be nonnegative");
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    if (!(x[i + 1] > x[i])) throw Error("usage", "custom CDF knots must be strictly increasing");
    if (F[i + 1] < F[i]) throw Error("usage", "custom CDF must be non-decreasing");
  }
  if (F.front() < 0.0 || F.back() != 1.0) throw Error("usage", "custom CDF must lie in [0,1] and end at 1");
  return DistributionSpec(law::CdfTable{std::move(x), std::move(F)});
}

DistributionSpec DistributionSpec::parse(std::string_view text) {
  const auto colon = text.find(':');
  const auto name = text.substr(0, colon);
  const auto rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  const auto args = split(rest, ':');
  auto need = [&](std::size_t k) {
    if (rest.empty() || args.size() != k) {
      throw Error("usage", "distribution '" + std::string(name) + "' expects " + std::to_string(k) + " parameter(s)");
    }
  };
  if (name == "exponential") {
    need(1);
    return exponential(parse_double(args[0]));
  }
  if (name == "uniform") {
    need(2);
    return uniform(parse_double(args[0]), parse_double(args[1]));
  }
  if (name == "deterministic") {
    need(1);
    return deterministic(parse_double(args[0]));
  }
  if (name == "shifted") {
    const auto second = rest.find(':');
    if (rest.empty() || second == std::string_view::npos) throw Error("usage", "shifted expects offset:base");
    return shifted(parse_double(rest.substr(0, second)), parse(rest.substr(second + 1)));
  }
  if (name == "custom") {
    if (rest.empty()) throw Error("usage", "custom expects x0,F0;x1,F1;...");
    std::vector<double> xs;
    std::vector<double> fs;
    for (auto knot : split(rest, ';')) {
      const auto parts = split(knot, ',');
      if (parts.size() != 2) throw Error("usage", "custom knot must be x,F");
      xs.push_back(parse_double(parts[0]));
      fs.push_back(parse_double(parts[1]));
    }
    return custom(std::move(xs), std::move(fs));
  }
  throw Error("usage", "unknown distribution '" + std::string(name) + "'");
}

std::string DistributionSpec::id() const {
  return std::visit(Overloaded{
                        [](const law::Exponential& e) { return "exponential:" + shortest_repr(e.rate); },
                        [](const law::Uniform& u) { return "uniform:" + shortest_repr(u.lo) + ":" + shortest_repr(u.hi); },
                        [](const law::Shifted& s) { return "shifted:" + shortest_repr(s.offset) + ":" + s.base->id(); },
                        [](const law::Deterministic& c) { return "deterministic:" + shortest_repr(c.value); },
                        [](const law::CdfTable& t) {
                          std::string out = "custom:";
                          for (std::size_t i = 0; i < t.x.size(); ++i) {
                            if (i) out += ';';
                            out += shortest_repr(t.x[i]) + "," + shortest_repr(t.F[i]);
                          }
                          return out;
                        },
                    },
                    kind_);
}

double DistributionSpec::cdf(double x) const {
  if (x < 0.0) return 0.0;
  return std::visit(Overloaded{
                        [&](const law::Exponential& e) { return -std::expm1(-e.rate * x); },
                        [&](const law::Uniform& u) { return std::clamp((x - u.lo) / (u.hi - u.lo), 0.0, 1.0); },
                        [&](const law::Shifted& s) { return s.base->cdf(x - s.offset); },
                        [&](const law::Deterministic& c) { return x >= c.value ? 1.0 : 0.0; },
                        [&](const law::CdfTable& t) { return table_cdf(t, x); },
                    },
                    kind_);
}

double DistributionSpec::survival(double x) const {
  if (x < 0.0) return 1.0;
  if (const auto* e = std::get_if<law::Exponential>(&kind_)) return std::exp(-e->rate * x);
  return 1.0 - cdf(x);
}

double DistributionSpec::quantile(double u) const {
  if (!(u >= 0.0 && u < 1.0)) throw Error("domain", "quantile requires u in [0, 1)");
  return std::visit(Overloaded{
                        [&](const law::Exponential& e) { return -std::log1p(-u) / e.rate; },
                        [&](const law::Uniform& v) { return v.lo + u * (v.hi - v.lo); },
                        [&](const law::Shifted& s) { return s.offset + s.base->quantile(u); },
                        [&](const law::Deterministic& c) { return c.value; },
                        [&](const law::CdfTable& t) { return table_quantile(t, u); },
                    },
                    kind_);
}

double DistributionSpec::mean() const {
  return std::visit(Overloaded{
                        [](const law::Exponential& e) { return 1.0 / e.rate; },
                        [](const law::Uniform& u) { return 0.5 * (u.lo + u.hi); },
                        [](const law::Shifted& s) { return s.offset + s.base->mean(); },
                        [](const law::Deterministic& c) { return c.value; },
                        [](const law::CdfTable& t) { return table_survival_power_integral(t, 1); },
                    },
                    kind_);
}

double small_x_violation(const DistributionSpec& spec, double a, double C, double eps0, int points) {
  if (!(eps0 > 0.0) || eps0 >= 1.0) return kInf;
  double worst = -kInf;
  auto check = [&](double x) {
    if (!(x > 0.0) || x > eps0) return;
    const double lx = std::abs(std::log(x));
    if (lx == 0.0) return;
    const double gap = std::abs(spec.cdf(x) / x - a) - C / lx;
    // scale-aware slack for rounding in cdf(x)/x
    worst = std::max(worst, gap - 1e-12 * std::max(1.0, a));
  };
  const int half = std::max(points / 2, 1);
  for (int i = 1; i <= half; ++i) check(eps0 * i / half);
  const double lo = std::log(eps0 * 1e-12);
  const double hi = std::log(eps0);
  for (int i = 0; i < points - half; ++i) check(std::exp(lo + (hi - lo) * i / std::max(points - half - 1, 1)));
  return worst;
}

SmallXParams small_x_params(const DistributionSpec& spec) { return spec.small_x(); }

ExpectedMin expected_min(const DistributionSpec& spec, int d) {
  if (d < 1) throw Error("domain", "expected_min requires d >= 1");
  ExpectedMin out{};
  out.value = std::visit(
      Overloaded{
          [&](const law::Exponential& e) { return 1.0 / (e.rate * d); },
          [&](const law::Uniform& u) { return u.lo + (u.hi - u.lo) / (d + 1.0); },
          [&](const law::Shifted& s) { return s.offset + expected_min(*s.base, d).value; },
          [&](const law::Deterministic& c) { return c.value; },
          [&](const law::CdfTable& t) { return table_survival_power_integral(t, d); },
      },
      spec.kind());
  if (!std::isfinite(out.value)) throw Error("internal", "expected minimum diverged");

  const auto& sx = spec.small_x();
  if (sx.regime == SlopeRegime::finite_positive && d >= 2) {
    MinSplitBound b{};
    b.eps = 0.5;
    const double a = sx.a;
    b.cutoff = sx.eps0;
    if (sx.C > 0.0) b.cutoff = std::min(b.cutoff, std::exp(-sx.C / (a * b.eps)));
    b.cutoff = std::min(b.cutoff, 1.0 / (a * (1.0 - b.eps)));
    b.markov_at = std::max(2.0 * spec.mean(), b.cutoff);
    b.near_zero = 1.0 / ((d + 1.0) * a * (1.0 - b.eps));
    b.middle = (b.markov_at - b.cutoff) * std::pow(spec.survival(b.cutoff), d);
    b.markov_tail = std::pow(spec.mean() / b.markov_at, d) * b.markov_at / (d - 1.0);
    out.split = b;
  }
  return out;
}

SnCdfBounds sn_cdf_bounds(const DistributionSpec& spec, int n, double x) {
  const auto& sx = spec.small_x();
  if (sx.regime != SlopeRegime::finite_positive) {
    throw Error("unsupported-regime", "partial-sum bounds need a finite positive small-x slope");
  }
  if (n < 1) throw Error("domain", "sn_cdf_bounds requires n >= 1");
  if (x < 0.0) throw Error("domain", "sn_cdf_bounds requires x >= 0");
  if (x > sx.eps0) throw Error("outside-validity-interval", "x = " + shortest_repr(x) + " exceeds eps0");
  if (x == 1.0) throw Error("log-singularity", "log x = 0");
  if (x == 0.0) return {0.0, 0.0, -kInf, -kInf};
  const double base = n * std::log(sx.a * x) - log_factorial(n);
  // stored C is absolute: P(tau <= t) = a t (1 +- (C/a)/|log t|)
  const double rel = sx.C / (sx.a * std::abs(std::log(x)));
  SnCdfBounds b{};
  b.log_upper = base + n * std::log1p(rel);
  b.log_lower = rel >= 1.0 ? -kInf : base + n * std::log1p(-rel);
  b.lower = std::exp(b.log_lower);
  b.upper = std::exp(b.log_upper);
  return b;
}

double gamma_cdf(int n, double x) {
  if (n < 1) throw Error("domain", "gamma_cdf requires integer shape n >= 1");
  return regularized_gamma_p(n, x);
}

double log_gamma_cdf(int n, double x) {
  if (n < 1) throw Error("domain", "gamma_cdf requires integer shape n >= 1");
  return log_regularized_gamma_p(n, x);
}

}  // namespace fpp
