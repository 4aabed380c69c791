#include "fpp/certifier.hpp"

#include <algorithm>
#include <atomic>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <thread>
#include <tuple>

#include "fpp/error.hpp"
#include "fpp/numeric.hpp"

namespace fpp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_finite_slope(const DistributionSpec& spec) {
  if (spec.small_x().regime != SlopeRegime::finite_positive || !(spec.small_x().a > 0.0) ||
      !std::isfinite(spec.small_x().a)) {
    throw Error("unsupported-regime", "certificates need a finite positive small-x slope a; got " + spec.id());
  }
}

// C in the relative form P(tau <= t) = a t (1 +- c/|log t|)
double relative_C(const SmallXParams& sx) { return sx.C / sx.a; }

struct Geometry {
  double L;
  std::int64_t n;
  double x;
  std::int64_t m;
  std::int64_t p;
  double inv_mesh;  // 1 / (delta^(1+eta) log d)
};

Geometry geometry(std::int64_t d, double delta, double eta, double a) {
  if (d < 2) throw Error("domain", "dimension must be >= 2");
  Geometry g{};
  g.L = std::log(static_cast<double>(d));
  g.n = static_cast<std::int64_t>(std::floor(g.L));
  g.x = g.L / (2.0 * (1.0 - delta) * a * static_cast<double>(d));
  g.inv_mesh = 1.0 / (std::pow(delta, 1.0 + eta) * g.L);
  const double mesh = static_cast<double>(d) * g.inv_mesh;
  g.m = mesh >= static_cast<double>(d) ? d : static_cast<std::int64_t>(std::floor(mesh));
  g.p = d - g.m;
  return g;
}

// 2p - 1 - log(2p - 1)
double saw_growth_floor(std::int64_t p) {
  const double t = 2.0 * static_cast<double>(p) - 1.0;
  return t - std::log(t);
}

double g_exact(std::int64_t n, std::int64_t p) {
  const double t = 2.0 * static_cast<double>(p) - 1.0;
  return static_cast<double>(n - 1) * (std::log(t) + 1.0) / saw_growth_floor(p);
}

Precondition gate(std::string name, bool ok, double value) { return {std::move(name), ok, value}; }

template <class F>
void parallel_for(std::size_t count, unsigned workers, F&& fn) {
  const unsigned threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          if (!failed.exchange(true)) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

bool y_in_range(double y, const SmallXParams& sx) {
  return y > 0.0 && y <= std::min(sx.eps0, std::exp(-relative_C(sx)));
}

}  // namespace

std::string pipeline_name(Pipeline p) {
  switch (p) {
    case Pipeline::automatic: return "automatic";
    case Pipeline::exponential: return "exponential";
    case Pipeline::generic: return "generic";
  }
  return "unknown";
}

Pipeline resolve_pipeline(Pipeline p, const DistributionSpec& spec) {
  if (p == Pipeline::automatic) return spec.is_exponential() ? Pipeline::exponential : Pipeline::generic;
  if (p == Pipeline::exponential && !spec.is_exponential()) {
    throw Error("pipeline-mismatch", "the exact Gamma pipeline needs an exponential law; got " + spec.id());
  }
  return p;
}

bool all_satisfied(const std::vector<Precondition>& list) {
  return std::ranges::all_of(list, [](const Precondition& p) { return p.satisfied; });
}

std::string first_failed(const std::vector<Precondition>& list) {
  for (const auto& p : list) {
    if (!p.satisfied) return p.name;
  }
  return {};
}

BoundParams make_bound_params(std::int64_t d, double delta, double eta, double B, const DistributionSpec& spec) {
  require_finite_slope(spec);
  if (!(delta > 0.0 && delta < 1.0)) throw Error("domain", "delta must lie in (0, 1)");
  if (!(eta > 0.0)) throw Error("domain", "eta must be positive");
  if (!(B > 0.0)) throw Error("domain", "B must be positive");
  const double a = spec.small_x().a;
  const Geometry g = geometry(d, delta, eta, a);
  BoundParams bp;
  bp.d = d;
  bp.delta = delta;
  bp.eta = eta;
  bp.B = B;
  bp.n = g.n;
  bp.x = g.x;
  bp.m = g.m;
  bp.p = g.p;
  bp.y = B * delta * g.L / (2.0 * a * static_cast<double>(d));
  bp.validity.push_back(gate("n-ge-1", g.n >= 1, static_cast<double>(g.n)));
  bp.validity.push_back(gate("p-ge-1", g.p >= 1, static_cast<double>(g.p)));
  return bp;
}

double f_aC(double delta, std::int64_t d, double a, double C) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error("domain", "delta must lie in (0, 1)");
  if (!(a > 0.0)) throw Error("domain", "a must be positive");
  const Geometry g = geometry(d, delta, 1.0, a);
  const double lx = std::abs(std::log(g.x));
  if (!strictly_less(C, lx)) {
    throw Error("precondition-f-denominator", "|log x| = " + shortest_repr(lx) + " <= C = " + shortest_repr(C));
  }
  return 2.0 * static_cast<double>(g.n) * C / (lx - C);
}

GEta g_eta(double delta, double eta, std::int64_t d) {
  if (!(delta > 0.0 && delta < 1.0)) throw Error("domain", "delta must lie in (0, 1)");
  if (!(eta > 0.0)) throw Error("domain", "eta must be positive");
  const Geometry g = geometry(d, delta, eta, 1.0);
  if (g.p < 2) throw Error("precondition-p", "p = " + std::to_string(g.p) + " < 2");
  const double dd = static_cast<double>(d);
  const double denom = 2.0 * dd * (1.0 - g.inv_mesh) - 1.0 - std::log(2.0 * dd);
  const double display = denom > 0.0 ? (g.L * g.L + std::numbers::ln2 * g.L) / denom : kInf;
  return {g_exact(g.n, g.p), display};
}

OverlapTerms overlap_terms(std::int64_t n, std::int64_t p, std::int64_t l) {
  if (l < 1 || l > n - 1) throw Error("domain", "overlap_correction needs 1 <= l <= n - 1");
  if (p < 1) throw Error("domain", "overlap_correction needs p >= 1");
  if (l * n * n >= p) {
    throw Error("series-divergence", "l n^2 / p = " + shortest_repr(static_cast<double>(l * n * n) / p) + " >= 1");
  }
  return overlap_terms_unguarded(n, p, l);
}

OverlapTerms overlap_terms_unguarded(std::int64_t n, std::int64_t p, std::int64_t l) {
  if (l < 1 || l > n - 1) throw Error("domain", "overlap_correction needs 1 <= l <= n - 1");
  if (p < 1) throw Error("domain", "overlap_correction needs p >= 1");
  const double P = static_cast<double>(p);
  const double P2 = 2.0 * P;
  const double logP = std::log(P);
  const double nl = static_cast<double>(n - l);
  const double n1 = static_cast<double>(n - 1);

  // sum_K C(top, K-1) [C(n-1, K) K!]^2 / p^K over K in [from, l]
  auto bubble_sum = [&](std::int64_t top, std::int64_t from) {
    CompensatedSum s;
    for (std::int64_t K = from; K <= l; ++K) {
      if (K - 1 > top || K > n - 1) continue;
      const double lt = log_binomial(top, K - 1) + 2.0 * (log_binomial(n - 1, K) + log_factorial(K)) -
                        static_cast<double>(K) * logP;
      s.add(std::exp(lt));
    }
    return s.value();
  };

  OverlapTerms t{};
  t.I = (nl - 1.0) * (nl - 1.0) / P + 2.0 * P * bubble_sum(l - 1, 2);

  CompensatedSum mid;
  for (std::int64_t a = 1; a <= n - l - 1; ++a) {
    for (std::int64_t b = 1; b <= n - l - 1; ++b) {
      const double u = static_cast<double>(a + b - 2) / P2;
      const double v = static_cast<double>(2 * n - 2 * l - a - b - 2) / P2;
      mid.add(u * u * v * v);
    }
  }
  const double edge = (2.0 * nl - 2.0) / P2;
  t.II = P2 * (2.0 * edge * edge + mid.value() + (nl - 1.0) * (nl - 1.0) / (P2 * P2));

  const double groupings2 = static_cast<double>(std::max<std::int64_t>(l - 2, 0));
  const double r = (nl - 1.0) / P2;
  t.III = P2 * groupings2 *
          (6.0 * r * r + 2.0 * (nl - 1.0) * (nl - 1.0) * std::pow(nl - 2.0, 4) / std::pow(P2, 4) +
           4.0 * n1 * n1 * nl * nl / std::pow(P2, 3));

  const double groupings3 = l >= 4 ? static_cast<double>((l - 2) * (l - 3) / 2) : 0.0;
  t.IV = P2 * groupings3 * (2.0 * nl * nl / (P2 * P2) + 8.0 * std::pow(n1, 4) * nl * nl / std::pow(P2, 3));

  // the K >= 4 display carries 2p against (1/2p)^(l-1), i.e. 4p^2 against (1/2p)^l
  t.V = 4.0 * P * P * bubble_sum(l - 2, 4);

  CompensatedSum total;
  for (double v : {1.0, t.I, t.II, t.III, t.IV, t.V}) total.add(v);
  t.total = total.value();
  return t;
}

double overlap_correction(std::int64_t n, std::int64_t p, std::int64_t l) { return overlap_terms(n, p, l).total; }

AdmissibleA admissible_A(std::int64_t d, double delta, double eta, const DistributionSpec& spec, Pipeline pipeline) {
  require_finite_slope(spec);
  AdmissibleA out;
  out.pipeline = resolve_pipeline(pipeline, spec);
  out.A_product = kNaN;
  const auto& sx = spec.small_x();
  const double a = sx.a;

  auto fail = [&] {
    out.A = kInf;
    if (out.pipeline == Pipeline::generic) out.A_product = kInf;
    return out;
  };

  auto& v = out.validity;
  v.push_back(gate("delta-in-unit-interval", delta > 0.0 && delta < 1.0, delta));
  v.push_back(gate("eta-positive", eta > 0.0, eta));
  if (!out.valid()) return fail();

  const Geometry g = geometry(d, delta, eta, a);
  v.push_back(gate("n-ge-1", g.n >= 1, static_cast<double>(g.n)));
  v.push_back(gate("p-ge-2", g.p >= 2, static_cast<double>(g.p)));
  if (!out.valid()) return fail();
  const double series_load = static_cast<double>((g.n - 1) * g.n * g.n) / static_cast<double>(g.p);
  v.push_back(gate("overlap-series-converges", (g.n - 1) * g.n * g.n < g.p, series_load));

  const double c = relative_C(sx);
  const double lx = std::abs(std::log(g.x));
  const double ratio_den = 1.0 - g.inv_mesh;
  const double ratio = (1.0 - delta) / ratio_den;
  if (out.pipeline == Pipeline::generic) {
    v.push_back(gate("x-le-eps0", g.x <= sx.eps0, g.x));
    v.push_back(gate("f-denominator", strictly_less(c, lx), lx - c));
    v.push_back(gate("ratio-denominator-positive", strictly_less(0.0, ratio_den), ratio_den));
    v.push_back(gate("geometric-ratio-lt-1", ratio_den > 0.0 && strictly_less(ratio, 1.0), ratio));
  }
  if (!out.valid()) return fail();

  const std::int64_t n = g.n;
  const std::int64_t p = g.p;
  const double log_growth = static_cast<double>(n - 1) * std::log(saw_growth_floor(p));
  out.g = g_exact(n, p);

  CompensatedSum series;
  if (out.pipeline == Pipeline::exponential) {
    const double xs = a * g.x;
    const double log_Gn = log_gamma_cdf(static_cast<int>(n), xs);
    const double log_EN = log_growth + log_Gn;
    v.push_back(gate("first-moment-positive", std::isfinite(log_EN), log_EN));
    if (!out.valid()) return fail();
    out.inv_first_moment = std::exp(-log_EN);
    for (std::int64_t l = 1; l <= n - 1; ++l) {
      const double lr = log_gamma_cdf(static_cast<int>(n - l), xs) - log_Gn - static_cast<double>(l) * std::log(2.0 * p);
      series.add(std::exp(lr) * overlap_correction(n, p, l));
    }
    out.series = series.value();
    out.f = 0.0;
    out.A = 1.0 + out.inv_first_moment + std::exp(2.0 * out.g) * out.series;
    return out;
  }

  const double shrink = c / lx;
  const double log_EN = log_growth + static_cast<double>(n) * std::log(a * g.x) - log_factorial(n) +
                        static_cast<double>(n) * std::log1p(-shrink);
  v.push_back(gate("first-moment-positive", shrink < 1.0 && std::isfinite(log_EN), log_EN));
  if (!out.valid()) return fail();
  out.inv_first_moment = std::exp(-log_EN);
  out.f = 2.0 * static_cast<double>(n) * c / (lx - c);
  series.add(1.0);  // l = 0
  double power = 1.0;
  for (std::int64_t l = 1; l <= n - 1; ++l) {
    power *= ratio;
    series.add(power * overlap_correction(n, p, l));
  }
  out.series = series.value();
  out.A = 1.0 + out.inv_first_moment + std::exp(out.f + 2.0 * out.g) * out.series;
  out.A_product = 1.0 + out.inv_first_moment + std::exp(out.f * out.g * out.g) * out.series;
  return out;
}

UpsilonParts upsilon(const BoundParams& params, const DistributionSpec& spec, Pipeline pipeline) {
  require_finite_slope(spec);
  const Pipeline pl = resolve_pipeline(pipeline, spec);
  if (!(params.A > 1.0) || !std::isfinite(params.A)) {
    throw Error("inadmissible-A", "upsilon needs a finite A > 1; got " + shortest_repr(params.A));
  }
  const auto& sx = spec.small_x();
  const double a = sx.a;
  const double L = std::log(static_cast<double>(params.d));
  UpsilonParts u{};
  u.first_term = L / (2.0 * a * static_cast<double>(params.d)) * (params.B * params.delta + 1.0 / (1.0 - params.delta));

  double hit;  // lower bound on P(tau <= y)
  if (pl == Pipeline::exponential) {
    hit = -std::expm1(-a * params.y);
  } else {
    if (!y_in_range(params.y, sx)) {
      throw Error("y-out-of-range", "y = " + shortest_repr(params.y) + " exceeds min(eps0, e^-C)");
    }
    const double c = relative_C(sx);
    hit = a * params.y * (c > 0.0 ? 1.0 - c / std::abs(std::log(params.y)) : 1.0);
  }
  // independent directions e_(p+2), ..., e_d
  u.exponent = std::max<std::int64_t>(params.m - 1, 0);
  u.tail_base = 1.0 - hit / params.A;
  u.degenerate_tail = u.tail_base >= 1.0;
  const double base = std::max(u.tail_base, 0.0);
  const double power = u.exponent == 0 ? 1.0 : (base == 0.0 ? 0.0 : std::exp(static_cast<double>(u.exponent) * std::log(base)));
  u.tail = power * spec.mean();
  u.value = u.first_term + u.tail;
  return u;
}

std::vector<double> GridSpec::deltas() const {
  std::vector<double> out;
  if (delta_points <= 1) return {delta_lo};
  for (int i = 0; i < delta_points; ++i) {
    out.push_back(delta_lo + (delta_hi - delta_lo) * i / (delta_points - 1));
  }
  return out;
}

std::vector<double> GridSpec::lower_deltas() const {
  std::vector<double> out;
  for (int i = 1; i <= lower_delta_points; ++i) out.push_back(static_cast<double>(i) / (lower_delta_points + 1));
  return out;
}

std::vector<double> GridSpec::Bs() const {
  std::vector<double> out;
  if (B_points <= 1) return {B_lo};
  const double lo = std::log(B_lo);
  const double hi = std::log(B_hi);
  for (int i = 0; i < B_points; ++i) out.push_back(std::exp(lo + (hi - lo) * i / (B_points - 1)));
  return out;
}

namespace {

struct Candidate {
  double value = kInf;
  double delta = 0.0;
  double eta = 0.0;
  double B = 0.0;

  bool better_than(const Candidate& o) const {
    if (value != o.value) return value < o.value;
    return std::tie(delta, eta, B) < std::tie(o.delta, o.eta, o.B);
  }
};

struct ScanResult {
  Candidate best;
  std::int64_t cells = 0;
};

ScanResult scan(std::int64_t d, const DistributionSpec& spec, Pipeline pl, const std::vector<double>& deltas,
                const std::vector<double>& etas, const std::vector<double>& Bs, unsigned workers) {
  const auto& sx = spec.small_x();
  const std::size_t cells = deltas.size() * etas.size();
  std::vector<Candidate> best(cells);
  parallel_for(cells, workers, [&](std::size_t idx) {
    const double delta = deltas[idx / etas.size()];
    const double eta = etas[idx % etas.size()];
    const AdmissibleA A = admissible_A(d, delta, eta, spec, pl);
    if (!A.valid()) return;
    Candidate local;
    for (double B : Bs) {
      BoundParams bp = make_bound_params(d, delta, eta, B, spec);
      if (!bp.valid()) continue;
      if (pl == Pipeline::generic && !y_in_range(bp.y, sx)) continue;
      bp.A = A.A;
      const double v = upsilon(bp, spec, pl).value;
      const Candidate c{v, delta, eta, B};
      if (std::isfinite(v) && c.better_than(local)) local = c;
    }
    best[idx] = local;
  });
  ScanResult out;
  out.cells = static_cast<std::int64_t>(cells * Bs.size());
  for (const auto& c : best) {
    if (c.better_than(out.best)) out.best = c;
  }
  return out;
}

}  // namespace

UpperCertificate optimize_upper(std::int64_t d, const DistributionSpec& spec, const GridSpec& grid, Pipeline pipeline) {
  require_finite_slope(spec);
  const Pipeline pl = resolve_pipeline(pipeline, spec);
  const auto deltas = grid.deltas();
  const auto Bs = grid.Bs();
  ScanResult res = scan(d, spec, pl, deltas, grid.etas, Bs, grid.workers);
  if (!std::isfinite(res.best.value)) {
    throw Error("no-valid-certificate-at-d", "no admissible (delta, eta, B) at d = " + std::to_string(d));
  }
  if (grid.refine) {
    const double dstep = deltas.size() > 1 ? (deltas[1] - deltas[0]) / 10.0 : 0.001;
    const double bstep = Bs.size() > 1 ? std::log(Bs[1] / Bs[0]) / 10.0 : 0.01;
    const auto [eta_lo, eta_hi] = std::ranges::minmax(grid.etas);
    const double estep = eta_hi > eta_lo ? std::log(eta_hi / eta_lo) / (10.0 * (grid.etas.size() - 1)) : 0.0;
    // refined points stay inside the coarse grid's box
    auto inside = [](double v, double lo, double hi) { return v >= lo * (1 - 1e-12) && v <= hi * (1 + 1e-12); };
    std::vector<double> fd, fe, fb;
    for (int k = -10; k <= 10; ++k) {
      const double dl = res.best.delta + k * dstep;
      if (dl > 0.0 && dl < 1.0 && inside(dl, deltas.front(), deltas.back())) fd.push_back(dl);
      const double et = res.best.eta * std::exp(k * estep);
      if (inside(et, eta_lo, eta_hi) && (estep > 0.0 || k == 0)) fe.push_back(et);
      const double b = res.best.B * std::exp(k * bstep);
      if (inside(b, Bs.front(), Bs.back())) fb.push_back(b);
    }
    ScanResult fine = scan(d, spec, pl, fd, fe, fb, grid.workers);
    res.cells += fine.cells;
    if (fine.best.better_than(res.best)) res.best = fine.best;
  }
  UpperCertificate out;
  out.pipeline = pl;
  out.cells = res.cells;
  out.A = admissible_A(d, res.best.delta, res.best.eta, spec, pl);
  out.params = make_bound_params(d, res.best.delta, res.best.eta, res.best.B, spec);
  out.params.A = out.A.A;
  for (const auto& v : out.A.validity) out.params.validity.push_back(v);
  if (pl == Pipeline::generic) {
    out.params.validity.push_back(gate("y-in-range", y_in_range(out.params.y, spec.small_x()), out.params.y));
  }
  out.parts = upsilon(out.params, spec, pl);
  out.upsilon = out.parts.value;
  return out;
}

LowerBound lower_bound_mu(std::int64_t d, const DistributionSpec& spec, double delta, Pipeline pipeline) {
  require_finite_slope(spec);
  const Pipeline pl = resolve_pipeline(pipeline, spec);
  if (d < 2) throw Error("domain", "dimension must be >= 2");
  const auto& sx = spec.small_x();
  const double a = sx.a;
  const double dd = static_cast<double>(d);
  const double L = std::log(dd);
  LowerBound out{kNaN, delta, false, {}, {}};
  auto& pre = out.preconditions;
  pre.push_back(gate("delta-in-unit-interval", delta > 0.0 && delta < 1.0, delta));
  if (!all_satisfied(pre)) return out;

  const double x = (1.0 - delta) * L / (2.0 * a * dd);
  out.witnesses["x"] = x;
  // the partial-sum lemma holds with slack 0 for exponential laws, so d^-delta replaces d^-delta^2
  const double lemma_slack = pl == Pipeline::exponential ? 0.0 : delta;
  const double exponent = pl == Pipeline::exponential ? delta : delta * delta;
  const double summability = std::exp(2.0) * (1.0 - delta) * std::pow(dd, -exponent) * L;
  out.witnesses["summability_gate"] = summability;
  out.witnesses["tail_ratio"] = (1.0 + lemma_slack) / 2.0;
  out.witnesses["tail_cutoff_per_n"] = 2.0 * std::numbers::e * (1.0 - delta) * L;
  pre.push_back(gate("summability-gate", strictly_less(summability, 1.0), summability));

  if (pl == Pipeline::generic) {
    const double c = relative_C(sx);
    const double sx_root = std::sqrt(x);
    const double eps_eff = std::min({sx.eps0, std::exp(-2.0 * c / delta), 1.0});
    out.witnesses["sqrt_x"] = sx_root;
    out.witnesses["eps_effective"] = eps_eff;
    pre.push_back(gate("sqrt-x-le-eps", sx_root <= eps_eff, sx_root));
    const double linear = (1.0 + delta / 2.0) * a * sx_root;
    pre.push_back(gate("linear-cdf-bound-below-one", strictly_less(linear, 1.0), linear));
    const double t1 = sx_root * std::log(delta * a / 2.0);
    const double t2 = 2.0 * sx_root * std::log(sx_root);
    out.witnesses["exp_tail_term1"] = t1;
    out.witnesses["exp_tail_term2"] = t2;
    out.witnesses["exp_tail_term1_ge_third"] = t1 >= -1.0 / 3.0 ? 1.0 : 0.0;
    out.witnesses["exp_tail_term2_ge_third"] = t2 >= -1.0 / 3.0 ? 1.0 : 0.0;
    pre.push_back(gate("exp-tail-inequality", t1 + t2 >= -1.0, t1 + t2));
  }
  out.valid = all_satisfied(pre);
  if (out.valid) out.bound = x;
  return out;
}

AlphaStar alpha_star() {
  auto h = [](double a) { return 1.0 / std::tanh(a) - a; };
  auto tol = [](double lo, double hi) { return std::abs(hi - lo) <= 1e-14; };
  const auto [lo, hi] = boost::math::tools::bisect(h, 1.01, 2.0, tol);
  const double alpha = 0.5 * (lo + hi);
  return {alpha, std::sqrt(alpha * alpha - 1.0) / 2.0, h(alpha)};
}

InfIdentity alpha_star_inf_identity() {
  auto log_phi = [](double y) {
    const double up = (y + 1.0) / (2.0 * y) * std::log(y + 1.0);
    const double down = y > 1.0 ? (y - 1.0) / (2.0 * y) * std::log(y - 1.0) : 0.0;
    return up + down;
  };
  const auto [argmin, fmin] = boost::math::tools::brent_find_minima(log_phi, 1.0, 50.0, 40);
  const AlphaStar as = alpha_star();
  InfIdentity out{};
  out.argmin = argmin;
  out.inf_value = std::exp(fmin);
  out.target = std::numbers::e * 2.0 * as.companion;
  out.residual = std::abs(out.inf_value - out.target);
  return out;
}

LowerBound mu_star_lower(std::int64_t d, const DistributionSpec& spec, double delta, Pipeline pipeline) {
  require_finite_slope(spec);
  const Pipeline pl = resolve_pipeline(pipeline, spec);
  const auto& sx = spec.small_x();
  const double a = sx.a;
  const double dd = static_cast<double>(d);
  const AlphaStar as = alpha_star();
  const double s = 2.0 * as.companion;  // sqrt(alpha^2 - 1)
  LowerBound out{kNaN, delta, false, {}, {}};
  auto& pre = out.preconditions;
  out.witnesses["alpha_star"] = as.alpha;

  if (pl == Pipeline::exponential) {
    pre.push_back(gate("delta-in-unit-interval", delta >= 0.0 && delta < 1.0, delta));
    pre.push_back(gate("d-ge-2", d >= 2, dd));
  } else {
    pre.push_back(gate("delta-in-unit-interval", delta > 0.0 && delta < 1.0, delta));
    pre.push_back(gate("d-ge-2", d >= 2, dd));
    if (all_satisfied(pre)) {
      const double c = relative_C(sx);
      const double need = s * s / (4.0 * a * a) * std::max({std::pow(sx.eps0, -4.0), std::exp(8.0 * c / delta), 1.0});
      out.witnesses["dimension_floor"] = need;
      pre.push_back(gate("dimension-floor", dd >= need, need));
      const double lhs = std::sqrt(2.0 * a) / std::sqrt(s) * std::pow(dd, 0.25) - 0.5 * std::log(dd);
      const double rhs = std::log(4.0 / (delta * (1.0 - delta) * s));
      out.witnesses["tail_lhs"] = lhs;
      out.witnesses["tail_rhs"] = rhs;
      pre.push_back(gate("exp-tail-inequality", lhs >= rhs, lhs - rhs));
    }
  }
  out.valid = all_satisfied(pre);
  if (out.valid) out.bound = s / (2.0 * a * std::sqrt(dd)) * (1.0 - delta);
  return out;
}

namespace {

// best valid bound over the candidates; ties keep the first (smallest delta)
LowerBound best_lower(const std::vector<double>& deltas, const std::function<LowerBound(double)>& eval) {
  std::optional<LowerBound> best;
  std::optional<LowerBound> first;
  for (double dl : deltas) {
    LowerBound lb = eval(dl);
    if (!first) first = lb;
    if (lb.valid && (!best || lb.bound > best->bound)) best = std::move(lb);
  }
  if (best) return *best;
  return *first;
}

void append_prefixed(std::vector<Precondition>& to, const std::string& prefix, const std::vector<Precondition>& from) {
  for (const auto& p : from) to.push_back({prefix + p.name, p.satisfied, p.value});
}

}  // namespace

ShapeCertificate shape_certificate(std::int64_t d, const DistributionSpec& spec, const ShapeOptions& options) {
  require_finite_slope(spec);
  const Pipeline pl = resolve_pipeline(options.pipeline, spec);
  const double dd = static_cast<double>(d);
  ShapeCertificate cert{};
  cert.d = d;
  cert.spec_id = spec.id();
  cert.pipeline = pl;
  cert.grid = options.grid;
  cert.mu_upper = kInf;
  cert.mu_lower = kNaN;
  cert.mustar_lower = kNaN;
  cert.mustar_upper = std::sqrt(dd) * expected_min(spec, static_cast<int>(d)).value;
  auto& pre = cert.all_preconditions;

  if (options.compute_upper) {
    try {
      cert.upper = optimize_upper(d, spec, options.grid, pl);
      cert.mu_upper = cert.upper->upsilon;
    } catch (const Error& e) {
      if (e.code() != "no-valid-certificate-at-d") throw;
    }
    pre.push_back(gate("upper-admissible-region-nonempty", cert.upper.has_value(), cert.mu_upper));
    if (cert.upper) append_prefixed(pre, "upper.", cert.upper->params.validity);

    std::vector<double> sd;
    if (options.mustar_delta) {
      sd.push_back(*options.mustar_delta);
    } else {
      if (pl == Pipeline::exponential) sd.push_back(0.0);
      for (double v : options.grid.lower_deltas()) sd.push_back(v);
    }
    cert.mustar = best_lower(sd, [&](double dl) { return mu_star_lower(d, spec, dl, pl); });
    if (cert.mustar->valid) cert.mustar_lower = cert.mustar->bound;
    pre.push_back(gate("mustar-lower-valid", cert.mustar->valid, cert.mustar->delta));
    append_prefixed(pre, "mustar_lower.", cert.mustar->preconditions);
    const bool ball = cert.upper && cert.mustar->valid && strictly_less(cert.mu_upper, cert.mustar_lower);
    pre.push_back(gate("mu-upper-below-mustar-lower", ball, cert.mustar_lower - cert.mu_upper));
    cert.ball_excluded = ball;
    cert.cube_strict = ball;
  }

  if (options.compute_lower) {
    std::vector<double> ld;
    if (options.lower_delta) {
      ld.push_back(*options.lower_delta);
    } else {
      ld = options.grid.lower_deltas();
    }
    cert.lower = best_lower(ld, [&](double dl) { return lower_bound_mu(d, spec, dl, pl); });
    if (cert.lower->valid) cert.mu_lower = cert.lower->bound;
    pre.push_back(gate("mu-lower-valid", cert.lower->valid, cert.lower->delta));
    append_prefixed(pre, "mu_lower.", cert.lower->preconditions);
    const double scaled = std::sqrt(dd) * cert.mu_lower;
    const bool diamond = cert.lower->valid && strictly_less(cert.mustar_upper, scaled);
    pre.push_back(gate("mustar-upper-below-scaled-mu-lower", diamond, scaled - cert.mustar_upper));
    cert.diamond_strict = diamond;
  }
  return cert;
}

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::ball_excluded: return "ball_excluded";
    case Verdict::cube_strict: return "cube_strict";
    case Verdict::diamond_strict: return "diamond_strict";
  }
  return "unknown";
}

Verdict parse_verdict(const std::string& text) {
  for (Verdict v : {Verdict::ball_excluded, Verdict::cube_strict, Verdict::diamond_strict}) {
    if (verdict_name(v) == text) return v;
  }
  throw Error("usage", "unknown verdict '" + text + "'");
}

ThresholdResult find_threshold(const DistributionSpec& spec, Verdict verdict, const ThresholdOptions& options) {
  require_finite_slope(spec);
  if (options.start < 2) throw Error("domain", "threshold scan starts at d >= 2");
  ShapeOptions so = options.shape;
  so.compute_upper = verdict != Verdict::diamond_strict;
  so.compute_lower = verdict == Verdict::diamond_strict;

  ThresholdResult out{};
  std::map<std::int64_t, bool> memo;
  auto holds = [&](std::int64_t d) {
    if (auto it = memo.find(d); it != memo.end()) return it->second;
    const ShapeCertificate c = shape_certificate(d, spec, so);
    const bool ok = verdict == Verdict::diamond_strict ? c.diamond_strict : c.ball_excluded;
    memo[d] = ok;
    out.scanned.emplace_back(d, ok);
    return ok;
  };

  std::int64_t start = options.start;
  for (int attempt = 0; attempt < 16; ++attempt) {
    std::int64_t lo = start - 1;  // known failing or below the scan
    std::int64_t hi = start;
    while (!holds(hi)) {
      lo = hi;
      if (hi >= options.limit) {
        throw Error("threshold-not-found",
                    verdict_name(verdict) + " not certified for any scanned d <= " + std::to_string(options.limit));
      }
      hi = std::min(hi * 2, options.limit);
    }
    while (hi - lo > 1) {
      const std::int64_t mid = lo + (hi - lo) / 2;
      if (holds(mid)) {
        hi = mid;
      } else {
        lo = mid;
      }
    }
    out.spot_checks.clear();
    std::int64_t worst_fail = 0;
    std::int64_t prev = hi;
    for (int k = 1; k <= options.spot_checks; ++k) {
      std::int64_t d = hi + std::max<std::int64_t>(k, (hi * k + options.spot_checks - 1) / options.spot_checks);
      if (d <= prev) d = prev + 1;
      prev = d;
      const bool ok = holds(d);
      out.spot_checks.emplace_back(d, ok);
      if (!ok) worst_fail = std::max(worst_fail, d);
    }
    if (worst_fail == 0) {
      out.threshold = hi;
      return out;
    }
    start = worst_fail + 1;
  }
  throw Error("threshold-not-found", "spot checks kept failing above the bisection result");
}

}  // namespace fpp
