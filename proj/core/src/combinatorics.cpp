#include "fpp/combinatorics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <boost/multiprecision/cpp_int.hpp>

#include "fpp/engine.hpp"
#include "fpp/error.hpp"
#include "fpp/numeric.hpp"

namespace fpp {

namespace {

using boost::multiprecision::cpp_int;
using Point = std::vector<int>;

cpp_int big_pow(cpp_int base, int e) {
  cpp_int r = 1;
  for (int i = 0; i < e; ++i) r *= base;
  return r;
}

cpp_int big_binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  cpp_int r = 1;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

cpp_int big_factorial(int n) {
  cpp_int r = 1;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

struct SawCounter {
  int n;
  int d;
  std::vector<Point> path;
  std::uint64_t count = 0;

  bool visited(const Point& q) const { return std::find(path.begin(), path.end(), q) != path.end(); }

  void extend(int depth) {
    if (depth == n) {
      ++count;
      return;
    }
    Point next = path.back();
    for (int i = 0; i < d; ++i) {
      for (int s : {1, -1}) {
        next[i] += s;
        if (!visited(next)) {
          path.push_back(next);
          extend(depth + 1);
          path.pop_back();
        }
        next[i] -= s;
      }
    }
  }
};

}  // namespace

std::uint64_t saw_count(int n, int d, std::uint64_t budget) {
  if (n < 0 || d < 1) throw Error("domain", "saw_count needs n >= 0 and d >= 1");
  if (n == 0) return 1;
  const double log_estimate = std::log(2.0 * d) + (n - 1) * std::log(2.0 * d - 1.0);
  if (log_estimate >= std::log(static_cast<double>(budget))) {
    throw Error("enumeration-too-large", "2d(2d-1)^(n-1) exceeds the enumeration budget");
  }
  SawCounter c{n, d, {Point(static_cast<std::size_t>(d), 0)}};
  c.extend(0);
  return c.count;
}

XiBounds xi_bounds(int d, int n) {
  if (d < 1 || n < 1) throw Error("domain", "xi_bounds needs d >= 1 and n >= 1");
  XiBounds b{};
  const double two_d = 2.0 * d;
  b.lower_const = two_d - 1.0 - std::log(two_d - 1.0);
  b.root_count = std::pow(static_cast<double>(saw_count(n, d)), 1.0 / n);
  b.expansion = two_d - 1.0 - 1.0 / two_d - 3.0 / (two_d * two_d);
  b.holds = b.root_count >= b.lower_const;
  return b;
}

double OverlapStats::overlap_prob(int l) const {
  double total = 0.0;
  for (const auto& [key, prob] : table) {
    if (key.first == l) total += prob;
  }
  return total;
}

double OverlapStats::joint_prob(int l) const {
  const auto it = joint_endpoint.find(l);
  return it == joint_endpoint.end() ? 0.0 : it->second;
}

namespace {

// undirected edge between consecutive walk points, as (lower endpoint, axis)
using Edge = std::pair<Point, int>;

Edge edge_of(const Point& a, const Point& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i] ? Edge{a, static_cast<int>(i)} : Edge{b, static_cast<int>(i)};
  }
  throw Error("domain", "degenerate step");
}

struct Walk {
  std::vector<Point> points;
  std::vector<Edge> edges;  // sorted copy for lookup
  std::vector<Edge> ordered;
};

Walk make_walk(std::vector<Point> points) {
  Walk w{std::move(points), {}, {}};
  for (std::size_t k = 0; k + 1 < w.points.size(); ++k) w.ordered.push_back(edge_of(w.points[k], w.points[k + 1]));
  w.edges = w.ordered;
  std::sort(w.edges.begin(), w.edges.end());
  return w;
}

bool self_avoiding(const std::vector<Point>& pts) {
  std::set<Point> seen(pts.begin(), pts.end());
  return seen.size() == pts.size();
}

// (l, K) of the pair: shared edges and their runs along a
std::pair<int, int> overlap_of(const Walk& a, const Walk& b) {
  int l = 0;
  int runs = 0;
  bool in_run = false;
  for (const auto& e : a.ordered) {
    const bool shared = std::binary_search(b.edges.begin(), b.edges.end(), e);
    if (shared) {
      ++l;
      if (!in_run) ++runs;
    }
    in_run = shared;
  }
  return {l, runs};
}

void enumerate_saws(int p, int n, std::vector<Point>& path, std::vector<Walk>& out) {
  if (static_cast<int>(path.size()) == n + 1) {
    out.push_back(make_walk(path));
    return;
  }
  Point next = path.back();
  for (int i = 0; i < p; ++i) {
    for (int s : {1, -1}) {
      next[static_cast<std::size_t>(i)] += s;
      if (std::find(path.begin(), path.end(), next) == path.end()) {
        path.push_back(next);
        enumerate_saws(p, n, path, out);
        path.pop_back();
      }
      next[static_cast<std::size_t>(i)] -= s;
    }
  }
}

}  // namespace

OverlapStats rw_overlap_stats(int p, int n, const OverlapMode& mode, double budget) {
  if (p < 1 || n < 1) throw Error("domain", "rw_overlap_stats needs p >= 1 and n >= 1");
  OverlapStats st{p, n, mode, {}, {}, 0.0};

  if (mode.kind == OverlapMode::exact_enumeration) {
    if (2.0 * n * std::log(2.0 * p) >= std::log(budget)) {
      throw Error("enumeration-too-large", "(2p)^(2n) exceeds the enumeration budget");
    }
    // only self-avoiding walks contribute; each walk has mass (2p)^-n
    std::vector<Walk> saws;
    std::vector<Point> path{Point(static_cast<std::size_t>(p), 0)};
    enumerate_saws(p, n, path, saws);
    std::map<std::pair<int, int>, std::uint64_t> counts;
    std::map<int, std::uint64_t> joint;
    for (const auto& a : saws) {
      for (const auto& b : saws) {
        const auto key = overlap_of(a, b);
        ++counts[key];
        if (a.points.back() == b.points.back()) ++joint[key.first];
      }
    }
    const double log_total = 2.0 * n * std::log(2.0 * p);
    for (const auto& [key, c] : counts) st.table[key] = std::exp(std::log(static_cast<double>(c)) - log_total);
    for (const auto& [l, c] : joint) st.joint_endpoint[l] = std::exp(std::log(static_cast<double>(c)) - log_total);
    const double saw_mass = std::exp(std::log(static_cast<double>(saws.size())) - n * std::log(2.0 * p));
    st.sa_pair_prob = saw_mass * saw_mass;
    return st;
  }

  if (mode.samples == 0) throw Error("domain", "monte_carlo mode needs samples > 0");
  std::mt19937_64 rng(mode.seed);
  std::uniform_int_distribution<int> step(0, 2 * p - 1);
  auto sample_walk = [&] {
    std::vector<Point> pts{Point(static_cast<std::size_t>(p), 0)};
    for (int k = 0; k < n; ++k) {
      Point q = pts.back();
      const int s = step(rng);
      q[static_cast<std::size_t>(s / 2)] += (s % 2 == 0) ? 1 : -1;
      pts.push_back(std::move(q));
    }
    return pts;
  };
  std::map<std::pair<int, int>, std::uint64_t> counts;
  std::map<int, std::uint64_t> joint;
  std::uint64_t sa_pairs = 0;
  for (std::uint64_t t = 0; t < mode.samples; ++t) {
    auto pa = sample_walk();
    auto pb = sample_walk();
    if (!self_avoiding(pa) || !self_avoiding(pb)) continue;
    ++sa_pairs;
    const Walk a = make_walk(std::move(pa));
    const Walk b = make_walk(std::move(pb));
    const auto key = overlap_of(a, b);
    ++counts[key];
    if (a.points.back() == b.points.back()) ++joint[key.first];
  }
  const auto total = static_cast<double>(mode.samples);
  for (const auto& [key, c] : counts) st.table[key] = static_cast<double>(c) / total;
  for (const auto& [l, c] : joint) st.joint_endpoint[l] = static_cast<double>(c) / total;
  st.sa_pair_prob = static_cast<double>(sa_pairs) / total;
  return st;
}

std::string overlap_csv(const OverlapStats& stats, bool header) {
  std::ostringstream os;
  if (header) os << "p,n,l,K,prob,bound,ratio\n";
  auto row = [&](int l, int K, double prob) {
    const double bound = std::pow(2.0 * stats.p, -l);
    os << stats.p << ',' << stats.n << ',' << l << ',' << K << ',' << shortest_repr(prob) << ','
       << shortest_repr(bound) << ',' << shortest_repr(prob / bound) << '\n';
  };
  std::set<int> ls;
  for (const auto& [key, prob] : stats.table) ls.insert(key.first);
  for (int l : ls) {
    for (const auto& [key, prob] : stats.table) {
      if (key.first == l && key.second > 0) row(l, key.second, prob);
    }
    row(l, 0, stats.overlap_prob(l));
  }
  return os.str();
}

PatternCount pattern_count_bound(int l, int K, int n) {
  if (!(1 <= K && K <= l && l <= n)) throw Error("domain", "pattern_count_bound needs 1 <= K <= l <= n");
  const cpp_int inner = big_binomial(n, K) * big_factorial(K);
  const cpp_int lhs = big_pow(l, K - 1) * inner * inner * big_pow(2, K);
  const cpp_int rhs_times_l = big_pow(cpp_int(2) * l * n * n, K);
  PatternCount out{};
  out.lhs = lhs.convert_to<double>();
  out.rhs = rhs_times_l.convert_to<double>() / l;
  out.holds = lhs * l <= rhs_times_l;
  return out;
}

ReturnFacts rw_return_facts(int p, int m, double budget) {
  if (p < 1 || m < 1) throw Error("domain", "rw_return_facts needs p >= 1 and m >= 1");
  if (m * std::log(2.0 * p) >= std::log(budget)) {
    throw Error("enumeration-too-large", "(2p)^m exceeds the enumeration budget");
  }
  // exact endpoint counts, tracked with the position after two steps
  std::map<Point, std::uint64_t> endpoint;
  std::uint64_t returns = 0;
  std::vector<Point> path{Point(static_cast<std::size_t>(p), 0)};
  auto walk = [&](auto&& self, int depth, bool left_origin_at_two) -> void {
    if (depth == m) {
      ++endpoint[path.back()];
      const bool at_origin = std::all_of(path.back().begin(), path.back().end(), [](int v) { return v == 0; });
      if (m >= 2 && left_origin_at_two && at_origin) ++returns;
      return;
    }
    for (int i = 0; i < p; ++i) {
      for (int s : {1, -1}) {
        Point q = path.back();
        q[static_cast<std::size_t>(i)] += s;
        path.push_back(std::move(q));
        bool flag = left_origin_at_two;
        if (depth + 1 == 2) flag = std::any_of(path.back().begin(), path.back().end(), [](int v) { return v != 0; });
        self(self, depth + 1, flag);
        path.pop_back();
      }
    }
  };
  walk(walk, 0, false);

  std::uint64_t max_count = 0;
  for (const auto& [pt, c] : endpoint) max_count = std::max(max_count, c);
  const cpp_int total = big_pow(2 * p, m);
  ReturnFacts f{};
  f.max_point_prob = static_cast<double>(max_count) / total.convert_to<double>();
  f.two_step_return_prob = static_cast<double>(returns) / total.convert_to<double>();
  f.point_bound = 1.0 / (2.0 * p);
  f.return_bound = static_cast<double>((m - 2) * (m - 2)) / (4.0 * p * p);
  f.point_holds = cpp_int(max_count) * (2 * p) <= total;
  f.return_holds = cpp_int(returns) * (4 * p * p) <= cpp_int((m - 2) * (m - 2)) * total;
  return f;
}

PathCountBound path_count_bound(std::int64_t k, std::int64_t n, std::int64_t d, double rho) {
  if (rho < 0.0 || n < 1 || k < n || d < 1) throw Error("domain", "path_count_bound needs rho >= 0, k >= n >= 1");
  const double expo = -static_cast<double>(n) * rho +
                      static_cast<double>(k) / static_cast<double>(d) * (std::cosh(rho) - 1.0);
  const double log_bound = static_cast<double>(k) * std::log(2.0 * static_cast<double>(d)) + std::min(0.0, expo);
  return {log_bound, std::exp(log_bound)};
}

double optimal_rho(std::int64_t k, std::int64_t n, std::int64_t d) {
  return std::asinh(static_cast<double>(n) * static_cast<double>(d) / static_cast<double>(k));
}

double paths_ending_on_hyperplane(std::int64_t k, std::int64_t n, std::int64_t d) {
  if (k < 0 || d < 1) throw Error("domain", "paths_ending_on_hyperplane needs k >= 0, d >= 1");
  const std::int64_t target = n < 0 ? -n : n;
  // j steps along +-e_1 with net displacement n, the rest in the other 2d - 2 directions
  double total = 0.0;
  for (std::int64_t j = target; j <= k; j += 2) {
    if (d == 1 && j != k) continue;
    const double others = d == 1 ? 0.0 : static_cast<double>(k - j) * std::log(2.0 * static_cast<double>(d) - 2.0);
    total += std::exp(log_binomial(k, j) + log_binomial(j, (j + target) / 2) + others);
  }
  return total;
}

DiagonalCountBound diagonal_count_bound(std::int64_t k, std::int64_t n, std::int64_t d) {
  if (n < 1 || d < 1) throw Error("domain", "diagonal_count_bound needs n >= 1, d >= 1");
  const std::int64_t m = n * ceil_sqrt(d);
  const double ninf = -std::numeric_limits<double>::infinity();
  if (k < m || (k + m) % 2 != 0) return {ninf, ninf};
  const double kd = static_cast<double>(k);
  const double md = static_cast<double>(m);
  DiagonalCountBound b{};
  b.log_binomial_form = kd * std::log(2.0 * static_cast<double>(d)) + std::log(md / kd) +
                        log_binomial(k, (k + m) / 2) - kd * std::log(2.0);
  const double y = kd / md;
  const double denom_log = (y + 1.0) / (2.0 * y) * std::log(y + 1.0) +
                           (y > 1.0 ? (y - 1.0) / (2.0 * y) * std::log(y - 1.0) : 0.0);
  b.log_closed_form = -0.5 * std::log(md) + kd * (std::log(2.0 * static_cast<double>(d) * y) - denom_log);
  return b;
}

}  // namespace fpp
