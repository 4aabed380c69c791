#pragma once

#include <algorithm>
#include <array>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "fpp/distributions.hpp"
#include "fpp/lattice.hpp"

namespace oracle {

// all (2d)^n walks, keep the self-avoiding ones
inline std::uint64_t naive_saw_count(int n, int d) {
  std::uint64_t total = 1;
  for (int i = 0; i < n; ++i) total *= static_cast<std::uint64_t>(2 * d);
  std::uint64_t count = 0;
  std::vector<std::vector<int>> pts;
  for (std::uint64_t code = 0; code < total; ++code) {
    pts.assign(1, std::vector<int>(d, 0));
    std::uint64_t c = code;
    bool ok = true;
    for (int s = 0; s < n && ok; ++s) {
      const int dir = static_cast<int>(c % (2 * d));
      c /= 2 * d;
      auto next = pts.back();
      next[dir / 2] += dir % 2 == 0 ? 1 : -1;
      for (const auto& q : pts) {
        if (q == next) ok = false;
      }
      pts.push_back(next);
    }
    if (ok) ++count;
  }
  return count;
}

// Minimum weight over every self-avoiding path from the origin to `target` inside [-R, R]^2,
// by depth-first enumeration. Branches are cut once their weight reaches the best complete path.
class BoxPathEnumerator {
 public:
  BoxPathEnumerator(int R, std::uint64_t seed, const fpp::DistributionSpec& spec) : R_(R), side_(2 * R + 1) {
    right_.assign(side_ * side_, 0.0);
    up_.assign(side_ * side_, 0.0);
    for (int x = -R; x <= R; ++x) {
      for (int y = -R; y <= R; ++y) {
        const std::array<std::int64_t, 2> c{x, y};
        const fpp::Vertex v = fpp::Vertex::from_dense(c);
        if (x < R) right_[idx(x, y)] = fpp::edge_weight(fpp::EdgeKey::between(v, 1, +1), seed, spec);
        if (y < R) up_[idx(x, y)] = fpp::edge_weight(fpp::EdgeKey::between(v, 2, +1), seed, spec);
      }
    }
  }

  double min_path(int tx, int ty) {
    best_ = std::numeric_limits<double>::infinity();
    visited_.assign(side_ * side_, false);
    tx_ = tx;
    ty_ = ty;
    paths_ = 0;
    visited_[idx(0, 0)] = true;
    dfs(0, 0, 0.0);
    return best_;
  }

  std::uint64_t paths_completed() const { return paths_; }

 private:
  int idx(int x, int y) const { return (x + R_) * side_ + (y + R_); }

  void dfs(int x, int y, double cost) {
    if (cost >= best_) return;
    if (x == tx_ && y == ty_) {
      best_ = cost;
      ++paths_;
      return;
    }
    struct Step {
      int x, y;
      double w;
    };
    std::array<Step, 4> steps{};
    int k = 0;
    if (x < R_) steps[k++] = {x + 1, y, right_[idx(x, y)]};
    if (x > -R_) steps[k++] = {x - 1, y, right_[idx(x - 1, y)]};
    if (y < R_) steps[k++] = {x, y + 1, up_[idx(x, y)]};
    if (y > -R_) steps[k++] = {x, y - 1, up_[idx(x, y - 1)]};
    // cheap edges first so good paths are found early
    std::sort(steps.begin(), steps.begin() + k, [](const Step& a, const Step& b) { return a.w < b.w; });
    for (int i = 0; i < k; ++i) {
      const int j = idx(steps[i].x, steps[i].y);
      if (visited_[j]) continue;
      visited_[j] = true;
      dfs(steps[i].x, steps[i].y, cost + steps[i].w);
      visited_[j] = false;
    }
  }

  int R_;
  int side_;
  std::vector<double> right_;
  std::vector<double> up_;
  std::vector<bool> visited_;
  double best_ = 0.0;
  int tx_ = 0;
  int ty_ = 0;
  std::uint64_t paths_ = 0;
};

inline double log_choose(double n, double k) { return std::lgamma(n + 1) - std::lgamma(k + 1) - std::lgamma(n - k + 1); }

// overlap factor, every sum run from its last index down
inline double overlap_factor_reverse(long n, long p, long l) {
  const double P = static_cast<double>(p);
  const double Q = 2.0 * P;
  const double nl = static_cast<double>(n - l);
  const double n1 = static_cast<double>(n - 1);
  auto bubbles = [&](long top, long from) {
    double s = 0.0;
    for (long K = std::min(l, n - 1); K >= from; --K) {
      if (K - 1 > top) continue;
      s += std::exp(log_choose(top, K - 1) + 2.0 * (log_choose(n1, K) + std::lgamma(K + 1.0)) - K * std::log(P));
    }
    return s;
  };
  double V = 0.0;
  if (l >= 4) V = 4.0 * P * P * bubbles(l - 2, 4);
  double IV = 0.0;
  if (l >= 4) {
    IV = Q * ((l - 2) * (l - 3) / 2) * (2.0 * nl * nl / (Q * Q) + 8.0 * std::pow(n1, 4) * nl * nl / (Q * Q * Q));
  }
  const double g2 = l > 2 ? static_cast<double>(l - 2) : 0.0;
  const double III = Q * g2 *
                     (4.0 * n1 * n1 * nl * nl / (Q * Q * Q) + 2.0 * (nl - 1) * (nl - 1) * std::pow(nl - 2, 4) / std::pow(Q, 4) +
                      6.0 * std::pow((nl - 1) / Q, 2));
  double mid = 0.0;
  for (long a = n - l - 1; a >= 1; --a) {
    for (long b = n - l - 1; b >= 1; --b) {
      mid += std::pow((a + b - 2) / Q, 2) * std::pow((2 * n - 2 * l - a - b - 2) / Q, 2);
    }
  }
  const double II = Q * ((nl - 1) * (nl - 1) / (Q * Q) + mid + 2.0 * std::pow((2 * nl - 2) / Q, 2));
  const double I = 2.0 * P * bubbles(l - 1, 2) + (nl - 1) * (nl - 1) / P;
  return V + IV + III + II + I + 1.0;
}

struct ReverseUpsilon {
  double A;
  double upsilon;
};

// Exponential(rate 1) pipeline: A from Gamma CDF ratios, then the two-term upper bound.
inline ReverseUpsilon exponential_upsilon(long d, double delta, double eta, double B) {
  const double L = std::log(static_cast<double>(d));
  const long n = static_cast<long>(std::floor(L));
  const double x = L / (2.0 * (1.0 - delta) * d);
  const long m = static_cast<long>(std::floor(d / (std::pow(delta, 1.0 + eta) * L)));
  const long p = d - m;
  const double t = 2.0 * p - 1.0;
  const double growth = t - std::log(t);
  const double g = (n - 1) * (std::log(t) + 1.0) / growth;
  const double Gn = boost::math::gamma_p(static_cast<double>(n), x);
  double series = 0.0;
  for (long l = n - 1; l >= 1; --l) {
    series += boost::math::gamma_p(static_cast<double>(n - l), x) / Gn * std::pow(2.0 * p, -static_cast<double>(l)) *
              overlap_factor_reverse(n, p, l);
  }
  const double EN = std::pow(growth, static_cast<double>(n - 1)) * Gn;
  const double A = std::exp(2.0 * g) * series + 1.0 / EN + 1.0;
  const double y = B * delta * L / (2.0 * d);
  const double base = 1.0 - (1.0 - std::exp(-y)) / A;
  const double tail = std::pow(base, static_cast<double>(m - 1));
  const double first = L / (2.0 * d) * (1.0 / (1.0 - delta) + B * delta);
  return {A, tail + first};
}

}  // namespace oracle
