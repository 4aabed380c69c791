#include "fpp/estimators.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "fpp/error.hpp"
#include "fpp/numeric.hpp"

namespace fpp {

std::string quantity_name(Quantity q) {
  switch (q) {
    case Quantity::mu_e1: return "mu_e1";
    case Quantity::mu_star: return "mu_star";
    case Quantity::slab_mean: return "slab_mean";
    case Quantity::greedy_diag: return "greedy_diag";
  }
  return "unknown";
}

std::vector<std::string> EstimateRecord::flags() const {
  if (certificate_grade()) return {};
  return {"non-certificate-grade"};
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t replica) {
  std::uint8_t bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<std::uint8_t>(replica >> (8 * b));
  return hash_bytes(bytes, master_seed);
}

std::vector<PassageSample> farm_replicas(int replicas, unsigned workers,
                                         const std::function<PassageSample(int)>& fn) {
  std::vector<std::optional<PassageSample>> slots(static_cast<std::size_t>(replicas));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (int r = next++; r < replicas; r = next++) {
      try {
        slots[static_cast<std::size_t>(r)] = fn(r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = replicas;
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max(replicas, 1))));
  if (n_threads == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);
  std::vector<PassageSample> out;
  out.reserve(slots.size());
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

EstimateRecord summarize(Quantity q, std::string target, std::uint32_t d, std::int64_t n, std::uint64_t master_seed,
                         const std::vector<double>& values, const std::vector<bool>& exact) {
  EstimateRecord rec{q, std::move(target), d, n, static_cast<int>(values.size()), 0.0, 0.0, 0.0, master_seed, values, exact};
  CompensatedSum sum;
  std::size_t k = 0;
  for (std::size_t r = 0; r < values.size(); ++r) {
    if (!exact[r]) continue;
    sum.add(values[r]);
    ++k;
  }
  rec.exact_fraction = values.empty() ? 0.0 : static_cast<double>(k) / static_cast<double>(values.size());
  if (k == 0) {
    rec.mean = std::numeric_limits<double>::quiet_NaN();
    rec.std_error = std::numeric_limits<double>::quiet_NaN();
    return rec;
  }
  rec.mean = sum.value() / static_cast<double>(k);
  if (k >= 2) {
    CompensatedSum sq;
    for (std::size_t r = 0; r < values.size(); ++r) {
      if (exact[r]) sq.add((values[r] - rec.mean) * (values[r] - rec.mean));
    }
    rec.std_error = std::sqrt(std::max(0.0, sq.value()) / static_cast<double>(k - 1) / static_cast<double>(k));
  }
  return rec;
}

namespace {

void check_counts(int replicas, std::int64_t n) {
  if (replicas < 2) throw Error("domain", "replicas must be >= 2");
  if (n < 1) throw Error("domain", "n must be >= 1");
}

EstimateRecord run_passage(Quantity q, std::uint32_t d, const DistributionSpec& spec, std::int64_t n, int replicas,
                           std::uint64_t master_seed, const EstimatorOptions& opts, const Target& target,
                           std::optional<std::int64_t> box_half_width) {
  SearchCaps caps = opts.caps;
  if (box_half_width && !caps.box) caps.box = CoordinateBox{-*box_half_width, *box_half_width};
  const auto samples = farm_replicas(replicas, opts.workers, [&](int r) {
    return first_passage_box_doubling(d, target, derive_seed(master_seed, static_cast<std::uint64_t>(r)), spec, caps);
  });
  std::vector<double> values;
  std::vector<bool> exact;
  for (const auto& s : samples) {
    values.push_back(s.value / static_cast<double>(n));
    exact.push_back(s.exact);
  }
  return summarize(q, target_name(target), d, n, master_seed, values, exact);
}

}  // namespace

EstimateRecord estimate_mu_e1(std::uint32_t d, const DistributionSpec& spec, std::int64_t n, int replicas,
                              std::uint64_t master_seed, const EstimatorOptions& opts) {
  check_counts(replicas, n);
  std::optional<std::int64_t> half;
  if (opts.box_margin) half = n + *opts.box_margin;
  return run_passage(Quantity::mu_e1, d, spec, n, replicas, master_seed, opts, target::HyperplaneX1{n}, half);
}

EstimateRecord estimate_mu_e1_point(std::uint32_t d, const DistributionSpec& spec, std::int64_t n, int replicas,
                                    std::uint64_t master_seed, const EstimatorOptions& opts) {
  check_counts(replicas, n);
  std::optional<std::int64_t> half;
  if (opts.box_margin) half = n + *opts.box_margin;
  return run_passage(Quantity::mu_e1, d, spec, n, replicas, master_seed, opts, target::Point{Vertex::axis(d, 1, n)},
                     half);
}

EstimateRecord estimate_mu_star(std::uint32_t d, const DistributionSpec& spec, std::int64_t n, int replicas,
                                std::uint64_t master_seed, const EstimatorOptions& opts) {
  check_counts(replicas, n);
  return run_passage(Quantity::mu_star, d, spec, n, replicas, master_seed, opts, target::DiagonalPlane{n},
                     std::nullopt);
}

EstimateRecord estimate_slab_mean(std::uint32_t d, const DistributionSpec& spec, int replicas,
                                  std::uint64_t master_seed, const EstimatorOptions& opts) {
  check_counts(replicas, 1);
  return run_passage(Quantity::slab_mean, d, spec, 1, replicas, master_seed, opts, target::SlabS01{}, std::nullopt);
}

double greedy_diagonal_walk(std::uint32_t d, const DistributionSpec& spec, std::int64_t n, std::uint64_t seed) {
  if (n < 1) throw Error("domain", "n must be >= 1");
  const std::int64_t steps = n * ceil_sqrt(d);
  Vertex v = Vertex::origin(d);
  double total = 0.0;
  for (std::int64_t s = 0; s < steps; ++s) {
    double best = std::numeric_limits<double>::infinity();
    std::uint32_t best_k = 1;
    for (std::uint32_t k = 1; k <= d; ++k) {
      const double w = edge_weight(EdgeKey{v, k}, seed, spec);
      if (w < best) {
        best = w;
        best_k = k;
      }
    }
    total += best;
    v.shift(best_k, 1);
  }
  return total;
}

EstimateRecord greedy_diagonal_bound(std::uint32_t d, const DistributionSpec& spec, std::int64_t n, int replicas,
                                     std::uint64_t master_seed, unsigned workers) {
  check_counts(replicas, n);
  const auto samples = farm_replicas(replicas, workers, [&](int r) {
    const std::uint64_t seed = derive_seed(master_seed, static_cast<std::uint64_t>(r));
    const double t = greedy_diagonal_walk(d, spec, n, seed);
    return PassageSample{t, target::DiagonalPlane{n}, 0, seed, true, StopReason::reached, false};
  });
  std::vector<double> values;
  std::vector<bool> exact;
  for (const auto& s : samples) {
    values.push_back(s.value / static_cast<double>(n));
    exact.push_back(true);
  }
  return summarize(Quantity::greedy_diag, "greedy_walk", d, n, master_seed, values, exact);
}

std::int64_t default_mu_n(std::uint32_t d) {
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(2.0 * std::log(static_cast<double>(d)))));
}

}  // namespace fpp
