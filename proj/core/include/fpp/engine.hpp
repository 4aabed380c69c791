#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>

#include "fpp/distributions.hpp"
#include "fpp/lattice.hpp"

namespace fpp {

/// Window applied to every coordinate of every explored vertex.
struct CoordinateBox {
  std::int64_t lo;
  std::int64_t hi;
};

struct SearchCaps {
  std::uint64_t max_settled = 5'000'000;
  std::optional<double> max_time;
  std::optional<CoordinateBox> box;
};

namespace target {
struct Point {
  Vertex v;
};
/// H_n = {x_1 = n}
struct HyperplaneX1 {
  std::int64_t n;
};
/// {x_1 + ... + x_d = n * ceil(sqrt(d))}
struct DiagonalPlane {
  std::int64_t n;
};
/// Paths confined to x_1 = 0 except for a final +e_1 step.
struct SlabS01 {};
}  // namespace target

using Target = std::variant<target::Point, target::HyperplaneX1, target::DiagonalPlane, target::SlabS01>;

std::string target_name(const Target& t);

enum class StopReason { reached, settled_cap, time_cap, exhausted };

struct PassageSample {
  double value;  ///< exact passage time, or the best known upper bound when !exact
  Target target;
  std::uint64_t settled_count;
  std::uint64_t seed;
  bool exact;
  StopReason stop;
  /// Some relaxation was cut by the coordinate box.
  bool box_touched;
};

/// Smallest integer >= sqrt(d).
std::int64_t ceil_sqrt(std::int64_t d);

/// Dijkstra from the origin over the implicit weighted lattice Z^d.
///
/// Weights come from edge_weight(key, master_seed, spec). The search stops
/// when the first target vertex is settled (nonnegative weights make that
/// value optimal) or when a cap trips. With a coordinate box, the result is
/// flagged exact only if no relaxation cut by the box could have undercut it.
PassageSample first_passage(std::uint32_t d, const Target& target, std::uint64_t master_seed,
                            const DistributionSpec& spec, const SearchCaps& caps);

/// first_passage, doubling the coordinate box while the box (and not another
/// cap) is what keeps the result from being exact.
PassageSample first_passage_box_doubling(std::uint32_t d, const Target& target, std::uint64_t master_seed,
                                         const DistributionSpec& spec, SearchCaps caps, int max_doublings = 4);

}  // namespace fpp
