#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "fpp/distributions.hpp"

namespace fpp {

/// A point of Z^d stored sparsely: only nonzero coordinates, sorted by index.
/// Coordinate indices are 1-based, in [1, d].
class Vertex {
 public:
  struct Entry {
    std::uint32_t index;
    std::int64_t value;
    friend bool operator==(const Entry&, const Entry&) = default;
  };

  explicit Vertex(std::uint32_t dim);

  static Vertex origin(std::uint32_t dim) { return Vertex(dim); }
  /// scale * e_i
  static Vertex axis(std::uint32_t dim, std::uint32_t i, std::int64_t scale = 1);
  static Vertex from_dense(std::span<const std::int64_t> coords);

  std::uint32_t dim() const { return dim_; }
  std::int64_t operator[](std::uint32_t i) const;
  void set(std::uint32_t i, std::int64_t value);
  void shift(std::uint32_t i, std::int64_t delta) { set(i, (*this)[i] + delta); }
  Vertex shifted(std::uint32_t i, std::int64_t delta) const;

  std::span<const Entry> support() const { return entries_; }
  std::int64_t coordinate_sum() const;

  /// Order-independent 64-bit fingerprint; updated in O(1) by fingerprint_after_shift.
  std::uint64_t fingerprint() const;
  std::uint64_t fingerprint_after_shift(std::uint64_t current, std::uint32_t i, std::int64_t delta) const;
  /// True iff *this equals other shifted by delta * e_i.
  bool equals_shifted(const Vertex& other, std::uint32_t i, std::int64_t delta) const;

  void append_bytes(std::vector<std::uint8_t>& out) const;
  /// Serialization of this vertex shifted by delta * e_i, without materializing it.
  void append_bytes_shifted(std::vector<std::uint8_t>& out, std::uint32_t i, std::int64_t delta) const;
  std::vector<std::uint8_t> serialize() const;
  /// Inverse of serialize; throws on malformed input.
  static Vertex deserialize(std::span<const std::uint8_t> bytes);

  friend bool operator==(const Vertex&, const Vertex&) = default;

 private:
  std::uint32_t dim_;
  std::vector<Entry> entries_;
};

inline constexpr std::uint8_t kSerializationVersion = 1;

/// Contribution of coordinate (i, x) to Vertex::fingerprint; zero when x == 0.
std::uint64_t coordinate_fingerprint(std::uint32_t i, std::int64_t x);

/// Canonical serialization of a vertex given as dimension plus sorted support.
void append_support_bytes(std::vector<std::uint8_t>& out, std::uint32_t dim, std::span<const Vertex::Entry> support);

/// Canonical undirected nearest-neighbour edge <lo, lo + e_direction>.
struct EdgeKey {
  Vertex lo;
  std::uint32_t direction;

  /// The edge between v and v + sign * e_i, canonicalized.
  static EdgeKey between(const Vertex& v, std::uint32_t i, int sign);

  void append_bytes(std::vector<std::uint8_t>& out) const;
  std::vector<std::uint8_t> serialize() const;

  friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
};

namespace restrict {
struct None {};
struct PositiveDirectionsOnly {};
struct FixedCoordinate {
  std::uint32_t index;
  std::int64_t value;
};
struct CoordinateWindow {
  std::uint32_t index;
  std::int64_t lo;
  std::int64_t hi;
};
}  // namespace restrict

using Restriction =
    std::variant<restrict::None, restrict::PositiveDirectionsOnly, restrict::FixedCoordinate, restrict::CoordinateWindow>;

/// Whether the step v -> v + sign * e_i is permitted.
bool step_allowed(const Restriction& r, const Vertex& v, std::uint32_t i, int sign);

struct Neighbor {
  Vertex vertex;
  EdgeKey edge;
};

std::vector<Neighbor> neighbors(const Vertex& v, const Restriction& restriction = restrict::None{});

/// Uniform in [0, 1) derived from (seed, serialized canonical key).
double edge_uniform(const EdgeKey& key, std::uint64_t master_seed);
/// Same, from pre-serialized edge bytes (the hot path of the search engine).
double edge_uniform_bytes(std::span<const std::uint8_t> edge_bytes, std::uint64_t master_seed);

double edge_weight(const EdgeKey& key, std::uint64_t master_seed, const DistributionSpec& spec);

}  // namespace fpp
