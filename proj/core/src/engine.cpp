#include "fpp/engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <vector>

#include "fpp/error.hpp"

namespace fpp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::uint32_t kNoVertex = std::numeric_limits<std::uint32_t>::max();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Explored vertices: supports packed into one pool plus an open-addressing index keyed by fingerprint.
class VertexStore {
 public:
  using Entry = Vertex::Entry;

  VertexStore() { slots_.assign(1u << 12, Slot{0, kNoVertex}); }

  std::span<const Entry> support(std::uint32_t id) const {
    return {pool_.data() + offset_[id], pool_.data() + offset_[id + 1]};
  }

  std::uint32_t find(std::uint64_t fp, std::span<const Entry> support) const {
    const std::size_t mask = slots_.size() - 1;
    for (std::size_t s = fp & mask;; s = (s + 1) & mask) {
      const Slot& slot = slots_[s];
      if (slot.id == kNoVertex) return kNoVertex;
      if (slot.fp == fp && std::ranges::equal(this->support(slot.id), support)) return slot.id;
    }
  }

  std::uint32_t insert(std::span<const Entry> support, std::uint64_t fp) {
    if (2 * (count_ + 1) > slots_.size()) grow();
    const auto id = count_++;
    pool_.insert(pool_.end(), support.begin(), support.end());
    offset_.push_back(pool_.size());
    place({fp, id});
    return id;
  }

 private:
  struct Slot {
    std::uint64_t fp;
    std::uint32_t id;
  };

  void place(Slot slot) {
    const std::size_t mask = slots_.size() - 1;
    std::size_t s = slot.fp & mask;
    while (slots_[s].id != kNoVertex) s = (s + 1) & mask;
    slots_[s] = slot;
  }

  void grow() {
    std::vector<Slot> old(slots_.size() * 2, Slot{0, kNoVertex});
    old.swap(slots_);
    for (const Slot& slot : old) {
      if (slot.id != kNoVertex) place(slot);
    }
  }

  std::uint32_t count_ = 0;
  std::vector<Entry> pool_;
  std::vector<std::size_t> offset_{0};
  std::vector<Slot> slots_;
};

// support of `from` with coordinate i replaced by value
void replace_coordinate(std::span<const Vertex::Entry> from, std::uint32_t i, std::int64_t value,
                        std::vector<Vertex::Entry>& out) {
  out.clear();
  bool written = false;
  for (const auto& e : from) {
    if (!written && e.index >= i) {
      if (value != 0) out.push_back({i, value});
      written = true;
      if (e.index == i) continue;
    }
    out.push_back(e);
  }
  if (!written && value != 0) out.push_back({i, value});
}

struct HeapEntry {
  double dist;
  std::uint32_t parent;
  std::int32_t step;  // +-i for a step along e_i; 0 for the origin
};

bool in_box(const std::optional<CoordinateBox>& box, std::int64_t value) {
  return !box || (value >= box->lo && value <= box->hi);
}

}  // namespace

std::string target_name(const Target& t) {
  return std::visit(Overloaded{
                        [](const target::Point&) { return std::string("point"); },
                        [](const target::HyperplaneX1&) { return std::string("hyperplane_x1"); },
                        [](const target::DiagonalPlane&) { return std::string("diagonal_plane"); },
                        [](const target::SlabS01&) { return std::string("slab_s01"); },
                    },
                    t);
}

std::int64_t ceil_sqrt(std::int64_t d) {
  if (d < 0) throw Error("domain", "ceil_sqrt of negative");
  auto r = static_cast<std::int64_t>(std::sqrt(static_cast<double>(d)));
  while (r * r < d) ++r;
  while (r > 0 && (r - 1) * (r - 1) >= d) --r;
  return r;
}

PassageSample first_passage(std::uint32_t d, const Target& target, std::uint64_t master_seed,
                            const DistributionSpec& spec, const SearchCaps& caps) {
  if (d == 0) throw Error("domain", "dimension must be positive");
  if (caps.max_settled == 0) throw Error("degenerate-caps", "max_settled = 0 cannot settle the origin");
  if (caps.max_time && *caps.max_time < 0.0) throw Error("degenerate-caps", "max_time < 0 cannot settle the origin");
  if (caps.box && !(caps.box->lo <= 0 && caps.box->hi >= 0)) {
    throw Error("degenerate-caps", "coordinate box excludes the origin");
  }

  const bool slab = std::holds_alternative<target::SlabS01>(target);
  const auto* point = std::get_if<target::Point>(&target);
  if (point && point->v.dim() != d) throw Error("domain", "target point has wrong dimension");
  std::optional<std::int64_t> plane_x1;
  std::optional<std::int64_t> plane_sum;
  if (const auto* h = std::get_if<target::HyperplaneX1>(&target)) plane_x1 = h->n;
  if (const auto* g = std::get_if<target::DiagonalPlane>(&target)) plane_sum = g->n * ceil_sqrt(d);
  if (point && caps.box) {
    for (const auto& e : point->v.support()) {
      if (!in_box(caps.box, e.value)) throw Error("degenerate-caps", "coordinate box excludes the target point");
    }
  }

  const std::optional<std::int64_t> plane_level = plane_x1 ? plane_x1 : plane_sum;
  auto level_of = [&](std::span<const Vertex::Entry> support) -> std::int64_t {
    if (plane_x1) return (!support.empty() && support.front().index == 1) ? support.front().value : 0;
    std::int64_t total = 0;
    for (const auto& e : support) total += e.value;
    return total;
  };
  auto is_target = [&](std::span<const Vertex::Entry> support) {
    if (plane_level) return level_of(support) == *plane_level;
    if (point) return std::ranges::equal(support, point->v.support());
    return false;
  };

  // Only settled vertices are stored; a heap entry names its vertex as a settled parent plus one step.
  VertexStore store;
  std::vector<std::uint64_t> fingerprints;
  auto materialize = [&](const HeapEntry& e, std::vector<Vertex::Entry>& out) -> std::uint64_t {
    if (e.parent == kNoVertex) {
      out.clear();
      return 0;
    }
    const auto from = store.support(e.parent);
    const std::uint32_t i = static_cast<std::uint32_t>(e.step < 0 ? -e.step : e.step);
    const auto it = std::ranges::lower_bound(from, i, {}, &Vertex::Entry::index);
    const std::int64_t x = (it != from.end() && it->index == i) ? it->value : 0;
    const std::int64_t next = x + (e.step < 0 ? -1 : 1);
    replace_coordinate(from, i, next, out);
    return fingerprints[e.parent] - coordinate_fingerprint(i, x) + coordinate_fingerprint(i, next);
  };

  std::vector<Vertex::Entry> tie_a;
  std::vector<Vertex::Entry> tie_b;
  std::vector<std::uint8_t> bytes_a;
  std::vector<std::uint8_t> bytes_b;
  auto lower_priority = [&](const HeapEntry& a, const HeapEntry& b) {
    if (a.dist != b.dist) return a.dist > b.dist;
    materialize(a, tie_a);
    materialize(b, tie_b);
    bytes_a.clear();
    bytes_b.clear();
    append_support_bytes(bytes_a, d, tie_a);
    append_support_bytes(bytes_b, d, tie_b);
    return bytes_b < bytes_a;
  };
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, decltype(lower_priority)> heap(lower_priority);
  heap.push({0.0, kNoVertex, 0});

  PassageSample out{kInf, target, 0, master_seed, false, StopReason::exhausted, false};
  double blocked_min = kInf;   // cheapest relaxation the box refused
  double best_target = kInf;   // best tentative target / slab value
  bool reached = false;
  std::vector<Vertex::Entry> su;
  std::vector<Vertex::Entry> sv;
  std::vector<std::uint8_t> up_bytes;
  std::vector<std::uint8_t> down_bytes;

  auto put_direction = [](std::vector<std::uint8_t>& bytes, std::uint32_t i) {
    std::uint8_t* p = bytes.data() + bytes.size() - 4;
    for (std::size_t b = 0; b < 4; ++b) p[b] = static_cast<std::uint8_t>(i >> (8 * b));
  };

  while (!heap.empty()) {
    const HeapEntry top = heap.top();
    heap.pop();
    const std::uint64_t fp_u = materialize(top, su);
    if (store.find(fp_u, su) != kNoVertex) continue;

    if (slab && top.dist >= best_target) {
      reached = true;
      break;
    }
    if (caps.max_time && top.dist > *caps.max_time) {
      out.stop = StopReason::time_cap;
      break;
    }
    if (out.settled_count >= caps.max_settled) {
      out.stop = StopReason::settled_cap;
      break;
    }

    const std::uint32_t u = store.insert(su, fp_u);
    fingerprints.push_back(fp_u);
    ++out.settled_count;
    if (!slab && is_target(su)) {
      best_target = top.dist;
      reached = true;
      break;
    }

    const double dist_u = top.dist;
    const std::int64_t level_u = plane_level ? level_of(su) : 0;
    up_bytes.clear();
    append_support_bytes(up_bytes, d, su);
    up_bytes.resize(up_bytes.size() + 4);

    std::size_t k = 0;
    for (std::uint32_t i = 1; i <= d; ++i) {
      while (k < su.size() && su[k].index < i) ++k;
      const std::int64_t x = (k < su.size() && su[k].index == i) ? su[k].value : 0;
      for (int sign : {1, -1}) {
        const bool slab_exit = slab && i == 1;
        if (slab_exit && sign < 0) continue;
        const std::int64_t next_coord = x + sign;
        if (!slab_exit) {
          replace_coordinate(su, i, next_coord, sv);
          const std::uint64_t fp_v = fp_u - coordinate_fingerprint(i, x) + coordinate_fingerprint(i, next_coord);
          if (store.find(fp_v, sv) != kNoVertex) continue;
        }

        // the edge's lower endpoint is u for +e_i and u - e_i otherwise
        std::vector<std::uint8_t>* edge_bytes = &up_bytes;
        if (sign < 0) {
          down_bytes.clear();
          append_support_bytes(down_bytes, d, sv);
          down_bytes.resize(down_bytes.size() + 4);
          edge_bytes = &down_bytes;
        }
        put_direction(*edge_bytes, i);
        const double w = spec.quantile(edge_uniform_bytes(*edge_bytes, master_seed));
        const double candidate = dist_u + w;

        if (!in_box(caps.box, next_coord)) {
          out.box_touched = true;
          blocked_min = std::min(blocked_min, candidate);
          continue;
        }
        if (slab_exit) {
          best_target = std::min(best_target, candidate);
          continue;
        }
        heap.push({candidate, u, sign * static_cast<std::int32_t>(i)});
        const bool hits_target = plane_level ? level_u + (plane_sum || i == 1 ? sign : 0) == *plane_level
                                             : (point && std::ranges::equal(sv, point->v.support()));
        if (hits_target) best_target = std::min(best_target, candidate);
      }
    }
  }

  if (heap.empty() && !reached && slab && best_target < kInf) reached = true;
  out.value = best_target;
  if (reached) {
    out.stop = StopReason::reached;
    out.exact = !(blocked_min < out.value);
  }
  return out;
}

PassageSample first_passage_box_doubling(std::uint32_t d, const Target& target, std::uint64_t master_seed,
                                         const DistributionSpec& spec, SearchCaps caps, int max_doublings) {
  PassageSample s = first_passage(d, target, master_seed, spec, caps);
  for (int k = 0; k < max_doublings && !s.exact && s.stop == StopReason::reached && caps.box; ++k) {
    caps.box->lo *= 2;
    caps.box->hi *= 2;
    if (caps.box->lo == 0 && caps.box->hi == 0) break;
    s = first_passage(d, target, master_seed, spec, caps);
  }
  return s;
}

}  // namespace fpp
