#include "fpp/lattice.hpp"

#include <algorithm>
#include <bit>
#include <cstring>

#include "fpp/error.hpp"
#include "fpp/numeric.hpp"

namespace fpp {

namespace {

template <class T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  auto u = static_cast<std::make_unsigned_t<T>>(value);
  std::uint8_t buf[sizeof(T)];
  for (std::size_t b = 0; b < sizeof(T); ++b) buf[b] = static_cast<std::uint8_t>(u >> (8 * b));
  out.insert(out.end(), buf, buf + sizeof(T));
}

template <class T>
T get_le(std::span<const std::uint8_t> in, std::size_t& pos) {
  if (pos + sizeof(T) > in.size()) throw Error("malformed-vertex", "truncated serialization");
  std::make_unsigned_t<T> u = 0;
  for (std::size_t b = 0; b < sizeof(T); ++b) u |= static_cast<std::make_unsigned_t<T>>(in[pos + b]) << (8 * b);
  pos += sizeof(T);
  return static_cast<T>(u);
}

}  // namespace

std::uint64_t coordinate_fingerprint(std::uint32_t i, std::int64_t x) {
  if (x == 0) return 0;
  return mix64((static_cast<std::uint64_t>(i) << 32) ^ mix64(static_cast<std::uint64_t>(x)));
}

Vertex::Vertex(std::uint32_t dim) : dim_(dim) {
  if (dim == 0) throw Error("domain", "dimension must be positive");
}

Vertex Vertex::axis(std::uint32_t dim, std::uint32_t i, std::int64_t scale) {
  Vertex v(dim);
  v.set(i, scale);
  return v;
}

Vertex Vertex::from_dense(std::span<const std::int64_t> coords) {
  Vertex v(static_cast<std::uint32_t>(coords.size()));
  for (std::uint32_t i = 0; i < coords.size(); ++i) {
    if (coords[i] != 0) v.entries_.push_back({i + 1, coords[i]});
  }
  return v;
}

std::int64_t Vertex::operator[](std::uint32_t i) const {
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), i,
                                   [](const Entry& e, std::uint32_t idx) { return e.index < idx; });
  return (it != entries_.end() && it->index == i) ? it->value : 0;
}

void Vertex::set(std::uint32_t i, std::int64_t value) {
  if (i < 1 || i > dim_) throw Error("domain", "coordinate index out of [1, d]");
  const auto it = std::lower_bound(entries_.begin(), entries_.end(), i,
                                   [](const Entry& e, std::uint32_t idx) { return e.index < idx; });
  const bool present = it != entries_.end() && it->index == i;
  if (value == 0) {
    if (present) entries_.erase(it);
  } else if (present) {
    it->value = value;
  } else {
    entries_.insert(it, Entry{i, value});
  }
}

Vertex Vertex::shifted(std::uint32_t i, std::int64_t delta) const {
  Vertex v = *this;
  v.shift(i, delta);
  return v;
}

std::int64_t Vertex::coordinate_sum() const {
  std::int64_t s = 0;
  for (const auto& e : entries_) s += e.value;
  return s;
}

std::uint64_t Vertex::fingerprint() const {
  std::uint64_t h = 0;
  for (const auto& e : entries_) h += coordinate_fingerprint(e.index, e.value);
  return h;
}

std::uint64_t Vertex::fingerprint_after_shift(std::uint64_t current, std::uint32_t i, std::int64_t delta) const {
  const std::int64_t x = (*this)[i];
  return current - coordinate_fingerprint(i, x) + coordinate_fingerprint(i, x + delta);
}

bool Vertex::equals_shifted(const Vertex& other, std::uint32_t i, std::int64_t delta) const {
  if (dim_ != other.dim_) return false;
  // walk both supports, treating coordinate i of `other` as shifted
  const std::int64_t target_i = other[i] + delta;
  std::size_t a = 0;
  std::size_t b = 0;
  bool seen_i = false;
  while (a < entries_.size() || b < other.entries_.size()) {
    if (b < other.entries_.size() && other.entries_[b].index == i) {
      ++b;
      continue;
    }
    if (a < entries_.size() && entries_[a].index == i) {
      if (entries_[a].value != target_i) return false;
      seen_i = true;
      ++a;
      continue;
    }
    if (a == entries_.size() || b == other.entries_.size()) return false;
    if (entries_[a] != other.entries_[b]) return false;
    ++a;
    ++b;
  }
  return seen_i || target_i == 0;
}

namespace {

template <class T>
std::uint8_t* store_le(std::uint8_t* p, T value) {
  auto u = static_cast<std::make_unsigned_t<T>>(value);
  if constexpr (std::endian::native == std::endian::little) {
    std::memcpy(p, &u, sizeof(T));
  } else {
    for (std::size_t b = 0; b < sizeof(T); ++b) p[b] = static_cast<std::uint8_t>(u >> (8 * b));
  }
  return p + sizeof(T);
}

constexpr std::size_t kHeaderBytes = 1 + 4 + 4;
constexpr std::size_t kEntryBytes = 4 + 8;

}  // namespace

void append_support_bytes(std::vector<std::uint8_t>& out, std::uint32_t dim, std::span<const Vertex::Entry> support) {
  const std::size_t start = out.size();
  out.resize(start + kHeaderBytes + kEntryBytes * support.size());
  std::uint8_t* p = out.data() + start;
  p = store_le<std::uint8_t>(p, kSerializationVersion);
  p = store_le<std::uint32_t>(p, dim);
  p = store_le<std::uint32_t>(p, static_cast<std::uint32_t>(support.size()));
  for (const auto& e : support) {
    p = store_le<std::uint32_t>(p, e.index);
    p = store_le<std::int64_t>(p, e.value);
  }
}

void Vertex::append_bytes(std::vector<std::uint8_t>& out) const { append_support_bytes(out, dim_, entries_); }

void Vertex::append_bytes_shifted(std::vector<std::uint8_t>& out, std::uint32_t i, std::int64_t delta) const {
  const std::int64_t old_value = (*this)[i];
  const std::int64_t shifted_value = old_value + delta;
  const std::size_t count = entries_.size() - (old_value != 0 ? 1 : 0) + (shifted_value != 0 ? 1 : 0);
  const std::size_t start = out.size();
  out.resize(start + kHeaderBytes + kEntryBytes * count);
  std::uint8_t* p = out.data() + start;
  p = store_le<std::uint8_t>(p, kSerializationVersion);
  p = store_le<std::uint32_t>(p, dim_);
  p = store_le<std::uint32_t>(p, static_cast<std::uint32_t>(count));
  bool written = false;
  for (const auto& e : entries_) {
    if (!written && e.index >= i) {
      if (shifted_value != 0) {
        p = store_le<std::uint32_t>(p, i);
        p = store_le<std::int64_t>(p, shifted_value);
      }
      written = true;
      if (e.index == i) continue;
    }
    p = store_le<std::uint32_t>(p, e.index);
    p = store_le<std::int64_t>(p, e.value);
  }
  if (!written && shifted_value != 0) {
    p = store_le<std::uint32_t>(p, i);
    store_le<std::int64_t>(p, shifted_value);
  }
}

std::vector<std::uint8_t> Vertex::serialize() const {
  std::vector<std::uint8_t> out;
  append_bytes(out);
  return out;
}

Vertex Vertex::deserialize(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  if (get_le<std::uint8_t>(bytes, pos) != kSerializationVersion) {
    throw Error("malformed-vertex", "unsupported serialization version");
  }
  Vertex v(get_le<std::uint32_t>(bytes, pos));
  const auto count = get_le<std::uint32_t>(bytes, pos);
  std::uint32_t prev = 0;
  for (std::uint32_t k = 0; k < count; ++k) {
    const auto index = get_le<std::uint32_t>(bytes, pos);
    const auto value = get_le<std::int64_t>(bytes, pos);
    if (index <= prev || index > v.dim_ || value == 0) throw Error("malformed-vertex", "non-canonical support");
    v.entries_.push_back({index, value});
    prev = index;
  }
  if (pos != bytes.size()) throw Error("malformed-vertex", "trailing bytes");
  return v;
}

EdgeKey EdgeKey::between(const Vertex& v, std::uint32_t i, int sign) {
  if (sign != 1 && sign != -1) throw Error("domain", "edge step must be +1 or -1");
  if (i < 1 || i > v.dim()) throw Error("domain", "edge direction out of [1, d]");
  return sign > 0 ? EdgeKey{v, i} : EdgeKey{v.shifted(i, -1), i};
}

void EdgeKey::append_bytes(std::vector<std::uint8_t>& out) const {
  lo.append_bytes(out);
  put_le<std::uint32_t>(out, direction);
}

std::vector<std::uint8_t> EdgeKey::serialize() const {
  std::vector<std::uint8_t> out;
  append_bytes(out);
  return out;
}

bool step_allowed(const Restriction& r, const Vertex& v, std::uint32_t i, int sign) {
  if (std::holds_alternative<restrict::PositiveDirectionsOnly>(r)) return sign > 0;
  if (const auto* f = std::get_if<restrict::FixedCoordinate>(&r)) return i != f->index;
  if (const auto* w = std::get_if<restrict::CoordinateWindow>(&r)) {
    if (i != w->index) return true;
    const std::int64_t next = v[i] + sign;
    return next >= w->lo && next <= w->hi;
  }
  return true;
}

std::vector<Neighbor> neighbors(const Vertex& v, const Restriction& restriction) {
  if (const auto* w = std::get_if<restrict::CoordinateWindow>(&restriction); w && w->lo > w->hi) {
    throw Error("domain", "coordinate window with lo > hi");
  }
  std::vector<Neighbor> out;
  out.reserve(2 * static_cast<std::size_t>(v.dim()));
  for (std::uint32_t i = 1; i <= v.dim(); ++i) {
    for (int sign : {1, -1}) {
      if (!step_allowed(restriction, v, i, sign)) continue;
      out.push_back({v.shifted(i, sign), EdgeKey::between(v, i, sign)});
    }
  }
  return out;
}

double edge_uniform_bytes(std::span<const std::uint8_t> edge_bytes, std::uint64_t master_seed) {
  return static_cast<double>(hash_bytes(edge_bytes, master_seed) >> 11) * 0x1.0p-53;
}

double edge_uniform(const EdgeKey& key, std::uint64_t master_seed) {
  return edge_uniform_bytes(key.serialize(), master_seed);
}

double edge_weight(const EdgeKey& key, std::uint64_t master_seed, const DistributionSpec& spec) {
  return spec.quantile(edge_uniform(key, master_seed));
}

}  // namespace fpp
