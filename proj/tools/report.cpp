#include "report.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "fpp/error.hpp"
#include "fpp/numeric.hpp"

#ifndef FPP_VERSION
#define FPP_VERSION "0.0.0"
#endif

namespace fpp::report {

std::string tool_version() { return FPP_VERSION; }

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return shortest_repr(v);
}

namespace {

// finite numbers stay numbers; non-finite become strings so the document stays valid JSON
Json jnum(double v) {
  if (std::isfinite(v)) return v;
  return num(v);
}

}  // namespace

Json to_json(const Precondition& p) { return Json{{"name", p.name}, {"satisfied", p.satisfied}, {"value", jnum(p.value)}}; }

Json to_json(const std::vector<Precondition>& list) {
  Json arr = Json::array();
  for (const auto& p : list) arr.push_back(to_json(p));
  return arr;
}

Json to_json(const GridSpec& g) {
  Json etas = Json::array();
  for (double e : g.etas) etas.push_back(e);
  return Json{{"delta", {{"lo", g.delta_lo}, {"hi", g.delta_hi}, {"points", g.delta_points}}},
              {"B", {{"lo", g.B_lo}, {"hi", g.B_hi}, {"points", g.B_points}, {"spacing", "log"}}},
              {"eta", etas},
              {"refine", g.refine},
              {"lower_delta_points", g.lower_delta_points}};
}

Json to_json(const BoundParams& p) {
  return Json{{"d", p.d},   {"delta", p.delta}, {"eta", p.eta}, {"B", p.B}, {"n", p.n},
              {"x", p.x},   {"m", p.m},         {"p", p.p},     {"y", p.y}, {"A", jnum(p.A)},
              {"validity", to_json(p.validity)}};
}

Json to_json(const AdmissibleA& a) {
  return Json{{"A", jnum(a.A)},
              {"A_product_reading", jnum(a.A_product)},
              {"pipeline", pipeline_name(a.pipeline)},
              {"inv_first_moment", jnum(a.inv_first_moment)},
              {"f", jnum(a.f)},
              {"g", jnum(a.g)},
              {"series", jnum(a.series)},
              {"validity", to_json(a.validity)}};
}

Json to_json(const UpsilonParts& u) {
  return Json{{"upsilon", jnum(u.value)},       {"first_term", jnum(u.first_term)}, {"tail", jnum(u.tail)},
              {"tail_base", jnum(u.tail_base)}, {"exponent", u.exponent},          {"degenerate_tail", u.degenerate_tail}};
}

Json to_json(const UpperCertificate& u) {
  return Json{{"upsilon", jnum(u.upsilon)},
              {"pipeline", pipeline_name(u.pipeline)},
              {"params", to_json(u.params)},
              {"admissible_A", to_json(u.A)},
              {"terms", to_json(u.parts)},
              {"cells", u.cells}};
}

Json to_json(const LowerBound& l) {
  Json w = Json::object();
  for (const auto& [k, v] : l.witnesses) w[k] = jnum(v);
  return Json{{"bound", jnum(l.bound)},
              {"delta", l.delta},
              {"valid", l.valid},
              {"preconditions", to_json(l.preconditions)},
              {"witnesses", w}};
}

Json to_json(const ShapeCertificate& c) {
  Json j;
  j["schema"] = kCertificateSchema;
  j["tool_version"] = tool_version();
  j["d"] = c.d;
  j["spec"] = c.spec_id;
  j["pipeline"] = pipeline_name(c.pipeline);
  j["verdicts"] = {{"ball_excluded", c.ball_excluded}, {"cube_strict", c.cube_strict}, {"diamond_strict", c.diamond_strict}};
  j["values"] = {{"mu_upper", jnum(c.mu_upper)},
                 {"mu_lower", jnum(c.mu_lower)},
                 {"mustar_lower", jnum(c.mustar_lower)},
                 {"mustar_upper", jnum(c.mustar_upper)}};
  Json w = Json::object();
  if (c.upper) w["upper"] = to_json(*c.upper);
  if (c.lower) w["mu_lower"] = to_json(*c.lower);
  if (c.mustar) w["mustar_lower"] = to_json(*c.mustar);
  j["witnesses"] = w;
  j["preconditions"] = to_json(c.all_preconditions);
  j["grid_spec"] = to_json(c.grid);
  return j;
}

Json to_json(const ThresholdResult& t) {
  auto pairs = [](const std::vector<std::pair<std::int64_t, bool>>& v) {
    Json arr = Json::array();
    for (const auto& [d, ok] : v) arr.push_back({{"d", d}, {"certified", ok}});
    return arr;
  };
  return Json{{"threshold", t.threshold}, {"spot_checks", pairs(t.spot_checks)}, {"scanned", pairs(t.scanned)}};
}

std::string estimates_row(const EstimateRecord& r) {
  std::ostringstream os;
  os << quantity_name(r.quantity) << ',' << r.d << ',' << r.n << ',' << r.replicas << ',' << num(r.mean) << ','
     << num(r.std_error) << ',' << num(r.exact_fraction) << ',' << r.master_seed;
  return os.str();
}

std::string samples_rows(const EstimateRecord& r, const SearchCaps& caps, std::optional<std::int64_t> box_margin) {
  std::ostringstream os;
  for (std::size_t i = 0; i < r.samples.size(); ++i) {
    os << quantity_name(r.quantity) << ',' << r.d << ',' << r.n << ',' << i << ','
       << derive_seed(r.master_seed, i) << ',' << num(r.samples[i]) << ',' << (r.exact[i] ? 1 : 0) << ','
       << caps.max_settled << ',' << (caps.max_time ? num(*caps.max_time) : std::string("none")) << ','
       << (box_margin ? std::to_string(*box_margin) : std::string("none")) << '\n';
  }
  return os.str();
}

Json Manifest::hashed_part() const {
  Json cfg = Json::object();
  for (const auto& [k, v] : config) cfg[k] = v;
  return Json{{"schema", kManifestSchema},
              {"command", command},
              {"config", cfg},
              {"master_seed", master_seed},
              {"tool_version", tool_version()}};
}

std::string Manifest::hash() const {
  const std::string text = hashed_part().dump();
  const std::uint64_t h = hash_bytes({reinterpret_cast<const std::uint8_t*>(text.data()), text.size()}, 0);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

Json Manifest::to_json() const {
  Json j = hashed_part();
  j["hash"] = hash();
  j["timestamps"] = {{"started", started}, {"finished", finished}};
  j["outputs"] = outputs;
  return j;
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name, const std::string& text) {
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path.string());
  out << text;
  return path;
}

}  // namespace fpp::report
