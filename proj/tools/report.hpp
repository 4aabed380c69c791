#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "fpp/certifier.hpp"
#include "fpp/combinatorics.hpp"
#include "fpp/estimators.hpp"
#include "json.hpp"

namespace fpp::report {

using Json = nlohmann::ordered_json;

inline constexpr const char* kCertificateSchema = "fpplab.certificate/1";
inline constexpr const char* kManifestSchema = "fpplab.manifest/1";
inline constexpr const char* kEstimatesHeader = "quantity,d,n,replicas,mean,stderr,exact_fraction,seed";
inline constexpr const char* kSamplesHeader = "quantity,d,n,replica,seed,value,exact,max_settled,max_time,box_margin";

std::string tool_version();

/// Shortest round-trip decimal; "nan", "inf", "-inf" for non-finite values.
std::string num(double v);

Json to_json(const Precondition& p);
Json to_json(const std::vector<Precondition>& list);
Json to_json(const GridSpec& g);
Json to_json(const BoundParams& p);
Json to_json(const AdmissibleA& a);
Json to_json(const UpsilonParts& u);
Json to_json(const UpperCertificate& u);
Json to_json(const LowerBound& l);
Json to_json(const ShapeCertificate& c);
Json to_json(const ThresholdResult& t);

/// One estimates row, no trailing newline.
std::string estimates_row(const EstimateRecord& r);
/// One row per replica with what is needed to replay it.
std::string samples_rows(const EstimateRecord& r, const SearchCaps& caps, std::optional<std::int64_t> box_margin);

/// Run description; the hash covers everything except the timestamps.
struct Manifest {
  std::string command;
  std::map<std::string, std::string> config;
  std::uint64_t master_seed = 0;
  std::string started;
  std::string finished;
  std::vector<std::string> outputs;

  Json hashed_part() const;
  std::string hash() const;
  Json to_json() const;
};

std::string utc_now();

/// Writes `text` to dir/name, creating dir; returns the path.
std::filesystem::path write_file(const std::filesystem::path& dir, const std::string& name, const std::string& text);

}  // namespace fpp::report
