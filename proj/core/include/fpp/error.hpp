#pragma once

#include <stdexcept>
#include <string>

namespace fpp {

/// Failure carrying a stable machine-readable code (e.g. "outside-validity-interval").
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(code + ": " + what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

}  // namespace fpp
