#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace selfconf {

/// Malformed configuration or input file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A system or construction violates one of the IFS conditions.
class ValidationError : public std::runtime_error {
 public:
  ValidationError(const std::string& what, std::vector<std::string> details = {})
      : std::runtime_error(what), details_(std::move(details)) {}

  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  std::vector<std::string> details_;
};

/// A configured resource cap (atom count, recursion budget) was exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace selfconf
