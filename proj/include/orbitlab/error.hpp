#pragma once

#include <stdexcept>
#include <string>

namespace orbitlab {

// Base of all library errors. `kind()` is a short machine-readable tag that
// the experiment runner copies into reports.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

struct DomainError : Error {
  explicit DomainError(const std::string& w) : Error("domain", w) {}
};
struct ParameterError : Error {
  explicit ParameterError(const std::string& w) : Error("parameter", w) {}
};
struct NumericalError : Error {
  explicit NumericalError(const std::string& w) : Error("numerical", w) {}
};
struct TruncationError : Error {
  explicit TruncationError(const std::string& w) : Error("truncation", w) {}
};
struct ParseError : Error {
  explicit ParseError(const std::string& w) : Error("parse", w) {}
};
struct ValidationError : Error {
  explicit ValidationError(const std::string& w) : Error("validation", w) {}
};

}  // namespace orbitlab
