#pragma once

#include <stdexcept>
#include <string>

namespace lmeasure {

/// Base of every error raised by the library. Carries a short machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}

  [[nodiscard]] const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

#define LMEASURE_ERROR(Name, tag)                                          \
  class Name : public Error {                                              \
   public:                                                                 \
    explicit Name(const std::string& what) : Error(tag, what) {}           \
  };

LMEASURE_ERROR(DomainError, "domain")
LMEASURE_ERROR(DegenerateInputError, "degenerate-input")
LMEASURE_ERROR(RefusalError, "refusal")
LMEASURE_ERROR(WrongGeneratorError, "wrong-generator")
LMEASURE_ERROR(InvalidCurveError, "invalid-curve")
LMEASURE_ERROR(BracketNotFoundError, "bracket-not-found")
LMEASURE_ERROR(InvalidMetricError, "invalid-metric")
LMEASURE_ERROR(ResolutionError, "resolution")
LMEASURE_ERROR(ConfigError, "config")
LMEASURE_ERROR(NotFoundError, "not-found")

#undef LMEASURE_ERROR

}  // namespace lmeasure
