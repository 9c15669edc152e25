#pragma once

#include <stdexcept>
#include <string>

namespace fb {

enum class ErrorCode {
  Domain,
  Ingestion,
  Estimation,
  Config,
  Lookup,
  Io,
};

// All library failures derive from Error so callers (and the C API) can map
// them onto a stable code without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorCode::Domain, what) {}
};

class IngestionError : public Error {
 public:
  explicit IngestionError(const std::string& what) : Error(ErrorCode::Ingestion, what) {}
};

class EstimationError : public Error {
 public:
  explicit EstimationError(const std::string& what) : Error(ErrorCode::Estimation, what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorCode::Config, what) {}
};

class LookupError : public Error {
 public:
  explicit LookupError(const std::string& what) : Error(ErrorCode::Lookup, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::Io, what) {}
};

}  // namespace fb
