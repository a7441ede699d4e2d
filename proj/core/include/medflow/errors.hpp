#pragma once

#include <stdexcept>
#include <string>

namespace medflow {

// Exit-code contract for the CLI: each error family maps to a distinct
// nonzero process exit code.
enum class errc : int {
  ok = 0,
  config = 2,
  domain = 3,
  kernel = 4,
  median = 5,
  evolution = 6,
  heatflow = 7,
  verification = 8,
  io = 9,
};

class Error : public std::runtime_error {
public:
  Error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const { return code_; }

private:
  errc code_;
};

struct InvalidDomainError : Error {
  explicit InvalidDomainError(const std::string& w) : Error(errc::domain, w) {}
};

struct IndexConfigError : Error {
  explicit IndexConfigError(const std::string& w) : Error(errc::domain, w) {}
};

struct AdmissibilityError : Error {
  explicit AdmissibilityError(const std::string& w) : Error(errc::kernel, w) {}
};

struct DegenerateWeightsError : Error {
  explicit DegenerateWeightsError(const std::string& w) : Error(errc::median, w) {}
};

struct EvolutionError : Error {
  explicit EvolutionError(const std::string& w) : Error(errc::evolution, w) {}
};

struct SolverFailureError : Error {
  SolverFailureError(const std::string& w, double residual)
      : Error(errc::heatflow, w), residual(residual) {}
  double residual;
};

struct UnsupportedConfigurationError : Error {
  explicit UnsupportedConfigurationError(const std::string& w) : Error(errc::heatflow, w) {}
};

struct TopologyChangeError : Error {
  explicit TopologyChangeError(const std::string& w) : Error(errc::verification, w) {}
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(errc::config, w) {}
};

struct IoError : Error {
  explicit IoError(const std::string& w) : Error(errc::io, w) {}
};

}  // namespace medflow
