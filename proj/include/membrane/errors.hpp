#pragma once

#include <stdexcept>
#include <string>

namespace membrane {

enum class ErrorKind {
  BadInput,                // malformed file / config / argument
  DegenerateGeometry,      // zero edge, zero triangle area, hairpin vertex
  NonManifold,             // surface connectivity violation
  MeanCurvatureVanishing,  // H identically zero on a connected component
  SolverBreakdown,         // linear solver failed to converge
  RenormalizationDiverged  // volume Newton left its basin or stalled
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void throw_error(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace membrane
