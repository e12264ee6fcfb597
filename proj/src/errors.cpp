#include "membrane/errors.hpp"

namespace membrane {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BadInput: return "BadInput";
    case ErrorKind::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorKind::NonManifold: return "NonManifold";
    case ErrorKind::MeanCurvatureVanishing: return "MeanCurvatureVanishing";
    case ErrorKind::SolverBreakdown: return "SolverBreakdown";
    case ErrorKind::RenormalizationDiverged: return "RenormalizationDiverged";
  }
  return "UnknownError";
}

}  // namespace membrane
