#pragma once

#include <stdexcept>

namespace ppiw {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct NonFiniteValue : Error { using Error::Error; };
struct ProbabilityOutOfRange : Error { using Error::Error; };
struct NoLabeledUnits : Error { using Error::Error; };
struct DegenerateResponse : Error { using Error::Error; };
struct SingularInformation : Error { using Error::Error; };
struct MissingPredictions : Error { using Error::Error; };
struct FoldTooSmall : Error { using Error::Error; };
struct BinCoverageError : Error { using Error::Error; };
struct MissingTruth : Error { using Error::Error; };
struct InvalidProportion : Error { using Error::Error; };
struct FileError : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct EmptyAfterFiltering : Error { using Error::Error; };
struct InsufficientLabels : Error { using Error::Error; };

}  // namespace ppiw
