#pragma once

#include <stdexcept>
#include <string>

namespace carloc {

/// Base class for every error raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Geometry
struct NonPositiveExtent : Error { using Error::Error; };
struct NegativeOrigin : Error { using Error::Error; };
struct OutOfBounds : Error { using Error::Error; };

// Dataset construction and serialization
struct MissingAnnotation : Error { using Error::Error; };
struct MalformedSplit : Error { using Error::Error; };
struct InvalidConfig : Error { using Error::Error; };
struct ParseError : Error { using Error::Error; };
struct UnreadableImage : Error { using Error::Error; };

// Labeling
struct InvalidPair : Error { using Error::Error; };
struct InvalidCount : Error { using Error::Error; };
struct KTooLarge : Error { using Error::Error; };

// Training and inference
struct LabelMismatch : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };

// Box extraction
struct InvalidThreshold : Error { using Error::Error; };
struct EmptyContourSet : Error { using Error::Error; };

// Evaluation
struct MissingPrediction : Error { using Error::Error; };
struct DuplicatePrediction : Error { using Error::Error; };

/// Raised by the pipeline orchestrator; carries the failing stage name.
struct StageError : Error {
  StageError(const std::string& stage, const std::string& what)
      : Error(stage + ": " + what), stage_name(stage) {}
  std::string stage_name;
};

}  // namespace carloc
