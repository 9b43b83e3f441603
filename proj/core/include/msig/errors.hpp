#pragma once

#include <stdexcept>

namespace msig {

/// Base class for every error this library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// signal / dtw
struct NonFiniteInput : Error { using Error::Error; };
struct EmptySequence : Error { using Error::Error; };

// features
struct DimensionMismatch : Error { using Error::Error; };
struct EmptyReferenceSet : Error { using Error::Error; };
struct NotEnoughGenuineSamples : Error { using Error::Error; };

// classifiers
struct SingleClassTrainingSet : Error { using Error::Error; };
struct FeatureWidthMismatch : Error { using Error::Error; };
struct CorruptModelFile : Error { using Error::Error; };
struct UnsupportedVersion : Error { using Error::Error; };

// metrics / evaluation
struct SingleClassScores : Error { using Error::Error; };
struct CorpusShapeError : Error { using Error::Error; };
struct InvalidParams : Error { using Error::Error; };

// recording / corpus I/O
struct MalformedHeader : Error { using Error::Error; };
struct NonMonotonicTimestamps : Error { using Error::Error; };
struct RaggedRow : Error { using Error::Error; };
struct EmptyRecording : Error { using Error::Error; };
struct ManifestNotFound : Error { using Error::Error; };
struct VersionMismatch : Error { using Error::Error; };
struct CorpusLoadError : Error { using Error::Error; };

// reference store / service
struct UserAlreadyEnrolled : Error { using Error::Error; };
struct UnknownUser : Error { using Error::Error; };
struct EmptyEnrollment : Error { using Error::Error; };
struct CorruptStoreFile : Error { using Error::Error; };
struct ReplayRejected : Error { using Error::Error; };
struct MalformedRecording : Error { using Error::Error; };

}  // namespace msig
