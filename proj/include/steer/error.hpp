#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace steer {

enum class ErrorCode {
  kInvalidArgument,
  kInvalidTokenId,
  kEmptyCorpus,
  kContextOverflow,
  kIoError,
  kFormatVersionMismatch,
  kNetworkTimeout,
  kRetryExhausted,
  kShapeMismatch,
  kBackendError,
  kVocabularyMismatch,
  kLengthMismatch,
  kNonFiniteInput,
  kParameterOutOfRange,
  kNonPositiveTemperature,
  kInvalidK,
  kInvalidP,
  kAllMasked,
  kMissingEmbeddings,
  kEmptyText,
  kNonFiniteEmbedding,
  kEmptySet,
  kEmptyDataset,
  kZeroMeanVector,
  kTooFewPoints,
  kTooFewSamples,
  kSingleClassTraining,
  kEmptyHoldout,
  kMalformedRecord,
  kBudgetExceeded,
  kConfigError,
  kInternal,
};

std::string_view error_code_name(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so
/// callers (and the CLI exit-code mapping) can branch on the kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void raise(ErrorCode code, const std::string& message);

}  // namespace steer
