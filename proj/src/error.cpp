#include "steer/error.hpp"

namespace steer {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidTokenId: return "InvalidTokenId";
    case ErrorCode::kEmptyCorpus: return "EmptyCorpus";
    case ErrorCode::kContextOverflow: return "ContextOverflow";
    case ErrorCode::kIoError: return "IoError";
    case ErrorCode::kFormatVersionMismatch: return "FormatVersionMismatch";
    case ErrorCode::kNetworkTimeout: return "NetworkTimeout";
    case ErrorCode::kRetryExhausted: return "RetryExhausted";
    case ErrorCode::kShapeMismatch: return "ShapeMismatch";
    case ErrorCode::kBackendError: return "BackendError";
    case ErrorCode::kVocabularyMismatch: return "VocabularyMismatch";
    case ErrorCode::kLengthMismatch: return "LengthMismatch";
    case ErrorCode::kNonFiniteInput: return "NonFiniteInput";
    case ErrorCode::kParameterOutOfRange: return "ParameterOutOfRange";
    case ErrorCode::kNonPositiveTemperature: return "NonPositiveTemperature";
    case ErrorCode::kInvalidK: return "InvalidK";
    case ErrorCode::kInvalidP: return "InvalidP";
    case ErrorCode::kAllMasked: return "AllMasked";
    case ErrorCode::kMissingEmbeddings: return "MissingEmbeddings";
    case ErrorCode::kEmptyText: return "EmptyText";
    case ErrorCode::kNonFiniteEmbedding: return "NonFiniteEmbedding";
    case ErrorCode::kEmptySet: return "EmptySet";
    case ErrorCode::kEmptyDataset: return "EmptyDataset";
    case ErrorCode::kZeroMeanVector: return "ZeroMeanVector";
    case ErrorCode::kTooFewPoints: return "TooFewPoints";
    case ErrorCode::kTooFewSamples: return "TooFewSamples";
    case ErrorCode::kSingleClassTraining: return "SingleClassTraining";
    case ErrorCode::kEmptyHoldout: return "EmptyHoldout";
    case ErrorCode::kMalformedRecord: return "MalformedRecord";
    case ErrorCode::kBudgetExceeded: return "BudgetExceeded";
    case ErrorCode::kConfigError: return "ConfigError";
    case ErrorCode::kInternal: return "Internal";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code) {}

void raise(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace steer
