#ifndef CRFTAG_ERROR_HPP_
#define CRFTAG_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace crftag {

enum class ErrorCode {
  // corpus_io
  RaggedRow,
  EmptyCorpus,
  EncodingError,
  LengthMismatch,
  // morphology
  EmptyInput,
  MissingColumn,
  // tagset_algebra
  DuplicateTag,
  DanglingParent,
  NonInjectiveDecomposition,
  UnknownComponentSymbol,
  SchemaSyntax,
  UnknownTag,
  InvalidCombination,
  NoValidTuple,
  // template_engine
  SyntaxError,
  DuplicateId,
  BadColumn,
  // crf_engine
  ColumnMismatch,
  UnknownLabel,
  EmptyTrainingSet,
  NonFiniteObjective,
  ModelFormat,
  // pipelines / evaluation
  UndecomposableTag,
  TooFewSentences,
  PipelineConfig,
  // generic
  Io,
  Internal,
};

std::string_view error_code_name(ErrorCode code);

/// Every library failure is reported through this type; `code()` identifies
/// the failure class, `what()` carries the human-readable diagnostic.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// True for failures that indicate a broken internal invariant rather
  /// than bad user input.
  bool is_internal() const noexcept {
    return code_ == ErrorCode::Internal ||
           code_ == ErrorCode::NonFiniteObjective;
  }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, std::string(error_code_name(code)) + ": " + message);
}

}  // namespace crftag

#endif  // CRFTAG_ERROR_HPP_
