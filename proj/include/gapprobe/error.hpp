#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gapprobe {

enum class ErrorKind {
  // corpus
  MissingColumn,
  MalformedRow,
  UnknownConditionLabel,
  DuplicateRecord,
  IncompleteTuple,
  InvalidSentence,
  NoDifference,
  MultipleDiffRuns,
  NonInsertionDiff,
  GapRegionMissing,
  // genkit
  LexiconExhausted,
  MalformedLexicon,
  MalformedGrammar,
  RecursiveGrammar,
  UnknownNonterminal,
  // filter
  MalformedPattern,
  // bpe
  InvalidUtf8,
  UnknownByteSequence,
  MalformedVocab,
  RegionNotCovered,
  // scoring
  BackendUnavailable,
  ProtocolViolation,
  RemoteError,
  NonFiniteProbability,
  SpanOutOfBounds,
  InvalidBackend,
  // metrics
  MissingCondition,
  EmptyInput,
  DegenerateSample,
  ZeroMarginal,
  InvalidArgument,
  // cli
  IncompleteScores,
  NoReports,
  Io,
};

std::string_view error_kind_name(ErrorKind kind);

/// True for failures that originate in a scoring backend rather than in the
/// data handed to it.
bool is_backend_error(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  /// The message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }
  /// Same kind, message prefixed with "context: ".
  Error with_context(const std::string& context) const;

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace gapprobe
