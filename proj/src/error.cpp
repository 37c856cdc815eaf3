#include "gapprobe/error.hpp"

namespace gapprobe {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::UnknownConditionLabel: return "UnknownConditionLabel";
    case ErrorKind::DuplicateRecord: return "DuplicateRecord";
    case ErrorKind::IncompleteTuple: return "IncompleteTuple";
    case ErrorKind::InvalidSentence: return "InvalidSentence";
    case ErrorKind::NoDifference: return "NoDifference";
    case ErrorKind::MultipleDiffRuns: return "MultipleDiffRuns";
    case ErrorKind::NonInsertionDiff: return "NonInsertionDiff";
    case ErrorKind::GapRegionMissing: return "GapRegionMissing";
    case ErrorKind::LexiconExhausted: return "LexiconExhausted";
    case ErrorKind::MalformedLexicon: return "MalformedLexicon";
    case ErrorKind::MalformedGrammar: return "MalformedGrammar";
    case ErrorKind::RecursiveGrammar: return "RecursiveGrammar";
    case ErrorKind::UnknownNonterminal: return "UnknownNonterminal";
    case ErrorKind::MalformedPattern: return "MalformedPattern";
    case ErrorKind::InvalidUtf8: return "InvalidUtf8";
    case ErrorKind::UnknownByteSequence: return "UnknownByteSequence";
    case ErrorKind::MalformedVocab: return "MalformedVocab";
    case ErrorKind::RegionNotCovered: return "RegionNotCovered";
    case ErrorKind::BackendUnavailable: return "BackendUnavailable";
    case ErrorKind::ProtocolViolation: return "ProtocolViolation";
    case ErrorKind::RemoteError: return "RemoteError";
    case ErrorKind::NonFiniteProbability: return "NonFiniteProbability";
    case ErrorKind::SpanOutOfBounds: return "SpanOutOfBounds";
    case ErrorKind::InvalidBackend: return "InvalidBackend";
    case ErrorKind::MissingCondition: return "MissingCondition";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::DegenerateSample: return "DegenerateSample";
    case ErrorKind::ZeroMarginal: return "ZeroMarginal";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::IncompleteScores: return "IncompleteScores";
    case ErrorKind::NoReports: return "NoReports";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

bool is_backend_error(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::BackendUnavailable:
    case ErrorKind::ProtocolViolation:
    case ErrorKind::RemoteError:
    case ErrorKind::NonFiniteProbability:
      return true;
    default:
      return false;
  }
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message),
      kind_(kind),
      detail_(message) {}

Error Error::with_context(const std::string& context) const {
  return Error(kind_, context + ": " + detail_);
}

}  // namespace gapprobe
