#pragma once

#include <chrono>
#include <compare>
#include <cstddef>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gapprobe/bpe.hpp"
#include "gapprobe/corpus.hpp"

namespace gapprobe::scoring {

using bpe::TokenId;

/// GPT-2's end-of-text id, the conditioning prefix for position 0.
inline constexpr TokenId kGpt2EndOfText = 50256;
inline constexpr std::size_t kGpt2VocabSize = 50257;

/// Surprisal in bits, one entry per scored token.
struct SurprisalVector {
  std::vector<double> bits;
  std::string backend_label;

  double total() const;
};

/// A source of conditional probabilities. Implementations return
/// natural-log P(id_i | end-of-text, ids[0..i)) for every position.
class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string label() const = 0;
  virtual std::vector<double> log_probs(std::span<const TokenId> ids) = 0;
  /// Results are positional with respect to the batch. The default scores
  /// one sentence at a time.
  virtual std::vector<std::vector<double>> log_probs_batch(
      const std::vector<std::vector<TokenId>>& batch);
};

class UniformBackend final : public Backend {
 public:
  explicit UniformBackend(std::size_t vocab_size);

  std::string label() const override;
  std::vector<double> log_probs(std::span<const TokenId> ids) override;

 private:
  std::size_t vocab_size_;
};

/// Maximum-likelihood n-gram model over token ids with optional add-one
/// smoothing. Training and scoring sequences are left-padded with order-1
/// boundary tokens.
class NgramBackend final : public Backend {
 public:
  struct Options {
    std::size_t order = 2;
    std::size_t vocab_size = kGpt2VocabSize;
    TokenId boundary = kGpt2EndOfText;
    bool add_one = true;
  };

  NgramBackend(Options options, const std::vector<std::vector<TokenId>>& training);

  std::string label() const override;
  std::vector<double> log_probs(std::span<const TokenId> ids) override;

  std::size_t count(std::span<const TokenId> history, TokenId next) const;
  std::size_t history_count(std::span<const TokenId> history) const;
  const Options& options() const { return options_; }

 private:
  struct VecHash {
    std::size_t operator()(const std::vector<TokenId>& v) const noexcept;
  };
  struct HistoryCounts {
    std::size_t total = 0;
    std::unordered_map<TokenId, std::size_t> next;
  };

  Options options_;
  std::unordered_map<std::vector<TokenId>, HistoryCounts, VecHash> table_;
};

struct WireOptions {
  std::size_t max_in_flight = 64;
  /// Zero waits forever.
  std::chrono::milliseconds timeout{0};
};

/// Client for the newline-delimited JSON scoring protocol, over a child
/// process's stdio or a TCP stream. Requests are pipelined up to
/// max_in_flight and matched to responses by request_id.
class WireBackend final : public Backend {
 public:
  /// Runs the command through /bin/sh. Throws BackendUnavailable.
  static std::unique_ptr<WireBackend> spawn(const std::string& command,
                                            WireOptions options = {});
  /// Throws BackendUnavailable.
  static std::unique_ptr<WireBackend> connect(const std::string& host, int port,
                                              WireOptions options = {});

  ~WireBackend() override;
  WireBackend(const WireBackend&) = delete;
  WireBackend& operator=(const WireBackend&) = delete;

  std::string label() const override { return label_; }
  std::vector<double> log_probs(std::span<const TokenId> ids) override;
  std::vector<std::vector<double>> log_probs_batch(
      const std::vector<std::vector<TokenId>>& batch) override;

 private:
  WireBackend(int read_fd, int write_fd, int pid, std::string label, WireOptions options);

  int read_fd_;
  int write_fd_;
  int pid_;
  std::string label_;
  WireOptions options_;
  std::string inbox_;
  std::size_t next_id_ = 0;
  bool broken_ = false;
};

enum class BackendKind { Uniform, NgramReference, Wire };

struct BackendDescriptor {
  BackendKind kind = BackendKind::Uniform;
  std::size_t vocab_size = kGpt2VocabSize;  // uniform
  std::size_t order = 0;                    // ngram
  std::string corpus_path;                  // ngram
  std::string endpoint;                     // wire: command, or host:port

  /// "uniform:V", "ngram:ORDER:CORPUS" or "wire:COMMAND-OR-HOST:PORT".
  /// Throws InvalidBackend.
  static BackendDescriptor parse(std::string_view spec);
  std::string to_string() const;
};

/// The ngram corpus is read one sentence per line and tokenized with tok.
std::unique_ptr<Backend> make_backend(const BackendDescriptor& desc,
                                      const bpe::Tokenizer& tok,
                                      WireOptions wire = {});

double nats_to_bits(double log_prob);

/// Validates one backend response and converts it to bits. Throws
/// ProtocolViolation (length mismatch, positive log prob) or
/// NonFiniteProbability.
SurprisalVector to_surprisal(std::span<const double> log_probs, std::size_t expected,
                             std::string backend_label);

SurprisalVector score_sentence(Backend& backend, std::span<const TokenId> ids);

/// Sum of the region's token surprisals. Throws SpanOutOfBounds.
double region_surprisal(const SurprisalVector& v, const bpe::AlignedRegion& r);

struct RecordKey {
  corpus::ItemKey item;
  corpus::Condition condition = corpus::Condition::PFPG;

  auto operator<=>(const RecordKey&) const = default;
};

struct ScoredRecord {
  corpus::StimulusRecord record;
  corpus::CriticalRegion region;
  bpe::TokenizationResult tokens;
  bpe::AlignedRegion aligned;
  SurprisalVector surprisal;
  double region_bits = 0.0;
};

using ScoreMap = std::map<RecordKey, ScoredRecord>;

/// Tokenizes, localizes and scores every record, sending all sentences to
/// the backend as one batch. Errors carry the item and condition.
ScoreMap score_dataset(Backend& backend, const bpe::Tokenizer& tok,
                       const corpus::Dataset& d);

}  // namespace gapprobe::scoring
