#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gapprobe/corpus.hpp"

namespace gapprobe::bpe {

using TokenId = std::int32_t;

struct ByteSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  std::size_t size() const { return end - start; }
  bool operator==(const ByteSpan&) const = default;
};

struct TokenizationResult {
  std::vector<TokenId> ids;
  std::vector<ByteSpan> offsets;  // into the encoded text, one per id
};

struct AlignedRegion {
  std::size_t token_start = 0;
  std::size_t token_len = 0;
  /// Set when the covering tokens reach past the region on the right, or on
  /// the left by more than whitespace. The span is still the minimal cover.
  bool crosses_token_boundary = false;

  bool operator==(const AlignedRegion&) const = default;
};

/// GPT-2 maps every byte to a printable code point so token strings in
/// encoder.json are valid text. Returns the UTF-8 encoding of that code
/// point.
std::string byte_to_unicode(std::uint8_t byte);
/// Inverse of byte_to_unicode applied across a whole token string.
/// Throws MalformedVocab on code points outside the mapping.
std::string unicode_to_bytes(std::string_view mapped);

/// Splits text with the GPT-2 pre-tokenization pattern
///   's|'t|'re|'ve|'m|'ll|'d| ?\p{L}+| ?\p{N}+| ?[^\s\p{L}\p{N}]+|\s+(?!\S)|\s+
/// Returns byte spans. Throws InvalidUtf8.
std::vector<ByteSpan> pretokenize(std::string_view text);

class Vocab {
 public:
  Vocab() = default;
  /// Raw byte strings indexed by id; must be distinct.
  explicit Vocab(std::vector<std::string> id_to_token);
  /// encoder.json content: {"<mapped token>": id, ...}.
  static Vocab from_json(std::string_view json_text);

  std::optional<TokenId> find(std::string_view bytes) const;
  const std::string& token_bytes(TokenId id) const { return id_to_token_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return id_to_token_.size(); }

 private:
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, TokenId> token_to_id_;
};

class MergeRanks {
 public:
  struct Merge {
    std::string left;
    std::string right;
  };

  MergeRanks() = default;
  explicit MergeRanks(std::vector<Merge> merges);
  /// vocab.bpe / merges.txt content; a leading "#version" line is skipped.
  static MergeRanks from_text(std::string_view text);

  const std::vector<Merge>& merges() const { return merges_; }
  std::size_t size() const { return merges_.size(); }

 private:
  std::vector<Merge> merges_;  // raw bytes, rank = position
};

class Tokenizer {
 public:
  /// Throws UnknownByteSequence if a merge or single byte has no vocab id.
  Tokenizer(Vocab vocab, MergeRanks merges);

  static Tokenizer from_files(const std::string& vocab_json_path,
                              const std::string& merges_path);
  /// Looks for encoder.json + vocab.bpe, or vocab.json + merges.txt.
  static Tokenizer from_directory(const std::string& dir);

  TokenizationResult encode(std::string_view text) const;
  std::string decode(std::span<const TokenId> ids) const;

  const Vocab& vocab() const { return vocab_; }
  /// Id of "<|endoftext|>" when the vocabulary has it.
  std::optional<TokenId> end_of_text() const { return end_of_text_; }

 private:
  struct PairHash {
    std::size_t operator()(std::uint64_t k) const noexcept {
      return std::hash<std::uint64_t>{}(k * 0x9E3779B97F4A7C15ull);
    }
  };
  struct MergeInfo {
    std::uint32_t rank;
    TokenId merged;
  };

  void bpe_piece(std::string_view piece, std::vector<TokenId>& out) const;

  Vocab vocab_;
  std::array<TokenId, 256> byte_ids_{};
  std::unordered_map<std::uint64_t, MergeInfo, PairHash> merge_table_;
  std::optional<TokenId> end_of_text_;
};

/// Byte span of a word-indexed region within text.
ByteSpan region_byte_span(std::string_view text, const corpus::CriticalRegion& region);

/// Minimal token span covering the bytes. Throws RegionNotCovered when the
/// offsets do not reach the span.
AlignedRegion align_byte_span(const TokenizationResult& tok, std::string_view text,
                              ByteSpan span);

AlignedRegion align_region(const TokenizationResult& tok, std::string_view text,
                           const corpus::CriticalRegion& region);

}  // namespace gapprobe::bpe
