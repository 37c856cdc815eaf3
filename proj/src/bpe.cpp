#include "gapprobe/bpe.hpp"

#include <algorithm>
#include <filesystem>
#include <limits>

#include <nlohmann/json.hpp>

#include "gapprobe/csv.hpp"

namespace gapprobe::bpe {

namespace {

struct CodepointRange {
  char32_t lo;
  char32_t hi;
};

#include "unicode_tables.inc"

template <std::size_t N>
bool in_ranges(const CodepointRange (&table)[N], char32_t cp) {
  auto it = std::upper_bound(std::begin(table), std::end(table), cp,
                             [](char32_t v, const CodepointRange& r) { return v < r.lo; });
  if (it == std::begin(table)) return false;
  --it;
  return cp <= it->hi;
}

bool is_letter(char32_t cp) {
  if (cp < 0x80) return (cp >= 'A' && cp <= 'Z') || (cp >= 'a' && cp <= 'z');
  return in_ranges(kLetterRanges, cp);
}

bool is_number(char32_t cp) {
  if (cp < 0x80) return cp >= '0' && cp <= '9';
  return in_ranges(kNumberRanges, cp);
}

// Unicode White_Space.
bool is_whitespace(char32_t cp) {
  switch (cp) {
    case 0x09: case 0x0A: case 0x0B: case 0x0C: case 0x0D: case 0x20:
    case 0x85: case 0xA0: case 0x1680: case 0x2028: case 0x2029:
    case 0x202F: case 0x205F: case 0x3000:
      return true;
    default:
      return cp >= 0x2000 && cp <= 0x200A;
  }
}

enum class CharClass { Letter, Number, Space, Other };

CharClass classify(char32_t cp) {
  if (is_letter(cp)) return CharClass::Letter;
  if (is_number(cp)) return CharClass::Number;
  if (is_whitespace(cp)) return CharClass::Space;
  return CharClass::Other;
}

struct Decoded {
  char32_t cp;
  std::size_t len;
};

Decoded decode_utf8(std::string_view s, std::size_t i) {
  auto bad = [i] {
    return Error(ErrorKind::InvalidUtf8, "invalid UTF-8 at byte " + std::to_string(i));
  };
  const auto b0 = static_cast<unsigned char>(s[i]);
  if (b0 < 0x80) return {b0, 1};
  std::size_t len;
  char32_t cp;
  char32_t min;
  if ((b0 & 0xE0) == 0xC0) { len = 2; cp = b0 & 0x1F; min = 0x80; }
  else if ((b0 & 0xF0) == 0xE0) { len = 3; cp = b0 & 0x0F; min = 0x800; }
  else if ((b0 & 0xF8) == 0xF0) { len = 4; cp = b0 & 0x07; min = 0x10000; }
  else throw bad();
  if (i + len > s.size()) throw bad();
  for (std::size_t k = 1; k < len; ++k) {
    const auto b = static_cast<unsigned char>(s[i + k]);
    if ((b & 0xC0) != 0x80) throw bad();
    cp = (cp << 6) | (b & 0x3F);
  }
  if (cp < min || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) throw bad();
  return {cp, len};
}

void append_utf8(std::string& out, char32_t cp) {
  if (cp < 0x80) {
    out.push_back(static_cast<char>(cp));
  } else if (cp < 0x800) {
    out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else if (cp < 0x10000) {
    out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  } else {
    out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
    out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
  }
}

struct ByteMap {
  std::array<char32_t, 256> to_cp{};
  std::array<int, 324> from_cp{};  // code points used are all below 324

  ByteMap() {
    from_cp.fill(-1);
    auto printable = [](int b) {
      return (b >= '!' && b <= '~') || (b >= 0xA1 && b <= 0xAC) || (b >= 0xAE && b <= 0xFF);
    };
    int extra = 0;
    for (int b = 0; b < 256; ++b) {
      const char32_t cp = printable(b) ? static_cast<char32_t>(b)
                                       : static_cast<char32_t>(256 + extra++);
      to_cp[static_cast<std::size_t>(b)] = cp;
      from_cp[cp] = b;
    }
  }
};

const ByteMap& byte_map() {
  static const ByteMap map;
  return map;
}

std::uint64_t pair_key(TokenId a, TokenId b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

}  // namespace

std::string byte_to_unicode(std::uint8_t byte) {
  std::string out;
  append_utf8(out, byte_map().to_cp[byte]);
  return out;
}

std::string unicode_to_bytes(std::string_view mapped) {
  std::string out;
  out.reserve(mapped.size());
  const auto& map = byte_map();
  std::size_t i = 0;
  while (i < mapped.size()) {
    Decoded d{};
    try {
      d = decode_utf8(mapped, i);
    } catch (const Error&) {
      throw Error(ErrorKind::MalformedVocab, "token string is not valid UTF-8");
    }
    if (d.cp >= map.from_cp.size() || map.from_cp[d.cp] < 0) {
      throw Error(ErrorKind::MalformedVocab,
                  "code point U+" + std::to_string(static_cast<unsigned>(d.cp)) +
                      " is outside the byte mapping");
    }
    out.push_back(static_cast<char>(map.from_cp[d.cp]));
    i += d.len;
  }
  return out;
}

std::vector<ByteSpan> pretokenize(std::string_view text) {
  // Decode once; the scanner works on code points with byte positions.
  std::vector<char32_t> cps;
  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i < text.size();) {
    const auto d = decode_utf8(text, i);
    cps.push_back(d.cp);
    pos.push_back(i);
    i += d.len;
  }
  pos.push_back(text.size());
  const std::size_t n = cps.size();

  std::vector<CharClass> cls(n);
  for (std::size_t k = 0; k < n; ++k) cls[k] = classify(cps[k]);

  auto run_end = [&](std::size_t k, CharClass c) {
    while (k < n && cls[k] == c) ++k;
    return k;
  };

  std::vector<ByteSpan> pieces;
  std::size_t k = 0;
  while (k < n) {
    std::size_t end = k;
    const char32_t cp = cps[k];

    if (cp == '\'' && k + 1 < n) {
      const char32_t c1 = cps[k + 1];
      const char32_t c2 = k + 2 < n ? cps[k + 2] : 0;
      if (c1 == 's' || c1 == 't' || c1 == 'm' || c1 == 'd') end = k + 2;
      else if ((c1 == 'r' && c2 == 'e') || (c1 == 'v' && c2 == 'e') ||
               (c1 == 'l' && c2 == 'l')) end = k + 3;
    }
    if (end == k) {
      const bool lead_space = cp == ' ' && k + 1 < n;
      const CharClass here = cls[k];
      const CharClass next = lead_space ? cls[k + 1] : CharClass::Space;
      if (here == CharClass::Letter || here == CharClass::Number ||
          here == CharClass::Other) {
        end = run_end(k, here);
      } else if (lead_space && next != CharClass::Space) {
        end = run_end(k + 1, next);
      } else {
        // Whitespace run: \s+(?!\S) keeps the last space for the next word.
        const std::size_t ws_end = run_end(k, CharClass::Space);
        if (ws_end == n || ws_end - k == 1) end = ws_end;
        else end = ws_end - 1;
      }
    }
    pieces.push_back({pos[k], pos[end]});
    k = end;
  }
  return pieces;
}

Vocab::Vocab(std::vector<std::string> id_to_token) : id_to_token_(std::move(id_to_token)) {
  token_to_id_.reserve(id_to_token_.size());
  for (std::size_t i = 0; i < id_to_token_.size(); ++i) {
    if (!token_to_id_.emplace(id_to_token_[i], static_cast<TokenId>(i)).second) {
      throw Error(ErrorKind::MalformedVocab, "duplicate token for id " + std::to_string(i));
    }
  }
}

Vocab Vocab::from_json(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::MalformedVocab, e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::MalformedVocab, "vocab is not an object");
  std::vector<std::string> tokens(j.size());
  std::vector<bool> filled(j.size(), false);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number_integer()) {
      throw Error(ErrorKind::MalformedVocab, "non-integer id for " + it.key());
    }
    const auto id = it.value().get<long long>();
    if (id < 0 || static_cast<std::size_t>(id) >= tokens.size() ||
        filled[static_cast<std::size_t>(id)]) {
      throw Error(ErrorKind::MalformedVocab, "ids are not dense: " + std::to_string(id));
    }
    tokens[static_cast<std::size_t>(id)] = unicode_to_bytes(it.key());
    filled[static_cast<std::size_t>(id)] = true;
  }
  return Vocab(std::move(tokens));
}

std::optional<TokenId> Vocab::find(std::string_view bytes) const {
  auto it = token_to_id_.find(std::string(bytes));
  if (it == token_to_id_.end()) return std::nullopt;
  return it->second;
}

MergeRanks::MergeRanks(std::vector<Merge> merges) : merges_(std::move(merges)) {}

MergeRanks MergeRanks::from_text(std::string_view text) {
  std::vector<Merge> merges;
  std::size_t start = 0;
  bool first = true;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    start = nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (first && line.starts_with("#version")) {
      first = false;
      continue;
    }
    first = false;
    if (line.empty()) continue;
    const auto sp = line.find(' ');
    if (sp == std::string_view::npos || sp == 0 || sp + 1 >= line.size() ||
        line.find(' ', sp + 1) != std::string_view::npos) {
      throw Error(ErrorKind::MalformedVocab, "bad merge line: " + std::string(line));
    }
    merges.push_back({unicode_to_bytes(line.substr(0, sp)), unicode_to_bytes(line.substr(sp + 1))});
  }
  return MergeRanks(std::move(merges));
}

Tokenizer::Tokenizer(Vocab vocab, MergeRanks merges) : vocab_(std::move(vocab)) {
  for (int b = 0; b < 256; ++b) {
    auto id = vocab_.find(std::string(1, static_cast<char>(b)));
    if (!id) {
      throw Error(ErrorKind::UnknownByteSequence,
                  "no token for single byte " + std::to_string(b));
    }
    byte_ids_[static_cast<std::size_t>(b)] = *id;
  }
  merge_table_.reserve(merges.size());
  std::uint32_t rank = 0;
  for (const auto& m : merges.merges()) {
    auto l = vocab_.find(m.left);
    auto r = vocab_.find(m.right);
    auto merged = vocab_.find(m.left + m.right);
    if (!l || !r || !merged) {
      throw Error(ErrorKind::UnknownByteSequence,
                  "merge " + std::to_string(rank) + " refers to a sequence missing from the vocab");
    }
    // First occurrence wins on duplicate pairs.
    merge_table_.try_emplace(pair_key(*l, *r), MergeInfo{rank, *merged});
    ++rank;
  }
  end_of_text_ = vocab_.find("<|endoftext|>");
}

Tokenizer Tokenizer::from_files(const std::string& vocab_json_path,
                                const std::string& merges_path) {
  return Tokenizer(Vocab::from_json(read_file(vocab_json_path)),
                   MergeRanks::from_text(read_file(merges_path)));
}

Tokenizer Tokenizer::from_directory(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path base(dir);
  for (auto [v, m] : {std::pair{"encoder.json", "vocab.bpe"},
                      std::pair{"vocab.json", "merges.txt"}}) {
    if (fs::exists(base / v) && fs::exists(base / m)) {
      return from_files((base / v).string(), (base / m).string());
    }
  }
  throw Error(ErrorKind::Io, "no tokenizer files (encoder.json/vocab.bpe) in " + dir);
}

void Tokenizer::bpe_piece(std::string_view piece, std::vector<TokenId>& out) const {
  std::vector<TokenId> word;
  word.reserve(piece.size());
  for (char c : piece) word.push_back(byte_ids_[static_cast<unsigned char>(c)]);

  while (word.size() > 1) {
    std::uint32_t best_rank = std::numeric_limits<std::uint32_t>::max();
    TokenId best_left = 0;
    TokenId best_right = 0;
    TokenId best_merged = 0;
    for (std::size_t i = 0; i + 1 < word.size(); ++i) {
      auto it = merge_table_.find(pair_key(word[i], word[i + 1]));
      if (it != merge_table_.end() && it->second.rank < best_rank) {
        best_rank = it->second.rank;
        best_left = word[i];
        best_right = word[i + 1];
        best_merged = it->second.merged;
      }
    }
    if (best_rank == std::numeric_limits<std::uint32_t>::max()) break;
    // Merge every non-overlapping occurrence of the best pair, left to right.
    std::vector<TokenId> next;
    next.reserve(word.size());
    for (std::size_t i = 0; i < word.size();) {
      if (i + 1 < word.size() && word[i] == best_left && word[i + 1] == best_right) {
        next.push_back(best_merged);
        i += 2;
      } else {
        next.push_back(word[i]);
        ++i;
      }
    }
    word = std::move(next);
  }
  out.insert(out.end(), word.begin(), word.end());
}

TokenizationResult Tokenizer::encode(std::string_view text) const {
  TokenizationResult result;
  for (const auto& span : pretokenize(text)) {
    const std::size_t first = result.ids.size();
    bpe_piece(text.substr(span.start, span.size()), result.ids);
    std::size_t at = span.start;
    for (std::size_t k = first; k < result.ids.size(); ++k) {
      const std::size_t len = vocab_.token_bytes(result.ids[k]).size();
      result.offsets.push_back({at, at + len});
      at += len;
    }
  }
  return result;
}

std::string Tokenizer::decode(std::span<const TokenId> ids) const {
  std::string out;
  for (TokenId id : ids) {
    if (id < 0 || static_cast<std::size_t>(id) >= vocab_.size()) {
      throw Error(ErrorKind::UnknownByteSequence, "token id out of range: " + std::to_string(id));
    }
    out += vocab_.token_bytes(id);
  }
  return out;
}

ByteSpan region_byte_span(std::string_view text, const corpus::CriticalRegion& region) {
  const auto words = corpus::segment_words(text);
  if (region.word_len == 0 || region.word_start + region.word_len > words.size()) {
    throw Error(ErrorKind::RegionNotCovered, "region words out of range for '" +
                                                 std::string(text) + "'");
  }
  std::string surface;
  for (std::size_t i = region.word_start; i < region.word_start + region.word_len; ++i) {
    if (i > region.word_start) surface.push_back(' ');
    surface += words[i].text;
  }
  if (surface != region.surface) {
    throw Error(ErrorKind::RegionNotCovered,
                "region surface '" + region.surface + "' does not match '" + surface + "'");
  }
  return {words[region.word_start].byte_start,
          words[region.word_start + region.word_len - 1].byte_end};
}

AlignedRegion align_byte_span(const TokenizationResult& tok, std::string_view text,
                              ByteSpan span) {
  if (span.start >= span.end || span.end > text.size()) {
    throw Error(ErrorKind::RegionNotCovered, "empty or out-of-range byte span");
  }
  const auto& off = tok.offsets;
  // Offsets are sorted and contiguous, so the cover is found by bisection.
  auto first = std::partition_point(off.begin(), off.end(),
                                    [&](const ByteSpan& b) { return b.end <= span.start; });
  auto last = std::partition_point(off.begin(), off.end(),
                                   [&](const ByteSpan& b) { return b.start < span.end; });
  if (first == off.end() || first >= last || first->start > span.start ||
      (last - 1)->end < span.end) {
    throw Error(ErrorKind::RegionNotCovered, "token offsets do not cover the region");
  }
  AlignedRegion out;
  out.token_start = static_cast<std::size_t>(first - off.begin());
  out.token_len = static_cast<std::size_t>(last - first);
  bool left_clean = true;
  for (std::size_t b = first->start; b < span.start; ++b) {
    const char c = text[b];
    if (c != ' ' && c != '\t' && c != '\n' && c != '\r') left_clean = false;
  }
  out.crosses_token_boundary = !left_clean || (last - 1)->end > span.end;
  return out;
}

AlignedRegion align_region(const TokenizationResult& tok, std::string_view text,
                           const corpus::CriticalRegion& region) {
  return align_byte_span(tok, text, region_byte_span(text, region));
}

}  // namespace gapprobe::bpe
