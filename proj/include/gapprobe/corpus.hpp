#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gapprobe/error.hpp"

namespace gapprobe::corpus {

/// One cell of the 2x2 +/-Filler x +/-Gap paradigm. The P/M prefix is the
/// filler level, the PG/MG suffix the gap level.
enum class Condition { PFPG, MFPG, PFMG, MFMG };

inline constexpr std::array<Condition, 4> kAllConditions = {
    Condition::PFPG, Condition::MFPG, Condition::PFMG, Condition::MFMG};

std::string_view condition_label(Condition c);
std::optional<Condition> parse_condition(std::string_view label);
constexpr bool has_filler(Condition c) {
  return c == Condition::PFPG || c == Condition::PFMG;
}
constexpr bool has_gap(Condition c) {
  return c == Condition::PFPG || c == Condition::MFPG;
}
constexpr Condition make_condition(bool filler, bool gap) {
  if (filler) return gap ? Condition::PFPG : Condition::PFMG;
  return gap ? Condition::MFPG : Condition::MFMG;
}
constexpr std::size_t condition_index(Condition c) {
  return static_cast<std::size_t>(c);
}

struct StimulusRecord {
  std::string sentence_type;
  int item_id = 0;
  Condition condition = Condition::PFPG;
  std::string full_sentence;

  bool operator==(const StimulusRecord&) const = default;
};

/// Items are identified per sentence_type; the same item_id may recur under
/// a different sentence_type.
struct ItemKey {
  std::string sentence_type;
  int item_id = 0;

  auto operator<=>(const ItemKey&) const = default;
};

struct ItemTuple {
  std::string sentence_type;
  int item_id = 0;
  std::array<StimulusRecord, 4> sentences;  // indexed by condition_index

  ItemKey key() const { return {sentence_type, item_id}; }
  const StimulusRecord& at(Condition c) const {
    return sentences[condition_index(c)];
  }
  bool operator==(const ItemTuple&) const = default;
};

/// A whitespace-delimited word with its byte span in the sentence. Trailing
/// punctuation is split into its own word so "soon." yields "soon" and ".".
struct Word {
  std::string text;
  std::size_t byte_start = 0;
  std::size_t byte_end = 0;
};

std::vector<Word> segment_words(std::string_view sentence);

struct CriticalRegion {
  Condition condition = Condition::PFPG;
  std::size_t word_start = 0;
  std::size_t word_len = 0;
  std::string surface;

  bool operator==(const CriticalRegion&) const = default;
};

using RegionMap = std::map<Condition, CriticalRegion>;

class Dataset {
 public:
  Dataset() = default;
  /// Groups records into tuples. Groups that do not carry each of the four
  /// conditions exactly once are left out of items(); validate_dataset
  /// reports them.
  explicit Dataset(std::vector<StimulusRecord> records,
                   std::string source_label = {});

  const std::vector<StimulusRecord>& records() const { return records_; }
  const std::vector<ItemTuple>& items() const { return items_; }
  const std::string& source_label() const { return source_label_; }
  void set_source_label(std::string label) { source_label_ = std::move(label); }

  const ItemTuple* find_item(const ItemKey& key) const;

  /// Builds a dataset from whole tuples, keeping their order.
  static Dataset from_items(const std::vector<ItemTuple>& items,
                            std::string source_label = {});

  bool operator==(const Dataset& other) const {
    return records_ == other.records_;
  }

 private:
  std::vector<StimulusRecord> records_;
  std::vector<ItemTuple> items_;
  std::string source_label_;
};

/// Reads rows of the long-format file without checking tuple structure.
/// Throws MissingColumn, MalformedRow or UnknownConditionLabel.
std::vector<StimulusRecord> read_records(std::string_view text);

/// Parses and checks tuple structure; throws DuplicateRecord or
/// IncompleteTuple on the first offending item.
Dataset parse_dataset(std::string_view text, std::string source_label = {});
Dataset load_dataset(const std::string& path);

std::string serialize_dataset(const Dataset& d);
void save_dataset(const Dataset& d, const std::string& path);

/// Diff-based localization. Within each filler level the -Gap sentence must
/// equal the +Gap sentence plus one contiguous inserted word run.
RegionMap locate_critical_regions(const ItemTuple& item);

struct ValidationIssue {
  ErrorKind kind;
  ItemKey item;
  std::optional<Condition> condition;
  std::string message;
};

struct ValidationReport {
  std::size_t n_records = 0;
  std::size_t n_items = 0;
  std::vector<ValidationIssue> issues;

  bool clean() const { return issues.empty(); }
  std::size_t count(ErrorKind kind) const;
};

ValidationReport validate_dataset(const Dataset& d);

}  // namespace gapprobe::corpus
