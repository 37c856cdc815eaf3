#include "gapprobe/corpus.hpp"

#include <algorithm>
#include <charconv>
#include <set>

#include "gapprobe/csv.hpp"

namespace gapprobe::corpus {

namespace {

constexpr std::array<std::string_view, 4> kColumns = {
    "sentence_type", "item_id", "condition", "full_sentence"};

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

bool is_trailing_punct(char c) {
  return c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?';
}

std::string join_words(const std::vector<Word>& words, std::size_t start,
                       std::size_t len) {
  std::string out;
  for (std::size_t i = start; i < start + len; ++i) {
    if (i > start) out.push_back(' ');
    out += words[i].text;
  }
  return out;
}

std::string describe(const ItemKey& key) {
  return key.sentence_type + "#" + std::to_string(key.item_id);
}

std::optional<std::string> sentence_problem(const std::string& s) {
  if (s.empty()) return "empty sentence";
  if (s.back() != '.') return "sentence does not end with a period";
  if (s.size() >= 2 && s[s.size() - 2] == '.') {
    return "sentence ends with more than one period";
  }
  return std::nullopt;
}

struct PairRegions {
  CriticalRegion gapped;
  CriticalRegion filled;
};

// The -Gap word sequence must be the +Gap sequence with one contiguous run
// inserted. The LCS of the two then equals the whole +Gap sequence; among
// the alignments with a single run the leftmost insertion point is taken.
PairRegions diff_pair(const std::string& gapped_sentence, Condition gapped_cond,
                      const std::string& filled_sentence,
                      Condition filled_cond) {
  const auto a = segment_words(gapped_sentence);
  const auto b = segment_words(filled_sentence);
  auto same = [&](std::size_t i, std::size_t j) { return a[i].text == b[j].text; };

  const std::string where = std::string(condition_label(gapped_cond)) + "/" +
                            std::string(condition_label(filled_cond));

  if (a.size() == b.size()) {
    bool equal = true;
    for (std::size_t i = 0; i < a.size() && equal; ++i) equal = same(i, i);
    if (equal) {
      throw Error(ErrorKind::NoDifference, where + ": sentences are identical");
    }
  }

  // +Gap must be a subsequence of -Gap (LCS length == |a|).
  std::size_t matched = 0;
  for (std::size_t j = 0; j < b.size() && matched < a.size(); ++j) {
    if (same(matched, j)) ++matched;
  }
  if (matched < a.size() || b.size() <= a.size()) {
    throw Error(ErrorKind::NonInsertionDiff,
                where + ": -Gap sentence is not the +Gap sentence plus inserted words");
  }

  const std::size_t run = b.size() - a.size();
  std::size_t prefix = 0;
  while (prefix < a.size() && same(prefix, prefix)) ++prefix;
  std::size_t suffix = 0;
  while (suffix < a.size() && same(a.size() - 1 - suffix, b.size() - 1 - suffix)) {
    ++suffix;
  }
  if (prefix + suffix < a.size()) {
    throw Error(ErrorKind::MultipleDiffRuns,
                where + ": inserted words do not form one contiguous run");
  }
  const std::size_t at = a.size() > suffix ? a.size() - suffix : 0;
  if (at >= a.size()) {
    throw Error(ErrorKind::GapRegionMissing,
                where + ": +Gap sentence ends at the insertion point");
  }

  PairRegions out;
  out.filled = {filled_cond, at, run, join_words(b, at, run)};
  out.gapped = {gapped_cond, at, 1, a[at].text};
  return out;
}

}  // namespace

std::string_view condition_label(Condition c) {
  switch (c) {
    case Condition::PFPG: return "PFPG";
    case Condition::MFPG: return "MFPG";
    case Condition::PFMG: return "PFMG";
    case Condition::MFMG: return "MFMG";
  }
  return "?";
}

std::optional<Condition> parse_condition(std::string_view label) {
  for (Condition c : kAllConditions) {
    if (condition_label(c) == label) return c;
  }
  return std::nullopt;
}

std::vector<Word> segment_words(std::string_view sentence) {
  std::vector<Word> words;
  std::size_t i = 0;
  while (i < sentence.size()) {
    while (i < sentence.size() && is_space(sentence[i])) ++i;
    if (i >= sentence.size()) break;
    std::size_t end = i;
    while (end < sentence.size() && !is_space(sentence[end])) ++end;
    std::size_t core_end = end;
    while (core_end > i && is_trailing_punct(sentence[core_end - 1])) --core_end;
    if (core_end == i || core_end == end) {
      words.push_back({std::string(sentence.substr(i, end - i)), i, end});
    } else {
      words.push_back({std::string(sentence.substr(i, core_end - i)), i, core_end});
      words.push_back(
          {std::string(sentence.substr(core_end, end - core_end)), core_end, end});
    }
    i = end;
  }
  return words;
}

Dataset::Dataset(std::vector<StimulusRecord> records, std::string source_label)
    : records_(std::move(records)), source_label_(std::move(source_label)) {
  std::vector<ItemKey> order;
  std::map<ItemKey, std::array<std::vector<const StimulusRecord*>, 4>> groups;
  for (const auto& r : records_) {
    ItemKey key{r.sentence_type, r.item_id};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    it->second[condition_index(r.condition)].push_back(&r);
  }
  for (const auto& key : order) {
    const auto& slots = groups[key];
    bool complete = std::all_of(slots.begin(), slots.end(),
                                [](const auto& v) { return v.size() == 1; });
    if (!complete) continue;
    ItemTuple t;
    t.sentence_type = key.sentence_type;
    t.item_id = key.item_id;
    for (std::size_t c = 0; c < 4; ++c) t.sentences[c] = *slots[c].front();
    items_.push_back(std::move(t));
  }
}

const ItemTuple* Dataset::find_item(const ItemKey& key) const {
  for (const auto& t : items_) {
    if (t.item_id == key.item_id && t.sentence_type == key.sentence_type) return &t;
  }
  return nullptr;
}

Dataset Dataset::from_items(const std::vector<ItemTuple>& items,
                            std::string source_label) {
  std::vector<StimulusRecord> records;
  records.reserve(items.size() * 4);
  for (const auto& t : items) {
    for (const auto& r : t.sentences) records.push_back(r);
  }
  return Dataset(std::move(records), std::move(source_label));
}

std::vector<StimulusRecord> read_records(std::string_view text) {
  auto rows = parse_csv(text);
  if (rows.empty()) {
    throw Error(ErrorKind::MissingColumn, "no header row");
  }
  const auto& header = rows.front();
  std::array<std::size_t, 4> col{};
  for (std::size_t k = 0; k < kColumns.size(); ++k) {
    auto it = std::find(header.begin(), header.end(), kColumns[k]);
    if (it == header.end()) {
      throw Error(ErrorKind::MissingColumn, std::string(kColumns[k]));
    }
    col[k] = static_cast<std::size_t>(it - header.begin());
  }

  std::vector<StimulusRecord> records;
  records.reserve(rows.size() - 1);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string line = "row " + std::to_string(r + 1);
    if (row.size() < header.size()) {
      throw Error(ErrorKind::MalformedRow,
                  line + ": expected " + std::to_string(header.size()) +
                      " fields, got " + std::to_string(row.size()));
    }
    StimulusRecord rec;
    rec.sentence_type = row[col[0]];
    const std::string& id = row[col[1]];
    auto [ptr, ec] = std::from_chars(id.data(), id.data() + id.size(), rec.item_id);
    if (ec != std::errc{} || ptr != id.data() + id.size() || rec.item_id <= 0) {
      throw Error(ErrorKind::MalformedRow, line + ": item_id '" + id +
                                               "' is not a positive integer");
    }
    auto cond = parse_condition(row[col[2]]);
    if (!cond) {
      throw Error(ErrorKind::UnknownConditionLabel, line + ": '" + row[col[2]] + "'");
    }
    rec.condition = *cond;
    rec.full_sentence = row[col[3]];
    records.push_back(std::move(rec));
  }
  return records;
}

Dataset parse_dataset(std::string_view text, std::string source_label) {
  Dataset d(read_records(text), std::move(source_label));
  std::set<std::tuple<std::string, int, Condition>> seen;
  std::map<ItemKey, int> present;
  for (const auto& r : d.records()) {
    if (!seen.emplace(r.sentence_type, r.item_id, r.condition).second) {
      throw Error(ErrorKind::DuplicateRecord,
                  describe({r.sentence_type, r.item_id}) + " " +
                      std::string(condition_label(r.condition)));
    }
    ++present[{r.sentence_type, r.item_id}];
  }
  for (const auto& [key, count] : present) {
    if (count != 4) {
      throw Error(ErrorKind::IncompleteTuple,
                  describe(key) + " has " + std::to_string(count) + " of 4 conditions");
    }
  }
  return d;
}

Dataset load_dataset(const std::string& path) {
  return parse_dataset(read_file(path), path);
}

std::string serialize_dataset(const Dataset& d) {
  std::string out = csv_line(CsvRow(kColumns.begin(), kColumns.end()));
  for (const auto& r : d.records()) {
    out += csv_line({r.sentence_type, std::to_string(r.item_id),
                     std::string(condition_label(r.condition)), r.full_sentence});
  }
  return out;
}

void save_dataset(const Dataset& d, const std::string& path) {
  write_file(path, serialize_dataset(d));
}

RegionMap locate_critical_regions(const ItemTuple& item) {
  RegionMap regions;
  for (bool filler : {true, false}) {
    const Condition gapped = make_condition(filler, true);
    const Condition filled = make_condition(filler, false);
    auto pair = diff_pair(item.at(gapped).full_sentence, gapped,
                          item.at(filled).full_sentence, filled);
    regions[gapped] = std::move(pair.gapped);
    regions[filled] = std::move(pair.filled);
  }
  return regions;
}

std::size_t ValidationReport::count(ErrorKind kind) const {
  return static_cast<std::size_t>(std::count_if(
      issues.begin(), issues.end(),
      [kind](const ValidationIssue& i) { return i.kind == kind; }));
}

ValidationReport validate_dataset(const Dataset& d) {
  ValidationReport report;
  report.n_records = d.records().size();
  report.n_items = d.items().size();

  std::set<std::tuple<std::string, int, Condition>> seen;
  std::vector<ItemKey> order;
  std::map<ItemKey, std::array<int, 4>> counts;
  for (const auto& r : d.records()) {
    ItemKey key{r.sentence_type, r.item_id};
    if (!counts.count(key)) order.push_back(key);
    ++counts[key][condition_index(r.condition)];
    if (!seen.emplace(r.sentence_type, r.item_id, r.condition).second) {
      report.issues.push_back({ErrorKind::DuplicateRecord, key, r.condition,
                               "condition appears more than once"});
    }
    if (auto problem = sentence_problem(r.full_sentence)) {
      report.issues.push_back({ErrorKind::InvalidSentence, key, r.condition, *problem});
    }
  }
  for (const auto& key : order) {
    const auto& c = counts[key];
    int missing = 0;
    for (int n : c) missing += n == 0 ? 1 : 0;
    if (missing > 0) {
      report.issues.push_back({ErrorKind::IncompleteTuple, key, std::nullopt,
                               std::to_string(4 - missing) + " of 4 conditions present"});
    }
  }
  for (const auto& item : d.items()) {
    try {
      locate_critical_regions(item);
    } catch (const Error& e) {
      report.issues.push_back({e.kind(), item.key(), std::nullopt, e.detail()});
    }
  }
  return report;
}

}  // namespace gapprobe::corpus
