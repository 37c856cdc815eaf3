#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "gapprobe/corpus.hpp"

namespace gapprobe::filter {

enum class ElementKind {
  Name,        // capitalized alphabetic word, not sentence-initial
  NamePoss,    // Name with 's attached ("John's")
  Gerund,      // alphabetic word ending in "ing"
  Literal,     // exact, case-sensitive word
};

struct PatternElement {
  ElementKind kind = ElementKind::Literal;
  std::string literal;
};

struct FilterPattern {
  std::string name;
  std::vector<PatternElement> elements;
};

/// Parses one pattern line: tokens NAME, NAME'S, GERUND, TO and quoted
/// literals, separated by spaces. TO is shorthand for the literal "to".
FilterPattern parse_pattern(std::string_view line, std::string name = {});

/// One pattern per non-blank, non-'#' line. A line may be prefixed with
/// "name:" to label the pattern.
std::vector<FilterPattern> parse_patterns(std::string_view text);
std::vector<FilterPattern> load_patterns(const std::string& path);

/// The possessive-gerund pattern: NAME'S GERUND TO.
FilterPattern possessive_gerund_pattern();
/// The optional "NAME'S intent TO" pattern, not part of the default set.
FilterPattern intent_to_pattern();
std::vector<FilterPattern> default_patterns();

/// True when the sentence contains a contiguous word run matching all
/// elements.
bool matches(const FilterPattern& pattern, std::string_view sentence);

struct PatternCount {
  std::string name;
  std::size_t items_matched = 0;
  std::size_t sentences_matched = 0;
};

struct FilterReport {
  std::size_t items_in = 0;
  std::size_t items_kept = 0;
  std::size_t items_removed = 0;
  std::vector<PatternCount> per_pattern;
};

struct FilterResult {
  corpus::Dataset kept;
  corpus::Dataset removed;
  FilterReport report;
};

/// Removes every item for which any of its four sentences matches any
/// pattern. Items are never split.
FilterResult apply_filter(const corpus::Dataset& d,
                          const std::vector<FilterPattern>& patterns);

}  // namespace gapprobe::filter
