#include "gapprobe/filter.hpp"

#include <sstream>

#include "gapprobe/csv.hpp"

namespace gapprobe::filter {

namespace {

bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }
bool is_alpha(char c) { return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z'); }

bool all_alpha(std::string_view w) {
  if (w.empty()) return false;
  for (char c : w) {
    if (!is_alpha(c)) return false;
  }
  return true;
}

bool is_name(std::string_view w, std::size_t position) {
  return position > 0 && all_alpha(w) && is_upper(w.front());
}

// Strips a possessive clitic, accepting ASCII and typographic apostrophes.
std::string_view strip_possessive(std::string_view w) {
  if (w.size() > 2 && w.substr(w.size() - 2) == "'s") return w.substr(0, w.size() - 2);
  if (w.size() > 4 && w.substr(w.size() - 4) == "\xE2\x80\x99s") {
    return w.substr(0, w.size() - 4);
  }
  return {};
}

bool element_matches(const PatternElement& e, std::string_view w, std::size_t pos) {
  switch (e.kind) {
    case ElementKind::Name: return is_name(w, pos);
    case ElementKind::NamePoss: {
      auto base = strip_possessive(w);
      return !base.empty() && is_name(base, pos);
    }
    case ElementKind::Gerund:
      return w.size() > 3 && all_alpha(w) && w.substr(w.size() - 3) == "ing";
    case ElementKind::Literal: return w == e.literal;
  }
  return false;
}

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

}  // namespace

FilterPattern parse_pattern(std::string_view line, std::string name) {
  FilterPattern p;
  p.name = name.empty() ? trim(line) : std::move(name);
  std::size_t i = 0;
  while (i < line.size()) {
    if (line[i] == ' ' || line[i] == '\t') {
      ++i;
      continue;
    }
    if (line[i] == '"') {
      const auto close = line.find('"', i + 1);
      if (close == std::string_view::npos || close == i + 1) {
        throw Error(ErrorKind::MalformedPattern, "bad literal in '" + std::string(line) + "'");
      }
      p.elements.push_back({ElementKind::Literal, std::string(line.substr(i + 1, close - i - 1))});
      i = close + 1;
      continue;
    }
    std::size_t end = i;
    while (end < line.size() && line[end] != ' ' && line[end] != '\t') ++end;
    const std::string_view tok = line.substr(i, end - i);
    if (tok == "NAME") p.elements.push_back({ElementKind::Name, {}});
    else if (tok == "NAME'S") p.elements.push_back({ElementKind::NamePoss, {}});
    else if (tok == "GERUND") p.elements.push_back({ElementKind::Gerund, {}});
    else if (tok == "TO") p.elements.push_back({ElementKind::Literal, "to"});
    else {
      throw Error(ErrorKind::MalformedPattern, "unknown token '" + std::string(tok) + "'");
    }
    i = end;
  }
  if (p.elements.empty()) throw Error(ErrorKind::MalformedPattern, "empty pattern");
  return p;
}

std::vector<FilterPattern> parse_patterns(std::string_view text) {
  std::vector<FilterPattern> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    std::string name;
    // "label: body", where the label precedes any quote.
    const auto colon = line.find(':');
    if (colon != std::string::npos && line.find('"') > colon) {
      name = trim(std::string_view(line).substr(0, colon));
      line = trim(std::string_view(line).substr(colon + 1));
    }
    out.push_back(parse_pattern(line, name));
  }
  return out;
}

std::vector<FilterPattern> load_patterns(const std::string& path) {
  return parse_patterns(read_file(path));
}

FilterPattern possessive_gerund_pattern() {
  return parse_pattern("NAME'S GERUND TO", "possessive_gerund");
}

FilterPattern intent_to_pattern() {
  return parse_pattern("NAME'S \"intent\" TO", "intent_to");
}

std::vector<FilterPattern> default_patterns() { return {possessive_gerund_pattern()}; }

bool matches(const FilterPattern& pattern, std::string_view sentence) {
  const auto words = corpus::segment_words(sentence);
  const auto& el = pattern.elements;
  if (el.empty() || words.size() < el.size()) return false;
  for (std::size_t start = 0; start + el.size() <= words.size(); ++start) {
    bool ok = true;
    for (std::size_t k = 0; k < el.size() && ok; ++k) {
      ok = element_matches(el[k], words[start + k].text, start + k);
    }
    if (ok) return true;
  }
  return false;
}

FilterResult apply_filter(const corpus::Dataset& d,
                          const std::vector<FilterPattern>& patterns) {
  FilterReport report;
  report.items_in = d.items().size();
  for (const auto& p : patterns) report.per_pattern.push_back({p.name, 0, 0});

  std::vector<corpus::ItemTuple> kept;
  std::vector<corpus::ItemTuple> removed;
  for (const auto& item : d.items()) {
    bool hit = false;
    for (std::size_t k = 0; k < patterns.size(); ++k) {
      std::size_t sentences = 0;
      for (const auto& rec : item.sentences) {
        if (matches(patterns[k], rec.full_sentence)) ++sentences;
      }
      if (sentences > 0) {
        hit = true;
        ++report.per_pattern[k].items_matched;
        report.per_pattern[k].sentences_matched += sentences;
      }
    }
    (hit ? removed : kept).push_back(item);
  }
  report.items_kept = kept.size();
  report.items_removed = removed.size();
  return {corpus::Dataset::from_items(kept, d.source_label()),
          corpus::Dataset::from_items(removed, d.source_label()), std::move(report)};
}

}  // namespace gapprobe::filter
