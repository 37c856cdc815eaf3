#pragma once

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gapprobe/corpus.hpp"

namespace gapprobe::genkit {

struct NounHead {
  std::string noun;
  std::string preposition;  // "about" or "of"

  auto operator<=>(const NounHead&) const = default;
};

/// Word pools for the refined subject-PG slot grammar.
struct LexiconBank {
  std::vector<std::string> preambles;
  std::vector<NounHead> noun_heads;
  std::vector<std::string> linking_verbs;
  std::vector<std::string> transitive_verbs;
  std::vector<std::string> g1_names;
  std::vector<std::string> g2_names;
  std::vector<std::string> adverbs;

  /// The word lists enumerated in the stimulus-generation template.
  static LexiconBank default_bank();
  /// Only the words used by the template's worked example item.
  static LexiconBank worked_example();

  bool operator==(const LexiconBank&) const = default;
};

/// Throws MalformedLexicon when a pool is empty, an adverb is outside
/// {soon, eventually} or a preposition outside {about, of}.
void check_lexicon(const LexiconBank& lex);

/// Sectioned text: a "[pool]" line opens a pool, each following non-blank
/// line is one entry. noun_heads entries are "noun preposition".
LexiconBank parse_lexicon(std::string_view text);
LexiconBank load_lexicon(const std::string& path);
std::string serialize_lexicon(const LexiconBank& lex);

enum class Slot {
  Literal,
  Preamble,
  NounHead,
  Preposition,
  G1Name,
  LinkingVerb,
  TransitiveVerb,
  G2Object,
  Adverb,
};

struct SlotToken {
  Slot slot = Slot::Literal;
  std::string literal;  // set only for Slot::Literal
};

struct SlotTemplate {
  corpus::Condition condition;
  std::vector<SlotToken> slot_sequence;
};

/// PFPG, MFPG, PFMG, MFMG in that order.
const std::array<SlotTemplate, 4>& refined_templates();

struct SlotAssignment {
  std::string preamble;
  NounHead noun_head;
  std::string linking_verb;
  std::string transitive_verb;
  std::string g1_name;
  std::string g2_name;
  std::string adverb;

  auto operator<=>(const SlotAssignment&) const = default;
};

/// Renders one template; the sentence ends with a period.
std::string render(const SlotTemplate& tmpl, const SlotAssignment& slots);

/// Draws n distinct full slot assignments (g1_name != g2_name) without
/// replacement from the lexicon cross-product. Deterministic in seed.
std::vector<SlotAssignment> draw_assignments(const LexiconBank& lex,
                                             std::size_t n_items,
                                             std::uint64_t seed);

/// Number of valid full assignments the lexicon admits, saturating at
/// UINT64_MAX.
std::uint64_t assignment_space(const LexiconBank& lex);

corpus::ItemTuple instantiate(const SlotAssignment& slots, int item_id,
                              const std::string& sentence_type);

corpus::Dataset generate_refined(const LexiconBank& lex, std::size_t n_items,
                                 std::uint64_t seed,
                                 const std::string& sentence_type = "subject_pg");

// Context-free grammar expansion.

struct GrammarSymbol {
  bool terminal = false;
  std::string text;

  bool operator==(const GrammarSymbol&) const = default;
};

using Production = std::vector<GrammarSymbol>;

struct GrammarSpec {
  std::map<std::string, std::vector<Production>> rules;
  std::string start;
};

/// One rule per line: `LHS -> sym sym | sym ...`. Terminals are quoted with
/// '"' or '\''; nonterminals are bare or parenthesized. Repeated LHS lines
/// append alternatives. The first LHS is the start symbol. '#' starts a
/// comment.
GrammarSpec parse_grammar(std::string_view text);
GrammarSpec load_grammar(const std::string& path);

/// All derivations from the start symbol, leftmost symbol varying slowest,
/// alternatives in rule order, truncated at limit. Terminals are joined
/// with single spaces.
std::vector<std::string> expand_cfg(const GrammarSpec& grammar,
                                    std::size_t limit);

}  // namespace gapprobe::genkit
