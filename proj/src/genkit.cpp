#include "gapprobe/genkit.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "gapprobe/csv.hpp"

namespace gapprobe::genkit {

using corpus::Condition;

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

template <typename T>
void dedupe(std::vector<T>& pool) {
  std::vector<T> out;
  std::set<T> seen;
  for (auto& v : pool) {
    if (seen.insert(v).second) out.push_back(std::move(v));
  }
  pool = std::move(out);
}

std::uint64_t mul_sat(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    return std::numeric_limits<std::uint64_t>::max();
  }
  return a * b;
}

// Unbiased draw from [0, bound) on top of mt19937_64, whose output sequence
// is fixed by the standard (std::uniform_int_distribution is not).
std::uint64_t draw_below(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = rng();
    if (r >= threshold) return r % bound;
  }
}

struct Radix {
  std::array<std::uint64_t, 7> sizes{};

  explicit Radix(const LexiconBank& lex)
      : sizes{lex.preambles.size(),      lex.noun_heads.size(),
              lex.linking_verbs.size(),  lex.transitive_verbs.size(),
              lex.g1_names.size(),       lex.g2_names.size(),
              lex.adverbs.size()} {}

  std::uint64_t total() const {
    std::uint64_t t = 1;
    for (auto s : sizes) t = mul_sat(t, s);
    return t;
  }

  std::array<std::size_t, 7> digits(std::uint64_t index) const {
    std::array<std::size_t, 7> d{};
    for (std::size_t k = sizes.size(); k-- > 0;) {
      d[k] = static_cast<std::size_t>(index % sizes[k]);
      index /= sizes[k];
    }
    return d;
  }
};

SlotAssignment decode(const LexiconBank& lex, const std::array<std::size_t, 7>& d) {
  return {lex.preambles[d[0]],     lex.noun_heads[d[1]], lex.linking_verbs[d[2]],
          lex.transitive_verbs[d[3]], lex.g1_names[d[4]], lex.g2_names[d[5]],
          lex.adverbs[d[6]]};
}

constexpr std::uint64_t kEnumerateLimit = 1u << 20;

}  // namespace

LexiconBank LexiconBank::default_bank() {
  LexiconBank lex;
  lex.preambles = {"I know", "She heard", "They believe", "The report suggested",
                   "It is clear"};
  lex.noun_heads = {{"story", "about"},      {"report", "about"},
                    {"book", "about"},       {"article", "about"},
                    {"picture", "of"},       {"critique", "of"},
                    {"rumor", "about"},      {"discussion", "about"},
                    {"painting", "of"},      {"description", "of"}};
  lex.linking_verbs = {"is likely to", "is going to", "is expected to",
                       "will probably", "might"};
  lex.transitive_verbs = {"upset",  "amuse",   "delight", "interest",
                          "surprise", "anger", "please",  "concern",
                          "bother", "disturb", "fascinate"};
  lex.g1_names = {"Mary", "John", "Sarah", "the manager"};
  lex.g2_names = {"Anna", "Ben", "Chris", "Dana", "Leo",
                  "Sara", "Tom", "Paul", "Nina"};
  lex.adverbs = {"soon", "eventually"};
  return lex;
}

LexiconBank LexiconBank::worked_example() {
  LexiconBank lex;
  lex.preambles = {"I know"};
  lex.noun_heads = {{"story", "about"}};
  lex.linking_verbs = {"is likely to"};
  lex.transitive_verbs = {"amuse"};
  lex.g1_names = {"Mary"};
  lex.g2_names = {"Anna"};
  lex.adverbs = {"soon"};
  return lex;
}

void check_lexicon(const LexiconBank& lex) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw Error(ErrorKind::MalformedLexicon, what);
  };
  require(!lex.preambles.empty(), "empty pool: preambles");
  require(!lex.noun_heads.empty(), "empty pool: noun_heads");
  require(!lex.linking_verbs.empty(), "empty pool: linking_verbs");
  require(!lex.transitive_verbs.empty(), "empty pool: transitive_verbs");
  require(!lex.g1_names.empty(), "empty pool: g1_names");
  require(!lex.g2_names.empty(), "empty pool: g2_names");
  require(!lex.adverbs.empty(), "empty pool: adverbs");
  for (const auto& a : lex.adverbs) {
    require(a == "soon" || a == "eventually", "adverb not allowed: " + a);
  }
  for (const auto& n : lex.noun_heads) {
    require(n.preposition == "about" || n.preposition == "of",
            "preposition not allowed: " + n.preposition);
    require(!n.noun.empty(), "empty noun head");
  }
}

LexiconBank parse_lexicon(std::string_view text) {
  LexiconBank lex;
  std::vector<std::string>* pool = nullptr;
  bool in_nouns = false;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error(ErrorKind::MalformedLexicon,
                    "line " + std::to_string(lineno) + ": unterminated section");
      }
      const std::string name = trim(std::string_view(line).substr(1, line.size() - 2));
      in_nouns = false;
      pool = nullptr;
      if (name == "preambles") pool = &lex.preambles;
      else if (name == "noun_heads") in_nouns = true;
      else if (name == "linking_verbs") pool = &lex.linking_verbs;
      else if (name == "transitive_verbs") pool = &lex.transitive_verbs;
      else if (name == "g1_names") pool = &lex.g1_names;
      else if (name == "g2_names") pool = &lex.g2_names;
      else if (name == "adverbs") pool = &lex.adverbs;
      else {
        throw Error(ErrorKind::MalformedLexicon,
                    "line " + std::to_string(lineno) + ": unknown pool '" + name + "'");
      }
      continue;
    }
    if (in_nouns) {
      const auto sp = line.find_last_of(" \t");
      if (sp == std::string::npos) {
        throw Error(ErrorKind::MalformedLexicon,
                    "line " + std::to_string(lineno) +
                        ": noun head needs 'noun preposition'");
      }
      lex.noun_heads.push_back({trim(line.substr(0, sp)), trim(line.substr(sp + 1))});
    } else if (pool) {
      pool->push_back(line);
    } else {
      throw Error(ErrorKind::MalformedLexicon,
                  "line " + std::to_string(lineno) + ": entry outside a pool");
    }
  }
  check_lexicon(lex);
  return lex;
}

LexiconBank load_lexicon(const std::string& path) {
  return parse_lexicon(read_file(path));
}

std::string serialize_lexicon(const LexiconBank& lex) {
  std::string out;
  auto section = [&out](std::string_view name, const std::vector<std::string>& pool) {
    out += "[" + std::string(name) + "]\n";
    for (const auto& w : pool) out += w + "\n";
    out += "\n";
  };
  section("preambles", lex.preambles);
  out += "[noun_heads]\n";
  for (const auto& n : lex.noun_heads) out += n.noun + " " + n.preposition + "\n";
  out += "\n";
  section("linking_verbs", lex.linking_verbs);
  section("transitive_verbs", lex.transitive_verbs);
  section("g1_names", lex.g1_names);
  section("g2_names", lex.g2_names);
  section("adverbs", lex.adverbs);
  return out;
}

const std::array<SlotTemplate, 4>& refined_templates() {
  static const std::array<SlotTemplate, 4> templates = [] {
    auto lit = [](std::string w) { return SlotToken{Slot::Literal, std::move(w)}; };
    auto s = [](Slot slot) { return SlotToken{slot, {}}; };
    std::array<SlotTemplate, 4> t{};
    t[0] = {Condition::PFPG,
            {s(Slot::Preamble), lit("who"), lit("the"), s(Slot::NounHead),
             s(Slot::Preposition), s(Slot::LinkingVerb), s(Slot::TransitiveVerb),
             s(Slot::Adverb)}};
    t[1] = {Condition::MFPG,
            {s(Slot::Preamble), lit("that"), lit("the"), s(Slot::NounHead),
             s(Slot::Preposition), s(Slot::G1Name), s(Slot::LinkingVerb),
             s(Slot::TransitiveVerb), s(Slot::Adverb)}};
    t[2] = {Condition::PFMG,
            {s(Slot::Preamble), lit("who"), lit("the"), s(Slot::NounHead),
             s(Slot::Preposition), s(Slot::LinkingVerb), s(Slot::TransitiveVerb),
             s(Slot::G2Object), s(Slot::Adverb)}};
    t[3] = {Condition::MFMG,
            {s(Slot::Preamble), lit("that"), lit("the"), s(Slot::NounHead),
             s(Slot::Preposition), s(Slot::G1Name), s(Slot::LinkingVerb),
             s(Slot::TransitiveVerb), s(Slot::G2Object), s(Slot::Adverb)}};
    return t;
  }();
  return templates;
}

std::string render(const SlotTemplate& tmpl, const SlotAssignment& slots) {
  std::string out;
  for (const auto& tok : tmpl.slot_sequence) {
    const std::string* word = nullptr;
    switch (tok.slot) {
      case Slot::Literal: word = &tok.literal; break;
      case Slot::Preamble: word = &slots.preamble; break;
      case Slot::NounHead: word = &slots.noun_head.noun; break;
      case Slot::Preposition: word = &slots.noun_head.preposition; break;
      case Slot::G1Name: word = &slots.g1_name; break;
      case Slot::LinkingVerb: word = &slots.linking_verb; break;
      case Slot::TransitiveVerb: word = &slots.transitive_verb; break;
      case Slot::G2Object: word = &slots.g2_name; break;
      case Slot::Adverb: word = &slots.adverb; break;
    }
    if (!out.empty()) out.push_back(' ');
    out += *word;
  }
  out.push_back('.');
  return out;
}

std::uint64_t assignment_space(const LexiconBank& lex) {
  const Radix radix(lex);
  const std::uint64_t total = radix.total();
  if (total == std::numeric_limits<std::uint64_t>::max()) return total;
  std::uint64_t clashes = 0;
  for (const auto& g1 : lex.g1_names) {
    clashes += static_cast<std::uint64_t>(
        std::count(lex.g2_names.begin(), lex.g2_names.end(), g1));
  }
  const std::uint64_t per_pair = total / (radix.sizes[4] * radix.sizes[5]);
  return total - clashes * per_pair;
}

std::vector<SlotAssignment> draw_assignments(const LexiconBank& input,
                                             std::size_t n_items,
                                             std::uint64_t seed) {
  if (n_items == 0) return {};
  LexiconBank lex = input;
  check_lexicon(lex);
  dedupe(lex.preambles);
  dedupe(lex.noun_heads);
  dedupe(lex.linking_verbs);
  dedupe(lex.transitive_verbs);
  dedupe(lex.g1_names);
  dedupe(lex.g2_names);
  dedupe(lex.adverbs);

  const Radix radix(lex);
  const std::uint64_t available = assignment_space(lex);
  if (n_items > available) {
    throw Error(ErrorKind::LexiconExhausted,
                "requested " + std::to_string(n_items) + " items but the lexicon admits " +
                    std::to_string(available) + " distinct assignments");
  }
  auto valid = [&](std::uint64_t index) {
    const auto d = radix.digits(index);
    return lex.g1_names[d[4]] != lex.g2_names[d[5]];
  };

  std::mt19937_64 rng(seed);
  std::vector<SlotAssignment> out;
  out.reserve(n_items);
  const std::uint64_t total = radix.total();
  if (total <= kEnumerateLimit) {
    std::vector<std::uint64_t> pool;
    pool.reserve(static_cast<std::size_t>(available));
    for (std::uint64_t i = 0; i < total; ++i) {
      if (valid(i)) pool.push_back(i);
    }
    // Partial Fisher-Yates: the first n slots become the sample.
    for (std::size_t k = 0; k < n_items; ++k) {
      const auto j = k + static_cast<std::size_t>(draw_below(rng, pool.size() - k));
      std::swap(pool[k], pool[j]);
      out.push_back(decode(lex, radix.digits(pool[k])));
    }
  } else {
    std::unordered_set<std::uint64_t> taken;
    while (out.size() < n_items) {
      const std::uint64_t i = draw_below(rng, total);
      if (!valid(i) || !taken.insert(i).second) continue;
      out.push_back(decode(lex, radix.digits(i)));
    }
  }
  return out;
}

corpus::ItemTuple instantiate(const SlotAssignment& slots, int item_id,
                              const std::string& sentence_type) {
  corpus::ItemTuple item;
  item.sentence_type = sentence_type;
  item.item_id = item_id;
  for (const auto& tmpl : refined_templates()) {
    item.sentences[corpus::condition_index(tmpl.condition)] = {
        sentence_type, item_id, tmpl.condition, render(tmpl, slots)};
  }
  return item;
}

corpus::Dataset generate_refined(const LexiconBank& lex, std::size_t n_items,
                                 std::uint64_t seed,
                                 const std::string& sentence_type) {
  const auto assignments = draw_assignments(lex, n_items, seed);
  std::vector<corpus::ItemTuple> items;
  items.reserve(assignments.size());
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    items.push_back(instantiate(assignments[i], static_cast<int>(i + 1), sentence_type));
  }
  return corpus::Dataset::from_items(items, "refined");
}

// Grammar parsing and expansion.

namespace {

std::vector<Production> parse_alternatives(std::string_view rhs, int lineno) {
  auto fail = [lineno](const std::string& what) {
    return Error(ErrorKind::MalformedGrammar,
                 "line " + std::to_string(lineno) + ": " + what);
  };
  std::vector<Production> alts(1);
  std::size_t i = 0;
  while (i < rhs.size()) {
    const char c = rhs[i];
    if (c == ' ' || c == '\t') {
      ++i;
    } else if (c == '|') {
      alts.emplace_back();
      ++i;
    } else if (c == '"' || c == '\'') {
      const auto close = rhs.find(c, i + 1);
      if (close == std::string_view::npos) throw fail("unterminated terminal");
      alts.back().push_back({true, std::string(rhs.substr(i + 1, close - i - 1))});
      i = close + 1;
    } else if (c == '`') {
      // LaTeX-style `to' quoting.
      const auto close = rhs.find('\'', i + 1);
      if (close == std::string_view::npos) throw fail("unterminated terminal");
      alts.back().push_back({true, std::string(rhs.substr(i + 1, close - i - 1))});
      i = close + 1;
    } else {
      std::size_t end = i;
      while (end < rhs.size() && rhs[end] != ' ' && rhs[end] != '\t' && rhs[end] != '|') {
        ++end;
      }
      std::string name(rhs.substr(i, end - i));
      if (name.size() >= 2 && name.front() == '(' && name.back() == ')') {
        name = name.substr(1, name.size() - 2);
      }
      if (name.empty()) throw fail("empty nonterminal");
      alts.back().push_back({false, std::move(name)});
      i = end;
    }
  }
  for (const auto& p : alts) {
    if (p.empty()) throw fail("empty alternative");
  }
  return alts;
}

using Memo = std::map<std::string, std::vector<std::string>>;

void check_acyclic(const GrammarSpec& g, const std::string& nt,
                   std::map<std::string, int>& state) {
  // 0 unvisited, 1 on stack, 2 done
  auto& s = state[nt];
  if (s == 2) return;
  if (s == 1) throw Error(ErrorKind::RecursiveGrammar, "cycle through " + nt);
  s = 1;
  auto it = g.rules.find(nt);
  if (it == g.rules.end()) {
    throw Error(ErrorKind::UnknownNonterminal, nt);
  }
  for (const auto& prod : it->second) {
    for (const auto& sym : prod) {
      if (!sym.terminal) check_acyclic(g, sym.text, state);
    }
  }
  state[nt] = 2;
}

std::string join_space(const std::string& a, const std::string& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  return a + " " + b;
}

const std::vector<std::string>& expand_symbol(const GrammarSpec& g,
                                              const std::string& nt,
                                              std::size_t limit, Memo& memo) {
  if (auto it = memo.find(nt); it != memo.end()) return it->second;
  std::vector<std::string> out;
  for (const auto& prod : g.rules.at(nt)) {
    // Odometer over the production's symbols, leftmost slowest. Each
    // component list is already truncated at limit, which cannot drop any
    // of the first `limit` products.
    std::vector<std::string> partial{std::string()};
    for (const auto& sym : prod) {
      std::vector<std::string> next;
      if (sym.terminal) {
        for (const auto& p : partial) next.push_back(join_space(p, sym.text));
      } else {
        const auto& sub = expand_symbol(g, sym.text, limit, memo);
        for (const auto& p : partial) {
          for (const auto& s : sub) {
            if (next.size() >= limit) break;
            next.push_back(join_space(p, s));
          }
          if (next.size() >= limit) break;
        }
      }
      partial = std::move(next);
    }
    for (auto& p : partial) {
      if (out.size() >= limit) break;
      out.push_back(std::move(p));
    }
    if (out.size() >= limit) break;
  }
  return memo.emplace(nt, std::move(out)).first->second;
}

}  // namespace

GrammarSpec parse_grammar(std::string_view text) {
  GrammarSpec g;
  std::istringstream in{std::string(text)};
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto arrow = line.find("->");
    if (arrow == std::string::npos) {
      throw Error(ErrorKind::MalformedGrammar,
                  "line " + std::to_string(lineno) + ": missing '->'");
    }
    std::string lhs = trim(std::string_view(line).substr(0, arrow));
    if (lhs.size() >= 2 && lhs.front() == '(' && lhs.back() == ')') {
      lhs = lhs.substr(1, lhs.size() - 2);
    }
    if (lhs.empty() || lhs.find_first_of(" \t\"'") != std::string::npos) {
      throw Error(ErrorKind::MalformedGrammar,
                  "line " + std::to_string(lineno) + ": bad left-hand side");
    }
    auto alts = parse_alternatives(std::string_view(line).substr(arrow + 2), lineno);
    if (g.start.empty()) g.start = lhs;
    auto& dst = g.rules[lhs];
    dst.insert(dst.end(), alts.begin(), alts.end());
  }
  if (g.start.empty()) throw Error(ErrorKind::MalformedGrammar, "no rules");
  return g;
}

GrammarSpec load_grammar(const std::string& path) {
  return parse_grammar(read_file(path));
}

std::vector<std::string> expand_cfg(const GrammarSpec& grammar, std::size_t limit) {
  std::map<std::string, int> state;
  check_acyclic(grammar, grammar.start, state);
  if (limit == 0) return {};
  Memo memo;
  return expand_symbol(grammar, grammar.start, limit, memo);
}

}  // namespace gapprobe::genkit
