// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gapprobe/bpe.hpp"
#include "gapprobe/corpus.hpp"
#include "gapprobe/csv.hpp"
#include "gapprobe/filter.hpp"
#include "gapprobe/genkit.hpp"
#include "gapprobe/metrics.hpp"
#include "gapprobe/scoring.hpp"
#include "random_text.hpp"
#include "test_support.hpp"

using namespace gapprobe;
using corpus::Condition;
using nlohmann::json;

namespace {

// Tolerances.
constexpr double kUniformBitsPerToken = 15.617;
constexpr double kUniformTol = 1e-3;
constexpr double kTTol = 0.01;
constexpr double kCiTol = 0.01;
constexpr double kPTol = 0.001;
constexpr double kOracleRel = 1e-6;  // six significant digits
constexpr int kRandomStrings = 10000;
constexpr std::size_t kGoldenMin = 100;
constexpr std::size_t kDiffItems = 1000;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

int failures = 0;

void report(const std::string& name, const std::function<Outcome()>& check) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = check();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  char timing[32];
  std::snprintf(timing, sizeof timing, "%.2fs", secs);
  std::cout << (o.pass ? "PASS " : "FAIL ") << name << " (" << timing << ")"
            << (o.detail.empty() ? "" : ": " + o.detail) << std::endl;
}

bool close_rel(double got, double want, double rel) {
  return std::abs(got - want) <= rel * std::max(std::abs(want), 1e-300);
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

const bpe::Tokenizer& gpt2() {
  static const bpe::Tokenizer tok = bpe::Tokenizer::from_directory(gapprobe::testing::gpt2_dir());
  return tok;
}

Outcome tokenizer_golden() {
  Outcome o;
  std::ifstream in(gapprobe::testing::fixture_path("golden_tokens.jsonl"));
  std::string line;
  std::size_t n = 0;
  std::size_t mismatches = 0;
  std::set<std::string> sets;
  while (std::getline(in, line)) {
    const auto j = json::parse(line);
    ++n;
    sets.insert(j.value("set", ""));
    if (gpt2().encode(j.at("text").get<std::string>()).ids != j.at("ids").get<std::vector<int>>()) {
      ++mismatches;
    }
  }
  o.require(n >= kGoldenMin, "only " + std::to_string(n) + " fixture strings");
  for (const char* s : {"original", "filtered", "refined"}) {
    o.require(sets.count(s) == 1, std::string("fixture lacks the ") + s + " set");
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " id mismatches");

  std::mt19937_64 rng(20240611);
  std::size_t roundtrip_failures = 0;
  for (int i = 0; i < kRandomStrings; ++i) {
    const auto s = gapprobe::testing::random_utf8(rng);
    if (gpt2().decode(gpt2().encode(s).ids) != s) ++roundtrip_failures;
  }
  o.require(roundtrip_failures == 0, std::to_string(roundtrip_failures) + " round-trip failures");
  if (o.pass) {
    o.detail = std::to_string(n) + " fixture strings, 0 mismatches; " +
               std::to_string(kRandomStrings) + " random strings round-trip";
  }
  return o;
}

Outcome uniform_forcing() {
  Outcome o;
  auto d = genkit::generate_refined(genkit::LexiconBank::default_bank(), 10, 7);
  std::vector<corpus::ItemTuple> items = d.items();
  // The example item gets its own sentence type so its key stays distinct.
  auto example_records = corpus::parse_dataset(gapprobe::testing::kExampleCsv).records();
  for (auto& r : example_records) r.sentence_type = "example";
  const corpus::Dataset example(example_records);
  items.insert(items.end(), example.items().begin(), example.items().end());
  d = corpus::Dataset::from_items(items);

  scoring::UniformBackend u(scoring::kGpt2VocabSize);
  const auto scores = scoring::score_dataset(u, gpt2(), d);
  std::size_t tokens = 0;
  double worst = 0.0;
  for (const auto& [key, sr] : scores) {
    for (double b : sr.surprisal.bits) {
      worst = std::max(worst, std::abs(b - kUniformBitsPerToken));
      ++tokens;
    }
  }
  o.require(worst <= kUniformTol, "per-token deviation " + fmt(worst));
  std::size_t nonzero = 0;
  for (const auto& item : d.items()) {
    std::map<Condition, double> bits;
    for (Condition c : corpus::kAllConditions) bits[c] = scores.at({item.key(), c}).region_bits;
    const auto delta = metrics::compute_deltas(bits, item.key());
    if (delta.delta_plus_filler != 0.0 || delta.delta_minus_filler != 0.0 || delta.did != 0.0) {
      ++nonzero;
    }
  }
  o.require(d.items().size() == 11, std::to_string(d.items().size()) + " items, want 11");
  o.require(nonzero == 0, std::to_string(nonzero) + " items with nonzero delta");
  if (o.pass) {
    o.detail = std::to_string(tokens) + " tokens within " + fmt(worst) + " of 15.617 bits, " +
               std::to_string(d.items().size()) + " items with all deltas exactly 0";
  }
  return o;
}

Outcome statistics_oracle() {
  Outcome o;
  // Ten values with mean 2.70 and standard error 1.0212.
  std::vector<double> x{-1.5, -1.0, -0.6, -0.3, 0.0, 0.1, 0.4, 0.7, 1.0, 1.2};
  const double m = std::accumulate(x.begin(), x.end(), 0.0) / 10.0;
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  const double sd = std::sqrt(ss / 9.0);
  for (double& v : x) v = 2.70 + (v - m) / sd * (1.0212 * std::sqrt(10.0));

  const auto t = metrics::one_sample_t(x);
  const auto ci = metrics::t_mean_interval(x);
  const double p = metrics::t_upper_tail(1.66, 9.0);
  o.require(std::abs(t.t - 2.64) <= kTTol, "t = " + fmt(t.t));
  o.require(std::abs(ci.lower - 0.39) <= kCiTol && std::abs(ci.upper - 5.01) <= kCiTol,
            "CI [" + fmt(ci.lower) + ", " + fmt(ci.upper) + "]");
  o.require(std::abs(p - 0.066) <= kPTol, "p(t(9) > 1.66) = " + fmt(p));

  const auto oracle = json::parse(read_file(gapprobe::testing::fixture_path("stats_oracle.json")));
  std::size_t chi_cases = 0;
  std::size_t chi_bad = 0;
  for (const auto& row : oracle.at("chi_square")) {
    const auto tb = row.at("table");
    ++chi_cases;
    bool ok = true;
    for (auto [name, corr] : {std::pair{"none", metrics::Correction::None},
                              std::pair{"yates", metrics::Correction::Yates}}) {
      const auto r = metrics::chi_square_2x2(tb[0][0], tb[0][1], tb[1][0], tb[1][1], corr);
      ok = ok && close_rel(r.statistic, row.at(name).at("statistic").get<double>(), kOracleRel) &&
           close_rel(r.p, row.at(name).at("p").get<double>(), kOracleRel);
    }
    chi_bad += !ok;
  }
  std::size_t wilson_cases = 0;
  std::size_t wilson_bad = 0;
  for (const auto& row : oracle.at("wilson")) {
    ++wilson_cases;
    const auto w = metrics::wilson_ci(row.at("k").get<std::size_t>(), row.at("n").get<std::size_t>());
    const double lo = row.at("lower").get<double>();
    const bool lo_ok = lo < 1e-12 ? std::abs(w.lower - lo) < 1e-12 : close_rel(w.lower, lo, kOracleRel);
    wilson_bad += !(lo_ok && close_rel(w.upper, row.at("upper").get<double>(), kOracleRel));
  }
  o.require(chi_cases == 20 && chi_bad == 0,
            std::to_string(chi_bad) + "/" + std::to_string(chi_cases) + " chi-square cases off");
  o.require(wilson_cases == 20 && wilson_bad == 0,
            std::to_string(wilson_bad) + "/" + std::to_string(wilson_cases) + " Wilson cases off");
  if (o.pass) {
    o.detail = "t = " + fmt(t.t) + ", CI [" + fmt(ci.lower) + ", " + fmt(ci.upper) + "], p = " +
               fmt(p) + "; 20 chi-square tables (both modes) and 20 Wilson intervals match";
  }
  return o;
}

Outcome filter_count() {
  Outcome o;
  const auto d = corpus::load_dataset(gapprobe::testing::fixture_path("filter_synthetic.csv"));
  const auto r = filter::apply_filter(d, filter::default_patterns());
  o.require(d.items().size() == 50, std::to_string(d.items().size()) + " synthetic items");
  o.require(r.kept.items().size() == 38, std::to_string(r.kept.items().size()) + " kept, want 38");
  o.detail = o.pass ? "synthetic corpus: 50 items, 12 planted, 38 kept" : o.detail;
  // The published materials are not bundled; when a path is supplied, the
  // primary check runs as well.
  if (const char* orig = std::getenv("GAPPROBE_ORIGINAL_MATERIALS"); orig && *orig) {
    const auto full = corpus::load_dataset(orig);
    const auto fr = filter::apply_filter(full, filter::default_patterns());
    o.require(full.items().size() == 8064, std::to_string(full.items().size()) + " items, want 8064");
    o.require(fr.kept.items().size() == 5760,
              std::to_string(fr.kept.items().size()) + " kept, want 5760");
    if (o.pass) o.detail += "; original materials: 8064 -> 5760";
  } else {
    o.detail += "; original materials not supplied (GAPPROBE_ORIGINAL_MATERIALS unset)";
  }
  return o;
}

Outcome generator_conformance() {
  Outcome o;
  const auto d = genkit::generate_refined(genkit::LexiconBank::default_bank(), 10, 7);
  o.require(d.records().size() == 40, std::to_string(d.records().size()) + " records");
  o.require(corpus::validate_dataset(d).clean(), "validation issues");
  std::set<std::string> assignments;
  for (const auto& item : d.items()) {
    const auto regions = corpus::locate_critical_regions(item);
    for (const auto& [c, r] : regions) o.require(r.word_len == 1, "multi-word region " + r.surface);
    for (Condition c : {Condition::PFPG, Condition::MFPG}) {
      const auto& s = regions.at(c).surface;
      o.require(s == "soon" || s == "eventually", "+Gap region " + s);
    }
    // Recover the slot assignment from the MFMG sentence, which carries every slot.
    const auto words = corpus::segment_words(item.at(Condition::MFMG).full_sentence);
    std::string joined;
    for (const auto& w : words) joined += w.text + "|";
    assignments.insert(joined);
  }
  o.require(assignments.size() == 10, std::to_string(assignments.size()) + " distinct assignments");

  const auto ex = genkit::generate_refined(genkit::LexiconBank::worked_example(), 1, 0);
  const char* expected[] = {
      "I know who the story about is likely to amuse soon.",
      "I know that the story about Mary is likely to amuse soon.",
      "I know who the story about is likely to amuse Anna soon.",
      "I know that the story about Mary is likely to amuse Anna soon.",
  };
  o.require(ex.records().size() == 4, "example lexicon gave " + std::to_string(ex.records().size()) + " records");
  for (std::size_t i = 0; i < 4 && i < ex.records().size(); ++i) {
    o.require(ex.records()[i].full_sentence == expected[i], "example sentence " + std::to_string(i + 1));
  }
  if (o.pass) o.detail = "40 clean records, 10 distinct assignments; example item byte-identical";
  return o;
}

Outcome diff_region_property() {
  Outcome o;
  const auto d = genkit::generate_refined(genkit::LexiconBank::default_bank(), kDiffItems, 2024);
  std::size_t ok = 0;
  for (const auto& item : d.items()) {
    const auto regions = corpus::locate_critical_regions(item);
    bool item_ok = true;
    for (bool filler : {true, false}) {
      auto words = corpus::segment_words(item.at(corpus::make_condition(filler, false)).full_sentence);
      const auto gapped = corpus::segment_words(item.at(corpus::make_condition(filler, true)).full_sentence);
      const auto& r = regions.at(corpus::make_condition(filler, false));
      words.erase(words.begin() + static_cast<long>(r.word_start),
                  words.begin() + static_cast<long>(r.word_start + r.word_len));
      item_ok = item_ok && words.size() == gapped.size() &&
                std::equal(words.begin(), words.end(), gapped.begin(),
                           [](const auto& a, const auto& b) { return a.text == b.text; });
    }
    ok += item_ok;
  }
  o.require(d.items().size() == kDiffItems, std::to_string(d.items().size()) + " items generated");
  o.require(ok == d.items().size(), std::to_string(ok) + "/" + std::to_string(d.items().size()));
  if (o.pass) o.detail = std::to_string(ok) + "/" + std::to_string(kDiffItems) + " items reproduce the +Gap sentence";
  return o;
}

}  // namespace

int main() {
  report("tokenizer golden equivalence", tokenizer_golden);
  report("uniform-backend forcing", uniform_forcing);
  report("statistics oracle suite", statistics_oracle);
  report("filter count", filter_count);
  report("generator conformance", generator_conformance);
  report("diff-region property", diff_region_property);
  std::cout << (failures == 0 ? "all acceptance criteria passed" : std::to_string(failures) + " failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
