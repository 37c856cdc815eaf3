#include "gapprobe/cli.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gapprobe/bpe.hpp"
#include "gapprobe/csv.hpp"
#include "gapprobe/error.hpp"
#include "gapprobe/filter.hpp"
#include "gapprobe/genkit.hpp"
#include "gapprobe/report.hpp"

#ifndef GAPPROBE_DEFAULT_DATA_DIR
#define GAPPROBE_DEFAULT_DATA_DIR "data"
#endif

namespace gapprobe::cli {

using nlohmann::json;
using corpus::Condition;

namespace {

constexpr const char* kScoreColumns[] = {
    "sentence_type", "item_id",     "condition",    "full_sentence",
    "region",        "region_word_start", "region_word_len", "token_start",
    "token_len",     "region_bits", "backend"};

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Writes to the file if a path was given, otherwise to out.
void emit(const std::string& path, std::string_view contents, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << contents;
  } else {
    write_file(path, contents);
  }
}

std::string stem_of(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

struct GenerateArgs {
  std::size_t n = 10;
  std::uint64_t seed = 0;
  std::string out;
  std::string lexicon;
  std::string sentence_type = "subject_pg";
};

struct FilterArgs {
  std::string in;
  std::string out;
  std::string removed;
  std::string patterns;
  std::string format = "text";
};

struct ScoreArgs {
  std::string in;
  std::string out;
  std::string backend;
  std::string tokenizer;
  std::size_t max_in_flight = 64;
  long timeout_ms = 0;
};

struct AnalyzeArgs {
  std::vector<std::string> in;
  std::vector<std::string> labels;
  std::string correction;
  std::string format = "text";
  std::string out;
};

struct ReportArgs {
  std::vector<std::string> in;
  std::string out;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
  const auto lex = a.lexicon.empty() ? genkit::LexiconBank::default_bank()
                                     : genkit::load_lexicon(a.lexicon);
  const auto d = genkit::generate_refined(lex, a.n, a.seed, a.sentence_type);
  emit(a.out, corpus::serialize_dataset(d), out);
  return kExitOk;
}

std::string filter_report_text(const filter::FilterReport& r) {
  std::string s = "items in: " + std::to_string(r.items_in) + "\nitems kept: " +
                  std::to_string(r.items_kept) + "\nitems removed: " +
                  std::to_string(r.items_removed) + "\n";
  for (const auto& p : r.per_pattern) {
    s += "pattern " + p.name + ": " + std::to_string(p.items_matched) + " items, " +
         std::to_string(p.sentences_matched) + " sentences\n";
  }
  return s;
}

std::string filter_report_record(const filter::FilterReport& r) {
  json patterns = json::array();
  for (const auto& p : r.per_pattern) {
    patterns.push_back({{"name", p.name},
                        {"items_matched", p.items_matched},
                        {"sentences_matched", p.sentences_matched}});
  }
  json j{{"type", "filter"},
         {"items_in", r.items_in},
         {"items_kept", r.items_kept},
         {"items_removed", r.items_removed},
         {"patterns", patterns}};
  return j.dump() + "\n";
}

int cmd_filter(const FilterArgs& a, std::ostream& out, std::ostream& err) {
  const auto d = corpus::load_dataset(a.in);
  const auto patterns =
      a.patterns.empty() ? filter::default_patterns() : filter::load_patterns(a.patterns);
  const auto result = filter::apply_filter(d, patterns);
  emit(a.out, corpus::serialize_dataset(result.kept), out);
  if (!a.removed.empty()) corpus::save_dataset(result.removed, a.removed);
  const std::string summary = a.format == "records" ? filter_report_record(result.report)
                                                    : filter_report_text(result.report);
  // The summary shares stdout only when the dataset itself went to a file.
  (a.out.empty() || a.out == "-" ? err : out) << summary;
  return kExitOk;
}

int cmd_score(const ScoreArgs& a, std::ostream& out) {
  const auto desc = scoring::BackendDescriptor::parse(a.backend);
  const auto d = corpus::load_dataset(a.in);
  const auto tok =
      bpe::Tokenizer::from_directory(a.tokenizer.empty() ? default_tokenizer_dir() : a.tokenizer);
  scoring::WireOptions wire;
  wire.max_in_flight = a.max_in_flight;
  wire.timeout = std::chrono::milliseconds(a.timeout_ms);
  auto backend = scoring::make_backend(desc, tok, wire);
  const auto scores = scoring::score_dataset(*backend, tok, d);
  emit(a.out, scores_csv(d, scores), out);
  if (!a.out.empty() && a.out != "-") write_file(a.out + ".tokens.jsonl", tokens_jsonl(d, scores));
  return kExitOk;
}

int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  if (a.labels.size() > a.in.size()) {
    throw Error(ErrorKind::InvalidArgument, "more --label values than --in files");
  }
  std::vector<metrics::AggregateReport> reports;
  for (std::size_t i = 0; i < a.in.size(); ++i) {
    const std::string label = i < a.labels.size() ? a.labels[i] : stem_of(a.in[i]);
    std::vector<metrics::DeltaScores> deltas;
    try {
      deltas = deltas_from_scores(read_file(a.in[i]));
    } catch (const Error& e) {
      throw e.with_context(a.in[i]);
    }
    reports.push_back(metrics::aggregate(deltas, label));
  }

  std::vector<metrics::Correction> modes;
  if (a.correction.empty() || a.correction == "none") modes.push_back(metrics::Correction::None);
  if (a.correction.empty() || a.correction == "yates") modes.push_back(metrics::Correction::Yates);

  std::string text;
  std::string records;
  for (const auto& r : reports) {
    text += report::to_text(r) + "\n";
    records += report::to_record(r).dump() + "\n";
  }
  for (std::size_t i = 0; i < reports.size(); ++i) {
    for (std::size_t j = i + 1; j < reports.size(); ++j) {
      const auto& ra = reports[i];
      const auto& rb = reports[j];
      if (ra.n_items == 0 || rb.n_items == 0) continue;
      const std::pair<const char*, std::pair<metrics::Proportion, metrics::Proportion>> criteria[] = {
          {"delta_plus", {ra.acc_delta_plus, rb.acc_delta_plus}},
          {"did", {ra.acc_did, rb.acc_did}}};
      for (const auto& [name, props] : criteria) {
        for (auto mode : modes) {
          try {
            const auto c = metrics::compare(props.first, props.second, mode, name, ra.label, rb.label);
            text += report::to_text(c);
            records += report::to_record(c).dump() + "\n";
          } catch (const Error& e) {
            if (e.kind() != ErrorKind::ZeroMarginal) throw;
            text += std::string("chi-square ") + name + " (" + ra.label + " vs " + rb.label +
                    ", correction " + (mode == metrics::Correction::Yates ? "yates" : "none") +
                    "): undefined, " + e.detail() + "\n";
          }
        }
      }
    }
  }
  emit(a.out, a.format == "records" ? records : text, out);
  return kExitOk;
}

int cmd_report(const ReportArgs& a, std::ostream& out) {
  std::vector<metrics::AggregateReport> reports;
  for (const auto& path : a.in) {
    auto part = report::read_aggregates(read_file(path));
    reports.insert(reports.end(), part.begin(), part.end());
  }
  emit(a.out, report::render_svg(reports), out);
  return kExitOk;
}

int exit_code_for(ErrorKind kind) {
  if (is_backend_error(kind)) return kExitBackend;
  if (kind == ErrorKind::InvalidBackend || kind == ErrorKind::InvalidArgument) return kExitUsage;
  return kExitData;
}

}  // namespace

std::string default_tokenizer_dir() {
  if (const char* env = std::getenv("GAPPROBE_TOKENIZER_DIR"); env && *env) return env;
  return std::string(GAPPROBE_DEFAULT_DATA_DIR) + "/gpt2";
}

std::string scores_csv(const corpus::Dataset& d, const scoring::ScoreMap& scores) {
  std::string s = csv_line(CsvRow(std::begin(kScoreColumns), std::end(kScoreColumns)));
  for (const auto& item : d.items()) {
    for (Condition c : corpus::kAllConditions) {
      const auto& sr = scores.at({item.key(), c});
      s += csv_line({sr.record.sentence_type, std::to_string(sr.record.item_id),
                     std::string(corpus::condition_label(c)), sr.record.full_sentence,
                     sr.region.surface, std::to_string(sr.region.word_start),
                     std::to_string(sr.region.word_len), std::to_string(sr.aligned.token_start),
                     std::to_string(sr.aligned.token_len), exact(sr.region_bits),
                     sr.surprisal.backend_label});
    }
  }
  return s;
}

std::string tokens_jsonl(const corpus::Dataset& d, const scoring::ScoreMap& scores) {
  std::string s;
  for (const auto& item : d.items()) {
    for (Condition c : corpus::kAllConditions) {
      const auto& sr = scores.at({item.key(), c});
      json j{{"sentence_type", sr.record.sentence_type},
             {"item_id", sr.record.item_id},
             {"condition", corpus::condition_label(c)},
             {"token_ids", sr.tokens.ids},
             {"surprisal_bits", sr.surprisal.bits}};
      s += j.dump() + "\n";
    }
  }
  return s;
}

std::vector<metrics::DeltaScores> deltas_from_scores(std::string_view csv_text) {
  const auto rows = parse_csv(csv_text);
  if (rows.empty()) throw Error(ErrorKind::MissingColumn, "scores file has no header");
  const auto& header = rows.front();
  auto column = [&](std::string_view name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw Error(ErrorKind::MissingColumn, std::string(name));
  };
  const std::size_t c_type = column("sentence_type");
  const std::size_t c_id = column("item_id");
  const std::size_t c_cond = column("condition");
  const std::size_t c_bits = column("region_bits");

  std::vector<corpus::ItemKey> order;
  std::map<corpus::ItemKey, std::map<Condition, double>> bits;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    const std::string where = "row " + std::to_string(r + 1);
    if (row.size() != header.size()) {
      throw Error(ErrorKind::MalformedRow, where + ": expected " + std::to_string(header.size()) +
                                               " fields, got " + std::to_string(row.size()));
    }
    corpus::ItemKey key;
    key.sentence_type = row[c_type];
    double value = 0.0;
    try {
      std::size_t used = 0;
      key.item_id = std::stoi(row[c_id], &used);
      if (used != row[c_id].size()) throw std::invalid_argument("trailing characters");
      value = std::stod(row[c_bits], &used);
      if (used != row[c_bits].size()) throw std::invalid_argument("trailing characters");
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::MalformedRow, where + ": item_id or region_bits is not numeric");
    }
    const auto cond = corpus::parse_condition(row[c_cond]);
    if (!cond) throw Error(ErrorKind::UnknownConditionLabel, where + ": " + row[c_cond]);
    auto [it, fresh] = bits.try_emplace(key);
    if (fresh) order.push_back(key);
    if (!it->second.emplace(*cond, value).second) {
      throw Error(ErrorKind::DuplicateRecord,
                  key.sentence_type + "#" + std::to_string(key.item_id) + " " + row[c_cond]);
    }
  }

  std::vector<metrics::DeltaScores> out;
  out.reserve(order.size());
  for (const auto& key : order) {
    const auto& m = bits.at(key);
    if (m.size() != corpus::kAllConditions.size()) {
      std::string missing;
      for (Condition c : corpus::kAllConditions) {
        if (!m.count(c)) missing += (missing.empty() ? "" : ",") + std::string(corpus::condition_label(c));
      }
      throw Error(ErrorKind::IncompleteScores,
                  key.sentence_type + "#" + std::to_string(key.item_id) + " lacks " + missing);
    }
    out.push_back(metrics::compute_deltas(m, key));
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Filler-gap surprisal probe: generate, filter, score, analyze, report"};
  app.name("gapprobe");
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate refined 2x2 items");
  generate->add_option("--n", gen.n, "Number of items")->capture_default_str();
  generate->add_option("--seed", gen.seed, "Random seed")->capture_default_str();
  generate->add_option("--out", gen.out, "Output CSV (stdout if omitted)");
  generate->add_option("--lexicon", gen.lexicon, "Lexicon file")->check(CLI::ExistingFile);
  generate->add_option("--sentence-type", gen.sentence_type, "sentence_type column value")
      ->capture_default_str();

  FilterArgs flt;
  auto* filt = app.add_subcommand("filter", "Drop items matching confound patterns");
  filt->add_option("--in", flt.in, "Input CSV")->required()->check(CLI::ExistingFile);
  filt->add_option("--out", flt.out, "Kept items CSV (stdout if omitted)");
  filt->add_option("--removed", flt.removed, "Removed items CSV");
  filt->add_option("--patterns", flt.patterns, "Pattern file")->check(CLI::ExistingFile);
  filt->add_option("--format", flt.format, "Summary format")
      ->check(CLI::IsMember({"text", "records"}))
      ->capture_default_str();

  ScoreArgs sc;
  auto* score = app.add_subcommand("score", "Compute critical-region surprisal");
  score->add_option("--in", sc.in, "Input CSV")->required()->check(CLI::ExistingFile);
  score->add_option("--out", sc.out, "Scores CSV; the token sidecar is <out>.tokens.jsonl");
  score->add_option("--backend", sc.backend, "uniform:V | ngram:ORDER:CORPUS | wire:CMD-OR-HOST:PORT")
      ->required();
  score->add_option("--tokenizer", sc.tokenizer, "Directory with encoder.json and vocab.bpe");
  score->add_option("--max-in-flight", sc.max_in_flight, "Pipelined wire requests")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  score->add_option("--timeout-ms", sc.timeout_ms, "Wire response timeout, 0 waits forever")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();

  AnalyzeArgs an;
  auto* analyze = app.add_subcommand("analyze", "Deltas, accuracies, t tests, chi-square");
  analyze->add_option("--in", an.in, "Scores CSV (repeat to compare datasets)")
      ->required()
      ->check(CLI::ExistingFile);
  analyze->add_option("--label", an.labels, "Dataset label per --in (default: file stem)");
  analyze->add_option("--correction", an.correction, "Chi-square correction (default: both)")
      ->check(CLI::IsMember({"none", "yates"}));
  analyze->add_option("--format", an.format, "Report format")
      ->check(CLI::IsMember({"text", "records"}))
      ->capture_default_str();
  analyze->add_option("--out", an.out, "Report file (stdout if omitted)");

  ReportArgs rep;
  auto* rpt = app.add_subcommand("report", "Render the accuracy bar chart as SVG");
  rpt->add_option("--in", rep.in, "analyze --format records output (repeatable)")
      ->required()
      ->check(CLI::ExistingFile);
  rpt->add_option("--out", rep.out, "SVG file (stdout if omitted)");

  std::vector<std::string> storage;
  storage.reserve(args.size() + 1);
  storage.push_back("gapprobe");
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*generate) return cmd_generate(gen, out);
    if (*filt) return cmd_filter(flt, out, err);
    if (*score) return cmd_score(sc, out);
    if (*analyze) return cmd_analyze(an, out);
    if (*rpt) return cmd_report(rep, out);
  } catch (const Error& e) {
    err << "gapprobe: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "gapprobe: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}

}  // namespace gapprobe::cli
