#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "gapprobe/bpe.hpp"
#include "gapprobe/cli.hpp"
#include "gapprobe/corpus.hpp"
#include "gapprobe/error.hpp"
#include "gapprobe/filter.hpp"
#include "gapprobe/genkit.hpp"
#include "gapprobe/metrics.hpp"
#include "gapprobe/report.hpp"
#include "gapprobe/scoring.hpp"

namespace py = pybind11;
using namespace gapprobe;

namespace {

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

corpus::Dataset dataset_from(const std::string& csv_text) {
  return corpus::parse_dataset(csv_text);
}

py::dict filter_report(const filter::FilterReport& r) {
  py::dict d;
  d["items_in"] = r.items_in;
  d["items_kept"] = r.items_kept;
  d["items_removed"] = r.items_removed;
  py::dict per;
  for (const auto& p : r.per_pattern) {
    per[py::str(p.name)] = py::make_tuple(p.items_matched, p.sentences_matched);
  }
  d["per_pattern"] = per;
  return d;
}

metrics::Correction parse_correction(const std::string& s) {
  if (s == "none") return metrics::Correction::None;
  if (s == "yates") return metrics::Correction::Yates;
  throw Error(ErrorKind::InvalidArgument, "correction must be none or yates: " + s);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Native core of the gapprobe toolkit.";

  static py::exception<Error> error_type(m, "GapprobeError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(error_type)(py::str(e.what()));
      exc.attr("kind") = py::str(std::string(error_kind_name(e.kind())));
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def(
      "generate",
      [](std::size_t n, std::uint64_t seed, const std::string& lexicon_path,
         const std::string& sentence_type) {
        const auto lex = lexicon_path.empty() ? genkit::LexiconBank::default_bank()
                                              : genkit::load_lexicon(lexicon_path);
        return corpus::serialize_dataset(genkit::generate_refined(lex, n, seed, sentence_type));
      },
      py::arg("n") = 10, py::arg("seed") = 0, py::arg("lexicon_path") = "",
      py::arg("sentence_type") = "subject_pg",
      "Generate n refined items; returns stimulus CSV text.");

  m.def(
      "filter",
      [](const std::string& csv_text, const std::string& patterns_path) {
        const auto patterns =
            patterns_path.empty() ? filter::default_patterns() : filter::load_patterns(patterns_path);
        const auto r = filter::apply_filter(dataset_from(csv_text), patterns);
        return py::make_tuple(corpus::serialize_dataset(r.kept), corpus::serialize_dataset(r.removed),
                              filter_report(r.report));
      },
      py::arg("csv_text"), py::arg("patterns_path") = "",
      "Remove confounded items; returns (kept_csv, removed_csv, report).");

  m.def(
      "validate",
      [](const std::string& csv_text) {
        std::vector<std::string> out;
        for (const auto& issue : corpus::validate_dataset(dataset_from(csv_text)).issues) {
          out.push_back(issue.message);
        }
        return out;
      },
      py::arg("csv_text"), "List validation issues in stimulus CSV text.");

  py::class_<bpe::Tokenizer>(m, "Tokenizer")
      .def(py::init([](const std::string& dir) { return bpe::Tokenizer::from_directory(dir); }),
           py::arg("directory"))
      .def("encode", [](const bpe::Tokenizer& t, const std::string& s) { return t.encode(s).ids; })
      .def("decode",
           [](const bpe::Tokenizer& t, const std::vector<bpe::TokenId>& ids) {
             return py::bytes(t.decode(ids)).attr("decode")("utf-8", "replace");
           })
      .def_property_readonly("end_of_text", &bpe::Tokenizer::end_of_text)
      .def_property_readonly("vocab_size", [](const bpe::Tokenizer& t) { return t.vocab().size(); });

  m.def(
      "score",
      [](const std::string& csv_text, const std::string& backend, const std::string& tokenizer_dir,
         std::size_t max_in_flight, int timeout_ms) {
        const auto tok = bpe::Tokenizer::from_directory(tokenizer_dir);
        scoring::WireOptions wire;
        wire.max_in_flight = max_in_flight;
        wire.timeout = std::chrono::milliseconds(timeout_ms);
        auto b = scoring::make_backend(scoring::BackendDescriptor::parse(backend), tok, wire);
        const auto d = dataset_from(csv_text);
        const auto scores = scoring::score_dataset(*b, tok, d);
        return py::make_tuple(cli::scores_csv(d, scores), cli::tokens_jsonl(d, scores));
      },
      py::arg("csv_text"), py::arg("backend"), py::arg("tokenizer_dir"),
      py::arg("max_in_flight") = 64, py::arg("timeout_ms") = 0,
      "Score every record; returns (scores_csv, tokens_jsonl).");

  m.def(
      "analyze",
      [](const std::string& scores_csv, const std::string& label) {
        const auto deltas = cli::deltas_from_scores(scores_csv);
        return json_to_py(report::to_record(metrics::aggregate(deltas, label)));
      },
      py::arg("scores_csv"), py::arg("label") = "",
      "Aggregate a scores CSV into a report record (dict).");

  m.def(
      "chi_square",
      [](double a_succ, double a_fail, double b_succ, double b_fail, const std::string& correction) {
        const auto c = metrics::chi_square_2x2(a_succ, a_fail, b_succ, b_fail,
                                               parse_correction(correction));
        return py::make_tuple(c.statistic, c.p);
      },
      py::arg("a_succ"), py::arg("a_fail"), py::arg("b_succ"), py::arg("b_fail"),
      py::arg("correction") = "none", "Chi-square on a 2x2 table; returns (statistic, p).");

  m.def(
      "wilson_ci",
      [](std::size_t k, std::size_t n, double level) {
        const auto w = metrics::wilson_ci(k, n, level);
        return py::make_tuple(w.lower, w.upper);
      },
      py::arg("k"), py::arg("n"), py::arg("level") = 0.95);

  m.def(
      "t_test",
      [](const std::vector<double>& values, double mu0) {
        const auto t = metrics::one_sample_t(values, mu0);
        py::dict d;
        d["t"] = t.t;
        d["df"] = t.df;
        d["p_one_tailed"] = t.p_one_tailed;
        d["mean"] = t.mean;
        d["std_error"] = t.std_error;
        return d;
      },
      py::arg("values"), py::arg("mu0") = 0.0);

  m.def(
      "render_svg",
      [](const std::string& jsonl) { return report::render_svg(report::read_aggregates(jsonl)); },
      py::arg("aggregates_jsonl"));

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out;
        std::ostringstream err;
        int code = 0;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Run a CLI subcommand; returns (exit_code, stdout, stderr).");
}
