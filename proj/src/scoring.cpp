#include "gapprobe/scoring.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <regex>
#include <sstream>

#include "gapprobe/csv.hpp"

namespace gapprobe::scoring {

double SurprisalVector::total() const {
  return std::accumulate(bits.begin(), bits.end(), 0.0);
}

std::vector<std::vector<double>> Backend::log_probs_batch(
    const std::vector<std::vector<TokenId>>& batch) {
  std::vector<std::vector<double>> out;
  out.reserve(batch.size());
  for (const auto& ids : batch) out.push_back(log_probs(ids));
  return out;
}

UniformBackend::UniformBackend(std::size_t vocab_size) : vocab_size_(vocab_size) {
  if (vocab_size_ < 2) throw Error(ErrorKind::InvalidBackend, "uniform backend needs V >= 2");
}

std::string UniformBackend::label() const { return "uniform:" + std::to_string(vocab_size_); }

std::vector<double> UniformBackend::log_probs(std::span<const TokenId> ids) {
  return std::vector<double>(ids.size(), -std::log(static_cast<double>(vocab_size_)));
}

std::size_t NgramBackend::VecHash::operator()(const std::vector<TokenId>& v) const noexcept {
  std::size_t h = 1469598103934665603ull;
  for (TokenId id : v) {
    h ^= static_cast<std::size_t>(static_cast<std::uint32_t>(id));
    h *= 1099511628211ull;
  }
  return h;
}

NgramBackend::NgramBackend(Options options, const std::vector<std::vector<TokenId>>& training)
    : options_(options) {
  if (options_.order < 1) throw Error(ErrorKind::InvalidBackend, "ngram order must be >= 1");
  if (options_.vocab_size < 1) throw Error(ErrorKind::InvalidBackend, "ngram vocab size must be >= 1");
  const std::size_t h = options_.order - 1;
  for (const auto& sentence : training) {
    std::vector<TokenId> padded(h, options_.boundary);
    padded.insert(padded.end(), sentence.begin(), sentence.end());
    for (std::size_t i = h; i < padded.size(); ++i) {
      std::vector<TokenId> history(padded.begin() + static_cast<std::ptrdiff_t>(i - h),
                                   padded.begin() + static_cast<std::ptrdiff_t>(i));
      auto& cell = table_[std::move(history)];
      ++cell.total;
      ++cell.next[padded[i]];
    }
  }
}

std::string NgramBackend::label() const {
  return "ngram:" + std::to_string(options_.order) + (options_.add_one ? "" : ":unsmoothed");
}

std::size_t NgramBackend::count(std::span<const TokenId> history, TokenId next) const {
  auto it = table_.find(std::vector<TokenId>(history.begin(), history.end()));
  if (it == table_.end()) return 0;
  auto jt = it->second.next.find(next);
  return jt == it->second.next.end() ? 0 : jt->second;
}

std::size_t NgramBackend::history_count(std::span<const TokenId> history) const {
  auto it = table_.find(std::vector<TokenId>(history.begin(), history.end()));
  return it == table_.end() ? 0 : it->second.total;
}

std::vector<double> NgramBackend::log_probs(std::span<const TokenId> ids) {
  const std::size_t h = options_.order - 1;
  std::vector<TokenId> padded(h, options_.boundary);
  padded.insert(padded.end(), ids.begin(), ids.end());
  std::vector<double> out;
  out.reserve(ids.size());
  for (std::size_t i = h; i < padded.size(); ++i) {
    std::span<const TokenId> history(padded.data() + (i - h), h);
    const double c = static_cast<double>(count(history, padded[i]));
    const double total = static_cast<double>(history_count(history));
    if (options_.add_one) {
      out.push_back(std::log(c + 1.0) - std::log(total + static_cast<double>(options_.vocab_size)));
    } else {
      // Unseen events give log(0) = -inf or 0/0 = NaN; to_surprisal rejects both.
      out.push_back(total > 0 ? std::log(c / total) : std::nan(""));
    }
  }
  return out;
}

BackendDescriptor BackendDescriptor::parse(std::string_view spec) {
  auto fail = [&](const std::string& why) {
    return Error(ErrorKind::InvalidBackend, "'" + std::string(spec) + "': " + why);
  };
  auto parse_count = [&](std::string_view s) -> std::size_t {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string_view::npos) {
      throw fail("expected a number, got '" + std::string(s) + "'");
    }
    return static_cast<std::size_t>(std::stoull(std::string(s)));
  };
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) throw fail("expected KIND:PARAMS");
  const std::string_view kind = spec.substr(0, colon);
  const std::string_view rest = spec.substr(colon + 1);
  BackendDescriptor d;
  if (kind == "uniform") {
    d.kind = BackendKind::Uniform;
    d.vocab_size = parse_count(rest);
    if (d.vocab_size < 2) throw fail("uniform needs V >= 2");
  } else if (kind == "ngram") {
    const auto c2 = rest.find(':');
    if (c2 == std::string_view::npos) throw fail("expected ngram:ORDER:CORPUS");
    d.kind = BackendKind::NgramReference;
    d.order = parse_count(rest.substr(0, c2));
    d.corpus_path = std::string(rest.substr(c2 + 1));
    if (d.order < 1) throw fail("ngram order must be >= 1");
    if (d.corpus_path.empty()) throw fail("missing corpus path");
  } else if (kind == "wire") {
    d.kind = BackendKind::Wire;
    d.endpoint = std::string(rest);
    if (d.endpoint.empty()) throw fail("missing command or address");
  } else {
    throw fail("unknown backend kind");
  }
  return d;
}

std::string BackendDescriptor::to_string() const {
  switch (kind) {
    case BackendKind::Uniform: return "uniform:" + std::to_string(vocab_size);
    case BackendKind::NgramReference: return "ngram:" + std::to_string(order) + ":" + corpus_path;
    case BackendKind::Wire: return "wire:" + endpoint;
  }
  return {};
}

std::unique_ptr<Backend> make_backend(const BackendDescriptor& desc, const bpe::Tokenizer& tok,
                                      WireOptions wire) {
  switch (desc.kind) {
    case BackendKind::Uniform:
      return std::make_unique<UniformBackend>(desc.vocab_size);
    case BackendKind::NgramReference: {
      std::vector<std::vector<TokenId>> training;
      std::istringstream in(read_file(desc.corpus_path));
      std::string line;
      while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        training.push_back(tok.encode(line).ids);
      }
      NgramBackend::Options opt;
      opt.order = desc.order;
      opt.vocab_size = tok.vocab().size();
      opt.boundary = tok.end_of_text().value_or(kGpt2EndOfText);
      return std::make_unique<NgramBackend>(opt, training);
    }
    case BackendKind::Wire: {
      static const std::regex address(R"(^(?:tcp://)?([A-Za-z0-9.\-]+):([0-9]{1,5})$)");
      std::smatch m;
      if (std::regex_match(desc.endpoint, m, address)) {
        return WireBackend::connect(m[1].str(), std::stoi(m[2].str()), wire);
      }
      return WireBackend::spawn(desc.endpoint, wire);
    }
  }
  throw Error(ErrorKind::InvalidBackend, "unknown backend kind");
}

double nats_to_bits(double log_prob) { return -log_prob / std::numbers::ln2; }

SurprisalVector to_surprisal(std::span<const double> log_probs, std::size_t expected,
                             std::string backend_label) {
  if (log_probs.size() != expected) {
    throw Error(ErrorKind::ProtocolViolation,
                "expected " + std::to_string(expected) + " log probs, got " +
                    std::to_string(log_probs.size()));
  }
  SurprisalVector v;
  v.backend_label = std::move(backend_label);
  v.bits.reserve(expected);
  for (std::size_t i = 0; i < log_probs.size(); ++i) {
    const double lp = log_probs[i];
    if (!std::isfinite(lp)) {
      throw Error(ErrorKind::NonFiniteProbability,
                  "position " + std::to_string(i) + " has a non-finite log prob");
    }
    if (lp > 0.0) {
      throw Error(ErrorKind::ProtocolViolation,
                  "position " + std::to_string(i) + " has a positive log prob");
    }
    // -0.0 for P == 1 becomes +0.0 bits.
    v.bits.push_back(lp == 0.0 ? 0.0 : nats_to_bits(lp));
  }
  return v;
}

SurprisalVector score_sentence(Backend& backend, std::span<const TokenId> ids) {
  if (ids.empty()) throw Error(ErrorKind::InvalidArgument, "cannot score an empty sentence");
  const auto lp = backend.log_probs(ids);
  return to_surprisal(lp, ids.size(), backend.label());
}

double region_surprisal(const SurprisalVector& v, const bpe::AlignedRegion& r) {
  if (r.token_len == 0 || r.token_start + r.token_len > v.bits.size()) {
    throw Error(ErrorKind::SpanOutOfBounds,
                "span [" + std::to_string(r.token_start) + ", " +
                    std::to_string(r.token_start + r.token_len) + ") outside " +
                    std::to_string(v.bits.size()) + " tokens");
  }
  double sum = 0.0;
  for (std::size_t i = r.token_start; i < r.token_start + r.token_len; ++i) sum += v.bits[i];
  return sum;
}

ScoreMap score_dataset(Backend& backend, const bpe::Tokenizer& tok, const corpus::Dataset& d) {
  std::vector<ScoredRecord> pending;
  pending.reserve(d.items().size() * 4);
  auto context = [](const corpus::StimulusRecord& r) {
    return r.sentence_type + "#" + std::to_string(r.item_id) + " " +
           std::string(corpus::condition_label(r.condition));
  };

  for (const auto& item : d.items()) {
    corpus::RegionMap regions;
    try {
      regions = corpus::locate_critical_regions(item);
    } catch (const Error& e) {
      throw e.with_context(item.sentence_type + "#" + std::to_string(item.item_id));
    }
    for (const auto& rec : item.sentences) {
      ScoredRecord s;
      s.record = rec;
      s.region = regions.at(rec.condition);
      try {
        s.tokens = tok.encode(rec.full_sentence);
        s.aligned = bpe::align_region(s.tokens, rec.full_sentence, s.region);
      } catch (const Error& e) {
        throw e.with_context(context(rec));
      }
      pending.push_back(std::move(s));
    }
  }

  std::vector<std::vector<TokenId>> batch;
  batch.reserve(pending.size());
  for (const auto& s : pending) batch.push_back(s.tokens.ids);
  std::vector<std::vector<double>> results;
  if (!batch.empty()) results = backend.log_probs_batch(batch);
  if (results.size() != batch.size()) {
    throw Error(ErrorKind::ProtocolViolation, "backend returned the wrong number of results");
  }

  ScoreMap out;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    auto& s = pending[i];
    try {
      s.surprisal = to_surprisal(results[i], s.tokens.ids.size(), backend.label());
      s.region_bits = region_surprisal(s.surprisal, s.aligned);
    } catch (const Error& e) {
      throw e.with_context(context(s.record));
    }
    RecordKey key{{s.record.sentence_type, s.record.item_id}, s.record.condition};
    out.emplace(std::move(key), std::move(s));
  }
  return out;
}

}  // namespace gapprobe::scoring
