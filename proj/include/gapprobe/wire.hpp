#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gapprobe/bpe.hpp"

namespace gapprobe::wire {

// Newline-delimited JSON scoring protocol.
//   request:  {"request_id": str, "token_ids": [int]}
//   response: {"request_id": str, "log_probs": [float]}
//   error:    {"request_id": str, "error": str}
// log_probs are natural-log conditional probabilities, one per token, each
// conditioned on an end-of-text prefix plus the preceding tokens.

struct ScoreRequest {
  std::string request_id;
  std::vector<bpe::TokenId> token_ids;

  bool operator==(const ScoreRequest&) const = default;
};

struct ScoreResponse {
  std::string request_id;
  std::vector<double> log_probs;
  std::optional<std::string> error;

  bool operator==(const ScoreResponse&) const = default;
};

/// Single line, no trailing newline.
std::string encode_request(const ScoreRequest& req);
std::string encode_response(const ScoreResponse& resp);

/// Throw ProtocolViolation on malformed JSON or missing fields.
ScoreRequest decode_request(std::string_view line);
ScoreResponse decode_response(std::string_view line);

}  // namespace gapprobe::wire
