#include "gapprobe/wire.hpp"

#include <limits>

#include <nlohmann/json.hpp>

namespace gapprobe::wire {

using nlohmann::json;

namespace {

Error bad(const std::string& what) { return Error(ErrorKind::ProtocolViolation, what); }

json parse_object(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw bad(std::string("malformed line: ") + e.what());
  }
  if (!j.is_object()) throw bad("message is not a JSON object");
  if (!j.contains("request_id") || !j["request_id"].is_string()) {
    throw bad("missing string request_id");
  }
  return j;
}

}  // namespace

std::string encode_request(const ScoreRequest& req) {
  return json{{"request_id", req.request_id}, {"token_ids", req.token_ids}}.dump();
}

std::string encode_response(const ScoreResponse& resp) {
  json j{{"request_id", resp.request_id}};
  if (resp.error) j["error"] = *resp.error;
  else j["log_probs"] = resp.log_probs;
  return j.dump();
}

ScoreRequest decode_request(std::string_view line) {
  const json j = parse_object(line);
  if (!j.contains("token_ids") || !j["token_ids"].is_array()) throw bad("missing token_ids");
  ScoreRequest req;
  req.request_id = j["request_id"].get<std::string>();
  for (const auto& v : j["token_ids"]) {
    if (!v.is_number_integer()) throw bad("token id is not an integer");
    req.token_ids.push_back(v.get<bpe::TokenId>());
  }
  return req;
}

ScoreResponse decode_response(std::string_view line) {
  const json j = parse_object(line);
  ScoreResponse resp;
  resp.request_id = j["request_id"].get<std::string>();
  if (j.contains("error")) {
    resp.error = j["error"].is_string() ? j["error"].get<std::string>() : j["error"].dump();
    return resp;
  }
  if (!j.contains("log_probs") || !j["log_probs"].is_array()) throw bad("missing log_probs");
  for (const auto& v : j["log_probs"]) {
    // JSON has no NaN/Inf; encoders commonly write them as null.
    if (v.is_null()) {
      resp.log_probs.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    if (!v.is_number()) throw bad("log prob is not a number");
    resp.log_probs.push_back(v.get<double>());
  }
  return resp;
}

}  // namespace gapprobe::wire
