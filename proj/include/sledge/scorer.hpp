#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sledge {

struct ScoreRequest {
  std::int64_t id = 0;
  std::string query;
  std::string passage;

  bool operator==(const ScoreRequest&) const = default;
};

struct ScoreResponse {
  std::int64_t id = 0;
  double score = 0.0;

  bool operator==(const ScoreResponse&) const = default;
};

// Newline-delimited JSON records, one per line:
//   handshake (scorer -> client, once):  {"protocol":1}
//   request   (client -> scorer):        {"id":7,"query":"...","passage":"..."}
//   response  (scorer -> client):        {"id":7,"score":0.25}
//   error     (scorer -> client):        {"id":7,"error":"..."}
namespace protocol {

inline constexpr int kVersion = 1;

std::string handshake();
std::string encode_request(const ScoreRequest& request);
std::string encode_response(const ScoreResponse& response);
std::string encode_error(std::int64_t id, std::string_view message);

// Throws ProtocolViolation unless the line is a version-1 handshake.
void check_handshake(std::string_view line);
// Throws MalformedResponse on anything that is not a response record, and
// ProtocolViolation on error records.
ScoreResponse decode_response(std::string_view line);
// Server side; throws FormatError.
ScoreRequest decode_request(std::string_view line);

}  // namespace protocol

class ScorerClient {
 public:
  virtual ~ScorerClient() = default;

  // Sends every request and returns the responses in whatever order the
  // transport delivered them. Transient failures raise ScorerTimeout or
  // ScorerTransportError.
  virtual std::vector<ScoreResponse> exchange(std::span<const ScoreRequest> requests) = 0;

  // Re-establishes the transport after a transient failure.
  virtual void reconnect() {}
};

// Validates a raw exchange and returns scores in request order: every id
// answered exactly once, no unknown ids, finite scores.
std::vector<double> score_batch(ScorerClient& client, std::span<const ScoreRequest> requests);

// In-process test double: every passage scores 0.5.
class EchoScorer final : public ScorerClient {
 public:
  static constexpr double kScore = 0.5;
  std::vector<ScoreResponse> exchange(std::span<const ScoreRequest> requests) override;
};

// In-process scorer backed by a function; used for tests and ablations.
class FunctionScorer final : public ScorerClient {
 public:
  explicit FunctionScorer(std::function<double(const ScoreRequest&)> fn) : fn_(std::move(fn)) {}
  std::vector<ScoreResponse> exchange(std::span<const ScoreRequest> requests) override;

 private:
  std::function<double(const ScoreRequest&)> fn_;
};

// Endpoints:
//   echo              in-process EchoScorer
//   exec:<command>    spawn `/bin/sh -c <command>`, speak over its stdin/stdout
//   unix:<path>       connect to a Unix-domain stream socket
// The handshake is checked before this returns.
std::unique_ptr<ScorerClient> connect_scorer(std::string_view endpoint,
                                             std::chrono::milliseconds timeout = std::chrono::seconds(60));

}  // namespace sledge
