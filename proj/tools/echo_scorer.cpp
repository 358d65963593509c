// Scorer test double speaking the re-ranking wire protocol over stdin/stdout.
#include <poll.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "sledge/error.hpp"
#include "sledge/scorer.hpp"

namespace {

bool input_pending(int wait_ms) {
  pollfd p{STDIN_FILENO, POLLIN, 0};
  return ::poll(&p, 1, wait_ms) > 0;
}

// Recovers the id of a request that failed to decode, -1 when there is none.
std::int64_t salvage_id(const std::string& line) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_object() && j.contains("id") && j["id"].is_number_integer()) return j["id"].get<std::int64_t>();
  return -1;
}

void emit(const std::string& record) { std::cout << record << '\n'; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Constant-score scorer for exercising the re-ranking protocol"};
  double score = sledge::EchoScorer::kScore;
  std::string mode = "echo";
  long die_after = -1;
  app.add_option("--score", score, "score returned for every passage");
  app.add_option("--mode", mode, "echo | reverse | wrong-id | error | garbage | hang | bad-handshake | nan")
      ->check(CLI::IsMember({"echo", "reverse", "wrong-id", "error", "garbage", "hang", "bad-handshake", "nan"}));
  app.add_option("--die-after", die_after, "exit after answering this many requests");
  CLI11_PARSE(app, argc, argv);

  std::ios::sync_with_stdio(false);
  if (mode == "bad-handshake") {
    emit(R"({"protocol":99})");
  } else {
    emit(sledge::protocol::handshake());
  }
  std::cout.flush();

  long answered = 0;
  std::vector<std::string> pending;
  std::string line;
  auto respond = [&](const std::string& request_line) {
    if (die_after >= 0 && answered >= die_after) {
      std::cout.flush();
      std::_Exit(0);
    }
    ++answered;
    try {
      auto req = sledge::protocol::decode_request(request_line);
      if (mode == "error") {
        emit(sledge::protocol::encode_error(req.id, "scoring failed"));
      } else if (mode == "garbage") {
        emit("this is not json");
      } else if (mode == "wrong-id") {
        emit(sledge::protocol::encode_response({req.id + 1000, score}));
      } else if (mode == "nan") {
        emit(R"({"id":)" + std::to_string(req.id) + R"(,"score":"NaN"})");
      } else {
        emit(sledge::protocol::encode_response({req.id, score}));
      }
    } catch (const sledge::FormatError& e) {
      emit(sledge::protocol::encode_error(salvage_id(request_line), e.what()));
    }
  };

  while (std::getline(std::cin, line)) {
    if (line.empty()) continue;
    if (mode == "hang") continue;
    if (mode == "reverse") {
      pending.push_back(line);
      if (std::cin.rdbuf()->in_avail() > 0 || input_pending(50)) continue;
      std::reverse(pending.begin(), pending.end());
      for (const auto& p : pending) respond(p);
      pending.clear();
    } else {
      respond(line);
    }
    std::cout.flush();
  }
  for (auto it = pending.rbegin(); it != pending.rend(); ++it) respond(*it);
  std::cout.flush();
  return 0;
}
