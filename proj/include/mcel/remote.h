#pragma once

#include <chrono>
#include <string>

#include "json.hpp"

namespace mcel {

struct RemoteOptions {
  std::string base_url;  // e.g. "http://127.0.0.1:8080"
  std::chrono::milliseconds timeout{30000};
  int retries = 2;
};

// POSTs JSON and parses the JSON reply. Connection failures, timeouts and 5xx
// replies (after retries) raise RemoteUnavailable; any other non-200 status or
// an unparsable body raises MalformedRemoteResponse.
nlohmann::json post_json(const RemoteOptions& opts, const std::string& path, const nlohmann::json& body);

}  // namespace mcel
