#include "mcel/remote.h"

#include "httplib.h"
#include "mcel/error.h"

namespace mcel {

nlohmann::json post_json(const RemoteOptions& opts, const std::string& path, const nlohmann::json& body) {
  httplib::Client client(opts.base_url);
  if (!client.is_valid()) throw RemoteUnavailable("invalid endpoint URL: " + opts.base_url);
  auto secs = opts.timeout.count() / 1000;
  auto usecs = (opts.timeout.count() % 1000) * 1000;
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  const std::string payload = body.dump();
  std::string last_error;
  for (int attempt = 0; attempt <= opts.retries; ++attempt) {
    auto res = client.Post(path, payload, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw MalformedRemoteResponse(opts.base_url + path + " replied HTTP " + std::to_string(res->status) +
                                    ": " + res->body);
    }
    auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) throw MalformedRemoteResponse(opts.base_url + path + " replied with invalid JSON");
    return parsed;
  }
  throw RemoteUnavailable(opts.base_url + path + " unavailable: " + last_error);
}

}  // namespace mcel
