#include "finq/http_backend.hpp"

#include <httplib.h>

#include <fmt/format.h>

#include "finq/error.hpp"

namespace finq::llm {

HttpBackend::HttpBackend(HttpBackendConfig config) : config_(std::move(config)) {
  const auto& url = config_.base_url;
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorKind::ConfigError, fmt::format("base URL '{}' lacks a scheme", url));
  }
  const auto path_start = url.find('/', scheme_end + 3);
  scheme_host_port_ = url.substr(0, path_start);
  path_prefix_ = path_start == std::string::npos ? "" : url.substr(path_start);
  while (!path_prefix_.empty() && path_prefix_.back() == '/') path_prefix_.pop_back();
}

BackendReply HttpBackend::send(const Json& request) {
  httplib::Client client(scheme_host_port_);
  const auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  const auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  client.set_connection_timeout(secs.count(), usecs.count());
  client.set_read_timeout(secs.count(), usecs.count());
  client.set_write_timeout(secs.count(), usecs.count());
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }
  const auto body = request.dump();
  const auto path = path_prefix_ + "/chat/completions";

  httplib::Result result;
  for (int attempt = 0; attempt <= config_.transport_retries; ++attempt) {
    result = client.Post(path, headers, body, "application/json");
    if (result) break;
  }
  if (!result) {
    const auto err = result.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write ||
        err == httplib::Error::ConnectionTimeout) {
      throw Error(ErrorKind::Timeout, fmt::format("request to {} failed: {}", scheme_host_port_,
                                                  httplib::to_string(err)));
    }
    throw Error(ErrorKind::LlmProtocolError,
                fmt::format("request to {} failed: {}", scheme_host_port_, httplib::to_string(err)));
  }
  if (result->status < 200 || result->status >= 300) {
    throw Error(ErrorKind::LlmProtocolError,
                fmt::format("backend returned HTTP {}: {}", result->status,
                            result->body.substr(0, 300)));
  }
  BackendReply reply;
  try {
    reply.body = Json::parse(result->body);
  } catch (const Json::parse_error& e) {
    throw Error(ErrorKind::LlmProtocolError, fmt::format("response is not JSON: {}", e.what()));
  }
  return reply;
}

}  // namespace finq::llm
