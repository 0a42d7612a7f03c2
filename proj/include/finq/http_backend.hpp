#pragma once

#include <chrono>
#include <string>

#include "finq/llm_protocol.hpp"

namespace finq::llm {

struct HttpBackendConfig {
  std::string base_url;  // e.g. https://api.openai.com/v1
  std::string api_key;   // read from the environment by the caller
  std::chrono::milliseconds timeout{60'000};
  int transport_retries = 1;
};

/// Chat-completions client over HTTP(S): POST {base_url}/chat/completions.
/// Transport failures are retried once; non-2xx statuses and malformed
/// bodies raise LlmProtocolError without retry, timeouts raise Timeout.
class HttpBackend : public ChatBackend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  BackendReply send(const Json& request) override;

 private:
  HttpBackendConfig config_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

}  // namespace finq::llm
