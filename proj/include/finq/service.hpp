#pragma once

#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "finq/assistant_router.hpp"
#include "finq/json.hpp"

namespace httplib {
class Server;
}

namespace finq {

struct ServiceResponse {
  int status = 200;
  Json body;
};

/// Request handling for serve mode, kept apart from the HTTP plumbing so it
/// can be tested directly. Questions are answered one at a time.
class AskService {
 public:
  explicit AskService(const AssistantRouter& router) : router_(router) {}

  /// Body: {"question": "...", "trace": bool (optional, default false)}.
  /// Returns 400 for a malformed body, 200 with the answer document otherwise
  /// (model and validation failures are reported inside the document).
  ServiceResponse ask(std::string_view body) const;
  ServiceResponse health() const;

 private:
  const AssistantRouter& router_;
  mutable std::mutex mutex_;
};

/// POST /ask and GET /health over plain HTTP.
class HttpService {
 public:
  explicit HttpService(const AskService& service);
  ~HttpService();
  HttpService(const HttpService&) = delete;
  HttpService& operator=(const HttpService&) = delete;

  /// Returns the bound port; port 0 picks a free one. Throws IoError.
  int bind(const std::string& host, int port);
  /// Blocks until stop() is called.
  void run();
  void stop();

 private:
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace finq
