#include "finq/service.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include "finq/error.hpp"

namespace finq {
namespace {

ServiceResponse bad_request(std::string message) {
  return {400, Json{{"error", "bad_request"}, {"message", std::move(message)}}};
}

}  // namespace

ServiceResponse AskService::ask(std::string_view body) const {
  Json doc;
  try {
    doc = Json::parse(body);
  } catch (const Json::parse_error&) {
    return bad_request("body is not valid JSON");
  }
  if (!doc.is_object()) return bad_request("body must be a JSON object");
  auto q = doc.find("question");
  if (q == doc.end() || !q->is_string() || q->get<std::string>().empty()) {
    return bad_request("\"question\" must be a non-empty string");
  }
  bool trace = false;
  if (auto t = doc.find("trace"); t != doc.end()) {
    if (!t->is_boolean()) return bad_request("\"trace\" must be a boolean");
    trace = t->get<bool>();
  }
  std::lock_guard lock(mutex_);
  try {
    return {200, router_.answer(q->get<std::string>()).to_json(trace)};
  } catch (const Error& e) {
    return {500, Json{{"error", std::string(to_string(e.kind()))}, {"message", e.what()}}};
  }
}

ServiceResponse AskService::health() const { return {200, Json{{"status", "ok"}}}; }

HttpService::HttpService(const AskService& service) : server_(std::make_unique<httplib::Server>()) {
  auto reply = [](httplib::Response& res, const ServiceResponse& r) {
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  server_->Post("/ask", [&service, reply](const httplib::Request& req, httplib::Response& res) {
    reply(res, service.ask(req.body));
  });
  server_->Get("/health", [&service, reply](const httplib::Request&, httplib::Response& res) {
    reply(res, service.health());
  });
}

HttpService::~HttpService() { stop(); }

int HttpService::bind(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error(ErrorKind::IoError, fmt::format("cannot bind {}:{}", host, port));
  return bound;
}

void HttpService::run() { server_->listen_after_bind(); }

void HttpService::stop() {
  if (server_) server_->stop();
}

}  // namespace finq
