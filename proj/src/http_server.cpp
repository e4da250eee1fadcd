#include "acbc/http_server.hpp"

#include <httplib.h>

#include "acbc/io.hpp"

namespace acbc {

using nlohmann::json;

struct HttpServer::Impl {
  SurveyService& service;
  httplib::Server server;
};

namespace {

void send_json(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code,
                const std::string& message) {
  send_json(res, status,
            {{"schemaVersion", kSchemaVersion}, {"error", {{"code", code}, {"message", message}}}});
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw ServiceError(400, "bad_request", std::string("request body is not JSON: ") + e.what());
  }
}

}  // namespace

HttpServer::HttpServer(SurveyService& service, std::optional<std::filesystem::path> static_dir)
    : impl_(new Impl{service, {}}) {
  auto& server = impl_->server;
  auto& svc = impl_->service;

  server.set_exception_handler(
      [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        try {
          std::rethrow_exception(ep);
        } catch (const ServiceError& e) {
          send_error(res, e.status(), e.code(), e.what());
        } catch (const ValidationError& e) {
          send_error(res, 422, "invalid", e.what());
        } catch (const std::exception& e) {
          send_error(res, 500, "internal", e.what());
        }
      });

  server.Post(
      R"(/studies/([^/]+)/sessions)", [&svc](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        if (!body.is_object() || !body.contains("populationTag") ||
            !body.at("populationTag").is_string()) {
          throw ServiceError(422, "invalid", "body must contain a string \"populationTag\"");
        }
        send_json(res, 201, svc.create_session(req.matches[1], body.at("populationTag")));
      });

  server.Get(R"(/sessions/([^/]+)/next)",
             [&svc](const httplib::Request& req, httplib::Response& res) {
               send_json(res, 200, svc.next(req.matches[1]));
             });

  server.Post(R"(/sessions/([^/]+)/responses)",
              [&svc](const httplib::Request& req, httplib::Response& res) {
                std::optional<std::string> key;
                if (req.has_header("Idempotency-Key"))
                  key = req.get_header_value("Idempotency-Key");
                send_json(res, 200, svc.submit(req.matches[1], parse_body(req), key));
              });

  server.Get(R"(/studies/([^/]+)/records\.jsonl)",
             [&svc](const httplib::Request& req, httplib::Response& res) {
               res.set_content(svc.export_records(req.matches[1]), "application/x-ndjson");
             });

  if (static_dir && !server.set_mount_point("/", static_dir->string())) {
    throw Error("static asset directory " + static_dir->string() + " does not exist");
  }
}

HttpServer::~HttpServer() {
  stop();
}

int HttpServer::bind(const std::string& host, int port) {
  auto& server = impl_->server;
  const int bound =
      port == 0 ? server.bind_to_any_port(host) : (server.bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw Error("cannot bind " + host + ":" + std::to_string(port));
  return bound;
}

void HttpServer::listen() {
  impl_->server.listen_after_bind();
}

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

void HttpServer::wait_until_ready() const {
  impl_->server.wait_until_ready();
}

}  // namespace acbc
