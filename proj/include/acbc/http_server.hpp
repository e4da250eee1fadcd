#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "acbc/service.hpp"

namespace acbc {

// JSON over HTTP in front of a SurveyService:
//   POST /studies/{id}/sessions        {"populationTag": "FBO"} -> BYO question
//   GET  /sessions/{id}/next           current question or completion summary
//   POST /sessions/{id}/responses      answer payload, optional Idempotency-Key header
//   GET  /studies/{id}/records.jsonl   completed respondent records
// Errors are {"schemaVersion": 1, "error": {"code", "message"}} with the
// status carried by ServiceError. `static_dir`, when given, is served at /.
class HttpServer {
 public:
  explicit HttpServer(SurveyService& service,
                      std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~HttpServer();

  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port. Port 0 picks a free one.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called.
  void listen();
  void stop();
  void wait_until_ready() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace acbc
