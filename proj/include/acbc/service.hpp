#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>

#include <json.hpp>

#include "acbc/survey.hpp"

namespace acbc {

// Carries the HTTP status the error maps to.
class ServiceError : public Error {
 public:
  ServiceError(int status, std::string code, const std::string& message)
      : Error(message), status_(status), code_(std::move(code)) {}
  int status() const { return status_; }
  const std::string& code() const { return code_; }

 private:
  int status_;
  std::string code_;
};

enum class Phase { AwaitingBYO, InTournament, Complete };

std::string to_string(Phase phase);

struct Session {
  std::string id;
  std::string study;
  std::string population_tag;
  std::string created_at;
  std::uint64_t seed = 0;
  Phase phase = Phase::AwaitingBYO;
  std::optional<Profile> byo;
  std::optional<Bracket> bracket;
  // Idempotency key -> {payload, response}.
  std::map<std::string, std::pair<nlohmann::json, nlohmann::json>> replies;
};

struct ServiceOptions {
  std::filesystem::path data_dir = "data";
  bool force_byo_in_field = false;
  // Fixes session ids and seeds for tests. Production ids come from
  // std::random_device.
  std::optional<std::uint64_t> seed;
};

// Event-sourced survey sessions. Every accepted state change is appended to
// <data_dir>/<study>/events.jsonl before it is applied; the constructor
// replays those logs. Completed sessions are also appended as respondent
// records to <data_dir>/<study>/records.jsonl.
//
// Payloads (all carry "schemaVersion": 1):
//   BYO answer:  {"type": "byo", "levels": [0, 2, 1, 0]}
//   Choice:      {"type": "choice", "task": 3, "winner": "left"}
// "task" is the 1-based index of the task being answered; a stale index is a
// conflict, so two racing submissions cannot both advance the bracket.
class SurveyService {
 public:
  SurveyService(std::map<std::string, SurveyDesign> studies, ServiceOptions options = {});
  ~SurveyService();

  SurveyService(const SurveyService&) = delete;
  SurveyService& operator=(const SurveyService&) = delete;

  // Returns the session id and the BYO question. 404 for an unknown study.
  nlohmann::json create_session(const std::string& study, const std::string& population_tag);
  // Current question, or the completion summary. Safe to repeat.
  nlohmann::json next(const std::string& session) const;
  // 409 for out-of-phase or stale payloads, 422 for invalid answers. A repeated
  // idempotency key returns the original response without advancing.
  nlohmann::json submit(const std::string& session, const nlohmann::json& payload,
                        const std::optional<std::string>& idempotency_key = std::nullopt);
  // JSON Lines export of the study's completed records.
  std::string export_records(const std::string& study) const;

  Session snapshot(const std::string& session) const;
  std::size_t session_count() const;
  const SurveyDesign& design(const std::string& study) const;

 private:
  struct Slot;
  struct Study;

  std::shared_ptr<Slot> find(const std::string& session) const;
  Study& study(const std::string& id);
  const Study& study(const std::string& id) const;
  void append_event(Study& study, const nlohmann::json& event);
  void apply(const nlohmann::json& event, bool write_records);
  void replay(Study& study);
  nlohmann::json view(const Session& session) const;
  std::string fresh_id();

  ServiceOptions options_;
  std::map<std::string, std::unique_ptr<Study>> studies_;
  mutable std::shared_mutex sessions_mutex_;
  std::map<std::string, std::shared_ptr<Slot>> sessions_;
  std::mutex id_mutex_;
  Rng id_rng_;
};

// Builds the respondent record of a completed session.
RespondentRecord session_record(const Session& session);

}  // namespace acbc
