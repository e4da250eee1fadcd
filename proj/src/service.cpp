#include "acbc/service.hpp"

#include <chrono>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include "acbc/io.hpp"

namespace acbc {

using nlohmann::json;

namespace {

constexpr const char* kByoPrompt =
    "For each attribute, select the level you most typically encounter at the time of "
    "the Go/No-Go decision.";
constexpr const char* kChoicePrompt = "Which of these two profiles do you prefer?";

ServiceError not_found(const std::string& what) {
  return ServiceError(404, "not_found", what);
}
ServiceError conflict(const std::string& what) {
  return ServiceError(409, "conflict", what);
}
ServiceError invalid(const std::string& what) {
  return ServiceError(422, "invalid", what);
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buffer;
}

json describe_profile(const Profile& profile, const SurveyDesign& design) {
  json labels = json::array();
  for (int a = 0; a < design.attribute_count(); ++a) {
    labels.push_back({{"attribute", design.attributes[a].label},
                      {"level", design.attributes[a].levels[profile.levels[a]]}});
  }
  return {{"levels", profile.levels}, {"labels", labels}};
}

}  // namespace

std::string to_string(Phase phase) {
  switch (phase) {
    case Phase::AwaitingBYO:
      return "AwaitingBYO";
    case Phase::InTournament:
      return "InTournament";
    case Phase::Complete:
      return "Complete";
  }
  return "?";
}

struct SurveyService::Slot {
  mutable std::mutex mutex;
  Session session;
};

struct SurveyService::Study {
  std::string id;
  SurveyDesign design;
  std::filesystem::path events;
  std::filesystem::path records;
  mutable std::mutex file_mutex;
};

RespondentRecord session_record(const Session& session) {
  if (session.phase != Phase::Complete) throw Error("session " + session.id + " is not complete");
  RespondentRecord record;
  record.id = session.id;
  record.population_tag = session.population_tag;
  record.byo = *session.byo;
  record.field = session.bracket->field();
  record.tasks = session.bracket->tasks();
  record.seed = session.seed;
  return record;
}

SurveyService::SurveyService(std::map<std::string, SurveyDesign> studies, ServiceOptions options)
    : options_(std::move(options)) {
  if (options_.seed) {
    id_rng_.seed(*options_.seed);
  } else {
    std::random_device device;
    std::seed_seq seq{device(), device(), device(), device()};
    id_rng_.seed(seq);
  }
  for (auto& [id, design] : studies) {
    check_design(design);
    if (id.empty() || id.find_first_of("/\\.") != std::string::npos) {
      throw ValidationError("invalid study id '" + id + "'");
    }
    auto study = std::make_unique<Study>();
    study->id = id;
    study->design = std::move(design);
    const auto dir = options_.data_dir / id;
    std::filesystem::create_directories(dir);
    study->events = dir / "events.jsonl";
    study->records = dir / "records.jsonl";
    replay(*study);
    studies_.emplace(id, std::move(study));
  }
}

SurveyService::~SurveyService() = default;

SurveyService::Study& SurveyService::study(const std::string& id) {
  const auto it = studies_.find(id);
  if (it == studies_.end()) throw not_found("unknown study '" + id + "'");
  return *it->second;
}

const SurveyService::Study& SurveyService::study(const std::string& id) const {
  const auto it = studies_.find(id);
  if (it == studies_.end()) throw not_found("unknown study '" + id + "'");
  return *it->second;
}

const SurveyDesign& SurveyService::design(const std::string& id) const {
  return study(id).design;
}

std::shared_ptr<SurveyService::Slot> SurveyService::find(const std::string& session) const {
  std::shared_lock lock(sessions_mutex_);
  const auto it = sessions_.find(session);
  if (it == sessions_.end()) throw not_found("unknown session '" + session + "'");
  return it->second;
}

std::string SurveyService::fresh_id() {
  std::lock_guard lock(id_mutex_);
  std::ostringstream out;
  out << std::hex;
  for (int i = 0; i < 2; ++i) {
    const auto word = id_rng_();
    for (int shift = 60; shift >= 0; shift -= 4) out << ((word >> shift) & 0xF);
  }
  return out.str();
}

void SurveyService::append_event(Study& study, const json& event) {
  std::lock_guard lock(study.file_mutex);
  std::ofstream out(study.events, std::ios::app);
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw Error("cannot append to " + study.events.string());
}

void SurveyService::replay(Study& study) {
  std::set<std::string> recorded;
  if (std::filesystem::exists(study.records)) {
    for (const auto& record : load_records(study.records)) recorded.insert(record.id);
  }
  std::ifstream in(study.events);
  std::string line;
  int line_number = 0;
  std::vector<std::string> order;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json event;
    try {
      event = json::parse(line);
    } catch (const json::exception& e) {
      throw Error(study.events.string() + " line " + std::to_string(line_number) + ": " + e.what());
    }
    if (event.at("study").get<std::string>() != study.id) {
      throw Error(study.events.string() + " line " + std::to_string(line_number) +
                  ": event belongs to another study");
    }
    if (event.at("type") == "session_created") order.push_back(event.at("session"));
    apply(event, false);
  }
  // A crash between the last event and the record append leaves a completed
  // session without its record.
  for (const auto& id : order) {
    const auto& session = sessions_.at(id)->session;
    if (session.phase == Phase::Complete && !recorded.contains(id)) {
      append_record(session_record(session), study.records);
    }
  }
}

void SurveyService::apply(const json& event, bool write_records) {
  const auto type = event.at("type").get<std::string>();
  const auto id = event.at("session").get<std::string>();
  if (type == "session_created") {
    auto slot = std::make_shared<Slot>();
    auto& s = slot->session;
    s.id = id;
    s.study = event.at("study");
    s.population_tag = event.at("populationTag");
    s.created_at = event.at("createdAt");
    s.seed = event.at("seed");
    std::unique_lock lock(sessions_mutex_);
    sessions_.emplace(id, std::move(slot));
    return;
  }

  std::shared_ptr<Slot> slot;
  {
    std::shared_lock lock(sessions_mutex_);
    slot = sessions_.at(id);
  }
  auto& s = slot->session;
  if (type == "byo_submitted") {
    s.byo = profile_from_json(event.at("byo"));
    std::vector<Profile> field;
    for (const auto& p : event.at("field")) field.push_back(profile_from_json(p));
    s.bracket = init_bracket(std::move(field));
    s.phase = Phase::InTournament;
  } else if (type == "choice_recorded") {
    s.bracket->record(parse_side(event.at("winner")));
    if (s.bracket->complete()) {
      s.phase = Phase::Complete;
      if (write_records) {
        auto& st = study(s.study);
        std::lock_guard lock(st.file_mutex);
        append_record(session_record(s), st.records);
      }
    }
  } else {
    throw Error("unknown event type '" + type + "'");
  }
  if (event.contains("key") && !event.at("key").is_null()) {
    s.replies[event.at("key")] = {event.at("payload"), event.at("response")};
  }
}

json SurveyService::view(const Session& s) const {
  const auto& design = study(s.study).design;
  json out = {{"schemaVersion", kSchemaVersion},
              {"session", s.id},
              {"study", s.study},
              {"populationTag", s.population_tag},
              {"createdAt", s.created_at},
              {"phase", to_string(s.phase)}};
  const int total = design.tasks;
  switch (s.phase) {
    case Phase::AwaitingBYO: {
      json attributes = json::array();
      for (const auto& attribute : design.attributes) {
        attributes.push_back({{"label", attribute.label}, {"levels", attribute.levels}});
      }
      out["question"] = {{"type", "byo"}, {"prompt", kByoPrompt}, {"attributes", attributes}};
      out["progress"] = {{"task", 0}, {"completed", 0}, {"total", total}};
      break;
    }
    case Phase::InTournament: {
      const auto task = *s.bracket->pending();
      const int done = s.bracket->completed_tasks();
      out["question"] = {{"type", "choice"},
                         {"prompt", kChoicePrompt},
                         {"task", done + 1},
                         {"round", s.bracket->current_round()},
                         {"left", describe_profile(task.left, design)},
                         {"right", describe_profile(task.right, design)}};
      out["progress"] = {{"task", done + 1}, {"completed", done}, {"total", total}};
      break;
    }
    case Phase::Complete:
      out["summary"] = {{"champion", describe_profile(*s.bracket->champion(), design)},
                        {"byo", describe_profile(*s.byo, design)},
                        {"record", s.id}};
      out["progress"] = {{"task", total}, {"completed", total}, {"total", total}};
      break;
  }
  return out;
}

json SurveyService::create_session(const std::string& study_id, const std::string& population_tag) {
  auto& st = study(study_id);
  if (population_tag.empty()) throw invalid("populationTag must not be empty");
  const auto id = fresh_id();
  std::uint64_t seed;
  {
    std::lock_guard lock(id_mutex_);
    seed = id_rng_();
  }
  const json event = {
      {"v", kSchemaVersion}, {"type", "session_created"},       {"study", study_id},
      {"session", id},       {"populationTag", population_tag}, {"createdAt", utc_now()},
      {"seed", seed}};
  append_event(st, event);
  apply(event, true);
  return next(id);
}

json SurveyService::next(const std::string& session) const {
  const auto slot = find(session);
  std::lock_guard lock(slot->mutex);
  return view(slot->session);
}

json SurveyService::submit(const std::string& session, const json& payload,
                           const std::optional<std::string>& idempotency_key) {
  const auto slot = find(session);
  std::lock_guard lock(slot->mutex);
  auto& s = slot->session;

  if (idempotency_key) {
    const auto it = s.replies.find(*idempotency_key);
    if (it != s.replies.end()) {
      if (it->second.first != payload) {
        throw conflict("idempotency key reused with a different payload");
      }
      return it->second.second;
    }
  }

  if (!payload.is_object()) throw ServiceError(400, "bad_request", "payload must be a JSON object");
  if (payload.value("schemaVersion", 0) != kSchemaVersion) {
    throw ServiceError(400, "bad_request", "payload schemaVersion must be 1");
  }
  const auto type = payload.value("type", std::string());
  auto& st = study(s.study);
  const auto& design = st.design;

  json event = {{"v", kSchemaVersion}, {"study", s.study}, {"session", s.id}};
  if (type == "byo") {
    if (s.phase != Phase::AwaitingBYO) throw conflict("BYO answer already recorded");
    Profile byo;
    try {
      byo = profile_from_json(payload.at("levels"));
    } catch (const json::exception&) {
      throw invalid("\"levels\" must be an array of level indices");
    }
    if (!is_valid_profile(byo, design)) throw invalid("BYO levels do not fit the design");
    Rng rng(s.seed);
    std::vector<Profile> field;
    try {
      const auto candidates = generate_candidate_profiles(byo, design, rng);
      field = select_tournament_field(candidates, rng, design.field_size(),
                                      options_.force_byo_in_field);
    } catch (const ValidationError& e) {
      throw invalid(e.what());
    }
    json field_json = json::array();
    for (const auto& p : field) field_json.push_back(profile_to_json(p));
    event["type"] = "byo_submitted";
    event["byo"] = profile_to_json(byo);
    event["field"] = field_json;
  } else if (type == "choice") {
    if (s.phase != Phase::InTournament) {
      throw conflict("session is " + to_string(s.phase) + "; no choice task is pending");
    }
    const int expected = s.bracket->completed_tasks() + 1;
    if (!payload.contains("task") || !payload.at("task").is_number_integer()) {
      throw invalid("\"task\" must be the 1-based index of the answered task");
    }
    if (payload.at("task").get<int>() != expected) {
      throw conflict("task " + std::to_string(payload.at("task").get<int>()) +
                     " is not pending; the current task is " + std::to_string(expected));
    }
    Side winner;
    try {
      winner = parse_side(payload.at("winner").get<std::string>());
    } catch (const std::exception&) {
      throw invalid("\"winner\" must be \"left\" or \"right\"");
    }
    event["type"] = "choice_recorded";
    event["task"] = expected;
    event["winner"] = to_string(winner);
  } else {
    throw invalid("payload \"type\" must be \"byo\" or \"choice\"");
  }

  // Compute the response on a copy so a failed append leaves state untouched.
  Session after = s;
  if (type == "byo") {
    after.byo = profile_from_json(event.at("byo"));
    std::vector<Profile> field;
    for (const auto& p : event.at("field")) field.push_back(profile_from_json(p));
    after.bracket = init_bracket(std::move(field));
    after.phase = Phase::InTournament;
  } else {
    after.bracket->record(parse_side(event.at("winner")));
    if (after.bracket->complete()) after.phase = Phase::Complete;
  }
  const json response = view(after);
  if (idempotency_key) {
    event["key"] = *idempotency_key;
    event["payload"] = payload;
    event["response"] = response;
  }
  append_event(st, event);
  apply(event, true);
  return response;
}

std::string SurveyService::export_records(const std::string& study_id) const {
  const auto& st = study(study_id);
  std::lock_guard lock(st.file_mutex);
  std::ifstream in(st.records, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

Session SurveyService::snapshot(const std::string& session) const {
  const auto slot = find(session);
  std::lock_guard lock(slot->mutex);
  return slot->session;
}

std::size_t SurveyService::session_count() const {
  std::shared_lock lock(sessions_mutex_);
  return sessions_.size();
}

}  // namespace acbc
