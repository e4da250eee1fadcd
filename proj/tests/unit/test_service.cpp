#include <doctest.h>

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <functional>
#include <sstream>
#include <thread>

#include "acbc/http_server.hpp"
#include "acbc/io.hpp"
#include "acbc/report.hpp"
#include "acbc/service.hpp"

#include <httplib.h>

using namespace acbc;
using nlohmann::json;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name)
      : path(std::filesystem::temp_directory_path() / ("acbc-service-" + name)) {
    std::filesystem::remove_all(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

ServiceOptions options_for(const TempDir& dir, std::uint64_t seed = 42) {
  ServiceOptions options;
  options.data_dir = dir.path;
  options.seed = seed;
  return options;
}

std::map<std::string, SurveyDesign> studies() {
  return {{"relief", relief_design()}};
}

json byo(std::vector<int> levels) {
  return {{"schemaVersion", 1}, {"type", "byo"}, {"levels", levels}};
}

json choice(int task, const std::string& winner) {
  return {{"schemaVersion", 1}, {"type", "choice"}, {"task", task}, {"winner", winner}};
}

int status_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    return e.status();
  }
  return 200;
}

// Always prefers the profile whose first level index is lower.
json finish(SurveyService& service, const std::string& id) {
  json view = service.next(id);
  while (view["phase"] == "InTournament") {
    const auto& q = view["question"];
    const auto left = q["left"]["levels"][0].get<int>();
    const auto right = q["right"]["levels"][0].get<int>();
    view = service.submit(id, choice(q["task"], left <= right ? "left" : "right"));
  }
  return view;
}

}  // namespace

TEST_SUITE("service") {
  TEST_CASE("session creation") {
    TempDir dir("create");
    SurveyService service(studies(), options_for(dir));
    const auto first = service.create_session("relief", "FBO");
    const auto second = service.create_session("relief", "NFBO");
    CHECK(first["phase"] == "AwaitingBYO");
    CHECK(first["schemaVersion"] == 1);
    CHECK(first["question"]["type"] == "byo");
    CHECK(first["question"]["attributes"].size() == 4);
    CHECK(first["question"]["prompt"].get<std::string>().find("most typically") !=
          std::string::npos);
    CHECK(first["session"].get<std::string>().size() == 32);
    CHECK(first["session"] != second["session"]);
    CHECK(first["populationTag"] == "FBO");
    CHECK(service.session_count() == 2);
    CHECK(status_of([&] { service.create_session("nope", "FBO"); }) == 404);
    CHECK(status_of([&] { service.create_session("relief", ""); }) == 422);
    CHECK(status_of([&] { service.next("missing"); }) == 404);
  }

  TEST_CASE("a full session: BYO, fifteen choices, summary") {
    TempDir dir("full");
    SurveyService service(studies(), options_for(dir));
    const std::string id = service.create_session("relief", "FBO")["session"];

    const auto first_task = service.submit(id, byo({1, 1, 0, 1}));
    CHECK(first_task["phase"] == "InTournament");
    CHECK(first_task["question"]["type"] == "choice");
    CHECK(first_task["question"]["task"] == 1);
    CHECK(first_task["question"]["round"] == 1);
    CHECK(first_task["progress"]["total"] == 15);
    CHECK(first_task["question"]["left"]["labels"].size() == 4);
    CHECK(service.next(id) == first_task);

    const auto done = finish(service, id);
    CHECK(done["phase"] == "Complete");
    CHECK(done["progress"]["completed"] == 15);
    CHECK(done["summary"]["byo"]["levels"] == json::array({1, 1, 0, 1}));

    const auto session = service.snapshot(id);
    int lowest = 9;
    for (const auto& p : session.bracket->field()) lowest = std::min(lowest, p.levels[0]);
    CHECK(done["summary"]["champion"]["levels"][0] == lowest);
    CHECK(session.bracket->completed_tasks() == 15);
    const auto record = session_record(session);
    CHECK(record.tasks.size() == 15);
    CHECK(record.population_tag == "FBO");
    CHECK_NOTHROW(check_record(record, relief_design()));
    CHECK(service.export_records("relief") == record_to_line(record) + "\n");
  }

  TEST_CASE("out-of-phase, stale and invalid payloads") {
    TempDir dir("errors");
    SurveyService service(studies(), options_for(dir));
    const std::string id = service.create_session("relief", "FBO")["session"];

    CHECK(status_of([&] { service.submit(id, choice(1, "left")); }) == 409);
    CHECK(status_of([&] { service.submit(id, byo({0, 0, 0})); }) == 422);
    CHECK(status_of([&] { service.submit(id, byo({0, 0, 0, 5})); }) == 422);
    CHECK(status_of([&] { service.submit(id, {{"schemaVersion", 1}, {"type", "vote"}}); }) == 422);
    CHECK(status_of([&] { service.submit(id, {{"schemaVersion", 2}, {"type", "byo"}}); }) == 400);
    CHECK(status_of([&] { service.submit(id, json::array()); }) == 400);
    CHECK(status_of([&] { service.submit("missing", byo({0, 0, 0, 0})); }) == 404);
    CHECK(service.snapshot(id).phase == Phase::AwaitingBYO);

    service.submit(id, byo({0, 0, 0, 0}));
    CHECK(status_of([&] { service.submit(id, byo({0, 0, 0, 0})); }) == 409);
    CHECK(status_of([&] { service.submit(id, choice(1, "up")); }) == 422);
    CHECK(status_of([&] { service.submit(id, choice(2, "left")); }) == 409);
    service.submit(id, choice(1, "left"));
    CHECK(status_of([&] { service.submit(id, choice(1, "left")); }) == 409);
    CHECK(service.snapshot(id).bracket->completed_tasks() == 1);

    finish(service, id);
    CHECK(status_of([&] { service.submit(id, choice(16, "left")); }) == 409);
  }

  TEST_CASE("idempotent retries return the original response") {
    TempDir dir("idempotent");
    SurveyService service(studies(), options_for(dir));
    const std::string id = service.create_session("relief", "FBO")["session"];
    const auto a = service.submit(id, byo({2, 0, 1, 1}), "k-byo");
    const auto b = service.submit(id, byo({2, 0, 1, 1}), "k-byo");
    CHECK(a == b);
    const auto c = service.submit(id, choice(1, "right"), "k-1");
    const auto d = service.submit(id, choice(1, "right"), "k-1");
    CHECK(c == d);
    CHECK(c["question"]["task"] == 2);
    CHECK(service.snapshot(id).bracket->completed_tasks() == 1);
    CHECK(status_of([&] { service.submit(id, choice(2, "left"), "k-1"); }) == 409);
  }

  TEST_CASE("racing submissions advance the bracket once") {
    TempDir dir("race");
    SurveyService service(studies(), options_for(dir));
    const std::string id = service.create_session("relief", "FBO")["session"];
    service.submit(id, byo({0, 1, 2, 0}));
    std::atomic<int> ok{0};
    std::atomic<int> conflicts{0};
    std::vector<std::thread> threads;
    for (int t = 0; t < 8; ++t) {
      threads.emplace_back([&, t] {
        try {
          service.submit(id, choice(1, t % 2 ? "left" : "right"));
          ++ok;
        } catch (const ServiceError& e) {
          if (e.status() == 409) ++conflicts;
        }
      });
    }
    for (auto& thread : threads) thread.join();
    CHECK(ok == 1);
    CHECK(conflicts == 7);
    CHECK(service.snapshot(id).bracket->completed_tasks() == 1);
  }

  TEST_CASE("restart replays the event log") {
    TempDir dir("replay");
    std::string finished;
    std::string partial;
    json finished_view;
    json partial_view;
    {
      SurveyService service(studies(), options_for(dir));
      finished = service.create_session("relief", "FBO")["session"];
      service.submit(finished, byo({1, 1, 0, 1}));
      finished_view = finish(service, finished);
      partial = service.create_session("relief", "NFBO")["session"];
      service.submit(partial, byo({0, 0, 0, 0}), "k");
      partial_view = service.submit(partial, choice(1, "left"));
    }
    SurveyService restarted(studies(), options_for(dir, 7));
    CHECK(restarted.session_count() == 2);
    CHECK(restarted.next(finished) == finished_view);
    CHECK(restarted.next(partial) == partial_view);
    CHECK(restarted.snapshot(partial).replies.contains("k"));

    const auto records = [&] {
      std::istringstream in(restarted.export_records("relief"));
      return read_records(in);
    }();
    REQUIRE(records.size() == 1);
    CHECK(records[0].id == finished);
    std::vector<Side> winners;
    for (const auto& task : records[0].tasks) winners.push_back(*task.winner);
    const auto replayed = replay_bracket(records[0].field, winners);
    CHECK(replayed.champion() == restarted.snapshot(finished).bracket->champion());

    // The exported records feed the report directly.
    const auto report = build_report(relief_design(), records, {{"FBO", 49}});
    CHECK(report.populations[0].respondents == 1);

    // The partial session carries on after the restart.
    CHECK(finish(restarted, partial)["phase"] == "Complete");
    std::istringstream in(restarted.export_records("relief"));
    CHECK(read_records(in).size() == 2);
  }

  TEST_CASE("HTTP routes") {
    TempDir dir("http");
    SurveyService service(studies(), options_for(dir));
    HttpServer server(service);
    const int port = server.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread listener([&] { server.listen(); });
    server.wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    auto created =
        client.Post("/studies/relief/sessions", R"({"populationTag":"FBO"})", "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    const auto body = json::parse(created->body);
    const std::string id = body["session"];
    CHECK(body["phase"] == "AwaitingBYO");

    auto missing =
        client.Post("/studies/none/sessions", R"({"populationTag":"FBO"})", "application/json");
    REQUIRE(missing);
    CHECK(missing->status == 404);
    CHECK(json::parse(missing->body)["error"]["code"] == "not_found");

    auto next = client.Get("/sessions/" + id + "/next");
    REQUIRE(next);
    CHECK(next->status == 200);
    CHECK(json::parse(next->body) == body);

    auto early =
        client.Post("/sessions/" + id + "/responses", choice(1, "left").dump(), "application/json");
    REQUIRE(early);
    CHECK(early->status == 409);

    httplib::Headers headers = {{"Idempotency-Key", "abc"}};
    auto answered = client.Post("/sessions/" + id + "/responses", headers, byo({0, 0, 0, 0}).dump(),
                                "application/json");
    auto retried = client.Post("/sessions/" + id + "/responses", headers, byo({0, 0, 0, 0}).dump(),
                               "application/json");
    REQUIRE(answered);
    REQUIRE(retried);
    CHECK(answered->status == 200);
    CHECK(answered->body == retried->body);

    auto junk = client.Post("/sessions/" + id + "/responses", "{oops", "application/json");
    REQUIRE(junk);
    CHECK(junk->status == 400);

    finish(service, id);
    auto records = client.Get("/studies/relief/records.jsonl");
    REQUIRE(records);
    CHECK(records->status == 200);
    CHECK(records->get_header_value("Content-Type") == "application/x-ndjson");
    CHECK(records->body == service.export_records("relief"));

    server.stop();
    listener.join();
  }
}
