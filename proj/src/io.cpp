#include "acbc/io.hpp"

#include <fstream>
#include <sstream>

namespace acbc {

using nlohmann::json;

namespace {

void require_schema(const json& doc, const char* what) {
  if (!doc.contains("schemaVersion")) {
    throw ValidationError(std::string(what) + " is missing \"schemaVersion\"");
  }
  const int version = doc.at("schemaVersion").get<int>();
  if (version != kSchemaVersion) {
    throw ValidationError(std::string(what) + " has unsupported schemaVersion " +
                          std::to_string(version));
  }
}

}  // namespace

json design_to_json(const SurveyDesign& design) {
  json attributes = json::array();
  for (const auto& attribute : design.attributes) {
    attributes.push_back({{"label", attribute.label}, {"levels", attribute.levels}});
  }
  return {{"schemaVersion", kSchemaVersion},
          {"a", design.alternatives},
          {"t", design.tasks},
          {"attributes", attributes}};
}

SurveyDesign design_from_json(const json& doc) {
  SurveyDesign design;
  try {
    require_schema(doc, "design");
    design.alternatives = doc.value("a", 2);
    design.tasks = doc.value("t", 15);
    for (const auto& entry : doc.at("attributes")) {
      Attribute attribute;
      attribute.label = entry.at("label").get<std::string>();
      attribute.levels = entry.at("levels").get<std::vector<std::string>>();
      design.attributes.push_back(std::move(attribute));
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed design: ") + e.what());
  }
  check_design(design);
  return design;
}

SurveyDesign load_design(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open design file " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError("design file " + path.string() + " is not valid JSON: " + e.what());
  }
  return design_from_json(doc);
}

void save_design(const SurveyDesign& design, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << design_to_json(design).dump(2) << '\n';
}

json profile_to_json(const Profile& profile) {
  return profile.levels;
}

Profile profile_from_json(const json& doc) {
  return Profile{doc.get<std::vector<Level>>()};
}

json task_to_json(const ChoiceTask& task) {
  json doc = {{"left", profile_to_json(task.left)}, {"right", profile_to_json(task.right)}};
  doc["winner"] = task.winner ? json(to_string(*task.winner)) : json(nullptr);
  return doc;
}

ChoiceTask task_from_json(const json& doc) {
  ChoiceTask task;
  task.left = profile_from_json(doc.at("left"));
  task.right = profile_from_json(doc.at("right"));
  if (doc.contains("winner") && !doc.at("winner").is_null()) {
    task.winner = parse_side(doc.at("winner").get<std::string>());
  }
  return task;
}

json record_to_json(const RespondentRecord& record) {
  json field = json::array();
  for (const auto& profile : record.field) field.push_back(profile_to_json(profile));
  json tasks = json::array();
  for (const auto& task : record.tasks) tasks.push_back(task_to_json(task));
  json doc = {{"schemaVersion", kSchemaVersion},
              {"id", record.id},
              {"populationTag", record.population_tag},
              {"byo", profile_to_json(record.byo)},
              {"field", field},
              {"tasks", tasks}};
  if (record.seed) doc["seed"] = *record.seed;
  return doc;
}

RespondentRecord record_from_json(const json& doc) {
  require_schema(doc, "record");
  RespondentRecord record;
  try {
    record.id = doc.at("id").get<std::string>();
    record.population_tag = doc.at("populationTag").get<std::string>();
    record.byo = profile_from_json(doc.at("byo"));
    if (doc.contains("field")) {
      for (const auto& p : doc.at("field")) record.field.push_back(profile_from_json(p));
    }
    for (const auto& t : doc.at("tasks")) record.tasks.push_back(task_from_json(t));
    if (doc.contains("seed")) record.seed = doc.at("seed").get<std::uint64_t>();
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed record: ") + e.what());
  }
  return record;
}

std::string record_to_line(const RespondentRecord& record) {
  return record_to_json(record).dump();
}

void append_record(const RespondentRecord& record, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot append to " + path.string());
  out << record_to_line(record) << '\n';
}

std::vector<RespondentRecord> read_records(std::istream& in) {
  std::vector<RespondentRecord> records;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      records.push_back(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      throw ValidationError("line " + std::to_string(line_number) + ": " + e.what());
    }
  }
  return records;
}

std::vector<RespondentRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open records file " + path.string());
  return read_records(in);
}

std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\n") == std::string::npos) return text;
  std::string out = "\"";
  for (char ch : text) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

std::string format_rational(const Rational& value) {
  if (value.denominator() == 1) return std::to_string(value.numerator());
  return std::to_string(value.numerator()) + "/" + std::to_string(value.denominator());
}

}  // namespace acbc
