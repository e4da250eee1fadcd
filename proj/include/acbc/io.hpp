#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "acbc/core.hpp"

namespace acbc {

inline constexpr int kSchemaVersion = 1;

// Survey design documents:
//   {"schemaVersion": 1, "a": 2, "t": 15,
//    "attributes": [{"label": "Funding", "levels": [">=75%", "~50%", "<25%"]}, ...]}
nlohmann::json design_to_json(const SurveyDesign& design);
SurveyDesign design_from_json(const nlohmann::json& doc);
SurveyDesign load_design(const std::filesystem::path& path);
void save_design(const SurveyDesign& design, const std::filesystem::path& path);

nlohmann::json profile_to_json(const Profile& profile);
Profile profile_from_json(const nlohmann::json& doc);

nlohmann::json task_to_json(const ChoiceTask& task);
ChoiceTask task_from_json(const nlohmann::json& doc);

// One respondent per JSON Lines row. Levels are 0-based indices.
nlohmann::json record_to_json(const RespondentRecord& record);
RespondentRecord record_from_json(const nlohmann::json& doc);

std::string record_to_line(const RespondentRecord& record);
void append_record(const RespondentRecord& record, const std::filesystem::path& path);

// Malformed rows raise ValidationError naming the 1-based line number.
// Blank lines are skipped.
std::vector<RespondentRecord> read_records(std::istream& in);
std::vector<RespondentRecord> load_records(const std::filesystem::path& path);

// Quotes a CSV field when it contains a comma, quote or newline.
std::string csv_field(const std::string& text);
// "19/2" for fractions, "7" for whole numbers.
std::string format_rational(const Rational& value);

}  // namespace acbc
