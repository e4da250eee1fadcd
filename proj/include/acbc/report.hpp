#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "acbc/paprika.hpp"
#include "acbc/partworth.hpp"
#include "acbc/population.hpp"

namespace acbc {

struct AttributeBlock {
  int attribute = 0;
  FrequencyDistribution mt;            // (A) BYO tally
  FrequencyDistribution partworth_mi;  // (A)/(B) argmax of fitted part-worths
  int partworth_ties = 0;              // respondents whose argmax was not unique
  FrequencyDistribution paprika_mi;    // (B) exact fractional PAPRIKA tally
  std::vector<Counts> paprika_rounding_cases;
  std::vector<Rational> sample_mt_proportions;  // (C) n_i / n
  PopulationProportions population_mt;          // (C) WMAE minimiser on MT counts
};

struct RemovalEvent {
  std::string respondent;
  std::string reason;
};

struct PopulationBlock {
  std::string tag;
  std::int64_t population = 0;
  std::int64_t respondents = 0;
  std::int64_t paprika_respondents = 0;
  DesignReport small_study;
  std::vector<RemovalEvent> removals;
  std::vector<AttributeBlock> attributes;
};

struct StudyReport {
  SurveyDesign design;
  std::vector<PopulationBlock> populations;  // in order of first appearance
};

struct ReportOptions {
  double ridge = kDefaultRidge;
  FeasibilityMode feasibility = FeasibilityMode::Ordinal;
};

// Throws ValidationError for an empty record set, a record that does not fit
// the design, or a population tag without a population size.
StudyReport build_report(const SurveyDesign& design, const std::vector<RespondentRecord>& records,
                         const std::map<std::string, std::int64_t>& population_sizes,
                         const ReportOptions& options = {});

std::string render_text(const StudyReport& report);
std::string render_section_a_csv(const StudyReport& report);
std::string render_section_b_csv(const StudyReport& report);
std::string render_section_c_csv(const StudyReport& report);
std::string render_removals_csv(const StudyReport& report);

// Loads inputs, builds the report and writes report.txt, section_a.csv,
// section_b.csv, section_c.csv and removals.csv into `output_dir`.
StudyReport run_report(const std::filesystem::path& design_file,
                       const std::filesystem::path& records_file,
                       const std::map<std::string, std::int64_t>& population_sizes,
                       const std::filesystem::path& output_dir, const ReportOptions& options = {});

}  // namespace acbc
