#include "acbc/core.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace acbc {

int SurveyDesign::max_levels() const {
  int c = 0;
  for (const auto& attribute : attributes) {
    c = std::max(c, static_cast<int>(attribute.levels.size()));
  }
  return c;
}

std::vector<int> SurveyDesign::level_counts() const {
  std::vector<int> counts;
  counts.reserve(attributes.size());
  for (const auto& attribute : attributes) {
    counts.push_back(static_cast<int>(attribute.levels.size()));
  }
  return counts;
}

void check_design(const SurveyDesign& design) {
  if (design.attribute_count() < 2) {
    throw ValidationError("design needs at least 2 attributes, got " +
                          std::to_string(design.attribute_count()));
  }
  std::set<std::string> labels;
  for (const auto& attribute : design.attributes) {
    if (attribute.levels.size() < 2) {
      throw ValidationError("attribute '" + attribute.label + "' needs at least 2 levels");
    }
    if (!labels.insert(attribute.label).second) {
      throw ValidationError("duplicate attribute label '" + attribute.label + "'");
    }
  }
  if (design.alternatives != 2) {
    throw ValidationError("only binary choice tasks are supported (a = 2), got a = " +
                          std::to_string(design.alternatives));
  }
  const int field = design.field_size();
  if (design.tasks < 1 || (field & (field - 1)) != 0) {
    throw ValidationError("tournament field size t + 1 = " + std::to_string(field) +
                          " is not a power of two");
  }
}

SurveyDesign make_uniform_design(int attributes, int levels, int tasks) {
  SurveyDesign design;
  design.tasks = tasks;
  for (int a = 0; a < attributes; ++a) {
    Attribute attribute;
    attribute.label = std::string(1, static_cast<char>('A' + a));
    for (int l = 0; l < levels; ++l) {
      attribute.levels.push_back(attribute.label + std::to_string(l + 1));
    }
    design.attributes.push_back(std::move(attribute));
  }
  return design;
}

SurveyDesign relief_design() {
  SurveyDesign design;
  design.attributes = {
      {"Funding", {">=75%", "~50%", "<25%"}},
      {"Disaster Response Type", {"IASC 3", "IASC 2", "IASC 1 or undeclared"}},
      {"Assessed Need", {"clear", "optional", "unknown"}},
      {"Community Access", {"none", "local", "outside"}},
  };
  return design;
}

bool is_valid_profile(const Profile& profile, const SurveyDesign& design) {
  if (static_cast<int>(profile.levels.size()) != design.attribute_count()) return false;
  for (int a = 0; a < design.attribute_count(); ++a) {
    if (profile.levels[a] < 0 || profile.levels[a] >= design.level_count(a)) return false;
  }
  return true;
}

int hamming_distance(const Profile& a, const Profile& b) {
  int distance = 0;
  const auto size = std::min(a.levels.size(), b.levels.size());
  for (std::size_t i = 0; i < size; ++i) {
    if (a.levels[i] != b.levels[i]) ++distance;
  }
  return distance + static_cast<int>(std::max(a.levels.size(), b.levels.size()) - size);
}

std::string profile_string(const Profile& profile) {
  std::string out;
  for (std::size_t a = 0; a < profile.levels.size(); ++a) {
    out += static_cast<char>('A' + a);
    out += std::to_string(profile.levels[a] + 1);
  }
  return out;
}

std::string to_string(Side side) {
  return side == Side::Left ? "left" : "right";
}

Side parse_side(const std::string& text) {
  if (text == "left") return Side::Left;
  if (text == "right") return Side::Right;
  throw ValidationError("winner must be 'left' or 'right', got '" + text + "'");
}

const Profile& ChoiceTask::winning() const {
  if (!winner) throw Error("choice task has no recorded winner");
  return *winner == Side::Left ? left : right;
}

const Profile& ChoiceTask::losing() const {
  if (!winner) throw Error("choice task has no recorded winner");
  return *winner == Side::Left ? right : left;
}

void check_record(const RespondentRecord& record, const SurveyDesign& design) {
  const auto fail = [&](const std::string& why) {
    throw ValidationError("record '" + record.id + "': " + why);
  };
  if (record.id.empty()) throw ValidationError("record has an empty id");
  if (!is_valid_profile(record.byo, design)) fail("BYO profile does not fit the design");
  if (static_cast<int>(record.tasks.size()) > design.tasks) {
    fail(std::to_string(record.tasks.size()) + " tasks exceed t = " + std::to_string(design.tasks));
  }
  for (const auto& profile : record.field) {
    if (!is_valid_profile(profile, design)) fail("field profile does not fit the design");
  }
  for (const auto& task : record.tasks) {
    if (!is_valid_profile(task.left, design) || !is_valid_profile(task.right, design)) {
      fail("task profile does not fit the design");
    }
    if (task.left == task.right) fail("task compares a profile with itself");
    if (!record.field.empty()) {
      const auto in_field = [&](const Profile& p) {
        return std::find(record.field.begin(), record.field.end(), p) != record.field.end();
      };
      if (!in_field(task.left) || !in_field(task.right)) {
        fail("task profile " + profile_string(task.left) + " vs " + profile_string(task.right) +
             " is not drawn from the tournament field");
      }
    }
  }
}

std::string to_string(DistributionKind kind) {
  switch (kind) {
    case DistributionKind::MostTypical:
      return "MT";
    case DistributionKind::MostIdealPartworth:
      return "MI-partworth";
    case DistributionKind::MostIdealPaprika:
      return "MI-paprika";
  }
  return "?";
}

void FrequencyDistribution::check() const {
  Rational total = 0;
  for (const auto& count : counts) {
    if (count < 0) throw Error("negative frequency count");
    total += count;
  }
  if (total != Rational(n)) {
    throw Error("frequency counts sum to " + std::to_string(boost::rational_cast<double>(total)) +
                ", expected n = " + std::to_string(n));
  }
}

bool FrequencyDistribution::is_integral() const {
  return std::all_of(counts.begin(), counts.end(),
                     [](const Rational& r) { return r.denominator() == 1; });
}

std::vector<std::int64_t> FrequencyDistribution::integer_counts() const {
  if (!is_integral()) throw Error("distribution has fractional counts; round it first");
  std::vector<std::int64_t> out;
  out.reserve(counts.size());
  for (const auto& count : counts) out.push_back(count.numerator());
  return out;
}

FrequencyDistribution tally(int attribute, const std::vector<Level>& chosen, int level_count,
                            DistributionKind kind) {
  FrequencyDistribution dist;
  dist.attribute = attribute;
  dist.kind = kind;
  dist.counts.assign(level_count, Rational(0));
  for (Level level : chosen) {
    if (level < 0 || level >= level_count) throw Error("tallied level out of range");
    dist.counts[level] += 1;
  }
  dist.n = static_cast<std::int64_t>(chosen.size());
  return dist;
}

std::string to_string(EstimateMethod method) {
  return method == EstimateMethod::MaximumLikelihood ? "MLE" : "WMAE-min";
}

DesignReport validate_design(const SurveyDesign& design, std::int64_t sample,
                             std::int64_t population) {
  check_design(design);
  if (sample < 1) throw ValidationError("sample size n must be at least 1");
  if (population < sample) throw ValidationError("population size N must be at least n");

  DesignReport report;
  report.sample = sample;
  report.population = population;
  report.bound = static_cast<double>(design.max_levels()) * 1000.0 /
                 (static_cast<double>(design.alternatives) * design.tasks);
  // Compare N against the bound exactly: N * a * t < c * 1000.
  const std::int64_t lhs = population * design.alternatives * design.tasks;
  const std::int64_t rhs = static_cast<std::int64_t>(design.max_levels()) * 1000;
  report.small_study = sample < population && lhs < rhs;
  if (report.small_study) {
    report.message = "small-study condition holds";
  } else if (sample >= population) {
    report.message = "small-study condition fails: requires n < N";
  } else {
    report.message = "small-study condition fails: N is not below the bound";
  }
  return report;
}

}  // namespace acbc
