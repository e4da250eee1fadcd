#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/rational.hpp>
#include <boost/version.hpp>

#if BOOST_VERSION < 107500
// Boost 1.74's mixed rational/integer operator== recurses forever under C++20
// rewritten comparisons. Exact non-template overloads win resolution.
namespace boost {
inline bool operator==(const rational<std::int64_t>& a, std::int64_t b) {
  return a.denominator() == 1 && a.numerator() == b;
}
inline bool operator==(const rational<std::int64_t>& a, int b) {
  return a == static_cast<std::int64_t>(b);
}
}  // namespace boost
#endif

namespace acbc {

// Fractional MI tallies only ever involve halves and thirds, so a 64-bit
// rational is plenty.
using Rational = boost::rational<std::int64_t>;

// Level indices are 0-based everywhere; display labels live in SurveyDesign.
using Level = int;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input or a structurally unsupported design. Maps to CLI exit 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An enumeration would exceed its configured size cap.
class CapExceededError : public Error {
 public:
  using Error::Error;
};

struct Attribute {
  std::string label;
  std::vector<std::string> levels;
};

struct SurveyDesign {
  std::vector<Attribute> attributes;
  int alternatives = 2;  // a
  int tasks = 15;        // t

  int attribute_count() const { return static_cast<int>(attributes.size()); }
  int level_count(int attribute) const {
    return static_cast<int>(attributes.at(attribute).levels.size());
  }
  // c: the largest level count over attributes.
  int max_levels() const;
  // Single elimination over a field of t + 1 profiles plays t tasks.
  int field_size() const { return tasks + 1; }
  std::vector<int> level_counts() const;
};

// Throws ValidationError naming the first structural problem.
void check_design(const SurveyDesign& design);

// k attributes labelled A, B, C, ... each with `levels` levels named A1, A2, ...
SurveyDesign make_uniform_design(int attributes, int levels, int tasks = 15);

// The four-attribute disaster-relief instrument with its level labels.
SurveyDesign relief_design();

struct Profile {
  std::vector<Level> levels;

  friend bool operator==(const Profile&, const Profile&) = default;
  friend auto operator<=>(const Profile&, const Profile&) = default;
};

bool is_valid_profile(const Profile& profile, const SurveyDesign& design);
int hamming_distance(const Profile& a, const Profile& b);
// Compact form such as "A1B2C1D3" using 1-based subscripts.
std::string profile_string(const Profile& profile);

enum class Side { Left, Right };

std::string to_string(Side side);
Side parse_side(const std::string& text);

struct ChoiceTask {
  Profile left;
  Profile right;
  std::optional<Side> winner;

  const Profile& winning() const;
  const Profile& losing() const;
  friend bool operator==(const ChoiceTask&, const ChoiceTask&) = default;
};

struct RespondentRecord {
  std::string id;
  std::string population_tag;
  Profile byo;
  std::vector<Profile> field;
  std::vector<ChoiceTask> tasks;
  std::optional<std::uint64_t> seed;

  friend bool operator==(const RespondentRecord&, const RespondentRecord&) = default;
};

// Throws ValidationError if the record does not fit the design.
void check_record(const RespondentRecord& record, const SurveyDesign& design);

enum class DistributionKind { MostTypical, MostIdealPartworth, MostIdealPaprika };

std::string to_string(DistributionKind kind);

struct FrequencyDistribution {
  int attribute = 0;
  std::vector<Rational> counts;
  std::int64_t n = 0;
  DistributionKind kind = DistributionKind::MostTypical;

  // Throws Error if counts are negative or do not sum to n.
  void check() const;
  bool is_integral() const;
  std::vector<std::int64_t> integer_counts() const;
};

FrequencyDistribution tally(int attribute, const std::vector<Level>& chosen, int level_count,
                            DistributionKind kind);

enum class EstimateMethod { MaximumLikelihood, WmaeMinimizer };

std::string to_string(EstimateMethod method);

struct PopulationEstimate {
  std::vector<std::int64_t> counts;
  std::int64_t population = 0;
  EstimateMethod method = EstimateMethod::MaximumLikelihood;
  double wmae = 0.0;
  bool non_unique = false;
};

struct DesignReport {
  bool small_study = false;
  double bound = 0.0;  // (c / (a t)) * 1000
  std::int64_t sample = 0;
  std::int64_t population = 0;
  std::string message;
};

// Checks the small-study condition n < N < (c / (a t)) * 10^3.
DesignReport validate_design(const SurveyDesign& design, std::int64_t sample,
                             std::int64_t population);

}  // namespace acbc
