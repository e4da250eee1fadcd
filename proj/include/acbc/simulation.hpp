#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "acbc/paprika.hpp"
#include "acbc/survey.hpp"

namespace acbc {

// Deterministic respondent with additive utilities. Level 0 is the true MI
// level of every attribute. Ties in total utility go to the profile with the
// better level on the first differing attribute in `tie_break_order`.
struct SimulatedRespondent {
  std::vector<std::vector<double>> utilities;
  std::vector<int> tie_break_order;
};

// Same utility vector for each of `attributes` attributes; tie-break A, B, ...
// Throws ValidationError unless `levels` is strictly decreasing.
SimulatedRespondent make_simulated_respondent(int attributes, std::vector<double> levels);

double total_utility(const SimulatedRespondent& respondent, const Profile& profile);
Side simulate_choice(const SimulatedRespondent& respondent, const ChoiceTask& task);

enum class ByoMode {
  Ideal,    // BYO = A1B1C1D1
  Typical,  // BYO = A2B2C2D2
  Random,   // each BYO level uniform and independent
};

std::string to_string(ByoMode mode);
ByoMode parse_byo_mode(const std::string& text);

struct TrialOptions {
  std::vector<double> utilities{2.0, 1.0, 0.0};
  bool force_byo_in_field = false;
  FeasibilityMode feasibility = FeasibilityMode::Ordinal;
};

struct TrialResult {
  std::vector<double> credit;  // per attribute, level 1's MI share
  std::size_t feasible_rankings = 0;
  Profile byo;
  Profile champion;
};

// One simulated 4 x 3 survey: candidates from the mode's BYO, random field,
// full tournament, PAPRIKA, and MI credit per attribute.
TrialResult run_trial(ByoMode mode, Rng& rng, const TrialOptions& options = {});
TrialResult run_trial(ByoMode mode, Rng& rng, const TrialOptions& options,
                      const std::shared_ptr<const RankingSpace>& space);

// Independent stream for trial `index` of a run seeded with `seed`.
Rng trial_rng(std::uint64_t seed, std::uint64_t index);

struct HitProbabilities {
  ByoMode mode = ByoMode::Ideal;
  std::int64_t trials = 0;
  std::vector<double> probability;
  std::vector<double> standard_error;  // sqrt(p (1 - p) / trials)
};

// Mean credit per attribute. Trial i always uses trial_rng(seed, i), so the
// result does not depend on `threads`.
HitProbabilities estimate_hit_probabilities(ByoMode mode, std::int64_t trials, std::uint64_t seed,
                                            const TrialOptions& options = {}, unsigned threads = 0);

void write_hit_table_csv(std::ostream& out, const std::vector<HitProbabilities>& rows);

}  // namespace acbc
