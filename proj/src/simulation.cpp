#include "acbc/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <thread>

namespace acbc {

namespace {

constexpr int kAttributes = 4;
constexpr int kLevels = 3;

const SurveyDesign& simulation_design() {
  static const SurveyDesign design = make_uniform_design(kAttributes, kLevels);
  return design;
}

const std::shared_ptr<const RankingSpace>& simulation_space() {
  static const auto space = make_ranking_space(simulation_design());
  return space;
}

}  // namespace

SimulatedRespondent make_simulated_respondent(int attributes, std::vector<double> levels) {
  if (levels.size() < 2) throw ValidationError("need at least two level utilities");
  for (std::size_t l = 1; l < levels.size(); ++l) {
    if (!(levels[l] < levels[l - 1])) {
      throw ValidationError("level utilities must be strictly decreasing in level index");
    }
  }
  SimulatedRespondent respondent;
  respondent.utilities.assign(attributes, levels);
  for (int a = 0; a < attributes; ++a) respondent.tie_break_order.push_back(a);
  return respondent;
}

double total_utility(const SimulatedRespondent& respondent, const Profile& profile) {
  double total = 0;
  for (std::size_t a = 0; a < profile.levels.size(); ++a) {
    total += respondent.utilities.at(a).at(profile.levels[a]);
  }
  return total;
}

Side simulate_choice(const SimulatedRespondent& respondent, const ChoiceTask& task) {
  const double left = total_utility(respondent, task.left);
  const double right = total_utility(respondent, task.right);
  if (left != right) return left > right ? Side::Left : Side::Right;
  for (int a : respondent.tie_break_order) {
    const double l = respondent.utilities[a][task.left.levels[a]];
    const double r = respondent.utilities[a][task.right.levels[a]];
    if (l != r) return l > r ? Side::Left : Side::Right;
  }
  throw Error("simulated choice between identical profiles");
}

std::string to_string(ByoMode mode) {
  switch (mode) {
    case ByoMode::Ideal:
      return "ideal";
    case ByoMode::Typical:
      return "typical";
    case ByoMode::Random:
      return "random";
  }
  return "?";
}

ByoMode parse_byo_mode(const std::string& text) {
  if (text == "ideal") return ByoMode::Ideal;
  if (text == "typical") return ByoMode::Typical;
  if (text == "random") return ByoMode::Random;
  throw ValidationError("unknown BYO mode '" + text + "' (expected ideal, typical or random)");
}

TrialResult run_trial(ByoMode mode, Rng& rng, const TrialOptions& options) {
  return run_trial(mode, rng, options, simulation_space());
}

TrialResult run_trial(ByoMode mode, Rng& rng, const TrialOptions& options,
                      const std::shared_ptr<const RankingSpace>& space) {
  const auto& design = simulation_design();
  if (static_cast<int>(options.utilities.size()) != kLevels) {
    throw ValidationError("simulation needs exactly 3 level utilities");
  }
  const auto respondent = make_simulated_respondent(kAttributes, options.utilities);

  TrialResult result;
  result.byo.levels.assign(kAttributes, 0);
  if (mode == ByoMode::Typical) {
    result.byo.levels.assign(kAttributes, 1);
  } else if (mode == ByoMode::Random) {
    std::uniform_int_distribution<int> level(0, kLevels - 1);
    for (auto& l : result.byo.levels) l = level(rng);
  }

  const auto candidates = generate_candidate_profiles(result.byo, design, rng);
  Bracket bracket(select_tournament_field(candidates, rng, kFieldSize, options.force_byo_in_field));
  std::vector<Constraint> constraints;
  while (auto task = bracket.pending()) {
    task->winner = simulate_choice(respondent, *task);
    constraints.push_back(constraint_from_choice(*task));
    bracket.record(*task->winner);
  }
  result.champion = *bracket.champion();

  const auto frs = feasible_set(space, constraints, options.feasibility);
  result.feasible_rankings = frs.size();
  if (frs.empty()) {
    result.credit.assign(kAttributes, 0.0);
    return result;
  }
  const auto shares = mi_counts(frs);
  for (int a = 0; a < kAttributes; ++a) {
    result.credit.push_back(boost::rational_cast<double>(shares[a][0]));
  }
  return result;
}

Rng trial_rng(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

HitProbabilities estimate_hit_probabilities(ByoMode mode, std::int64_t trials, std::uint64_t seed,
                                            const TrialOptions& options, unsigned threads) {
  if (trials < 1) throw ValidationError("need at least one trial");
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::int64_t>(threads, trials));

  std::vector<std::vector<double>> credits(trials);
  const auto work = [&](std::int64_t begin, std::int64_t end) {
    for (std::int64_t i = begin; i < end; ++i) {
      auto rng = trial_rng(seed, static_cast<std::uint64_t>(i));
      credits[i] = run_trial(mode, rng, options).credit;
    }
  };
  if (threads == 1) {
    work(0, trials);
  } else {
    std::vector<std::jthread> pool;
    const std::int64_t chunk = (trials + threads - 1) / threads;
    for (unsigned t = 0; t < threads; ++t) {
      const std::int64_t begin = t * chunk;
      const std::int64_t end = std::min(trials, begin + chunk);
      if (begin < end) pool.emplace_back(work, begin, end);
    }
  }

  HitProbabilities out;
  out.mode = mode;
  out.trials = trials;
  out.probability.assign(kAttributes, 0.0);
  for (const auto& credit : credits) {
    for (int a = 0; a < kAttributes; ++a) out.probability[a] += credit[a];
  }
  for (int a = 0; a < kAttributes; ++a) {
    out.probability[a] /= static_cast<double>(trials);
    const double p = out.probability[a];
    out.standard_error.push_back(std::sqrt(p * (1.0 - p) / static_cast<double>(trials)));
  }
  return out;
}

void write_hit_table_csv(std::ostream& out, const std::vector<HitProbabilities>& rows) {
  out << "mode,trials,A1,B1,C1,D1,se_A1,se_B1,se_C1,se_D1\n";
  out << std::fixed;
  for (const auto& row : rows) {
    out << to_string(row.mode) << ',' << row.trials;
    for (double p : row.probability) out << ',' << std::setprecision(4) << p;
    for (double se : row.standard_error) out << ',' << std::setprecision(5) << se;
    out << '\n';
  }
  out << std::defaultfloat;
}

}  // namespace acbc
