#include "acbc/population.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace acbc {

namespace {

std::int64_t sum_of(std::span<const std::int64_t> values) {
  return std::accumulate(values.begin(), values.end(), std::int64_t{0});
}

void check_sample(std::span<const std::int64_t> sample, std::int64_t population) {
  if (sample.empty()) throw ValidationError("sample distribution has no levels");
  for (auto count : sample) {
    if (count < 0) throw ValidationError("sample counts must be non-negative");
  }
  const auto n = sum_of(sample);
  if (n < 1) throw ValidationError("sample size n must be at least 1");
  if (population < n) {
    throw ValidationError("population size N = " + std::to_string(population) +
                          " is below the sample size n = " + std::to_string(n));
  }
}

double log_choose(std::int64_t n, std::int64_t k) {
  return std::lgamma(static_cast<double>(n) + 1.0) - std::lgamma(static_cast<double>(k) + 1.0) -
         std::lgamma(static_cast<double>(n - k) + 1.0);
}

boost::multiprecision::cpp_int choose_exact(std::int64_t n, std::int64_t k) {
  boost::multiprecision::cpp_int result = 1;
  k = std::min(k, n - k);
  for (std::int64_t i = 1; i <= k; ++i) {
    result *= n - k + i;
    result /= i;
  }
  return result;
}

// Exact comparison of 1 + a/j against 1 + b/i, i.e. a*i vs b*j.
int compare_factors(std::int64_t a, std::int64_t j, std::int64_t b, std::int64_t i) {
  const auto lhs = static_cast<__int128>(a) * i;
  const auto rhs = static_cast<__int128>(b) * j;
  return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

}  // namespace

FactorTable::FactorTable(Counts sample, std::int64_t population) : sample_(std::move(sample)) {
  check_sample(sample_, population);
  depth_ = population - sum_of(sample_);
}

Rational FactorTable::exact(int column, std::int64_t j) const {
  if (j < 1) return Rational(1);
  return Rational(1) + Rational(sample_.at(column), j);
}

double FactorTable::operator()(int column, std::int64_t j) const {
  if (j < 1) return 1.0;
  return 1.0 + static_cast<double>(sample_.at(column)) / static_cast<double>(j);
}

std::uint64_t admissible_count(std::int64_t free_units, int levels) {
  // C(free + m - 1, m - 1), saturating.
  long double count = 1;
  for (int i = 1; i < levels; ++i) {
    count = count * static_cast<long double>(free_units + i) / i;
  }
  if (count > 1.8e19L) return UINT64_MAX;
  return static_cast<std::uint64_t>(std::llround(count));
}

AdmissibleEnsemble::AdmissibleEnsemble(Counts sample, std::int64_t population, std::uint64_t cap)
    : sample_(std::move(sample)), population_(population) {
  check_sample(sample_, population_);
  sample_size_ = sum_of(sample_);
  const std::int64_t free_units = population_ - sample_size_;
  const int m = levels();
  const auto expected = admissible_count(free_units, m);
  if (expected > cap) {
    throw CapExceededError("admissible ensemble of " + std::to_string(expected) +
                           " populations exceeds the cap of " + std::to_string(cap));
  }
  if (population_ > INT32_MAX) throw ValidationError("population size too large");

  flat_.reserve(expected * m);
  std::vector<std::int64_t> extra(m, 0);
  // Odometer over compositions of free_units into m parts, lexicographic.
  extra[m - 1] = free_units;
  while (true) {
    for (int i = 0; i < m; ++i) flat_.push_back(static_cast<std::int32_t>(sample_[i] + extra[i]));
    // Rightmost i < m - 1 whose tail holds units: bump it, push the rest last.
    std::int64_t tail = 0;
    int i = m - 2;
    for (; i >= 0; --i) {
      tail += extra[i + 1];
      if (tail > 0) break;
    }
    if (i < 0) break;
    ++extra[i];
    --tail;
    for (int j = i + 1; j < m; ++j) extra[j] = 0;
    extra[m - 1] = tail;
  }

  const std::size_t count = flat_.size() / m;
  log_weights_.resize(count);
  const double log_total = log_choose(population_, sample_size_);
  for (std::size_t k = 0; k < count; ++k) {
    double lw = -log_total;
    for (int i = 0; i < m; ++i) lw += log_choose(flat_[k * m + i], sample_[i]);
    log_weights_[k] = lw;
  }
  const double peak = *std::max_element(log_weights_.begin(), log_weights_.end());
  double normalizer = 0;
  weights_.resize(count);
  for (std::size_t k = 0; k < count; ++k) {
    weights_[k] = std::exp(log_weights_[k] - peak);
    normalizer += weights_[k];
  }
  for (auto& w : weights_) w /= normalizer;

  if (population_ <= kExactCheckPopulation && count <= 100'000) {
    std::vector<boost::multiprecision::cpp_int> exact(count);
    boost::multiprecision::cpp_int total = 0;
    for (std::size_t k = 0; k < count; ++k) {
      exact[k] = 1;
      for (int i = 0; i < m; ++i) exact[k] *= choose_exact(flat_[k * m + i], sample_[i]);
      total += exact[k];
    }
    for (std::size_t k = 0; k < count; ++k) {
      const double reference = static_cast<double>(BigRational(exact[k], total));
      if (std::abs(reference - weights_[k]) > 1e-10 * std::max(reference, 1e-300) + 1e-300) {
        throw Error("log-space ensemble weight disagrees with exact arithmetic at ID " +
                    std::to_string(k + 1));
      }
      weights_[k] = reference;
    }
    exact_checked_ = true;
  }
}

Counts AdmissibleEnsemble::member_counts(std::size_t index) const {
  const auto row = member(index);
  return Counts(row.begin(), row.end());
}

std::size_t AdmissibleEnsemble::index_of(std::span<const std::int64_t> population) const {
  if (!is_admissible(population, sample_, population_)) {
    throw ValidationError("population is not admissible for this sample");
  }
  std::size_t lo = 0;
  std::size_t hi = size();
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    const auto row = member(mid);
    if (std::lexicographical_compare(row.begin(), row.end(), population.begin(), population.end(),
                                     [](std::int64_t a, std::int64_t b) { return a < b; })) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return lo;
}

AdmissibleEnsemble admissible_populations(std::span<const std::int64_t> sample,
                                          std::int64_t population, std::uint64_t cap) {
  return AdmissibleEnsemble(Counts(sample.begin(), sample.end()), population, cap);
}

bool is_admissible(std::span<const std::int64_t> population, std::span<const std::int64_t> sample,
                   std::int64_t total) {
  if (population.size() != sample.size()) return false;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    if (population[i] < sample[i]) return false;
  }
  return sum_of(population) == total;
}

double log_sample_probability(std::span<const std::int64_t> population,
                              std::span<const std::int64_t> sample) {
  if (!is_admissible(population, sample, sum_of(population))) {
    throw ValidationError("population does not dominate the sample");
  }
  double lp = -log_choose(sum_of(population), sum_of(sample));
  for (std::size_t i = 0; i < sample.size(); ++i) lp += log_choose(population[i], sample[i]);
  return lp;
}

double sample_probability(std::span<const std::int64_t> population,
                          std::span<const std::int64_t> sample) {
  return std::exp(log_sample_probability(population, sample));
}

BigRational sample_probability_exact(std::span<const std::int64_t> population,
                                     std::span<const std::int64_t> sample) {
  if (!is_admissible(population, sample, sum_of(population))) {
    throw ValidationError("population does not dominate the sample");
  }
  boost::multiprecision::cpp_int numerator = 1;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    numerator *= choose_exact(population[i], sample[i]);
  }
  return BigRational(numerator, choose_exact(sum_of(population), sum_of(sample)));
}

PopulationEstimate mle_estimate(std::span<const std::int64_t> sample, std::int64_t population) {
  check_sample(sample, population);
  const int m = static_cast<int>(sample.size());
  const std::int64_t free_units = population - sum_of(sample);
  std::vector<std::int64_t> taken(m, 0);

  // Best next factor: column maximising 1 + n_i / (x_i + 1); lowest index on ties.
  const auto best_column = [&]() {
    int best = 0;
    for (int i = 1; i < m; ++i) {
      if (compare_factors(sample[i], taken[i] + 1, sample[best], taken[best] + 1) > 0) best = i;
    }
    return best;
  };

  int last_column = -1;
  for (std::int64_t step = 0; step < free_units; ++step) {
    last_column = best_column();
    ++taken[last_column];
  }

  PopulationEstimate estimate;
  estimate.population = population;
  estimate.method = EstimateMethod::MaximumLikelihood;
  for (int i = 0; i < m; ++i) estimate.counts.push_back(sample[i] + taken[i]);

  if (last_column >= 0) {
    // Tie between the smallest selected factor and the largest unselected one
    // from a different column means another selection is equally likely.
    const std::int64_t last_j = taken[last_column];
    for (int i = 0; i < m; ++i) {
      if (i == last_column) continue;
      if (compare_factors(sample[i], taken[i] + 1, sample[last_column], last_j) == 0) {
        estimate.non_unique = true;
      }
    }
  }
  const auto ensemble_ok = admissible_count(free_units, m) <= kDefaultEnsembleCap;
  if (ensemble_ok) {
    estimate.wmae =
        wmae(estimate.counts, AdmissibleEnsemble(Counts(sample.begin(), sample.end()), population));
  }
  return estimate;
}

double mean_absolute_error(std::span<const std::int64_t> actual,
                           std::span<const std::int64_t> estimate) {
  if (actual.size() != estimate.size() || actual.empty()) {
    throw ValidationError("population vectors differ in length");
  }
  std::int64_t total = 0;
  for (std::size_t i = 0; i < actual.size(); ++i) total += std::llabs(actual[i] - estimate[i]);
  return static_cast<double>(total) / static_cast<double>(actual.size());
}

double mae_bound(int levels, std::int64_t population, std::int64_t sample_size) {
  return 2.0 * static_cast<double>(population - sample_size) / levels;
}

double wmae(std::span<const std::int64_t> estimate, const AdmissibleEnsemble& ensemble) {
  if (!is_admissible(estimate, ensemble.sample(), ensemble.population())) {
    throw ValidationError("estimate is not admissible for this ensemble");
  }
  const int m = ensemble.levels();
  double total = 0;
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    const auto row = ensemble.member(k);
    std::int64_t error = 0;
    for (int i = 0; i < m; ++i) error += std::llabs(row[i] - estimate[i]);
    total += ensemble.weights()[k] * static_cast<double>(error);
  }
  return total / m;
}

std::vector<double> wmae_profile(const AdmissibleEnsemble& ensemble) {
  const int m = ensemble.levels();
  const std::int64_t free_units = ensemble.population() - ensemble.sample_size();
  const auto width = static_cast<std::size_t>(free_units + 1);

  // cost[i][x] = sum_v marginal_i(v) |v - x| over extra units v, x in [0, free].
  std::vector<std::vector<double>> cost(m, std::vector<double>(width, 0.0));
  for (int i = 0; i < m; ++i) {
    std::vector<double> marginal(width, 0.0);
    for (std::size_t k = 0; k < ensemble.size(); ++k) {
      marginal[ensemble.member(k)[i] - ensemble.sample()[i]] += ensemble.weights()[k];
    }
    double at_zero = 0;
    for (std::size_t v = 0; v < width; ++v) at_zero += marginal[v] * static_cast<double>(v);
    const double mass = std::accumulate(marginal.begin(), marginal.end(), 0.0);
    cost[i][0] = at_zero;
    double below = 0;  // mass at v <= x
    for (std::size_t x = 0; x + 1 < width; ++x) {
      below += marginal[x];
      cost[i][x + 1] = cost[i][x] + below - (mass - below);
    }
  }

  std::vector<double> profile(ensemble.size());
  for (std::size_t k = 0; k < ensemble.size(); ++k) {
    const auto row = ensemble.member(k);
    double total = 0;
    for (int i = 0; i < m; ++i) total += cost[i][row[i] - ensemble.sample()[i]];
    profile[k] = total / m;
  }
  return profile;
}

PopulationEstimate minimize_wmae(const AdmissibleEnsemble& ensemble) {
  const auto profile = wmae_profile(ensemble);
  std::size_t best = 0;
  for (std::size_t k = 1; k < profile.size(); ++k) {
    if (profile[k] < profile[best]) best = k;
  }
  const double tolerance = 1e-12 * (1.0 + std::abs(profile[best]));
  std::size_t first = best;
  int ties = 0;
  for (std::size_t k = 0; k < profile.size(); ++k) {
    if (profile[k] - profile[best] <= tolerance) {
      if (ties == 0) first = k;
      ++ties;
    }
  }

  PopulationEstimate estimate;
  estimate.population = ensemble.population();
  estimate.method = EstimateMethod::WmaeMinimizer;
  estimate.counts = ensemble.member_counts(first);
  estimate.wmae = profile[first];
  estimate.non_unique = ties > 1;
  return estimate;
}

PopulationEstimate minimize_wmae(std::span<const std::int64_t> sample, std::int64_t population,
                                 std::uint64_t cap) {
  return minimize_wmae(admissible_populations(sample, population, cap));
}

double round_to_cents(const Rational& value) {
  const bool negative = value < 0;
  const Rational magnitude = negative ? -value : value;
  // floor(100 x + 1/2) with exact integers.
  const auto a = static_cast<__int128>(magnitude.numerator());
  const auto b = static_cast<__int128>(magnitude.denominator());
  const auto cents = static_cast<std::int64_t>((200 * a + b) / (2 * b));
  const double rounded = static_cast<double>(cents) / 100.0;
  return negative ? -rounded : rounded;
}

double round_to_cents(double value) {
  return std::round(value * 100.0) / 100.0;
}

PopulationProportions population_proportions(std::span<const std::int64_t> sample,
                                             std::int64_t population) {
  PopulationProportions out;
  out.estimate = minimize_wmae(sample, population);
  for (auto count : out.estimate.counts) {
    out.exact.emplace_back(count, population);
    out.proportions.push_back(round_to_cents(out.exact.back()));
  }
  out.error = out.estimate.wmae / static_cast<double>(population);
  out.rounded_error = round_to_cents(out.error);
  return out;
}

}  // namespace acbc
