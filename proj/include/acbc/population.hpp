#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "acbc/core.hpp"

namespace acbc {

using Counts = std::vector<std::int64_t>;
using BigRational = boost::multiprecision::cpp_rational;

inline constexpr std::uint64_t kDefaultEnsembleCap = 10'000'000;
// Ensembles with N at or below this are cross-checked against exact arithmetic.
inline constexpr std::int64_t kExactCheckPopulation = 60;

// f_ij = 1 + n_i / j for j = 1 .. N - n. Row j of the table is depth j.
class FactorTable {
 public:
  FactorTable(Counts sample, std::int64_t population);

  const Counts& sample() const { return sample_; }
  std::int64_t depth() const { return depth_; }
  int columns() const { return static_cast<int>(sample_.size()); }

  Rational exact(int column, std::int64_t j) const;
  double operator()(int column, std::int64_t j) const;

 private:
  Counts sample_;
  std::int64_t depth_;
};

// Number of admissible populations C(N - n + m - 1, m - 1).
std::uint64_t admissible_count(std::int64_t free_units, int levels);

// Every population P with P_i >= n_i and sum N, in lexicographic order of
// (P_1, P_2, ...). IDs are 1-based positions in that order.
class AdmissibleEnsemble {
 public:
  AdmissibleEnsemble(Counts sample, std::int64_t population,
                     std::uint64_t cap = kDefaultEnsembleCap);

  std::size_t size() const { return weights_.size(); }
  int levels() const { return static_cast<int>(sample_.size()); }
  const Counts& sample() const { return sample_; }
  std::int64_t population() const { return population_; }
  std::int64_t sample_size() const { return sample_size_; }

  std::span<const std::int32_t> member(std::size_t index) const {
    return {flat_.data() + index * sample_.size(), sample_.size()};
  }
  Counts member_counts(std::size_t index) const;
  std::size_t id(std::size_t index) const { return index + 1; }
  // 0-based index of `population` in the enumeration; throws if inadmissible.
  std::size_t index_of(std::span<const std::int64_t> population) const;

  // log p_k: log of the hypergeometric probability of the sample under P_k.
  const std::vector<double>& log_weights() const { return log_weights_; }
  // p_k / p
  const std::vector<double>& weights() const { return weights_; }
  bool exact_checked() const { return exact_checked_; }

 private:
  Counts sample_;
  std::int64_t population_;
  std::int64_t sample_size_;
  std::vector<std::int32_t> flat_;
  std::vector<double> log_weights_;
  std::vector<double> weights_;
  bool exact_checked_ = false;
};

AdmissibleEnsemble admissible_populations(std::span<const std::int64_t> sample,
                                          std::int64_t population,
                                          std::uint64_t cap = kDefaultEnsembleCap);

bool is_admissible(std::span<const std::int64_t> population, std::span<const std::int64_t> sample,
                   std::int64_t total);

// prod C(N_i, n_i) / C(N, n)
double log_sample_probability(std::span<const std::int64_t> population,
                              std::span<const std::int64_t> sample);
double sample_probability(std::span<const std::int64_t> population,
                          std::span<const std::int64_t> sample);
BigRational sample_probability_exact(std::span<const std::int64_t> population,
                                     std::span<const std::int64_t> sample);

// Greedy selection of the N - n largest factors. non_unique is set when the
// last selected factor ties the best unselected one from another column.
PopulationEstimate mle_estimate(std::span<const std::int64_t> sample, std::int64_t population);

// (1/m) sum |N_i - Nhat_i|
double mean_absolute_error(std::span<const std::int64_t> actual,
                           std::span<const std::int64_t> estimate);
// (2/m)(N - n)
double mae_bound(int levels, std::int64_t population, std::int64_t sample_size);

// sum_k (p_k / p) E(P_k, Phat), evaluated directly over the ensemble.
double wmae(std::span<const std::int64_t> estimate, const AdmissibleEnsemble& ensemble);

// WMAE of every admissible estimator, indexed like the ensemble. Uses the
// per-level marginal decomposition, so it is linear in ensemble size.
std::vector<double> wmae_profile(const AdmissibleEnsemble& ensemble);

// Exhaustive argmin of WMAE; ties go to the lowest ID with non_unique set.
PopulationEstimate minimize_wmae(std::span<const std::int64_t> sample, std::int64_t population,
                                 std::uint64_t cap = kDefaultEnsembleCap);
PopulationEstimate minimize_wmae(const AdmissibleEnsemble& ensemble);

struct PopulationProportions {
  PopulationEstimate estimate;
  std::vector<Rational> exact;      // Nhat_i / N
  std::vector<double> proportions;  // rounded to 2 decimals
  double error = 0.0;               // WMAE / N
  double rounded_error = 0.0;       // rounded to 2 decimals
};

PopulationProportions population_proportions(std::span<const std::int64_t> sample,
                                             std::int64_t population);

// Half away from zero at two decimals, computed exactly for rationals.
double round_to_cents(const Rational& value);
double round_to_cents(double value);

}  // namespace acbc
