#pragma once

// Brute-force reference implementations. Deliberately naive: they share no
// code paths with the library beyond the plain data types.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "acbc/core.hpp"

namespace oracle {

using boost::multiprecision::cpp_int;
using boost::multiprecision::cpp_rational;

// Every profile in the design, odometer order.
inline std::vector<acbc::Profile> all_profiles(const acbc::SurveyDesign& design) {
  std::vector<acbc::Profile> out;
  std::vector<int> levels(design.attribute_count(), 0);
  while (true) {
    out.push_back(acbc::Profile{levels});
    int a = design.attribute_count() - 1;
    while (a >= 0 && ++levels[a] == static_cast<int>(design.attributes[a].levels.size())) {
      levels[a] = 0;
      --a;
    }
    if (a < 0) break;
  }
  return out;
}

inline std::vector<acbc::Profile> distance_two(const acbc::Profile& byo,
                                               const acbc::SurveyDesign& design) {
  std::vector<acbc::Profile> out;
  for (const auto& p : all_profiles(design)) {
    int diff = 0;
    for (std::size_t a = 0; a < p.levels.size(); ++a) diff += p.levels[a] != byo.levels[a];
    if (diff == 2) out.push_back(p);
  }
  return out;
}

inline cpp_int binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  cpp_int num = 1;
  cpp_int den = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    num *= n - k + i;
    den *= i;
  }
  return num / den;
}

inline cpp_int factorial(std::int64_t n) {
  cpp_int out = 1;
  for (std::int64_t i = 2; i <= n; ++i) out *= i;
  return out;
}

// All (N_1..N_m) with N_i >= n_i and sum N, lexicographic.
inline std::vector<std::vector<std::int64_t>> admissible(const std::vector<std::int64_t>& sample,
                                                         std::int64_t population) {
  std::vector<std::vector<std::int64_t>> out;
  const std::int64_t n = std::accumulate(sample.begin(), sample.end(), std::int64_t{0});
  std::vector<std::int64_t> current(sample.size());
  std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t i, std::int64_t left) {
    if (i + 1 == sample.size()) {
      current[i] = sample[i] + left;
      out.push_back(current);
      return;
    }
    for (std::int64_t x = 0; x <= left; ++x) {
      current[i] = sample[i] + x;
      rec(i + 1, left - x);
    }
  };
  rec(0, population - n);
  return out;
}

// Numerator of the hypergeometric probability: prod C(N_i, n_i).
inline cpp_int likelihood_numerator(const std::vector<std::int64_t>& population,
                                    const std::vector<std::int64_t>& sample) {
  cpp_int out = 1;
  for (std::size_t i = 0; i < sample.size(); ++i) out *= binomial(population[i], sample[i]);
  return out;
}

inline cpp_rational hypergeometric(const std::vector<std::int64_t>& population,
                                   const std::vector<std::int64_t>& sample) {
  const auto big_n = std::accumulate(population.begin(), population.end(), std::int64_t{0});
  const auto n = std::accumulate(sample.begin(), sample.end(), std::int64_t{0});
  return cpp_rational(likelihood_numerator(population, sample), binomial(big_n, n));
}

// Indices of every likelihood maximiser.
inline std::vector<std::size_t> exhaustive_mle(const std::vector<std::int64_t>& sample,
                                               std::int64_t population) {
  const auto members = admissible(sample, population);
  cpp_int best = -1;
  std::vector<std::size_t> arg;
  for (std::size_t k = 0; k < members.size(); ++k) {
    const auto value = likelihood_numerator(members[k], sample);
    if (value > best) {
      best = value;
      arg = {k};
    } else if (value == best) {
      arg.push_back(k);
    }
  }
  return arg;
}

inline double mae(const std::vector<std::int64_t>& a, const std::vector<std::int64_t>& b) {
  double total = 0;
  for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(static_cast<double>(a[i] - b[i]));
  return total / static_cast<double>(a.size());
}

// Weighted MAE with exact rational weights, summed term by term.
inline double wmae(const std::vector<std::int64_t>& estimate,
                   const std::vector<std::int64_t>& sample, std::int64_t population) {
  const auto members = admissible(sample, population);
  cpp_int total = 0;
  std::vector<cpp_int> weights;
  for (const auto& member : members) {
    weights.push_back(likelihood_numerator(member, sample));
    total += weights.back();
  }
  cpp_rational acc = 0;
  for (std::size_t k = 0; k < members.size(); ++k) {
    std::int64_t abs_sum = 0;
    for (std::size_t i = 0; i < sample.size(); ++i) {
      abs_sum += std::abs(members[k][i] - estimate[i]);
    }
    acc += cpp_rational(weights[k] * abs_sum, total);
  }
  acc /= static_cast<std::int64_t>(sample.size());
  return static_cast<double>(acc);
}

// Central differences of f at x.
template <typename F, typename Vector>
Vector finite_difference_gradient(F&& f, const Vector& x, double h = 1e-6) {
  Vector g = x;
  for (int i = 0; i < x.size(); ++i) {
    Vector up = x;
    Vector down = x;
    up[i] += h;
    down[i] -= h;
    g[i] = (f(up) - f(down)) / (2 * h);
  }
  return g;
}

// Every per-attribute permutation set, as utilities rank 0..L-1 (higher is
// preferred). Odometer order over attributes, next_permutation within.
inline std::vector<std::vector<std::vector<int>>> all_rank_assignments(
    const std::vector<int>& level_counts) {
  std::vector<std::vector<std::vector<int>>> per_attribute;
  for (int count : level_counts) {
    std::vector<int> perm(count);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::vector<int>> perms;
    do {
      // perm lists levels least to most preferred; convert to rank per level.
      std::vector<int> rank(count);
      for (int pos = 0; pos < count; ++pos) rank[perm[pos]] = pos;
      perms.push_back(rank);
    } while (std::next_permutation(perm.begin(), perm.end()));
    per_attribute.push_back(perms);
  }
  std::vector<std::vector<std::vector<int>>> out;
  std::vector<std::size_t> index(level_counts.size(), 0);
  while (true) {
    std::vector<std::vector<int>> ranking;
    for (std::size_t a = 0; a < index.size(); ++a) ranking.push_back(per_attribute[a][index[a]]);
    out.push_back(ranking);
    int a = static_cast<int>(index.size()) - 1;
    while (a >= 0 && ++index[a] == per_attribute[a].size()) {
      index[a] = 0;
      --a;
    }
    if (a < 0) break;
  }
  return out;
}

// Ordinal elimination: a choice rules out a ranking when the ranking prefers
// the loser's level in every attribute where the two profiles differ.
inline bool ordinally_contradicts(const std::vector<std::vector<int>>& rank,
                                  const acbc::ChoiceTask& task) {
  const auto& w = task.winning();
  const auto& l = task.losing();
  bool any = false;
  for (std::size_t a = 0; a < w.levels.size(); ++a) {
    if (w.levels[a] == l.levels[a]) continue;
    any = true;
    if (rank[a][w.levels[a]] > rank[a][l.levels[a]]) return false;
  }
  return any;
}

}  // namespace oracle
