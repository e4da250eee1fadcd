#include <doctest.h>

#include <chrono>
#include <numeric>
#include <random>

#include "acbc/population.hpp"
#include "oracles.hpp"

using namespace acbc;

namespace {

Counts random_sample(std::mt19937_64& rng, int m, std::int64_t max_count) {
  Counts s(m);
  do {
    for (auto& c : s) c = static_cast<std::int64_t>(rng() % (max_count + 1));
  } while (std::accumulate(s.begin(), s.end(), std::int64_t{0}) == 0);
  return s;
}

std::int64_t sum(const Counts& c) {
  return std::accumulate(c.begin(), c.end(), std::int64_t{0});
}

}  // namespace

TEST_SUITE("population") {
  TEST_CASE("factor identity: prod_j f_ij = C(n_i + x, n_i)") {
    for (std::int64_t n = 0; n <= 30; ++n) {
      const FactorTable table({n, 1}, n + 31);
      Rational product = 1;
      for (std::int64_t x = 1; x <= 30; ++x) {
        product *= table.exact(0, x);
        const auto expected = oracle::binomial(n + x, n);
        REQUIRE(product.denominator() == 1);
        REQUIRE(oracle::cpp_int(product.numerator()) == expected);
      }
    }
  }

  TEST_CASE("factor table shape") {
    const FactorTable table({1, 2, 3}, 12);
    CHECK(table.depth() == 6);
    CHECK(table.exact(0, 1) == Rational(2));
    CHECK(table.exact(2, 2) == Rational(5, 2));
    CHECK(table(1, 1) == doctest::Approx(3.0));
    const FactorTable zero({0, 4}, 10);
    for (std::int64_t j = 1; j <= zero.depth(); ++j) {
      CHECK(zero.exact(0, j) == 1);
      if (j > 1) CHECK(zero.exact(1, j) < zero.exact(1, j - 1));
    }
  }

  TEST_CASE("ensemble size, order and ids") {
    const AdmissibleEnsemble e({9, 0, 3}, 49);
    CHECK(e.size() == 741);
    CHECK(admissible_count(37, 3) == 741);
    CHECK(e.member_counts(0) == Counts{9, 0, 40});
    CHECK(e.member_counts(740) == Counts{46, 0, 3});
    CHECK(e.id(e.index_of(Counts{34, 2, 13})) == 653);
    CHECK(e.id(e.index_of(Counts{37, 0, 12})) == 687);
    CHECK_THROWS(e.index_of(Counts{8, 1, 40}));

    const auto oracle_members = oracle::admissible({9, 0, 3}, 49);
    REQUIRE(oracle_members.size() == e.size());
    for (std::size_t k = 0; k < e.size(); ++k) REQUIRE(e.member_counts(k) == oracle_members[k]);

    const AdmissibleEnsemble single({2, 3}, 5);
    CHECK(single.size() == 1);
    CHECK(single.weights()[0] == doctest::Approx(1.0));
    CHECK_THROWS_AS(AdmissibleEnsemble({1, 1}, 1), ValidationError);
    CHECK_THROWS_AS(AdmissibleEnsemble({1, 0, 0}, 500, 1000), CapExceededError);
  }

  TEST_CASE("sum of likelihood numerators is C(N + m - 1, n + m - 1)") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 100; ++trial) {
      const int m = 2 + static_cast<int>(rng() % 3);
      const auto s = random_sample(rng, m, 6);
      const std::int64_t big_n = sum(s) + static_cast<std::int64_t>(rng() % 15);
      oracle::cpp_int total = 0;
      for (const auto& p : oracle::admissible(s, big_n))
        total += oracle::likelihood_numerator(p, s);
      CHECK(total == oracle::binomial(big_n + m - 1, sum(s) + m - 1));
    }
  }

  TEST_CASE("sample probabilities") {
    CHECK(sample_probability(Counts{2, 3}, Counts{2, 3}) == doctest::Approx(1.0));
    CHECK(sample_probability(Counts{1, 1}, Counts{1, 0}) == doctest::Approx(0.5));
    std::mt19937_64 rng(2);
    for (int trial = 0; trial < 200; ++trial) {
      const int m = 2 + static_cast<int>(rng() % 3);
      const auto s = random_sample(rng, m, 8);
      Counts p = s;
      for (auto& v : p) v += static_cast<std::int64_t>(rng() % 10);
      const auto exact = oracle::hypergeometric(p, s);
      CHECK(sample_probability_exact(p, s) == exact);
      CHECK(sample_probability(p, s) == doctest::Approx(static_cast<double>(exact)).epsilon(1e-12));
      CHECK(std::exp(log_sample_probability(p, s)) ==
            doctest::Approx(static_cast<double>(exact)).epsilon(1e-12));
    }
  }

  TEST_CASE("normalised weights sum to one") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
      const int m = 2 + static_cast<int>(rng() % 3);
      const auto s = random_sample(rng, m, 10);
      const AdmissibleEnsemble e(s, sum(s) + static_cast<std::int64_t>(rng() % 40));
      const double total = std::accumulate(e.weights().begin(), e.weights().end(), 0.0);
      CHECK(std::abs(total - 1.0) < 1e-12);
    }
    const AdmissibleEnsemble large({9, 0, 3}, 49);
    CHECK(large.exact_checked());
  }

  TEST_CASE("MLE golden values") {
    auto small = mle_estimate(Counts{1, 2, 3}, 12);
    CHECK(small.counts == Counts{2, 4, 6});
    CHECK(small.method == EstimateMethod::MaximumLikelihood);

    const auto fig4 = mle_estimate(Counts{9, 0, 3}, 49);
    CHECK(fig4.counts == Counts{37, 0, 12});

    CHECK(mle_estimate(Counts{3, 0, 4}, 7).counts == Counts{3, 0, 4});
    CHECK_THROWS_AS(mle_estimate(Counts{0, 0}, 5), ValidationError);
  }

  TEST_CASE("greedy MLE equals the exhaustive likelihood argmax") {
    std::mt19937_64 rng(4);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
      const int m = 2 + static_cast<int>(rng() % 3);
      const auto s = random_sample(rng, m, 7);
      const std::int64_t big_n = sum(s) + static_cast<std::int64_t>(rng() % 25);
      if (admissible_count(big_n - sum(s), m) > 100000) continue;
      const auto argmax = oracle::exhaustive_mle(s, big_n);
      const auto members = oracle::admissible(s, big_n);
      const auto greedy = mle_estimate(s, big_n);
      bool among = false;
      for (auto k : argmax) among = among || members[k] == greedy.counts;
      REQUIRE(among);
      if (argmax.size() > 1) CHECK(greedy.non_unique);
      if (argmax.size() == 1) CHECK_FALSE(greedy.non_unique);
      for (int i = 0; i < m; ++i) {
        if (s[i] == 0) CHECK(greedy.counts[i] == 0);
      }
      ++checked;
    }
    CHECK(checked > 250);
  }

  TEST_CASE("mean absolute error and its bound") {
    CHECK(mean_absolute_error(Counts{34, 2, 13}, Counts{37, 0, 12}) == doctest::Approx(2.0));
    CHECK(mean_absolute_error(Counts{5, 5}, Counts{5, 5}) == 0.0);
    CHECK(mae_bound(3, 49, 12) == doctest::Approx(74.0 / 3.0));
    CHECK(round_to_cents(mae_bound(3, 49, 12)) == doctest::Approx(24.67));
  }

  TEST_CASE("WMAE golden values") {
    const AdmissibleEnsemble e({9, 0, 3}, 49);
    CHECK(wmae(Counts{34, 2, 13}, e) == doctest::Approx(3.3459120945097403).epsilon(1e-12));
    CHECK(wmae(Counts{37, 0, 12}, e) == doctest::Approx(3.72696217698145).epsilon(1e-12));
    const auto best = minimize_wmae(e);
    CHECK(best.counts == Counts{34, 2, 13});
    CHECK(best.method == EstimateMethod::WmaeMinimizer);
    CHECK(best.wmae == doctest::Approx(3.3459120945097403).epsilon(1e-12));
    CHECK_FALSE(best.non_unique);

    const auto census = minimize_wmae(Counts{4, 0, 2}, 6);
    CHECK(census.counts == Counts{4, 0, 2});
    CHECK(census.wmae == 0.0);
  }

  TEST_CASE("WMAE profile agrees with the direct oracle") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
      const int m = 2 + static_cast<int>(rng() % 3);
      const auto s = random_sample(rng, m, 6);
      const std::int64_t big_n = sum(s) + static_cast<std::int64_t>(rng() % 12);
      const AdmissibleEnsemble e(s, big_n);
      const auto profile = wmae_profile(e);
      for (std::size_t k = 0; k < e.size(); ++k) {
        const auto member = e.member_counts(k);
        const double direct = oracle::wmae(member, s, big_n);
        REQUIRE(profile[k] == doctest::Approx(direct).epsilon(1e-10));
        REQUIRE(wmae(member, e) == doctest::Approx(direct).epsilon(1e-10));
      }
    }
  }

  TEST_CASE("the WMAE minimiser dominates the MLE and respects the bound") {
    std::mt19937_64 rng(6);
    for (int trial = 0; trial < 1000; ++trial) {
      const int m = 2 + static_cast<int>(rng() % 3);
      const auto s = random_sample(rng, m, 12);
      const std::int64_t big_n = sum(s) + static_cast<std::int64_t>(rng() % 40);
      const AdmissibleEnsemble e(s, big_n);
      const auto best = minimize_wmae(e);
      const auto mle = mle_estimate(s, big_n);
      REQUIRE(best.wmae <= wmae(mle.counts, e) + 1e-12);
      const double bound = mae_bound(m, big_n, sum(s));
      REQUIRE(best.wmae <= bound + 1e-12);
      REQUIRE(wmae(mle.counts, e) <= bound + 1e-12);
      for (int i = 0; i < m; ++i) REQUIRE(best.counts[i] >= s[i]);
      REQUIRE(sum(best.counts) == big_n);
    }
  }

  TEST_CASE("population proportions reproduce the relief tables") {
    struct Row {
      Counts sample;
      std::int64_t population;
      std::vector<double> proportions;
      double error;
    };
    const std::vector<Row> rows = {
        {{0, 6, 7}, 49, {.04, .45, .51}, .07}, {{0, 11, 2}, 49, {.04, .80, .16}, .06},
        {{6, 7, 0}, 49, {.45, .51, .04}, .07}, {{0, 12, 1}, 49, {.04, .86, .10}, .05},
        {{1, 2, 3}, 12, {.17, .33, .50}, .09}, {{3, 2, 1}, 12, {.50, .33, .17}, .09},
        {{5, 1, 0}, 12, {.75, .17, .08}, .08}, {{2, 3, 1}, 12, {.33, .50, .17}, .09},
    };
    for (const auto& row : rows) {
      const auto result = population_proportions(row.sample, row.population);
      for (std::size_t i = 0; i < row.proportions.size(); ++i) {
        CHECK(result.proportions[i] == doctest::Approx(row.proportions[i]));
      }
      CHECK(result.rounded_error == doctest::Approx(row.error));
    }
    const auto census = population_proportions(Counts{1, 2, 3}, 6);
    CHECK(census.proportions == std::vector<double>{.17, .33, .5});
    CHECK(census.error == 0.0);
  }

  TEST_CASE("rounding is half away from zero") {
    CHECK(round_to_cents(Rational(1, 8)) == doctest::Approx(0.13));
    CHECK(round_to_cents(Rational(1, 200)) == doctest::Approx(0.01));
    CHECK(round_to_cents(Rational(-1, 200)) == doctest::Approx(-0.01));
    CHECK(round_to_cents(Rational(2, 3)) == doctest::Approx(0.67));
  }

  TEST_CASE("WMAE search over 741 members is fast") {
    const auto start = std::chrono::steady_clock::now();
    const auto best = minimize_wmae(Counts{9, 0, 3}, 49);
    const auto seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    CHECK(best.counts == Counts{34, 2, 13});
    CHECK(seconds < 5.0);
  }
}
