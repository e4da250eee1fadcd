#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "acbc/core.hpp"

namespace acbc {

inline constexpr std::uint64_t kDefaultRankingCap = 10'000'000;

// One permutation of level indices per attribute, least preferred first.
struct Ranking {
  std::vector<std::vector<Level>> order;

  Level top(int attribute) const { return order[attribute].back(); }
  // 0 = least preferred.
  int position(int attribute, Level level) const;
  friend bool operator==(const Ranking&, const Ranking&) = default;
};

// Least to most preferred per attribute, e.g. "A2A1A3 B2B1".
std::string ranking_string(const Ranking& ranking);

// Winner's level beat loser's level on one attribute after shared levels cancel.
struct ConstraintTerm {
  int attribute = 0;
  Level winner = 0;
  Level loser = 0;
  friend bool operator==(const ConstraintTerm&, const ConstraintTerm&) = default;
};

// sum over terms of u(winner) > sum over terms of u(loser).
struct Constraint {
  std::vector<ConstraintTerm> terms;
  friend bool operator==(const Constraint&, const Constraint&) = default;
};

std::string constraint_string(const Constraint& constraint);

Constraint constraint_from_choice(const ChoiceTask& task);
std::vector<Constraint> constraints_from_tasks(std::span<const ChoiceTask> tasks);

// Ordinal elimination: true iff the ranking puts every term's winning level
// strictly below its losing level. Mixed-direction rankings survive.
bool ranking_violates(const Ranking& ranking, const Constraint& constraint);

// Fixed-width bitset over ranking ids.
class RankingMask {
 public:
  RankingMask() = default;
  RankingMask(std::size_t size, bool value);

  std::size_t size() const { return size_; }
  bool test(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  void set(std::size_t i) { words_[i / 64] |= std::uint64_t{1} << (i % 64); }
  std::size_t count() const;
  bool none() const { return count() == 0; }
  std::vector<std::uint32_t> ids() const;

  RankingMask& operator&=(const RankingMask& other);
  RankingMask& operator|=(const RankingMask& other);
  // Clears every bit that is set in `other`.
  RankingMask& subtract(const RankingMask& other);
  bool subset_of(const RankingMask& other) const;
  friend bool operator==(const RankingMask&, const RankingMask&) = default;

 private:
  void trim();
  std::size_t size_ = 0;
  std::vector<std::uint64_t> words_;
};

// Every ranking for a design, indexed in mixed radix with the first attribute
// most significant and each attribute's permutations in lexicographic order.
// Built once per design and shared read-only.
class RankingSpace {
 public:
  explicit RankingSpace(std::vector<int> level_counts, std::uint64_t cap = kDefaultRankingCap);

  const std::vector<int>& level_counts() const { return level_counts_; }
  int attribute_count() const { return static_cast<int>(level_counts_.size()); }
  std::size_t size() const { return size_; }

  Ranking ranking(std::size_t id) const;
  // Index into permutations(attribute) used by ranking `id`.
  int permutation_index(std::size_t id, int attribute) const;
  const std::vector<std::vector<Level>>& permutations(int attribute) const {
    return permutations_[attribute];
  }
  // 0-based position (least preferred = 0) of `level` in ranking `id`.
  int position(std::size_t id, int attribute, Level level) const;
  Level top(std::size_t id, int attribute) const;

  // Rankings placing `winner` strictly below `loser` on `attribute`.
  const RankingMask& reversed(int attribute, Level winner, Level loser) const;
  RankingMask violators(const Constraint& constraint) const;
  RankingMask all() const { return RankingMask(size_, true); }

 private:
  std::vector<int> level_counts_;
  std::size_t size_ = 1;
  std::vector<std::size_t> stride_;
  std::vector<std::vector<std::vector<Level>>> permutations_;
  // positions_[a][perm][level]
  std::vector<std::vector<std::vector<int>>> positions_;
  // reversed_[a][winner * L + loser]
  std::vector<std::vector<RankingMask>> reversed_;
};

std::shared_ptr<const RankingSpace> make_ranking_space(const SurveyDesign& design,
                                                       std::uint64_t cap = kDefaultRankingCap);

// Full enumeration as explicit rankings.
std::vector<Ranking> enumerate_rankings(const SurveyDesign& design,
                                        std::uint64_t cap = kDefaultRankingCap);

enum class FeasibilityMode {
  Ordinal,  // default: eliminate only when every differing term is reversed
  Exact,    // additionally require real utilities consistent with the ranking and all constraints
};

struct FeasibleRankingSet {
  std::shared_ptr<const RankingSpace> space;
  RankingMask members;
  std::vector<Constraint> provenance;
  FeasibilityMode mode = FeasibilityMode::Ordinal;

  std::size_t size() const { return members.count(); }
  bool empty() const { return members.none(); }
  bool contains(std::size_t id) const { return members.test(id); }
  std::vector<std::uint32_t> ids() const { return members.ids(); }
};

FeasibleRankingSet feasible_set(std::shared_ptr<const RankingSpace> space,
                                std::span<const Constraint> constraints,
                                FeasibilityMode mode = FeasibilityMode::Ordinal);

// Does some utility vector order each attribute as `ranking` does and satisfy
// every constraint strictly?
bool exactly_feasible(const Ranking& ranking, std::span<const Constraint> constraints);

// Id of the ranking that orders levels by the given utilities (ascending).
// Utilities must be distinct within each attribute.
std::size_t ranking_id_for_utilities(const RankingSpace& space,
                                     const std::vector<std::vector<double>>& utilities);

// per attribute, per level
using LevelShares = std::vector<std::vector<Rational>>;
using LevelCounts = std::vector<std::vector<std::int64_t>>;

// How often each level occupies `from_top` (0 = most preferred) per attribute.
LevelCounts rank_position_counts(const FeasibleRankingSet& frs, int from_top);
LevelCounts top_level_counts(const FeasibleRankingSet& frs);

class EmptyFeasibleSetError : public Error {
 public:
  using Error::Error;
};

// Modal levels at a rank position share one unit equally: 1, 1/2 each, 1/3
// each, ... Throws EmptyFeasibleSetError on an empty set.
LevelShares rank_position_shares(const FeasibleRankingSet& frs, int from_top);
LevelShares mi_counts(const FeasibleRankingSet& frs);

struct RespondentMi {
  std::string id;
  std::optional<LevelShares> shares;  // nullopt: empty feasible set
};

struct MiCompilation {
  std::vector<FrequencyDistribution> distributions;  // exact fractional tallies
  // Per attribute: every whole-number rounding consistent with the tie rules.
  // One case unless tied fractional parts force a split.
  std::vector<std::vector<std::vector<std::int64_t>>> rounding_cases;
  std::vector<std::string> removed;
  std::int64_t n = 0;
};

MiCompilation compile_mi_distribution(const std::vector<int>& level_counts,
                                      std::span<const RespondentMi> respondents);

// Largest-remainder rounding to whole numbers preserving the total. Equal
// fractional parts competing for the last units split into separate cases.
std::vector<std::vector<std::int64_t>> rounding_cases(std::span<const Rational> counts);

// Audit CSV: ranking_id,ranking,top_<attr>... one row per feasible ranking.
void write_feasible_csv(std::ostream& out, const FeasibleRankingSet& frs,
                        const SurveyDesign& design);

}  // namespace acbc
