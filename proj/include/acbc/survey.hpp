#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

#include "acbc/core.hpp"

namespace acbc {

using Rng = std::mt19937_64;

inline constexpr int kVariantCount = 24;
inline constexpr int kFieldSize = 16;

// Every profile at Hamming distance exactly 2 from `byo`, ordered by attribute
// pair and then by level.
std::vector<Profile> distance_two_variants(const Profile& byo, const SurveyDesign& design);

// The BYO followed by 24 distinct variants that each change exactly two of its
// levels, in random order. For 4 x 3 designs the variants are the complete set
// of distance-2 profiles; larger shapes sample 24 of them uniformly. Shapes
// with fewer than 24 distance-2 profiles are rejected.
std::vector<Profile> generate_candidate_profiles(const Profile& byo, const SurveyDesign& design,
                                                 Rng& rng);

// Uniform random subset of `field_size` candidates in random bracket order.
// With `force_byo` the first candidate (the BYO) always gets a slot.
std::vector<Profile> select_tournament_field(std::span<const Profile> candidates, Rng& rng,
                                             int field_size = kFieldSize, bool force_byo = false);

// Single-elimination bracket. Round 1 pairs the field in order (0 v 1, 2 v 3,
// ...); each later round pairs the previous round's winners in order.
class Bracket {
 public:
  // Field size must be a power of two >= 2 with no duplicate profiles.
  explicit Bracket(std::vector<Profile> field);

  const std::vector<Profile>& field() const { return field_; }
  const std::vector<std::vector<ChoiceTask>>& rounds() const { return rounds_; }
  // Entrants of the round currently being played.
  const std::vector<Profile>& entrants() const { return entrants_; }

  std::optional<ChoiceTask> pending() const;
  bool complete() const { return entrants_.size() == 1; }
  std::optional<Profile> champion() const;

  int total_tasks() const { return static_cast<int>(field_.size()) - 1; }
  int completed_tasks() const;
  // 1-based round number of the pending task (rounds().size() + 1 when complete).
  int current_round() const { return static_cast<int>(rounds_.size()) + 1; }

  // All answered tasks in play order.
  std::vector<ChoiceTask> tasks() const;
  std::vector<Side> winners() const;

  // Throws Error when the bracket is already complete.
  Bracket& record(Side winner);

  friend bool operator==(const Bracket&, const Bracket&) = default;

 private:
  std::vector<Profile> field_;
  std::vector<std::vector<ChoiceTask>> rounds_;
  std::vector<Profile> entrants_;
  std::vector<ChoiceTask> current_;
};

Bracket init_bracket(std::vector<Profile> field);
Bracket record_choice(Bracket bracket, Side winner);
// Rebuilds a bracket from its field and the ordered winners.
Bracket replay_bracket(std::vector<Profile> field, std::span<const Side> winners);

}  // namespace acbc
