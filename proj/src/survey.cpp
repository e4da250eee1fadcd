#include "acbc/survey.hpp"

#include <algorithm>
#include <numeric>
#include <set>

namespace acbc {

std::vector<Profile> distance_two_variants(const Profile& byo, const SurveyDesign& design) {
  if (!is_valid_profile(byo, design)) throw ValidationError("BYO profile does not fit the design");
  std::vector<Profile> variants;
  const int k = design.attribute_count();
  for (int a = 0; a < k; ++a) {
    for (int b = a + 1; b < k; ++b) {
      for (Level la = 0; la < design.level_count(a); ++la) {
        if (la == byo.levels[a]) continue;
        for (Level lb = 0; lb < design.level_count(b); ++lb) {
          if (lb == byo.levels[b]) continue;
          Profile p = byo;
          p.levels[a] = la;
          p.levels[b] = lb;
          variants.push_back(std::move(p));
        }
      }
    }
  }
  return variants;
}

std::vector<Profile> generate_candidate_profiles(const Profile& byo, const SurveyDesign& design,
                                                 Rng& rng) {
  auto variants = distance_two_variants(byo, design);
  if (static_cast<int>(variants.size()) < kVariantCount) {
    std::string shape;
    for (int count : design.level_counts()) {
      shape += (shape.empty() ? "" : "x") + std::to_string(count);
    }
    throw ValidationError("design shape " + shape + " admits only " +
                          std::to_string(variants.size()) +
                          " profiles differing from the BYO in exactly 2 attributes; 24 needed");
  }
  std::shuffle(variants.begin(), variants.end(), rng);
  variants.resize(kVariantCount);

  std::vector<Profile> candidates;
  candidates.reserve(kVariantCount + 1);
  candidates.push_back(byo);
  candidates.insert(candidates.end(), variants.begin(), variants.end());
  return candidates;
}

std::vector<Profile> select_tournament_field(std::span<const Profile> candidates, Rng& rng,
                                             int field_size, bool force_byo) {
  if (static_cast<int>(candidates.size()) < field_size) {
    throw ValidationError("need at least " + std::to_string(field_size) +
                          " candidate profiles, got " + std::to_string(candidates.size()));
  }
  std::vector<std::size_t> order(candidates.size());
  std::iota(order.begin(), order.end(), 0);
  if (force_byo) {
    std::shuffle(order.begin() + 1, order.end(), rng);
  } else {
    std::shuffle(order.begin(), order.end(), rng);
  }
  order.resize(field_size);
  if (force_byo) std::shuffle(order.begin(), order.end(), rng);

  std::vector<Profile> field;
  field.reserve(field_size);
  for (std::size_t index : order) field.push_back(candidates[index]);
  return field;
}

Bracket::Bracket(std::vector<Profile> field) : field_(std::move(field)) {
  const auto size = field_.size();
  if (size < 2 || (size & (size - 1)) != 0) {
    throw ValidationError("bracket field size " + std::to_string(size) +
                          " is not a power of two >= 2");
  }
  std::set<Profile> seen;
  for (const auto& profile : field_) {
    if (!seen.insert(profile).second) {
      throw ValidationError("duplicate profile " + profile_string(profile) +
                            " in tournament field");
    }
  }
  entrants_ = field_;
}

std::optional<ChoiceTask> Bracket::pending() const {
  if (complete()) return std::nullopt;
  const auto index = 2 * current_.size();
  return ChoiceTask{entrants_[index], entrants_[index + 1], std::nullopt};
}

std::optional<Profile> Bracket::champion() const {
  if (!complete()) return std::nullopt;
  return entrants_.front();
}

int Bracket::completed_tasks() const {
  int count = static_cast<int>(current_.size());
  for (const auto& round : rounds_) count += static_cast<int>(round.size());
  return count;
}

std::vector<ChoiceTask> Bracket::tasks() const {
  std::vector<ChoiceTask> out;
  for (const auto& round : rounds_) out.insert(out.end(), round.begin(), round.end());
  out.insert(out.end(), current_.begin(), current_.end());
  return out;
}

std::vector<Side> Bracket::winners() const {
  std::vector<Side> out;
  for (const auto& task : tasks()) out.push_back(*task.winner);
  return out;
}

Bracket& Bracket::record(Side winner) {
  auto task = pending();
  if (!task) throw Error("bracket is complete; no pending choice task");
  task->winner = winner;
  current_.push_back(std::move(*task));
  if (2 * current_.size() == entrants_.size()) {
    std::vector<Profile> next;
    next.reserve(current_.size());
    for (const auto& played : current_) next.push_back(played.winning());
    rounds_.push_back(std::move(current_));
    current_.clear();
    entrants_ = std::move(next);
  }
  return *this;
}

Bracket init_bracket(std::vector<Profile> field) {
  return Bracket(std::move(field));
}

Bracket record_choice(Bracket bracket, Side winner) {
  bracket.record(winner);
  return bracket;
}

Bracket replay_bracket(std::vector<Profile> field, std::span<const Side> winners) {
  Bracket bracket(std::move(field));
  for (Side side : winners) bracket.record(side);
  return bracket;
}

}  // namespace acbc
