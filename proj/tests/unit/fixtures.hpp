#pragma once

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "acbc/survey.hpp"

namespace fixture {

using namespace acbc;

// Per-attribute BYO tallies of the two relief populations.
inline const std::vector<std::vector<int>> kFboMt = {{0, 6, 7}, {0, 11, 2}, {6, 7, 0}, {0, 12, 1}};
inline const std::vector<std::vector<int>> kNfboMt = {{1, 2, 3}, {3, 2, 1}, {5, 1, 0}, {2, 3, 1}};

// Respondent i gets the i-th entry of each attribute's expanded tally.
inline std::vector<Profile> byo_profiles(const std::vector<std::vector<int>>& tallies) {
  std::vector<std::vector<Level>> columns;
  for (const auto& counts : tallies) {
    std::vector<Level> column;
    for (int level = 0; level < static_cast<int>(counts.size()); ++level) {
      column.insert(column.end(), counts[level], level);
    }
    columns.push_back(column);
  }
  std::vector<Profile> out(columns[0].size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    for (const auto& column : columns) out[i].levels.push_back(column[i]);
  }
  return out;
}

inline double total(const std::vector<std::vector<double>>& u, const Profile& p) {
  double s = 0;
  for (std::size_t a = 0; a < p.levels.size(); ++a) s += u[a][p.levels[a]];
  return s;
}

// A consistent respondent: random continuous utilities decide every task.
inline RespondentRecord consistent_respondent(const std::string& id, const std::string& tag,
                                              const Profile& byo, const SurveyDesign& design,
                                              std::uint64_t seed) {
  Rng rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<std::vector<double>> u(design.attribute_count());
  for (int a = 0; a < design.attribute_count(); ++a) {
    for (int l = 0; l < design.level_count(a); ++l) u[a].push_back(uniform(rng));
  }
  const auto candidates = generate_candidate_profiles(byo, design, rng);
  Bracket bracket(select_tournament_field(candidates, rng, design.field_size()));
  while (!bracket.complete()) {
    const auto task = *bracket.pending();
    bracket.record(total(u, task.left) > total(u, task.right) ? Side::Left : Side::Right);
  }
  return {id, tag, byo, bracket.field(), bracket.tasks(), seed};
}

// A respondent whose first two choices contradict each other on attribute A:
// (A1, b') beats (A3, b') and then (A3, b'') beats (A1, b''). Needs byo A = A2.
inline RespondentRecord inconsistent_respondent(const std::string& id, const std::string& tag,
                                                const Profile& byo, const SurveyDesign& design,
                                                std::uint64_t seed) {
  auto variant = [&](Level a, Level b) {
    Profile p = byo;
    p.levels[0] = a;
    p.levels[1] = b;
    return p;
  };
  const Level b1 = (byo.levels[1] + 1) % 3;
  const Level b2 = (byo.levels[1] + 2) % 3;
  std::vector<Profile> field = {variant(0, b1), variant(2, b1), variant(0, b2), variant(2, b2)};
  Rng rng(seed);
  for (const auto& p : generate_candidate_profiles(byo, design, rng)) {
    if (field.size() == 16) break;
    if (std::find(field.begin(), field.end(), p) == field.end()) field.push_back(p);
  }
  Bracket bracket(field);
  bracket.record(Side::Left);
  bracket.record(Side::Right);
  while (!bracket.complete()) bracket.record(Side::Left);
  return {id, tag, byo, bracket.field(), bracket.tasks(), seed};
}

// 13 FBO respondents (one inconsistent) followed by 6 NFBO respondents.
inline std::vector<RespondentRecord> relief_study() {
  const auto design = relief_design();
  std::vector<RespondentRecord> records;
  const auto fbo = byo_profiles(kFboMt);
  for (std::size_t i = 0; i < fbo.size(); ++i) {
    const auto id = "fbo-" + std::to_string(i + 1);
    if (i == 0) {
      records.push_back(inconsistent_respondent(id, "FBO", fbo[i], design, 100 + i));
    } else {
      records.push_back(consistent_respondent(id, "FBO", fbo[i], design, 100 + i));
    }
  }
  const auto nfbo = byo_profiles(kNfboMt);
  for (std::size_t i = 0; i < nfbo.size(); ++i) {
    records.push_back(
        consistent_respondent("nfbo-" + std::to_string(i + 1), "NFBO", nfbo[i], design, 200 + i));
  }
  return records;
}

}  // namespace fixture
