#include "acbc/paprika.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <ostream>

#include "acbc/io.hpp"
#include "acbc/linear_feasibility.hpp"

namespace acbc {

int Ranking::position(int attribute, Level level) const {
  const auto& perm = order.at(attribute);
  const auto it = std::find(perm.begin(), perm.end(), level);
  if (it == perm.end()) throw Error("level not present in ranking");
  return static_cast<int>(it - perm.begin());
}

std::string ranking_string(const Ranking& ranking) {
  std::string out;
  for (std::size_t a = 0; a < ranking.order.size(); ++a) {
    if (a > 0) out += ' ';
    for (Level level : ranking.order[a]) {
      out += static_cast<char>('A' + a);
      out += std::to_string(level + 1);
    }
  }
  return out;
}

std::string constraint_string(const Constraint& constraint) {
  std::string out;
  for (const auto& term : constraint.terms) {
    if (!out.empty()) out += ", ";
    const char name = static_cast<char>('A' + term.attribute);
    out += std::string(1, name) + std::to_string(term.winner + 1) + ">" + name +
           std::to_string(term.loser + 1);
  }
  return "{" + out + "}";
}

Constraint constraint_from_choice(const ChoiceTask& task) {
  const Profile& winner = task.winning();
  const Profile& loser = task.losing();
  if (winner.levels.size() != loser.levels.size()) {
    throw ValidationError("choice task profiles have different attribute counts");
  }
  Constraint constraint;
  for (std::size_t a = 0; a < winner.levels.size(); ++a) {
    if (winner.levels[a] != loser.levels[a]) {
      constraint.terms.push_back({static_cast<int>(a), winner.levels[a], loser.levels[a]});
    }
  }
  if (constraint.terms.empty()) {
    throw ValidationError("choice task compares identical profiles " + profile_string(winner));
  }
  return constraint;
}

std::vector<Constraint> constraints_from_tasks(std::span<const ChoiceTask> tasks) {
  std::vector<Constraint> out;
  out.reserve(tasks.size());
  for (const auto& task : tasks) out.push_back(constraint_from_choice(task));
  return out;
}

bool ranking_violates(const Ranking& ranking, const Constraint& constraint) {
  if (constraint.terms.empty()) return false;
  return std::all_of(constraint.terms.begin(), constraint.terms.end(), [&](const auto& term) {
    return ranking.position(term.attribute, term.winner) <
           ranking.position(term.attribute, term.loser);
  });
}

// ---------------------------------------------------------------------------
// RankingMask

RankingMask::RankingMask(std::size_t size, bool value)
    : size_(size), words_((size + 63) / 64, value ? ~std::uint64_t{0} : 0) {
  trim();
}

void RankingMask::trim() {
  if (size_ % 64 != 0 && !words_.empty()) {
    words_.back() &= (std::uint64_t{1} << (size_ % 64)) - 1;
  }
}

std::size_t RankingMask::count() const {
  std::size_t total = 0;
  for (auto word : words_) total += static_cast<std::size_t>(std::popcount(word));
  return total;
}

std::vector<std::uint32_t> RankingMask::ids() const {
  std::vector<std::uint32_t> out;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    auto word = words_[w];
    while (word != 0) {
      const int bit = std::countr_zero(word);
      out.push_back(static_cast<std::uint32_t>(w * 64 + bit));
      word &= word - 1;
    }
  }
  return out;
}

RankingMask& RankingMask::operator&=(const RankingMask& other) {
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
  return *this;
}

RankingMask& RankingMask::operator|=(const RankingMask& other) {
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
  return *this;
}

RankingMask& RankingMask::subtract(const RankingMask& other) {
  for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= ~other.words_[w];
  return *this;
}

bool RankingMask::subset_of(const RankingMask& other) const {
  for (std::size_t w = 0; w < words_.size(); ++w) {
    if ((words_[w] & ~other.words_[w]) != 0) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// RankingSpace

RankingSpace::RankingSpace(std::vector<int> level_counts, std::uint64_t cap)
    : level_counts_(std::move(level_counts)) {
  if (level_counts_.empty()) throw ValidationError("ranking space needs at least one attribute");
  long double total = 1;
  for (int count : level_counts_) {
    if (count < 1) throw ValidationError("attribute with no levels");
    long double factorial = 1;
    for (int i = 2; i <= count; ++i) factorial *= i;
    total *= factorial;
  }
  if (total > static_cast<long double>(cap)) {
    throw CapExceededError("ranking enumeration of " + std::to_string(static_cast<double>(total)) +
                           " exceeds the cap of " + std::to_string(cap) +
                           "; filter attribute by attribute from the constraints instead of "
                           "enumerating every ranking");
  }
  size_ = static_cast<std::size_t>(total);

  const int k = attribute_count();
  permutations_.resize(k);
  positions_.resize(k);
  for (int a = 0; a < k; ++a) {
    std::vector<Level> perm(level_counts_[a]);
    std::iota(perm.begin(), perm.end(), 0);
    do {
      std::vector<int> pos(perm.size());
      for (std::size_t p = 0; p < perm.size(); ++p) pos[perm[p]] = static_cast<int>(p);
      permutations_[a].push_back(perm);
      positions_[a].push_back(std::move(pos));
    } while (std::next_permutation(perm.begin(), perm.end()));
  }

  stride_.assign(k, 1);
  for (int a = k - 2; a >= 0; --a) stride_[a] = stride_[a + 1] * permutations_[a + 1].size();

  reversed_.resize(k);
  for (int a = 0; a < k; ++a) {
    const int levels = level_counts_[a];
    reversed_[a].assign(static_cast<std::size_t>(levels) * levels, RankingMask(size_, false));
  }
  for (std::size_t id = 0; id < size_; ++id) {
    for (int a = 0; a < k; ++a) {
      const auto& pos = positions_[a][permutation_index(id, a)];
      const int levels = level_counts_[a];
      for (Level w = 0; w < levels; ++w) {
        for (Level l = 0; l < levels; ++l) {
          if (pos[w] < pos[l]) reversed_[a][w * levels + l].set(id);
        }
      }
    }
  }
}

int RankingSpace::permutation_index(std::size_t id, int attribute) const {
  return static_cast<int>((id / stride_[attribute]) % permutations_[attribute].size());
}

Ranking RankingSpace::ranking(std::size_t id) const {
  Ranking ranking;
  for (int a = 0; a < attribute_count(); ++a) {
    ranking.order.push_back(permutations_[a][permutation_index(id, a)]);
  }
  return ranking;
}

int RankingSpace::position(std::size_t id, int attribute, Level level) const {
  return positions_[attribute][permutation_index(id, attribute)][level];
}

Level RankingSpace::top(std::size_t id, int attribute) const {
  return permutations_[attribute][permutation_index(id, attribute)].back();
}

const RankingMask& RankingSpace::reversed(int attribute, Level winner, Level loser) const {
  const int levels = level_counts_.at(attribute);
  if (winner < 0 || winner >= levels || loser < 0 || loser >= levels) {
    throw ValidationError("constraint level out of range");
  }
  return reversed_[attribute][winner * levels + loser];
}

RankingMask RankingSpace::violators(const Constraint& constraint) const {
  if (constraint.terms.empty()) return RankingMask(size_, false);
  RankingMask mask(size_, true);
  for (const auto& term : constraint.terms) {
    if (term.attribute < 0 || term.attribute >= attribute_count()) {
      throw ValidationError("constraint attribute out of range");
    }
    mask &= reversed(term.attribute, term.winner, term.loser);
  }
  return mask;
}

std::shared_ptr<const RankingSpace> make_ranking_space(const SurveyDesign& design,
                                                       std::uint64_t cap) {
  return std::make_shared<const RankingSpace>(design.level_counts(), cap);
}

std::vector<Ranking> enumerate_rankings(const SurveyDesign& design, std::uint64_t cap) {
  const RankingSpace space(design.level_counts(), cap);
  std::vector<Ranking> out;
  out.reserve(space.size());
  for (std::size_t id = 0; id < space.size(); ++id) out.push_back(space.ranking(id));
  return out;
}

// ---------------------------------------------------------------------------
// Feasibility

bool exactly_feasible(const Ranking& ranking, std::span<const Constraint> constraints) {
  std::vector<int> offset;
  int columns = 0;
  for (const auto& perm : ranking.order) {
    offset.push_back(columns);
    columns += static_cast<int>(perm.size());
  }
  int rows = static_cast<int>(constraints.size());
  for (const auto& perm : ranking.order) rows += static_cast<int>(perm.size()) - 1;

  Eigen::MatrixXd system = Eigen::MatrixXd::Zero(rows, columns);
  int row = 0;
  for (std::size_t a = 0; a < ranking.order.size(); ++a) {
    const auto& perm = ranking.order[a];
    for (std::size_t p = 0; p + 1 < perm.size(); ++p, ++row) {
      system(row, offset[a] + perm[p + 1]) += 1.0;
      system(row, offset[a] + perm[p]) -= 1.0;
    }
  }
  for (const auto& constraint : constraints) {
    for (const auto& term : constraint.terms) {
      system(row, offset[term.attribute] + term.winner) += 1.0;
      system(row, offset[term.attribute] + term.loser) -= 1.0;
    }
    ++row;
  }
  return strictly_feasible<double>(system);
}

FeasibleRankingSet feasible_set(std::shared_ptr<const RankingSpace> space,
                                std::span<const Constraint> constraints, FeasibilityMode mode) {
  FeasibleRankingSet frs;
  frs.members = space->all();
  for (const auto& constraint : constraints) frs.members.subtract(space->violators(constraint));
  if (mode == FeasibilityMode::Exact) {
    RankingMask exact(space->size(), false);
    for (auto id : frs.members.ids()) {
      if (exactly_feasible(space->ranking(id), constraints)) exact.set(id);
    }
    frs.members = std::move(exact);
  }
  frs.provenance.assign(constraints.begin(), constraints.end());
  frs.mode = mode;
  frs.space = std::move(space);
  return frs;
}

std::size_t ranking_id_for_utilities(const RankingSpace& space,
                                     const std::vector<std::vector<double>>& utilities) {
  std::size_t id = 0;
  std::size_t stride = space.size();
  for (int a = 0; a < space.attribute_count(); ++a) {
    const auto& u = utilities.at(a);
    std::vector<Level> order(u.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Level x, Level y) { return u[x] < u[y]; });
    const auto& perms = space.permutations(a);
    const auto it = std::find(perms.begin(), perms.end(), order);
    if (it == perms.end()) throw Error("utility vector does not match the design");
    stride /= perms.size();
    id += static_cast<std::size_t>(it - perms.begin()) * stride;
  }
  return id;
}

// ---------------------------------------------------------------------------
// MI extraction

LevelCounts rank_position_counts(const FeasibleRankingSet& frs, int from_top) {
  const auto& space = *frs.space;
  LevelCounts counts;
  for (int levels : space.level_counts()) counts.emplace_back(levels, 0);
  for (auto id : frs.ids()) {
    for (int a = 0; a < space.attribute_count(); ++a) {
      const auto& perm = space.permutations(a)[space.permutation_index(id, a)];
      const int index = static_cast<int>(perm.size()) - 1 - from_top;
      if (index < 0) continue;
      ++counts[a][perm[index]];
    }
  }
  return counts;
}

LevelCounts top_level_counts(const FeasibleRankingSet& frs) {
  return rank_position_counts(frs, 0);
}

LevelShares rank_position_shares(const FeasibleRankingSet& frs, int from_top) {
  if (frs.empty()) {
    throw EmptyFeasibleSetError("feasible ranking set is empty: inconsistent choice data");
  }
  const auto counts = rank_position_counts(frs, from_top);
  LevelShares shares;
  for (const auto& row : counts) {
    const auto modal = *std::max_element(row.begin(), row.end());
    const auto ties = std::count(row.begin(), row.end(), modal);
    std::vector<Rational> share(row.size(), Rational(0));
    for (std::size_t l = 0; l < row.size(); ++l) {
      if (row[l] == modal) share[l] = Rational(1, ties);
    }
    shares.push_back(std::move(share));
  }
  return shares;
}

LevelShares mi_counts(const FeasibleRankingSet& frs) {
  return rank_position_shares(frs, 0);
}

std::vector<std::vector<std::int64_t>> rounding_cases(std::span<const Rational> counts) {
  Rational total = 0;
  std::vector<std::int64_t> base;
  std::vector<Rational> fraction;
  for (const auto& count : counts) {
    total += count;
    const std::int64_t whole = count.numerator() / count.denominator();
    base.push_back(whole);
    fraction.push_back(count - whole);
  }
  if (total.denominator() != 1) throw Error("fractional counts do not sum to a whole number");
  std::int64_t remaining =
      total.numerator() - std::accumulate(base.begin(), base.end(), std::int64_t{0});

  // Group levels by descending fractional part.
  std::vector<std::size_t> order(counts.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return fraction[x] > fraction[y]; });

  std::vector<std::vector<std::int64_t>> cases{base};
  std::size_t start = 0;
  while (remaining > 0 && start < order.size()) {
    std::size_t end = start;
    while (end < order.size() && fraction[order[end]] == fraction[order[start]]) ++end;
    std::vector<std::size_t> group(order.begin() + start, order.begin() + end);
    std::sort(group.begin(), group.end());
    const auto group_size = static_cast<std::int64_t>(group.size());
    if (group_size <= remaining) {
      for (auto& c : cases) {
        for (auto level : group) ++c[level];
      }
      remaining -= group_size;
    } else {
      // Every way of choosing `remaining` levels from the tied group.
      std::vector<std::vector<std::int64_t>> split;
      std::vector<bool> pick(group.size(), false);
      std::fill(pick.begin(), pick.begin() + remaining, true);
      do {
        for (const auto& c : cases) {
          auto next = c;
          for (std::size_t g = 0; g < group.size(); ++g) {
            if (pick[g]) ++next[group[g]];
          }
          split.push_back(std::move(next));
        }
      } while (std::prev_permutation(pick.begin(), pick.end()));
      cases = std::move(split);
      remaining = 0;
    }
    start = end;
  }
  return cases;
}

MiCompilation compile_mi_distribution(const std::vector<int>& level_counts,
                                      std::span<const RespondentMi> respondents) {
  MiCompilation out;
  const int k = static_cast<int>(level_counts.size());
  for (int a = 0; a < k; ++a) {
    FrequencyDistribution dist;
    dist.attribute = a;
    dist.kind = DistributionKind::MostIdealPaprika;
    dist.counts.assign(level_counts[a], Rational(0));
    out.distributions.push_back(std::move(dist));
  }
  for (const auto& respondent : respondents) {
    if (!respondent.shares) {
      out.removed.push_back(respondent.id);
      continue;
    }
    if (static_cast<int>(respondent.shares->size()) != k) {
      throw Error("respondent '" + respondent.id + "' has MI shares for the wrong design");
    }
    ++out.n;
    for (int a = 0; a < k; ++a) {
      const auto& share = (*respondent.shares)[a];
      for (int l = 0; l < level_counts[a]; ++l) out.distributions[a].counts[l] += share.at(l);
    }
  }
  for (auto& dist : out.distributions) {
    dist.n = out.n;
    dist.check();
    out.rounding_cases.push_back(rounding_cases(dist.counts));
  }
  return out;
}

void write_feasible_csv(std::ostream& out, const FeasibleRankingSet& frs,
                        const SurveyDesign& design) {
  out << "ranking_id,ranking";
  for (const auto& attribute : design.attributes) out << ',' << csv_field("top_" + attribute.label);
  out << '\n';
  for (auto id : frs.ids()) {
    const auto ranking = frs.space->ranking(id);
    out << id + 1 << ',' << ranking_string(ranking);
    for (int a = 0; a < design.attribute_count(); ++a) {
      out << ',' << csv_field(design.attributes[a].levels[ranking.top(a)]);
    }
    out << '\n';
  }
}

}  // namespace acbc
