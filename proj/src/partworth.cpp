#include "acbc/partworth.hpp"

#include <cmath>
#include <numeric>

namespace acbc {

namespace {

std::vector<int> offsets_of(const std::vector<int>& level_counts) {
  std::vector<int> offsets(level_counts.size(), 0);
  for (std::size_t a = 1; a < level_counts.size(); ++a) {
    offsets[a] = offsets[a - 1] + level_counts[a - 1];
  }
  return offsets;
}

int total_levels(const std::vector<int>& level_counts) {
  return std::accumulate(level_counts.begin(), level_counts.end(), 0);
}

// log(1 + exp(-z)) without overflow.
double log1p_exp_neg(double z) {
  return z > 0 ? std::log1p(std::exp(-z)) : -z + std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

double PartworthVector::utility(int attribute, Level level) const {
  return utilities(offsets_of(level_counts)[attribute] + level);
}

Eigen::VectorXd::ConstSegmentReturnType PartworthVector::block(int attribute) const {
  return utilities.segment(offsets_of(level_counts)[attribute], level_counts[attribute]);
}

double PartworthVector::total(const Profile& profile) const {
  const auto offsets = offsets_of(level_counts);
  double sum = 0;
  for (std::size_t a = 0; a < profile.levels.size(); ++a) {
    sum += utilities(offsets[a] + profile.levels[a]);
  }
  return sum;
}

PartworthVector zero_partworths(std::vector<int> level_counts) {
  const int size = total_levels(level_counts);
  return {std::move(level_counts), Eigen::VectorXd::Zero(size)};
}

Eigen::MatrixXd effects_coding(const std::vector<int>& level_counts) {
  const int rows = total_levels(level_counts);
  int cols = 0;
  for (int count : level_counts) cols += count - 1;
  Eigen::MatrixXd coding = Eigen::MatrixXd::Zero(rows, cols);
  int row = 0;
  int col = 0;
  for (int count : level_counts) {
    coding.block(row, col, count - 1, count - 1).setIdentity();
    coding.block(row + count - 1, col, 1, count - 1).setConstant(-1.0);
    row += count;
    col += count - 1;
  }
  return coding;
}

LogitObjective::LogitObjective(const std::vector<int>& level_counts,
                               std::span<const ChoiceTask> tasks, double ridge_)
    : coding(effects_coding(level_counts)), ridge(ridge_) {
  if (ridge < 0) throw ValidationError("ridge penalty must be non-negative");
  const auto offsets = offsets_of(level_counts);
  contrasts =
      Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(tasks.size()), total_levels(level_counts));
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const Profile& winner = tasks[t].winning();
    const Profile& loser = tasks[t].losing();
    if (winner.levels.size() != level_counts.size() || loser.levels.size() != level_counts.size()) {
      throw ValidationError("choice task does not match the design");
    }
    for (std::size_t a = 0; a < level_counts.size(); ++a) {
      contrasts(t, offsets[a] + winner.levels[a]) += 1.0;
      contrasts(t, offsets[a] + loser.levels[a]) -= 1.0;
    }
  }
}

double LogitObjective::value(const Eigen::VectorXd& reduced) const {
  const Eigen::VectorXd utilities = coding * reduced;
  const Eigen::VectorXd margin = contrasts * utilities;
  double loss = 0;
  for (Eigen::Index t = 0; t < margin.size(); ++t) loss += log1p_exp_neg(margin(t));
  return loss + 0.5 * ridge * utilities.squaredNorm();
}

Eigen::VectorXd LogitObjective::gradient(const Eigen::VectorXd& reduced) const {
  const Eigen::VectorXd utilities = coding * reduced;
  const Eigen::VectorXd margin = contrasts * utilities;
  const Eigen::VectorXd residual = margin.unaryExpr([](double z) { return -sigmoid(-z); });
  return coding.transpose() * (contrasts.transpose() * residual + ridge * utilities);
}

Eigen::MatrixXd LogitObjective::hessian(const Eigen::VectorXd& reduced) const {
  const Eigen::VectorXd margin = contrasts * (coding * reduced);
  const Eigen::VectorXd weight =
      margin.unaryExpr([](double z) { return sigmoid(z) * sigmoid(-z); });
  const Eigen::MatrixXd design = contrasts * coding;
  Eigen::MatrixXd h = design.transpose() * weight.asDiagonal() * design;
  h.noalias() += ridge * coding.transpose() * coding;
  return h;
}

PartworthVector estimate_partworths(const std::vector<int>& level_counts,
                                    std::span<const ChoiceTask> tasks,
                                    const NewtonOptions& options) {
  if (tasks.empty()) throw ValidationError("part-worth estimation needs at least one task");
  const LogitObjective objective(level_counts, tasks, options.ridge);
  const auto as_partworths = [&](const Eigen::VectorXd& reduced) {
    return PartworthVector{level_counts, objective.coding * reduced};
  };

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(objective.dimension());
  double f = objective.value(beta);
  Eigen::VectorXd g = objective.gradient(beta);
  for (int iteration = 0; iteration < options.max_iterations; ++iteration) {
    if (g.norm() < options.gradient_tolerance) return as_partworths(beta);

    const Eigen::MatrixXd h = objective.hessian(beta);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
    Eigen::VectorXd step;
    if (ldlt.info() == Eigen::Success && ldlt.isPositive()) step = -ldlt.solve(g);
    if (step.size() == 0 || !step.allFinite() || step.dot(g) >= 0) step = -g;

    // Armijo backtracking. Near the optimum f stops resolving the step, so a
    // full step that shrinks the gradient is also accepted.
    Eigen::VectorXd candidate = beta + step;
    double fc = objective.value(candidate);
    Eigen::VectorXd gc = objective.gradient(candidate);
    const double slope = step.dot(g);
    if (fc > f + 1e-4 * slope && !(gc.norm() < 0.5 * g.norm())) {
      double scale = 1.0;
      while (fc > f + 1e-4 * scale * slope && scale > 1e-12) {
        scale *= 0.5;
        candidate = beta + scale * step;
        fc = objective.value(candidate);
      }
      if (fc > f) break;
      gc = objective.gradient(candidate);
    }
    beta = std::move(candidate);
    f = fc;
    g = std::move(gc);
  }
  const double norm = g.norm();
  if (norm < options.gradient_tolerance) return as_partworths(beta);
  throw ConvergenceError(
      "part-worth estimation did not converge (gradient norm " + std::to_string(norm) + ")",
      as_partworths(beta), norm);
}

MiLevels mi_from_partworths(const PartworthVector& partworths) {
  MiLevels out;
  for (std::size_t a = 0; a < partworths.level_counts.size(); ++a) {
    const auto block = partworths.block(static_cast<int>(a));
    Eigen::Index best = 0;
    const double top = block.maxCoeff(&best);
    out.levels.push_back(static_cast<Level>(best));
    out.tied.push_back((block.array() == top).count() > 1);
  }
  return out;
}

double hit_rate(const PartworthVector& partworths, std::span<const ChoiceTask> tasks) {
  if (tasks.empty()) throw ValidationError("hit rate needs at least one task");
  double hits = 0;
  for (const auto& task : tasks) {
    const double winner = partworths.total(task.winning());
    const double loser = partworths.total(task.losing());
    if (winner > loser) {
      hits += 1.0;
    } else if (winner == loser) {
      hits += 0.5;
    }
  }
  return hits / static_cast<double>(tasks.size());
}

}  // namespace acbc
