#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "acbc/core.hpp"

namespace acbc {

inline constexpr double kDefaultRidge = 0.1;

// Utilities for every level of every attribute, stacked attribute by
// attribute. Effects coded: each attribute's block sums to zero.
struct PartworthVector {
  std::vector<int> level_counts;
  Eigen::VectorXd utilities;

  double utility(int attribute, Level level) const;
  Eigen::VectorXd::ConstSegmentReturnType block(int attribute) const;
  double total(const Profile& profile) const;
};

PartworthVector zero_partworths(std::vector<int> level_counts);

// Full-utility effects-coding map: utilities = E * reduced, where each
// attribute with L levels contributes L - 1 free coordinates and the last
// level is minus their sum.
Eigen::MatrixXd effects_coding(const std::vector<int>& level_counts);

// Penalised pairwise-logit objective in reduced coordinates:
//   -sum log sigma(+-(x_left - x_right)' E beta) + ridge/2 * |E beta|^2
struct LogitObjective {
  Eigen::MatrixXd contrasts;  // one row per task: onehot(winner) - onehot(loser)
  Eigen::MatrixXd coding;     // effects coding E
  double ridge = kDefaultRidge;

  LogitObjective(const std::vector<int>& level_counts, std::span<const ChoiceTask> tasks,
                 double ridge);

  double value(const Eigen::VectorXd& reduced) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& reduced) const;
  Eigen::MatrixXd hessian(const Eigen::VectorXd& reduced) const;
  Eigen::Index dimension() const { return coding.cols(); }
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, PartworthVector last, double gradient_norm)
      : Error(what), last_iterate(std::move(last)), gradient_norm(gradient_norm) {}

  PartworthVector last_iterate;
  double gradient_norm;
};

struct NewtonOptions {
  double ridge = kDefaultRidge;
  double gradient_tolerance = 1e-8;
  int max_iterations = 500;
};

// Deterministic penalised maximum likelihood. Throws ConvergenceError when the
// gradient norm is still above tolerance after the iteration cap.
PartworthVector estimate_partworths(const std::vector<int>& level_counts,
                                    std::span<const ChoiceTask> tasks,
                                    const NewtonOptions& options = {});

struct MiLevels {
  std::vector<Level> levels;
  std::vector<bool> tied;  // argmax was not unique; lowest index reported
};

MiLevels mi_from_partworths(const PartworthVector& partworths);

// Share of tasks whose higher-utility profile was the recorded winner; exact
// utility ties score one half.
double hit_rate(const PartworthVector& partworths, std::span<const ChoiceTask> tasks);

}  // namespace acbc
