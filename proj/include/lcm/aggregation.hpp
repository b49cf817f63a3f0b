#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "lcm/lcm_core.hpp"
#include "lcm/types.hpp"

// Count-weighted covariance aggregation across tasks:
//   Sigma_agg = Sigma_old * n_old/(n_old+n_new) + Sigma_new * n_new/(n_old+n_new)
// and the refit that returns the aggregate to structured form.

namespace lcm {

// Convex combination of two symmetric matrices under the task weights.
[[nodiscard]] Eigen::MatrixXd aggregate_dense(const Eigen::MatrixXd& sigma_old,
                                              const Eigen::MatrixXd& sigma_new,
                                              const TaskWeights& w);

enum class AggregateMode { dense, sampled };

struct AggregateOptions {
  AggregateMode mode = AggregateMode::dense;
  std::size_t n_samples = 100000;  // sampled mode: total pooled draws
  std::uint64_t seed = 0;
  FitConfig fit;
};

// Refit of the aggregated covariance as structured parameters. dense mode
// materializes both covariances (C <= dense cap) and fits the convex
// combination directly; sampled mode pools centered draws from the two
// models in weight proportion and fits the decomposed objective. Both modes
// warm-start from p_old and set mu to the weight-convex combination of the
// component means.
[[nodiscard]] FitResult aggregate_refit(const LcmParams& p_old,
                                        const LcmParams& p_new,
                                        const TaskWeights& w,
                                        const AggregateOptions& opt = {});

}  // namespace lcm
