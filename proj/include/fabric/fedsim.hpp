#pragma once

#include <cstddef>
#include <vector>

namespace fabric {

// Linear regression model; theta = (weights..., bias) acting on augmented
// inputs (x..., 1).
struct LinearModel {
  std::vector<double> theta;

  double predict(const std::vector<double>& x) const;
};

struct Shard {
  std::vector<std::vector<double>> x;  // rows of features, equal width
  std::vector<double> y;

  void validate(std::size_t feature_dim) const;
};

// Full-batch mean-squared error and its gradient on one shard.
double mse(const LinearModel& m, const Shard& s);
std::vector<double> mse_gradient(const LinearModel& m, const Shard& s);

// One full-batch gradient step theta <- theta - eta * grad.
LinearModel local_step(const LinearModel& m, const Shard& s, double eta);

// Componentwise uniform average.  Sums accumulate in extended precision so
// averaging N identical models reproduces the model bit-for-bit.
LinearModel fed_avg(const std::vector<LinearModel>& models);

struct TrainResult {
  LinearModel model;
  std::vector<double> loss_trace;  // pooled MSE; index 0 is the initial loss
  bool diverged = false;           // loss exceeded 10x the initial value
};

// FedAvg rounds: every shard takes `local_steps` gradient steps from the
// shared model, then the models average uniformly.  Training stops early
// when divergence is detected.
TrainResult train(const std::vector<Shard>& shards, LinearModel init, std::size_t rounds,
                  std::size_t local_steps, double eta);

// Pooled MSE across all shards.
double global_mse(const LinearModel& m, const std::vector<Shard>& shards);

// 1 / L where L is the gradient Lipschitz constant of the pooled quadratic,
// 2/n * lambda_max of the augmented Gram matrix.
double max_stable_eta(const std::vector<Shard>& shards);

// Exact least-squares solution over the pooled data (normal equations).
LinearModel closed_form_least_squares(const std::vector<Shard>& shards);

// Exact two-sample Kolmogorov-Smirnov statistic sup |F_a - F_b| by a merged
// sorted sweep; O(n log n).
double ks_statistic(std::vector<double> a, std::vector<double> b);

struct DriftReport {
  double statistic = 0.0;
  double threshold = 0.0;
  bool drifted = false;
};

// Large-sample KS test at level alpha: threshold c(alpha) * sqrt((n+m)/(n*m))
// with c(alpha) = sqrt(-ln(alpha/2)/2).
DriftReport drift_detect(const std::vector<double>& a, const std::vector<double>& b,
                         double alpha);

}  // namespace fabric
