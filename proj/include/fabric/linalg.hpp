#pragma once

#include <cstddef>
#include <vector>

#include "fabric/rng.hpp"

namespace fabric {

// Minimal dense matrix helpers for the small symmetric problems that arise in
// spectral embedding and covariance projection.  Row-major.
using DenseMatrix = std::vector<std::vector<double>>;

double dot(const std::vector<double>& a, const std::vector<double>& b);
double norm2(const std::vector<double>& a);
std::vector<double> mat_vec(const DenseMatrix& m, const std::vector<double>& x);

struct EigenPair {
  double value = 0.0;
  std::vector<double> vector;
};

// Power iteration with deflation on a symmetric matrix.  Returns the top-k
// eigenpairs ordered by |eigenvalue| descending.  Start vectors are drawn from
// the seeded generator so results are reproducible.  Iteration stops when the
// vector moves less than `tol` between rounds or after `max_iters` rounds.
std::vector<EigenPair> top_eigenpairs(const DenseMatrix& m, std::size_t k,
                                      std::uint64_t seed, double tol = 1e-9,
                                      std::size_t max_iters = 10000);

struct KMeansResult {
  std::vector<std::size_t> labels;       // point -> cluster
  std::vector<std::vector<double>> centers;
  double inertia = 0.0;
};

// Seeded Lloyd k-means with `restarts` independent seeded initialisations;
// the restart with the lowest inertia wins (first such restart on ties).
KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                    std::uint64_t seed, std::size_t restarts = 20,
                    std::size_t max_iters = 100);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
};

// Ordinary least-squares line fit of y against x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace fabric
