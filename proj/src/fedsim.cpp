#include "fabric/fedsim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fabric/linalg.hpp"

namespace fabric {

double LinearModel::predict(const std::vector<double>& x) const {
  if (x.size() + 1 != theta.size())
    throw std::invalid_argument("feature width does not match the model");
  double p = theta.back();
  for (std::size_t i = 0; i < x.size(); ++i) p += theta[i] * x[i];
  return p;
}

void Shard::validate(std::size_t feature_dim) const {
  if (x.empty() || x.size() != y.size())
    throw std::invalid_argument("shard needs matching nonempty features and targets");
  for (const auto& row : x)
    if (row.size() != feature_dim)
      throw std::invalid_argument("shard feature width mismatch");
}

double mse(const LinearModel& m, const Shard& s) {
  s.validate(m.theta.size() - 1);
  double total = 0.0;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    double e = m.predict(s.x[i]) - s.y[i];
    total += e * e;
  }
  return total / static_cast<double>(s.x.size());
}

std::vector<double> mse_gradient(const LinearModel& m, const Shard& s) {
  s.validate(m.theta.size() - 1);
  std::vector<double> g(m.theta.size(), 0.0);
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    double e = m.predict(s.x[i]) - s.y[i];
    for (std::size_t j = 0; j + 1 < m.theta.size(); ++j) g[j] += 2.0 * e * s.x[i][j];
    g.back() += 2.0 * e;
  }
  for (auto& v : g) v /= static_cast<double>(s.x.size());
  return g;
}

LinearModel local_step(const LinearModel& m, const Shard& s, double eta) {
  if (eta <= 0.0) throw std::invalid_argument("learning rate must be positive");
  std::vector<double> g = mse_gradient(m, s);
  LinearModel out = m;
  for (std::size_t i = 0; i < out.theta.size(); ++i) out.theta[i] -= eta * g[i];
  return out;
}

LinearModel fed_avg(const std::vector<LinearModel>& models) {
  if (models.empty()) throw std::invalid_argument("fed_avg needs at least one model");
  const std::size_t dim = models[0].theta.size();
  for (const auto& m : models)
    if (m.theta.size() != dim) throw std::invalid_argument("fed_avg models differ in dimension");
  LinearModel out;
  out.theta.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    long double acc = 0.0L;
    for (const auto& m : models) acc += static_cast<long double>(m.theta[i]);
    out.theta[i] = static_cast<double>(acc / static_cast<long double>(models.size()));
  }
  return out;
}

double global_mse(const LinearModel& m, const std::vector<Shard>& shards) {
  if (shards.empty()) throw std::invalid_argument("no shards");
  double total = 0.0;
  std::size_t n = 0;
  for (const auto& s : shards) {
    s.validate(m.theta.size() - 1);
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double e = m.predict(s.x[i]) - s.y[i];
      total += e * e;
    }
    n += s.x.size();
  }
  return total / static_cast<double>(n);
}

TrainResult train(const std::vector<Shard>& shards, LinearModel init, std::size_t rounds,
                  std::size_t local_steps, double eta) {
  if (shards.empty()) throw std::invalid_argument("no shards");
  if (local_steps == 0) throw std::invalid_argument("need at least one local step");

  TrainResult r;
  r.model = std::move(init);
  double initial = global_mse(r.model, shards);
  r.loss_trace.push_back(initial);
  for (std::size_t round = 0; round < rounds; ++round) {
    std::vector<LinearModel> locals;
    locals.reserve(shards.size());
    for (const auto& s : shards) {
      LinearModel m = r.model;
      for (std::size_t step = 0; step < local_steps; ++step) m = local_step(m, s, eta);
      locals.push_back(std::move(m));
    }
    r.model = fed_avg(locals);
    double loss = global_mse(r.model, shards);
    r.loss_trace.push_back(loss);
    if (!std::isfinite(loss) || loss > 10.0 * initial) {
      r.diverged = true;
      break;
    }
  }
  return r;
}

namespace {

// Augmented Gram matrix sum over pooled rows and the pooled row count.
std::pair<DenseMatrix, std::size_t> pooled_gram(const std::vector<Shard>& shards) {
  if (shards.empty()) throw std::invalid_argument("no shards");
  const std::size_t fdim = shards[0].x.empty() ? 0 : shards[0].x[0].size();
  const std::size_t dim = fdim + 1;
  DenseMatrix gram(dim, std::vector<double>(dim, 0.0));
  std::size_t n = 0;
  for (const auto& s : shards) {
    s.validate(fdim);
    for (const auto& row : s.x) {
      std::vector<double> aug = row;
      aug.push_back(1.0);
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j) gram[i][j] += aug[i] * aug[j];
    }
    n += s.x.size();
  }
  return {gram, n};
}

}  // namespace

double max_stable_eta(const std::vector<Shard>& shards) {
  auto [gram, n] = pooled_gram(shards);
  auto pairs = top_eigenpairs(gram, 1, 12345, 1e-12, 20000);
  double l = 2.0 * pairs[0].value / static_cast<double>(n);
  if (l <= 0.0) throw std::invalid_argument("degenerate data: zero curvature");
  return 1.0 / l;
}

LinearModel closed_form_least_squares(const std::vector<Shard>& shards) {
  auto [gram, n] = pooled_gram(shards);
  (void)n;
  const std::size_t dim = gram.size();
  std::vector<double> rhs(dim, 0.0);
  const std::size_t fdim = dim - 1;
  for (const auto& s : shards)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      for (std::size_t j = 0; j < fdim; ++j) rhs[j] += s.x[i][j] * s.y[i];
      rhs[fdim] += s.y[i];
    }

  // Gaussian elimination with partial pivoting on [gram | rhs].
  DenseMatrix a = gram;
  for (std::size_t col = 0; col < dim; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < dim; ++r)
      if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
    if (std::abs(a[piv][col]) < 1e-12)
      throw std::invalid_argument("singular normal equations: data is degenerate");
    std::swap(a[col], a[piv]);
    std::swap(rhs[col], rhs[piv]);
    for (std::size_t r = 0; r < dim; ++r) {
      if (r == col) continue;
      double f = a[r][col] / a[col][col];
      for (std::size_t c = col; c < dim; ++c) a[r][c] -= f * a[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  LinearModel m;
  m.theta.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) m.theta[i] = rhs[i] / a[i][i];
  return m;
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic needs nonempty samples");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;  // consume ties on both sides
    while (j < b.size() && b[j] == v) ++j;  // before evaluating the gap
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  // Remaining one-sided tail can only shrink the gap toward |1 - F|, which
  // the loop already covered at the last merged value.
  return d;
}

DriftReport drift_detect(const std::vector<double>& a, const std::vector<double>& b,
                         double alpha) {
  if (alpha <= 0.0 || alpha >= 1.0)
    throw std::invalid_argument("alpha must lie strictly between 0 and 1");
  DriftReport r;
  r.statistic = ks_statistic(a, b);
  const double n = static_cast<double>(a.size());
  const double m = static_cast<double>(b.size());
  double c = std::sqrt(-std::log(alpha / 2.0) / 2.0);
  r.threshold = c * std::sqrt((n + m) / (n * m));
  r.drifted = r.statistic > r.threshold;
  return r;
}

}  // namespace fabric
