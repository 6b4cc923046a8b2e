#include "fabric/linalg.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace fabric {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dot: dimension mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

std::vector<double> mat_vec(const DenseMatrix& m, const std::vector<double>& x) {
  std::vector<double> y(m.size(), 0.0);
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].size() != x.size()) throw std::invalid_argument("mat_vec: shape mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += m[i][j] * x[j];
    y[i] = s;
  }
  return y;
}

std::vector<EigenPair> top_eigenpairs(const DenseMatrix& m, std::size_t k,
                                      std::uint64_t seed, double tol,
                                      std::size_t max_iters) {
  const std::size_t n = m.size();
  for (const auto& row : m)
    if (row.size() != n) throw std::invalid_argument("top_eigenpairs: matrix not square");
  if (k > n) throw std::invalid_argument("top_eigenpairs: k exceeds dimension");

  Rng rng(seed);
  std::vector<EigenPair> pairs;
  // Work on a deflated copy: m_next = m - lambda * v v^T after each pair.
  DenseMatrix work = m;
  for (std::size_t p = 0; p < k; ++p) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.uniform(-1.0, 1.0);
    double nv = norm2(v);
    if (nv == 0.0) {
      v.assign(n, 0.0);
      v[p % n] = 1.0;
      nv = 1.0;
    }
    for (auto& x : v) x /= nv;

    double lambda = 0.0;
    for (std::size_t it = 0; it < max_iters; ++it) {
      std::vector<double> w = mat_vec(work, v);
      double nw = norm2(w);
      if (nw < 1e-300) {
        // v lies in the kernel of the deflated matrix; eigenvalue 0.
        lambda = 0.0;
        break;
      }
      // Negative eigenvalues flip the iterate's sign each round, so measure
      // displacement against both v and -v.
      double d_plus = 0.0, d_minus = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        double next = w[i] / nw;
        d_plus = std::max(d_plus, std::abs(next - v[i]));
        d_minus = std::max(d_minus, std::abs(next + v[i]));
        v[i] = next;
      }
      lambda = dot(v, mat_vec(work, v));
      if (std::min(d_plus, d_minus) < tol) break;
    }
    pairs.push_back({lambda, v});
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) work[i][j] -= lambda * v[i] * v[j];
  }
  return pairs;
}

namespace {

double sq_dist(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

}  // namespace

KMeansResult kmeans(const std::vector<std::vector<double>>& points, std::size_t k,
                    std::uint64_t seed, std::size_t restarts, std::size_t max_iters) {
  if (points.empty()) throw std::invalid_argument("kmeans: no points");
  if (k == 0 || k > points.size()) throw std::invalid_argument("kmeans: bad k");
  const std::size_t n = points.size();
  const std::size_t dim = points[0].size();
  for (const auto& p : points)
    if (p.size() != dim) throw std::invalid_argument("kmeans: ragged points");

  KMeansResult best;
  best.inertia = std::numeric_limits<double>::infinity();
  Rng rng(seed);
  for (std::size_t r = 0; r < restarts; ++r) {
    // Seed centers with k distinct point indices.
    std::vector<std::size_t> idx;
    while (idx.size() < k) {
      std::size_t cand = static_cast<std::size_t>(rng.next_below(n));
      bool used = false;
      for (std::size_t u : idx) used |= (u == cand);
      if (!used) idx.push_back(cand);
    }
    std::vector<std::vector<double>> centers;
    for (std::size_t u : idx) centers.push_back(points[u]);

    std::vector<std::size_t> labels(n, 0);
    for (std::size_t it = 0; it < max_iters; ++it) {
      bool moved = false;
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t bestc = 0;
        double bestd = sq_dist(points[i], centers[0]);
        for (std::size_t c = 1; c < k; ++c) {
          double d = sq_dist(points[i], centers[c]);
          if (d < bestd) {
            bestd = d;
            bestc = c;
          }
        }
        if (labels[i] != bestc) {
          labels[i] = bestc;
          moved = true;
        }
      }
      std::vector<std::vector<double>> sums(k, std::vector<double>(dim, 0.0));
      std::vector<std::size_t> counts(k, 0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t d = 0; d < dim; ++d) sums[labels[i]][d] += points[i][d];
        counts[labels[i]]++;
      }
      for (std::size_t c = 0; c < k; ++c) {
        if (counts[c] == 0) continue;  // empty cluster keeps its center
        for (std::size_t d = 0; d < dim; ++d) centers[c][d] = sums[c][d] / counts[c];
      }
      if (!moved) break;
    }
    double inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) inertia += sq_dist(points[i], centers[labels[i]]);
    if (inertia < best.inertia) best = {labels, centers, inertia};
  }
  return best;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need matching samples, at least two");
  const double n = static_cast<double>(x.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fit_line: degenerate x values");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  double mean_y = sy / n;
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    double pred = f.slope * x[i] + f.intercept;
    ss_res += (y[i] - pred) * (y[i] - pred);
    ss_tot += (y[i] - mean_y) * (y[i] - mean_y);
  }
  f.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return f;
}

}  // namespace fabric
