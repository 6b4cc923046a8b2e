#include "fabric/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "fabric/linalg.hpp"
#include "fabric/rng.hpp"

namespace fabric {

namespace {

void check_points(const std::vector<std::vector<double>>& points, const char* who) {
  if (points.empty()) throw std::invalid_argument(std::string(who) + ": empty point set");
  for (const auto& p : points)
    if (p.size() != points[0].size())
      throw std::invalid_argument(std::string(who) + ": ragged dimensions");
}

}  // namespace

std::vector<double> centroid(const std::vector<std::vector<double>>& points) {
  check_points(points, "centroid");
  const std::size_t dim = points[0].size();
  std::vector<double> c(dim, 0.0);
  for (const auto& p : points)
    for (std::size_t i = 0; i < dim; ++i) c[i] += p[i];
  for (auto& x : c) x /= static_cast<double>(points.size());
  return c;
}

MedoidResult medoid(const std::vector<std::vector<double>>& points) {
  check_points(points, "medoid");
  const std::size_t n = points.size();
  std::size_t best = 0;
  double best_sum = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j) {
    double sum = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      double sq = 0.0;
      for (std::size_t i = 0; i < points[j].size(); ++i) {
        double d = points[j][i] - points[l][i];
        sq += d * d;
      }
      sum += std::sqrt(sq);
    }
    if (sum < best_sum) {
      best_sum = sum;
      best = j;
    }
  }
  return {best, points[best]};
}

CategoricalEncoder::CategoricalEncoder(std::vector<std::string> categories,
                                       std::vector<std::vector<double>> vectors)
    : categories_(std::move(categories)), vectors_(std::move(vectors)) {
  if (categories_.empty() || categories_.size() != vectors_.size())
    throw std::invalid_argument("encoder needs one vector per category");
  dim_ = vectors_[0].size();
  for (const auto& v : vectors_) {
    if (v.size() != dim_) throw std::invalid_argument("encoder vectors are ragged");
    double n = norm2(v);
    if (std::abs(n - 1.0) > 1e-9)
      throw std::invalid_argument("encoder vectors must have unit norm");
  }
}

CategoricalEncoder CategoricalEncoder::one_hot(std::vector<std::string> categories) {
  std::vector<std::vector<double>> vecs;
  for (std::size_t i = 0; i < categories.size(); ++i) {
    std::vector<double> v(categories.size(), 0.0);
    v[i] = 1.0;
    vecs.push_back(std::move(v));
  }
  return CategoricalEncoder(std::move(categories), std::move(vecs));
}

const std::vector<double>& CategoricalEncoder::embed(const std::string& category) const {
  for (std::size_t i = 0; i < categories_.size(); ++i)
    if (categories_[i] == category) return vectors_[i];
  throw std::invalid_argument("unknown category '" + category + "'");
}

std::vector<double> categorical_embed(const std::map<std::string, double>& freqs,
                                      const CategoricalEncoder& enc) {
  double total = 0.0;
  for (const auto& [cat, f] : freqs) {
    if (f < 0.0) throw std::invalid_argument("negative frequency for '" + cat + "'");
    total += f;
  }
  if (total > 1.0 + 1e-9) throw std::invalid_argument("frequencies sum beyond 1");
  std::vector<double> out(enc.embed_dim(), 0.0);
  for (const auto& [cat, f] : freqs) {
    const auto& v = enc.embed(cat);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += f * v[i];
  }
  return out;
}

EmbeddingVector mixed_embed(const std::vector<double>& numeric,
                            const std::vector<std::vector<double>>& cat_blocks) {
  std::size_t total = numeric.size();
  for (const auto& b : cat_blocks) total += b.size();
  if (total > 15) throw std::invalid_argument("mixed embedding exceeds 15 dimensions");
  EmbeddingVector out;
  out.values = numeric;
  for (const auto& b : cat_blocks) out.values.insert(out.values.end(), b.begin(), b.end());
  return out;
}

std::vector<double> temporal_embed(double t, double period) {
  if (period <= 0.0) throw std::invalid_argument("temporal period must be positive");
  const double tau = 6.283185307179586476925286766559 * t / period;
  return {std::sin(tau), std::cos(tau), t / period};
}

std::vector<double> pca_project2(const std::vector<std::vector<double>>& corpus,
                                 const std::vector<double>& v, std::uint64_t seed,
                                 std::size_t iters) {
  check_points(corpus, "pca_project2");
  const std::size_t dim = corpus[0].size();
  if (v.size() != dim) throw std::invalid_argument("pca_project2: vector dimension mismatch");

  std::vector<double> mean = centroid(corpus);
  DenseMatrix cov(dim, std::vector<double>(dim, 0.0));
  for (const auto& p : corpus)
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        cov[i][j] += (p[i] - mean[i]) * (p[j] - mean[j]);
  for (auto& row : cov)
    for (auto& x : row) x /= static_cast<double>(corpus.size());

  // tol=0 forces the full fixed iteration count for reproducibility.
  auto pairs = top_eigenpairs(cov, std::min<std::size_t>(2, dim), seed, 0.0, iters);
  std::vector<double> centred(dim);
  for (std::size_t i = 0; i < dim; ++i) centred[i] = v[i] - mean[i];
  std::vector<double> out(2, 0.0);
  for (std::size_t p = 0; p < pairs.size(); ++p) out[p] = dot(centred, pairs[p].vector);
  return out;
}

EmbeddingVector R11Profile::to_vector() const {
  EmbeddingVector out;
  out.profile = VectorProfile::r11;
  out.values.reserve(11);
  for (double x : numeric) out.values.push_back(x);
  for (double x : categorical) out.values.push_back(x);
  for (double x : temporal) out.values.push_back(x);
  for (double x : meta) out.values.push_back(x);
  return out;
}

R11Profile R11Profile::from_vector(const EmbeddingVector& v) {
  if (v.profile != VectorProfile::r11)
    throw std::invalid_argument("vector does not carry the r11 profile tag");
  if (v.values.size() != 11)
    throw std::invalid_argument("r11 vector must have exactly 11 dimensions");
  R11Profile p;
  std::size_t at = 0;
  for (auto& x : p.numeric) x = v.values[at++];
  for (auto& x : p.categorical) x = v.values[at++];
  for (auto& x : p.temporal) x = v.values[at++];
  for (auto& x : p.meta) x = v.values[at++];
  double cat_sum = 0.0;
  for (double x : p.categorical) {
    if (x < -1e-9 || x > 1.0 + 1e-9)
      throw std::invalid_argument("r11 categorical weights must lie in [0,1]");
    cat_sum += x;
  }
  if (cat_sum > 1.0 + 1e-9)
    throw std::invalid_argument("r11 categorical weights sum beyond 1");
  return p;
}

std::vector<double> streaming_update(const std::vector<double>& v,
                                     const std::vector<double>& x, double alpha) {
  if (v.size() != x.size()) throw std::invalid_argument("streaming_update: dimension mismatch");
  if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must lie in [0,1]");
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (1.0 - alpha) * v[i] + alpha * x[i];
  return out;
}

EmbeddingVector metadata_embed(const std::vector<std::string>& attr_names,
                               const std::vector<HistorySummaryEntry>& history,
                               const MetadataEmbedConfig& config) {
  if (config.buckets == 0) throw std::invalid_argument("metadata_embed: zero buckets");
  if (config.history_cap == 0) throw std::invalid_argument("metadata_embed: zero history cap");
  if (config.time_scale <= 0.0) throw std::invalid_argument("metadata_embed: bad time scale");

  EmbeddingVector out;
  out.profile = VectorProfile::metadata;
  out.values.assign(config.buckets + 3, 0.0);
  for (const auto& name : attr_names) {
    std::size_t bucket = fnv1a(name.data(), name.size()) % config.buckets;
    out.values[bucket] = 1.0;
  }
  if (!history.empty()) {
    double count = std::min<double>(static_cast<double>(history.size()),
                                    static_cast<double>(config.history_cap));
    double sum_t = 0.0, sum_p = 0.0;
    for (const auto& h : history) {
      sum_t += h.at;
      sum_p += h.param_norm;
    }
    double n = static_cast<double>(history.size());
    out.values[config.buckets + 0] = count / static_cast<double>(config.history_cap);
    out.values[config.buckets + 1] = (sum_t / n) / config.time_scale;
    out.values[config.buckets + 2] = sum_p / n;
  }
  return out;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("cosine: dimension mismatch");
  double na = norm2(a), nb = norm2(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  double c = dot(a, b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

}  // namespace fabric
