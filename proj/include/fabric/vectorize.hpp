#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace fabric {

enum class VectorProfile { generic, r11, metadata };

struct EmbeddingVector {
  std::vector<double> values;
  VectorProfile profile = VectorProfile::generic;

  std::size_t dim() const { return values.size(); }
};

// Componentwise mean of equal-length points; errors on empty or ragged input.
std::vector<double> centroid(const std::vector<std::vector<double>>& points);

struct MedoidResult {
  std::size_t index = 0;
  std::vector<double> point;
};

// Point minimising the sum of Euclidean distances to all points, O(n^2 k).
// Ties resolve to the lowest index.
MedoidResult medoid(const std::vector<std::vector<double>>& points);

// Fixed per-category unit vectors; the one-hot factory assigns the i-th
// category the i-th standard basis vector.
class CategoricalEncoder {
 public:
  CategoricalEncoder(std::vector<std::string> categories,
                     std::vector<std::vector<double>> vectors);
  static CategoricalEncoder one_hot(std::vector<std::string> categories);

  std::size_t embed_dim() const { return dim_; }
  const std::vector<std::string>& categories() const { return categories_; }
  const std::vector<double>& embed(const std::string& category) const;

 private:
  std::vector<std::string> categories_;
  std::vector<std::vector<double>> vectors_;
  std::size_t dim_ = 0;
};

// Frequency-weighted sum of category vectors.  Frequencies must be
// nonnegative and sum to at most 1 (+1e-9 slack).
std::vector<double> categorical_embed(const std::map<std::string, double>& freqs,
                                      const CategoricalEncoder& enc);

// Concatenation of a numeric block and categorical blocks in declared order;
// total dimension is capped at 15.
EmbeddingVector mixed_embed(const std::vector<double>& numeric,
                            const std::vector<std::vector<double>>& cat_blocks);

// [sin(2*pi*t/period), cos(2*pi*t/period), t/period]
std::vector<double> temporal_embed(double t, double period);

// Projection of `v` onto the top-2 principal directions of the centred
// corpus, computed by seeded power iteration (100 rounds per direction).
std::vector<double> pca_project2(const std::vector<std::vector<double>>& corpus,
                                 const std::vector<double>& v, std::uint64_t seed,
                                 std::size_t iters = 100);

// Fixed 11-dimensional record layout: 2 numeric, 4 categorical (one-hot
// weights), 3 temporal Fourier features, 2 principal metadata coordinates.
struct R11Profile {
  std::array<double, 2> numeric{};
  std::array<double, 4> categorical{};  // entries in [0,1], sum <= 1
  std::array<double, 3> temporal{};
  std::array<double, 2> meta{};

  EmbeddingVector to_vector() const;
  static R11Profile from_vector(const EmbeddingVector& v);

  bool operator==(const R11Profile&) const = default;
};

// Exponential moving update (1-alpha)*v + alpha*x with alpha in [0,1];
// the boundaries are accepted: 0 keeps v, 1 replaces it with x.
std::vector<double> streaming_update(const std::vector<double>& v,
                                     const std::vector<double>& x, double alpha);

struct MetadataEmbedConfig {
  std::size_t buckets = 8;     // attribute-name hash buckets
  std::size_t history_cap = 16;  // normalises the history count
  double time_scale = 1.0;       // normalises the mean timestamp
};

struct HistorySummaryEntry {
  double at = 0.0;
  double param_norm = 0.0;
};

// Attribute block: one-hot over hash buckets of the attribute names.
// History block: (count/cap clamped to 1, mean timestamp / timeScale,
// mean param norm); zeros when the history is empty.
EmbeddingVector metadata_embed(const std::vector<std::string>& attr_names,
                               const std::vector<HistorySummaryEntry>& history,
                               const MetadataEmbedConfig& config = {});

// Cosine similarity with the zero-vector convention: either norm zero -> 0.
// Result is clamped into [-1, 1].
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace fabric
