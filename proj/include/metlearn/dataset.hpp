#pragma once

// Labeled point sets, ingestion, min-max normalization, deterministic
// synthetic generators, and the per-pair feature cache that supplies the
// coefficients of every distance expression downstream.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace metlearn {

struct Dataset {
  std::vector<std::vector<double>> points;  // N x D
  std::vector<int> labels;                  // dense class ids, 0..C-1
  std::vector<std::string> label_names;     // id -> original label text
  std::vector<std::vector<int>> class_index;  // id -> member point indices
  std::string name;

  int size() const { return static_cast<int>(points.size()); }
  int dim() const { return points.empty() ? 0 : static_cast<int>(points.front().size()); }
  int num_classes() const { return static_cast<int>(class_index.size()); }
  const std::vector<int>& members_of(int class_id) const { return class_index[class_id]; }

  // Builds class_index/label ids from label text (first-appearance order) and
  // checks the structural invariants. Throws on ragged rows or empty input.
  static Dataset build(std::vector<std::vector<double>> pts, std::vector<std::string> labels,
                       std::string name);
  // Same, with pre-assigned dense ids.
  static Dataset build_with_ids(std::vector<std::vector<double>> pts, std::vector<int> ids,
                                std::vector<std::string> label_names, std::string name);

  // Pairs (i, j), i < j, with identical coordinates but different labels.
  // Such pairs make the non-class minimum-distance requirement infeasible.
  std::vector<std::pair<int, int>> cross_class_duplicates() const;
};

struct NormParams {
  std::vector<double> min;
  std::vector<double> range;  // 0 for constant dimensions

  int dim() const { return static_cast<int>(min.size()); }
  std::vector<double> apply(const std::vector<double>& x) const;
  std::vector<double> invert(const std::vector<double>& x) const;
};

// Min-max scale each feature to [0, 1]; constant dimensions map to 0.
std::pair<Dataset, NormParams> normalize(const Dataset& d);
Dataset apply_norm(const Dataset& d, const NormParams& p);

// Per unordered pair (i < j): |x_i - x_j|, the quadratic feature vector
// (delta_p * delta_q for p <= q, off-diagonal entries doubled so that the dot
// product with the packed upper triangle of a symmetric B equals
// delta' B delta), and the Euclidean norm of the delta.
struct DeltaCache {
  int n = 0;
  int dim = 0;
  int qdim = 0;  // dim*(dim+1)/2
  std::vector<double> abs_delta;  // pair-major, dim entries per pair
  std::vector<double> quad;       // pair-major, qdim entries per pair
  std::vector<double> euclid;     // one entry per pair

  std::size_t pair_index(int i, int j) const;
  const double* abs_delta_at(int i, int j) const { return &abs_delta[pair_index(i, j) * dim]; }
  const double* quad_at(int i, int j) const { return &quad[pair_index(i, j) * qdim]; }
  double euclid_at(int i, int j) const { return euclid[pair_index(i, j)]; }
};

DeltaCache build_delta_cache(const Dataset& d);

// Index into the packed upper triangle for p <= q.
inline int upper_index(int p, int q, int dim) { return p * dim - p * (p - 1) / 2 + (q - p); }

enum class SynthKind { kTwoLines, kGaussianBlobs, kNonconvexRings, kStripes6d, kOutlierInjected };

SynthKind synth_kind_from_string(const std::string& s);
std::string to_string(SynthKind k);

struct SynthSpec {
  SynthKind kind = SynthKind::kGaussianBlobs;
  int points_per_class = 20;
  int classes = 2;
  double noise = 1.0;      // generator-relative noise multiplier
  std::uint64_t seed = 1;
  int flip_count = 0;      // outlier-injected only
  double flip_depth = 0.25;  // 0 = at the foreign blob center, 1 = back home
};

Dataset synth_generate(const SynthSpec& spec);

// Stratified split. Per class with n >= 2 points the train share is
// clamp(round(fraction*n), 1, n-1); singleton classes go to train with a
// warning. Deterministic in `seed`.
std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction, std::uint64_t seed,
                                  std::vector<std::string>* warnings = nullptr);

Dataset load_csv(const std::string& path, const std::string& label_column);
Dataset load_libsvm(const std::string& path);
void write_csv(const Dataset& d, const std::string& path);

}  // namespace metlearn
