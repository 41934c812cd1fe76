#pragma once

// Distance evaluation for learned and baseline metrics, nearest-neighbor
// classification, the co-class/non-class distance ratio, and the symmetric
// eigen machinery used for interpretation and coordinate export.

#include <string>
#include <vector>

#include "metlearn/dataset.hpp"

namespace metlearn {

enum class MetricKind { kLearned, kEuclidean, kManhattan, kChebyshev };

std::string to_string(MetricKind k);
MetricKind metric_kind_from_string(const std::string& s);

// Counts evaluations where the quadratic form went negative and was clamped.
struct ClampStats {
  long long clamped = 0;
  double worst = 0.0;  // most negative value seen
  void record(double v) {
    ++clamped;
    if (v < worst) worst = v;
  }
};

class Metric {
 public:
  Metric() = default;

  static Metric learned(int dim, std::vector<double> first_order, std::vector<double> quad_upper);
  static Metric euclidean(int dim);   // a = 0, B = I (squared Euclidean)
  static Metric manhattan(int dim);   // a = 1, B = 0
  static Metric chebyshev(int dim);   // max coordinate difference, no (a, B)

  MetricKind kind() const { return kind_; }
  int dim() const { return dim_; }
  bool has_coefficients() const { return kind_ != MetricKind::kChebyshev; }

  const std::vector<double>& first_order() const { return a_; }
  const std::vector<double>& quad_upper() const { return b_upper_; }
  double quad_at(int p, int q) const;
  std::vector<std::vector<double>> quad_full() const;

  // a'|x-y| + (x-y)'B(x-y), clamped at zero (negative values are possible for
  // indefinite B off the training set); Chebyshev evaluates max_p |x_p - y_p|.
  double distance(const std::vector<double>& x, const std::vector<double>& y,
                  ClampStats* stats = nullptr) const;

 private:
  MetricKind kind_ = MetricKind::kEuclidean;
  int dim_ = 0;
  std::vector<double> a_;
  std::vector<double> b_upper_;  // packed upper triangle, plain entries
};

double distance(const Metric& m, const std::vector<double>& x, const std::vector<double>& y,
                ClampStats* stats = nullptr);

struct KnnResult {
  int label = -1;
  std::vector<int> neighbors;  // the K nearest, by (distance, index)
};

// Majority label among the K nearest non-excluded training points; ties are
// broken by smaller summed distance, then by lower class id.
KnnResult knn_classify(const Metric& m, const Dataset& train, const std::vector<double>& query,
                       int k, const std::vector<int>& exclude = {}, ClampStats* stats = nullptr);

double error_rate(const Metric& m, const Dataset& train, const Dataset& test, int k,
                  const std::vector<int>& exclude_train = {}, ClampStats* stats = nullptr);

// min co-class distance / min non-class distance for point i; self always
// excluded; +infinity when a non-class point is co-located.
double r_ratio(const Metric& m, const Dataset& d, int i, const std::vector<int>& exclude = {},
               ClampStats* stats = nullptr);

struct FeasibilityReport {
  bool satisfied = false;
  // K = 1: per-point margin (min non-class - min co-class); outliers skipped.
  std::vector<double> margins;
  // K > 1: co-class counts among the K nearest.
  std::vector<int> co_class_counts;
  double min_margin = 0.0;
};

FeasibilityReport check_feasibility(const Metric& m, const Dataset& d, int k,
                                    const std::vector<int>& outliers = {});

struct EigenDecomp {
  std::vector<double> values;                // descending
  std::vector<std::vector<double>> vectors;  // vectors[i] is the i-th eigenvector
};

// Cyclic Jacobi; iterates until all off-diagonal magnitudes fall below
// 1e-12 * ||B||_F.
EigenDecomp eigen_sym(const std::vector<std::vector<double>>& b);
EigenDecomp eigen_sym(const Metric& m);

// W_j = sum_i lambda_i |v_ij|.
std::vector<double> coordinate_significance(const EigenDecomp& e);
std::vector<double> coordinate_significance(const Metric& m);

// Coordinates in the eigenbasis scaled by sqrt(max(lambda_i, 0)).
std::vector<std::vector<double>> transform_coords(const Metric& m, const Dataset& d);

}  // namespace metlearn
