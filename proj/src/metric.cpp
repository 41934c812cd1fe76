#include "metlearn/metric.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "metlearn/kernels.hpp"

namespace metlearn {

std::string to_string(MetricKind k) {
  switch (k) {
    case MetricKind::kLearned: return "learned";
    case MetricKind::kEuclidean: return "euclidean";
    case MetricKind::kManhattan: return "manhattan";
    case MetricKind::kChebyshev: return "chebyshev";
  }
  return "?";
}

MetricKind metric_kind_from_string(const std::string& s) {
  if (s == "learned") return MetricKind::kLearned;
  if (s == "euclidean") return MetricKind::kEuclidean;
  if (s == "manhattan") return MetricKind::kManhattan;
  if (s == "chebyshev") return MetricKind::kChebyshev;
  throw std::runtime_error("unknown metric kind: " + s);
}

Metric Metric::learned(int dim, std::vector<double> first_order, std::vector<double> quad_upper) {
  if (static_cast<int>(first_order.size()) != dim ||
      static_cast<int>(quad_upper.size()) != dim * (dim + 1) / 2)
    throw std::runtime_error("metric coefficient sizes do not match dimension");
  Metric m;
  m.kind_ = MetricKind::kLearned;
  m.dim_ = dim;
  m.a_ = std::move(first_order);
  m.b_upper_ = std::move(quad_upper);
  return m;
}

Metric Metric::euclidean(int dim) {
  Metric m;
  m.kind_ = MetricKind::kEuclidean;
  m.dim_ = dim;
  m.a_.assign(dim, 0.0);
  m.b_upper_.assign(dim * (dim + 1) / 2, 0.0);
  for (int p = 0; p < dim; ++p) m.b_upper_[upper_index(p, p, dim)] = 1.0;
  return m;
}

Metric Metric::manhattan(int dim) {
  Metric m;
  m.kind_ = MetricKind::kManhattan;
  m.dim_ = dim;
  m.a_.assign(dim, 1.0);
  m.b_upper_.assign(dim * (dim + 1) / 2, 0.0);
  return m;
}

Metric Metric::chebyshev(int dim) {
  Metric m;
  m.kind_ = MetricKind::kChebyshev;
  m.dim_ = dim;
  return m;
}

double Metric::quad_at(int p, int q) const {
  if (p > q) std::swap(p, q);
  return b_upper_[upper_index(p, q, dim_)];
}

std::vector<std::vector<double>> Metric::quad_full() const {
  std::vector<std::vector<double>> b(dim_, std::vector<double>(dim_, 0.0));
  for (int p = 0; p < dim_; ++p)
    for (int q = p; q < dim_; ++q) b[p][q] = b[q][p] = b_upper_[upper_index(p, q, dim_)];
  return b;
}

double Metric::distance(const std::vector<double>& x, const std::vector<double>& y,
                        ClampStats* stats) const {
  if (static_cast<int>(x.size()) != dim_ || static_cast<int>(y.size()) != dim_)
    throw std::runtime_error("distance: dimension mismatch");
  thread_local std::vector<double> delta, absd;
  delta.resize(dim_);
  absd.resize(dim_);
  for (int j = 0; j < dim_; ++j) delta[j] = x[j] - y[j];
  kernels::abs_diff(x.data(), y.data(), absd.data(), dim_);

  if (kind_ == MetricKind::kChebyshev) return kernels::max_abs(delta.data(), dim_);

  double v = kernels::dot(a_.data(), absd.data(), dim_);
  for (int p = 0; p < dim_; ++p) {
    double row = 0.0;
    for (int q = 0; q < dim_; ++q) row += quad_at(p, q) * delta[q];
    v += delta[p] * row;
  }
  if (v < 0.0) {
    if (stats) stats->record(v);
    return 0.0;
  }
  return v;
}

double distance(const Metric& m, const std::vector<double>& x, const std::vector<double>& y,
                ClampStats* stats) {
  return m.distance(x, y, stats);
}

namespace {

std::vector<char> make_mask(int n, const std::vector<int>& exclude) {
  std::vector<char> mask(n, 0);
  for (int i : exclude) {
    if (i >= 0 && i < n) mask[i] = 1;
  }
  return mask;
}

}  // namespace

KnnResult knn_classify(const Metric& m, const Dataset& train, const std::vector<double>& query,
                       int k, const std::vector<int>& exclude, ClampStats* stats) {
  if (k < 1) throw std::runtime_error("k must be >= 1");
  std::vector<char> mask = make_mask(train.size(), exclude);
  std::vector<std::pair<double, int>> dist;
  dist.reserve(train.size());
  for (int i = 0; i < train.size(); ++i) {
    if (mask[i]) continue;
    dist.emplace_back(m.distance(query, train.points[i], stats), i);
  }
  if (dist.empty()) throw std::runtime_error("no training points available");
  if (static_cast<int>(dist.size()) < k)
    throw std::runtime_error("k exceeds available training points");
  std::partial_sort(dist.begin(), dist.begin() + k, dist.end());

  std::vector<double> sum_by_class(train.num_classes(), 0.0);
  std::vector<int> count_by_class(train.num_classes(), 0);
  KnnResult res;
  for (int t = 0; t < k; ++t) {
    res.neighbors.push_back(dist[t].second);
    int c = train.labels[dist[t].second];
    count_by_class[c] += 1;
    sum_by_class[c] += dist[t].first;
  }
  int best = -1;
  for (int c = 0; c < train.num_classes(); ++c) {
    if (count_by_class[c] == 0) continue;
    if (best < 0 || count_by_class[c] > count_by_class[best] ||
        (count_by_class[c] == count_by_class[best] && sum_by_class[c] < sum_by_class[best])) {
      best = c;
    }
  }
  res.label = best;
  return res;
}

double error_rate(const Metric& m, const Dataset& train, const Dataset& test, int k,
                  const std::vector<int>& exclude_train, ClampStats* stats) {
  if (train.dim() != test.dim()) throw std::runtime_error("error_rate: dimension mismatch");
  int wrong = 0;
  for (int i = 0; i < test.size(); ++i) {
    KnnResult r = knn_classify(m, train, test.points[i], k, exclude_train, stats);
    // Test labels may use a different id order; compare label text.
    if (train.label_names[r.label] != test.label_names[test.labels[i]]) ++wrong;
  }
  return static_cast<double>(wrong) / test.size();
}

double r_ratio(const Metric& m, const Dataset& d, int i, const std::vector<int>& exclude,
               ClampStats* stats) {
  std::vector<char> mask = make_mask(d.size(), exclude);
  double best_co = std::numeric_limits<double>::infinity();
  double best_non = std::numeric_limits<double>::infinity();
  for (int j = 0; j < d.size(); ++j) {
    if (j == i || mask[j]) continue;
    double v = m.distance(d.points[i], d.points[j], stats);
    if (d.labels[j] == d.labels[i]) {
      best_co = std::min(best_co, v);
    } else {
      best_non = std::min(best_non, v);
    }
  }
  if (std::isinf(best_co)) throw std::runtime_error("point has no co-class neighbor");
  if (std::isinf(best_non)) throw std::runtime_error("point has no non-class neighbor");
  if (best_non == 0.0) return std::numeric_limits<double>::infinity();
  return best_co / best_non;
}

FeasibilityReport check_feasibility(const Metric& m, const Dataset& d, int k,
                                    const std::vector<int>& outliers) {
  if (k < 1) throw std::runtime_error("k must be >= 1");
  std::vector<char> mask = make_mask(d.size(), outliers);
  FeasibilityReport rep;
  rep.satisfied = true;
  rep.min_margin = std::numeric_limits<double>::infinity();
  if (k == 1) {
    for (int i = 0; i < d.size(); ++i) {
      if (mask[i]) continue;
      double best_co = std::numeric_limits<double>::infinity();
      double best_non = std::numeric_limits<double>::infinity();
      for (int j = 0; j < d.size(); ++j) {
        if (j == i || mask[j]) continue;
        double v = m.distance(d.points[i], d.points[j]);
        if (d.labels[j] == d.labels[i])
          best_co = std::min(best_co, v);
        else
          best_non = std::min(best_non, v);
      }
      if (std::isinf(best_co) || std::isinf(best_non))
        throw std::runtime_error("feasibility check needs a co-class and a non-class neighbor");
      double margin = best_non - best_co;
      rep.margins.push_back(margin);
      rep.min_margin = std::min(rep.min_margin, margin);
      if (!(margin > 0)) rep.satisfied = false;
    }
    return rep;
  }
  int need = k / 2 + 1;
  for (int i = 0; i < d.size(); ++i) {
    if (mask[i]) continue;
    std::vector<int> excl;
    excl.push_back(i);
    for (int o : outliers) excl.push_back(o);
    KnnResult r = knn_classify(m, d, d.points[i], k, excl);
    int co = 0;
    for (int j : r.neighbors)
      if (d.labels[j] == d.labels[i]) ++co;
    rep.co_class_counts.push_back(co);
    if (co < need) rep.satisfied = false;
  }
  return rep;
}

EigenDecomp eigen_sym(const std::vector<std::vector<double>>& b_in) {
  int n = static_cast<int>(b_in.size());
  for (const auto& row : b_in)
    if (static_cast<int>(row.size()) != n) throw std::runtime_error("eigen_sym: matrix not square");
  std::vector<std::vector<double>> a = b_in;
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) v[i][i] = 1.0;

  double fro = 0.0;
  for (const auto& row : a)
    for (double x : row) fro += x * x;
  fro = std::sqrt(fro);
  const double stop = 1e-12 * std::max(fro, 1e-300);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off = std::max(off, std::fabs(a[p][q]));
    if (off < stop) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::fabs(a[p][q]) < stop) continue;
        double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int i = 0; i < n; ++i) {
          double aip = a[i][p], aiq = a[i][q];
          a[i][p] = c * aip - s * aiq;
          a[i][q] = s * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          double api = a[p][i], aqi = a[q][i];
          a[p][i] = c * api - s * aqi;
          a[q][i] = s * api + c * aqi;
        }
        for (int i = 0; i < n; ++i) {
          double vip = v[i][p], viq = v[i][q];
          v[i][p] = c * vip - s * viq;
          v[i][q] = s * vip + c * viq;
        }
      }
    }
  }

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a[x][x] > a[y][y]; });

  EigenDecomp e;
  e.values.resize(n);
  e.vectors.assign(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    e.values[i] = a[order[i]][order[i]];
    for (int r = 0; r < n; ++r) e.vectors[i][r] = v[r][order[i]];
  }
  return e;
}

EigenDecomp eigen_sym(const Metric& m) {
  if (!m.has_coefficients()) throw std::runtime_error("metric carries no quadratic part");
  return eigen_sym(m.quad_full());
}

std::vector<double> coordinate_significance(const EigenDecomp& e) {
  int n = static_cast<int>(e.values.size());
  std::vector<double> w(n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) w[j] += e.values[i] * std::fabs(e.vectors[i][j]);
  return w;
}

std::vector<double> coordinate_significance(const Metric& m) {
  return coordinate_significance(eigen_sym(m));
}

std::vector<std::vector<double>> transform_coords(const Metric& m, const Dataset& d) {
  if (!m.has_coefficients())
    throw std::runtime_error("transform_coords needs a learned or euclidean metric");
  if (m.dim() != d.dim()) throw std::runtime_error("transform_coords: dimension mismatch");
  EigenDecomp e = eigen_sym(m);
  int dim = m.dim();
  std::vector<double> s(dim);
  for (int i = 0; i < dim; ++i) s[i] = std::sqrt(std::max(e.values[i], 0.0));
  std::vector<std::vector<double>> out(d.size(), std::vector<double>(dim, 0.0));
  for (int p = 0; p < d.size(); ++p) {
    for (int i = 0; i < dim; ++i) {
      out[p][i] = s[i] * kernels::dot(e.vectors[i].data(), d.points[p].data(), dim);
    }
  }
  return out;
}

}  // namespace metlearn
