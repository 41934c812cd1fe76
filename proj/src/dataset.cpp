#include "metlearn/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "metlearn/kernels.hpp"
#include "metlearn/rng.hpp"

namespace metlearn {

namespace {

void check_rect(const std::vector<std::vector<double>>& pts) {
  if (pts.empty()) throw std::runtime_error("no records");
  std::size_t d = pts.front().size();
  if (d == 0) throw std::runtime_error("points must have dimension >= 1");
  for (const auto& p : pts) {
    if (p.size() != d) throw std::runtime_error("points have inconsistent dimensions");
  }
}

}  // namespace

Dataset Dataset::build(std::vector<std::vector<double>> pts, std::vector<std::string> labels,
                       std::string name) {
  check_rect(pts);
  if (labels.size() != pts.size()) throw std::runtime_error("label count != point count");
  std::vector<int> ids(labels.size());
  std::vector<std::string> names;
  std::map<std::string, int> seen;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = seen.find(labels[i]);
    if (it == seen.end()) {
      it = seen.emplace(labels[i], static_cast<int>(names.size())).first;
      names.push_back(labels[i]);
    }
    ids[i] = it->second;
  }
  return build_with_ids(std::move(pts), std::move(ids), std::move(names), std::move(name));
}

Dataset Dataset::build_with_ids(std::vector<std::vector<double>> pts, std::vector<int> ids,
                                std::vector<std::string> label_names, std::string name) {
  check_rect(pts);
  if (ids.size() != pts.size()) throw std::runtime_error("label count != point count");
  Dataset d;
  d.points = std::move(pts);
  d.labels = std::move(ids);
  d.label_names = std::move(label_names);
  d.name = std::move(name);
  d.class_index.assign(d.label_names.size(), {});
  for (std::size_t i = 0; i < d.labels.size(); ++i) {
    int c = d.labels[i];
    if (c < 0 || c >= static_cast<int>(d.class_index.size()))
      throw std::runtime_error("label id out of range");
    d.class_index[c].push_back(static_cast<int>(i));
  }
  return d;
}

std::vector<std::pair<int, int>> Dataset::cross_class_duplicates() const {
  std::vector<std::pair<int, int>> dups;
  int n = size();
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (labels[i] == labels[j]) continue;
      if (points[i] == points[j]) dups.emplace_back(i, j);
    }
  }
  return dups;
}

std::vector<double> NormParams::apply(const std::vector<double>& x) const {
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    out[j] = range[j] > 0 ? (x[j] - min[j]) / range[j] : 0.0;
  }
  return out;
}

std::vector<double> NormParams::invert(const std::vector<double>& x) const {
  std::vector<double> out(x.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    out[j] = min[j] + x[j] * range[j];
  }
  return out;
}

std::pair<Dataset, NormParams> normalize(const Dataset& d) {
  if (d.size() < 1) throw std::runtime_error("cannot normalize an empty dataset");
  int dim = d.dim();
  NormParams p;
  p.min.assign(dim, 0.0);
  p.range.assign(dim, 0.0);
  for (int j = 0; j < dim; ++j) {
    double lo = d.points[0][j], hi = d.points[0][j];
    for (const auto& pt : d.points) {
      lo = std::min(lo, pt[j]);
      hi = std::max(hi, pt[j]);
    }
    p.min[j] = lo;
    p.range[j] = hi - lo;
  }
  return {apply_norm(d, p), p};
}

Dataset apply_norm(const Dataset& d, const NormParams& p) {
  if (d.dim() != p.dim()) throw std::runtime_error("normalization dimension mismatch");
  Dataset out = d;
  for (auto& pt : out.points) pt = p.apply(pt);
  return out;
}

std::size_t DeltaCache::pair_index(int i, int j) const {
  if (i == j) throw std::logic_error("delta cache has no self pairs");
  if (i > j) std::swap(i, j);
  return static_cast<std::size_t>(i) * n - static_cast<std::size_t>(i) * (i + 1) / 2 + (j - i - 1);
}

DeltaCache build_delta_cache(const Dataset& d) {
  DeltaCache c;
  c.n = d.size();
  c.dim = d.dim();
  c.qdim = c.dim * (c.dim + 1) / 2;
  std::size_t pairs = static_cast<std::size_t>(c.n) * (c.n - 1) / 2;
  c.abs_delta.resize(pairs * c.dim);
  c.quad.resize(pairs * c.qdim);
  c.euclid.resize(pairs);
  std::size_t k = 0;
  for (int i = 0; i < c.n; ++i) {
    for (int j = i + 1; j < c.n; ++j, ++k) {
      double* ad = &c.abs_delta[k * c.dim];
      kernels::abs_diff(d.points[i].data(), d.points[j].data(), ad, c.dim);
      c.euclid[k] = std::sqrt(kernels::dot(ad, ad, c.dim));
      double* q = &c.quad[k * c.qdim];
      int t = 0;
      for (int p = 0; p < c.dim; ++p) {
        double dp = d.points[i][p] - d.points[j][p];
        for (int r = p; r < c.dim; ++r, ++t) {
          double dr = d.points[i][r] - d.points[j][r];
          q[t] = (p == r) ? dp * dr : 2.0 * dp * dr;
        }
      }
    }
  }
  return c;
}

SynthKind synth_kind_from_string(const std::string& s) {
  if (s == "two-lines") return SynthKind::kTwoLines;
  if (s == "gaussian-blobs") return SynthKind::kGaussianBlobs;
  if (s == "nonconvex-rings") return SynthKind::kNonconvexRings;
  if (s == "stripes-6d") return SynthKind::kStripes6d;
  if (s == "outlier-injected") return SynthKind::kOutlierInjected;
  throw std::runtime_error("unknown generator kind: " + s);
}

std::string to_string(SynthKind k) {
  switch (k) {
    case SynthKind::kTwoLines: return "two-lines";
    case SynthKind::kGaussianBlobs: return "gaussian-blobs";
    case SynthKind::kNonconvexRings: return "nonconvex-rings";
    case SynthKind::kStripes6d: return "stripes-6d";
    case SynthKind::kOutlierInjected: return "outlier-injected";
  }
  return "?";
}

namespace {

// Class centers for blob-style generators, spread over the unit square.
std::vector<std::vector<double>> blob_centers(int classes) {
  if (classes == 2) return {{0.25, 0.25}, {0.75, 0.75}};
  if (classes == 3) return {{0.2, 0.2}, {0.8, 0.2}, {0.5, 0.8}};
  std::vector<std::vector<double>> centers;
  for (int c = 0; c < classes; ++c) {
    double ang = 2.0 * M_PI * c / classes;
    centers.push_back({0.5 + 0.35 * std::cos(ang), 0.5 + 0.35 * std::sin(ang)});
  }
  return centers;
}

Dataset gen_two_lines(const SynthSpec& s, Rng& rng) {
  // Two horizontal noisy rows. Within each row the vertical offsets cycle
  // through a few discrete levels so that the rows have vertical thickness
  // much larger than the separating gap; the second row's x grid is offset by
  // half a spacing so that plain Euclidean nearest neighbors cross the gap.
  const int n = s.points_per_class;
  const double gap = 0.04;
  const double band = 12.0 * gap;
  const int levels = 5;
  const double level_h = band / (levels - 1);
  const double jitter = 0.002 * s.noise;
  std::vector<std::vector<double>> pts;
  std::vector<std::string> labels;
  for (int cls = 0; cls < 2; ++cls) {
    double y0 = cls == 0 ? 0.0 : band + gap;
    for (int i = 0; i < n; ++i) {
      double x = (i + 0.5 + 0.5 * cls) / n + jitter * rng.normal();
      double y = y0 + (i % levels) * level_h + jitter * rng.normal();
      pts.push_back({x, y});
      labels.push_back(cls == 0 ? "lower" : "upper");
    }
  }
  return Dataset::build(std::move(pts), std::move(labels), "two-lines");
}

Dataset gen_blobs(const SynthSpec& s, Rng& rng) {
  auto centers = blob_centers(s.classes);
  double sigma = 0.04 * s.noise;
  std::vector<std::vector<double>> pts;
  std::vector<std::string> labels;
  for (int c = 0; c < s.classes; ++c) {
    for (int i = 0; i < s.points_per_class; ++i) {
      pts.push_back({centers[c][0] + sigma * rng.normal(), centers[c][1] + sigma * rng.normal()});
      labels.push_back("c" + std::to_string(c));
    }
  }
  return Dataset::build(std::move(pts), std::move(labels), "gaussian-blobs");
}

Dataset gen_rings(const SynthSpec& s, Rng& rng) {
  // Concentric elliptical annuli; non-convex class regions.
  const double aspect = 0.45;
  std::vector<std::vector<double>> pts;
  std::vector<std::string> labels;
  for (int c = 0; c < s.classes; ++c) {
    double r0 = 0.16 + 0.18 * c;
    double width = 0.06 + 0.02 * c;
    for (int i = 0; i < s.points_per_class; ++i) {
      double theta = 2.0 * M_PI * (i + 0.3 * rng.uniform()) / s.points_per_class;
      double r = r0 + width * rng.uniform();
      pts.push_back({0.5 + r * std::cos(theta) + 0.002 * s.noise * rng.normal(),
                     0.5 + aspect * r * std::sin(theta) + 0.002 * s.noise * rng.normal()});
      labels.push_back("ring" + std::to_string(c));
    }
  }
  return Dataset::build(std::move(pts), std::move(labels), "nonconvex-rings");
}

Dataset gen_stripes6d(const SynthSpec& s, Rng& rng) {
  // Six features: the first four are tight around class-specific values, the
  // last two are unstructured noise shared by all classes.
  const int dim = 6;
  const int informative = 4;
  int classes = s.classes;
  std::vector<std::vector<double>> pts;
  std::vector<std::string> labels;
  for (int c = 0; c < classes; ++c) {
    std::vector<double> mu(dim, 0.0);
    for (int j = 0; j < informative; ++j) {
      mu[j] = (1.0 + ((c + j) % classes)) / (classes + 1.0);
    }
    for (int i = 0; i < s.points_per_class; ++i) {
      std::vector<double> p(dim);
      for (int j = 0; j < informative; ++j) p[j] = mu[j] + 0.02 * s.noise * rng.normal();
      for (int j = informative; j < dim; ++j) p[j] = rng.uniform();
      pts.push_back(std::move(p));
      labels.push_back("s" + std::to_string(c));
    }
  }
  return Dataset::build(std::move(pts), std::move(labels), "stripes-6d");
}

Dataset gen_outlier_injected(const SynthSpec& s, Rng& rng) {
  Dataset base = gen_blobs(s, rng);
  if (s.flip_count > s.points_per_class * (s.classes - 1))
    throw std::runtime_error("flip count exceeds available points");
  auto centers = blob_centers(s.classes);
  // Relabel points generated by a foreign blob, pulling them part of the way
  // back toward their labeled class so the contamination depth is tunable.
  std::vector<int> ids = base.labels;
  for (int f = 0; f < s.flip_count; ++f) {
    int home = f % s.classes;             // label the flipped point will carry
    int foreign = (home + 1) % s.classes; // blob that generates its position
    int victim = base.class_index[foreign][f / s.classes];
    ids[victim] = home;
    for (int j = 0; j < 2; ++j) {
      double pos = centers[foreign][j] + s.flip_depth * (centers[home][j] - centers[foreign][j]);
      base.points[victim][j] = pos + 0.01 * s.noise * rng.normal();
    }
  }
  return Dataset::build_with_ids(std::move(base.points), std::move(ids),
                                 std::move(base.label_names), "outlier-injected");
}

}  // namespace

Dataset synth_generate(const SynthSpec& spec) {
  if (spec.points_per_class < 1) throw std::runtime_error("points per class must be >= 1");
  if (spec.classes < 1) throw std::runtime_error("class count must be >= 1");
  Rng rng(spec.seed);
  switch (spec.kind) {
    case SynthKind::kTwoLines: return gen_two_lines(spec, rng);
    case SynthKind::kGaussianBlobs: return gen_blobs(spec, rng);
    case SynthKind::kNonconvexRings: return gen_rings(spec, rng);
    case SynthKind::kStripes6d: return gen_stripes6d(spec, rng);
    case SynthKind::kOutlierInjected: return gen_outlier_injected(spec, rng);
  }
  throw std::runtime_error("unknown generator kind");
}

std::pair<Dataset, Dataset> split(const Dataset& d, double train_fraction, std::uint64_t seed,
                                  std::vector<std::string>* warnings) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw std::runtime_error("train fraction must be in (0, 1)");
  Rng rng(seed);
  std::vector<int> train_ids, test_ids;
  for (int c = 0; c < d.num_classes(); ++c) {
    std::vector<int> members = d.class_index[c];
    int n = static_cast<int>(members.size());
    if (n == 0) continue;
    if (n == 1) {
      if (warnings)
        warnings->push_back("class '" + d.label_names[c] + "' has a single point; kept in train");
      train_ids.push_back(members[0]);
      continue;
    }
    rng.shuffle(members);
    int want = static_cast<int>(std::llround(train_fraction * n));
    int take = std::clamp(want, 1, n - 1);
    if (take != want && warnings)
      warnings->push_back("class '" + d.label_names[c] + "': train share clamped to " +
                          std::to_string(take) + "/" + std::to_string(n));
    for (int i = 0; i < n; ++i) (i < take ? train_ids : test_ids).push_back(members[i]);
  }
  if (train_ids.empty() || test_ids.empty())
    throw std::runtime_error("split leaves an empty side");
  std::sort(train_ids.begin(), train_ids.end());
  std::sort(test_ids.begin(), test_ids.end());
  auto take_subset = [&](const std::vector<int>& ids, const std::string& suffix) {
    std::vector<std::vector<double>> pts;
    std::vector<int> lab;
    pts.reserve(ids.size());
    for (int i : ids) {
      pts.push_back(d.points[i]);
      lab.push_back(d.labels[i]);
    }
    return Dataset::build_with_ids(std::move(pts), std::move(lab), d.label_names,
                                   d.name + suffix);
  };
  return {take_subset(train_ids, "/train"), take_subset(test_ids, "/test")};
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  cells.push_back(cur);
  return cells;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& s, double* out) {
  const std::string t = trim(s);
  if (t.empty()) return false;
  char* end = nullptr;
  *out = std::strtod(t.c_str(), &end);
  return end == t.c_str() + t.size();
}

}  // namespace

Dataset load_csv(const std::string& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("no records in " + path);
  std::vector<std::string> header = split_csv_line(line);
  for (auto& h : header) h = trim(h);
  for (std::size_t a = 0; a < header.size(); ++a)
    for (std::size_t b = a + 1; b < header.size(); ++b)
      if (header[a] == header[b])
        throw std::runtime_error("duplicate header name '" + header[a] + "' in " + path);

  int label_idx = -1;
  for (std::size_t j = 0; j < header.size(); ++j)
    if (header[j] == label_column) label_idx = static_cast<int>(j);
  if (label_idx < 0) {
    // Fall back to interpreting the selector as a 0-based column index.
    char* end = nullptr;
    long v = std::strtol(label_column.c_str(), &end, 10);
    if (end == label_column.c_str() + label_column.size() && v >= 0 &&
        v < static_cast<long>(header.size())) {
      label_idx = static_cast<int>(v);
    } else {
      throw std::runtime_error("label column '" + label_column + "' not found in " + path);
    }
  }

  std::vector<std::vector<double>> pts;
  std::vector<std::string> labels;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw std::runtime_error(path + ":" + std::to_string(row) + ": expected " +
                               std::to_string(header.size()) + " cells, got " +
                               std::to_string(cells.size()));
    std::vector<double> pt;
    pt.reserve(header.size() - 1);
    for (std::size_t j = 0; j < cells.size(); ++j) {
      if (static_cast<int>(j) == label_idx) continue;
      double v = 0;
      if (!parse_double(cells[j], &v))
        throw std::runtime_error(path + ":" + std::to_string(row) + ": non-numeric cell in column '" +
                                 header[j] + "'");
      pt.push_back(v);
    }
    pts.push_back(std::move(pt));
    labels.push_back(trim(cells[label_idx]));
  }
  if (pts.empty()) throw std::runtime_error("no records in " + path);
  return Dataset::build(std::move(pts), std::move(labels), path);
}

Dataset load_libsvm(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::vector<std::string> labels;
  std::vector<std::vector<std::pair<int, double>>> sparse;
  int max_index = 0;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    std::string t = trim(line);
    if (t.empty()) continue;
    std::istringstream ss(t);
    std::string label;
    ss >> label;
    std::vector<std::pair<int, double>> feats;
    std::string tok;
    int prev = 0;
    while (ss >> tok) {
      std::size_t colon = tok.find(':');
      if (colon == std::string::npos)
        throw std::runtime_error(path + ":" + std::to_string(row) + ": malformed entry '" + tok + "'");
      double idx_d = 0, val = 0;
      if (!parse_double(tok.substr(0, colon), &idx_d) || !parse_double(tok.substr(colon + 1), &val))
        throw std::runtime_error(path + ":" + std::to_string(row) + ": malformed entry '" + tok + "'");
      int idx = static_cast<int>(idx_d);
      if (idx < 1 || idx_d != idx)
        throw std::runtime_error(path + ":" + std::to_string(row) + ": index must be a positive integer");
      if (idx <= prev)
        throw std::runtime_error(path + ":" + std::to_string(row) + ": indices must be ascending");
      prev = idx;
      feats.emplace_back(idx, val);
      max_index = std::max(max_index, idx);
    }
    labels.push_back(label);
    sparse.push_back(std::move(feats));
  }
  if (sparse.empty()) throw std::runtime_error("no records in " + path);
  std::vector<std::vector<double>> pts(sparse.size(), std::vector<double>(max_index, 0.0));
  for (std::size_t i = 0; i < sparse.size(); ++i)
    for (auto& [idx, val] : sparse[i]) pts[i][idx - 1] = val;
  return Dataset::build(std::move(pts), std::move(labels), path);
}

void write_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write file: " + path);
  out.precision(17);
  for (int j = 0; j < d.dim(); ++j) out << "f" << (j + 1) << ",";
  out << "label\n";
  for (int i = 0; i < d.size(); ++i) {
    for (double v : d.points[i]) out << v << ",";
    out << d.label_names[d.labels[i]] << "\n";
  }
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace metlearn
