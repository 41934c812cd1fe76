#include "metlearn/kernels.hpp"

#include <cmath>
#include <stdexcept>

namespace metlearn::kernels {

namespace scalar {

double dot(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

void axpy(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void scale(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}

void abs_diff(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::fabs(x[i] - y[i]);
}

double max_abs(const double* x, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double v = std::fabs(x[i]);
    if (v > m) m = v;
  }
  return m;
}

}  // namespace scalar

namespace {

struct Ops {
  Backend backend;
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*scale)(double, double*, std::size_t);
  void (*abs_diff)(const double*, const double*, double*, std::size_t);
  double (*max_abs)(const double*, std::size_t);
};

constexpr Ops kScalarOps{Backend::kScalar, scalar::dot,      scalar::axpy,
                         scalar::scale,    scalar::abs_diff, scalar::max_abs};

#if defined(METLEARN_HAVE_AVX2_TU)
constexpr Ops kAvx2Ops{Backend::kAvx2, avx2::dot,      avx2::axpy,
                       avx2::scale,    avx2::abs_diff, avx2::max_abs};
#endif
#if defined(METLEARN_HAVE_NEON_TU)
constexpr Ops kNeonOps{Backend::kNeon, neon::dot,      neon::axpy,
                       neon::scale,    neon::abs_diff, neon::max_abs};
#endif

Ops detect_best() {
#if defined(METLEARN_HAVE_AVX2_TU)
  if (avx2::supported()) return kAvx2Ops;
#endif
#if defined(METLEARN_HAVE_NEON_TU)
  if (neon::supported()) return kNeonOps;
#endif
  return kScalarOps;
}

Ops g_ops = detect_best();

}  // namespace

Backend active_backend() { return g_ops.backend; }

const char* backend_name(Backend b) {
  switch (b) {
    case Backend::kScalar: return "scalar";
    case Backend::kAvx2: return "avx2";
    case Backend::kNeon: return "neon";
  }
  return "unknown";
}

void set_backend(const std::string& name) {
  if (name == "auto") {
    g_ops = detect_best();
    return;
  }
  if (name == "scalar") {
    g_ops = kScalarOps;
    return;
  }
  if (name == "avx2") {
#if defined(METLEARN_HAVE_AVX2_TU)
    if (avx2::supported()) {
      g_ops = kAvx2Ops;
      return;
    }
#endif
    throw std::runtime_error("avx2 kernels not available on this host");
  }
  if (name == "neon") {
#if defined(METLEARN_HAVE_NEON_TU)
    if (neon::supported()) {
      g_ops = kNeonOps;
      return;
    }
#endif
    throw std::runtime_error("neon kernels not available on this host");
  }
  throw std::invalid_argument("unknown kernel backend: " + name);
}

double dot(const double* x, const double* y, std::size_t n) { return g_ops.dot(x, y, n); }
void axpy(double a, const double* x, double* y, std::size_t n) { g_ops.axpy(a, x, y, n); }
void scale(double a, double* x, std::size_t n) { g_ops.scale(a, x, n); }
void abs_diff(const double* x, const double* y, double* out, std::size_t n) {
  g_ops.abs_diff(x, y, out, n);
}
double max_abs(const double* x, std::size_t n) { return g_ops.max_abs(x, n); }

}  // namespace metlearn::kernels
