#pragma once

// Dense double-precision kernels used by the simplex tableau updates and the
// metric evaluation paths. Scalar reference implementations are always built;
// AVX2 (x86-64) and NEON (aarch64) variants live in separate translation
// units and are selected at runtime from CPU capabilities. The scalar kernels
// are the semantic reference: SIMD variants must agree with them up to
// floating-point reassociation.

#include <cstddef>
#include <string>

namespace metlearn::kernels {

enum class Backend { kScalar, kAvx2, kNeon };

// Backend currently used by the dispatching entry points below.
Backend active_backend();
const char* backend_name(Backend b);

// Select a backend by name: "auto", "scalar", "avx2", "neon".
// Throws std::invalid_argument for unknown names and std::runtime_error when
// the requested backend is not available on this host.
void set_backend(const std::string& name);

// y' = sum_i x[i]*y[i]
double dot(const double* x, const double* y, std::size_t n);
// y[i] += a*x[i]
void axpy(double a, const double* x, double* y, std::size_t n);
// x[i] *= a
void scale(double a, double* x, std::size_t n);
// out[i] = |x[i] - y[i]|
void abs_diff(const double* x, const double* y, double* out, std::size_t n);
// max_i |x[i]|, 0 for n = 0
double max_abs(const double* x, std::size_t n);

namespace scalar {
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
void abs_diff(const double* x, const double* y, double* out, std::size_t n);
double max_abs(const double* x, std::size_t n);
}  // namespace scalar

#if defined(METLEARN_HAVE_AVX2_TU)
namespace avx2 {
bool supported();
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
void abs_diff(const double* x, const double* y, double* out, std::size_t n);
double max_abs(const double* x, std::size_t n);
}  // namespace avx2
#endif

#if defined(METLEARN_HAVE_NEON_TU)
namespace neon {
bool supported();
double dot(const double* x, const double* y, std::size_t n);
void axpy(double a, const double* x, double* y, std::size_t n);
void scale(double a, double* x, std::size_t n);
void abs_diff(const double* x, const double* y, double* out, std::size_t n);
double max_abs(const double* x, std::size_t n);
}  // namespace neon
#endif

}  // namespace metlearn::kernels
