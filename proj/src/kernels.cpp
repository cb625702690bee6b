#include "stocon/kernels.hpp"

#include <limits>
#include <utility>

namespace stocon::kern {
namespace {

const detail::Impl* g_impl = nullptr;
Isa g_isa = Isa::Scalar;

void resolve(Isa isa) {
  if (isa == Isa::Auto) isa = avx2_available() ? Isa::Avx2 : Isa::Scalar;
  if (isa == Isa::Avx2 && !avx2_available()) isa = Isa::Scalar;
  g_isa = isa;
  g_impl = (isa == Isa::Avx2) ? &detail::avx2_impl() : &detail::scalar_impl();
}

const detail::Impl& impl() {
  if (!g_impl) resolve(Isa::Auto);
  return *g_impl;
}

}  // namespace

bool avx2_available() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

void select(Isa isa) { resolve(isa); }

Isa active() {
  impl();
  return g_isa;
}

const char* active_name() { return active() == Isa::Avx2 ? "avx2" : "scalar"; }

double dot(const double* a, const double* b, std::size_t n) { return impl().dot(a, b, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) { impl().axpy(alpha, x, y, n); }
void matvec(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  impl().matvec(a, rows, cols, x, y);
}
void matvec_t(const double* a, std::size_t rows, std::size_t cols, const double* x, double* y) {
  impl().matvec_t(a, rows, cols, x, y);
}
void outer_acc(double* a, std::size_t rows, std::size_t cols, double alpha, const double* u,
               const double* v) {
  impl().outer_acc(a, rows, cols, alpha, u, v);
}
double sum(const double* x, std::size_t n) { return impl().sum(x, n); }
double sumsq(const double* x, std::size_t n) { return impl().sumsq(x, n); }
double sqdist(const double* a, const double* b, std::size_t n) { return impl().sqdist(a, b, n); }
std::size_t nearest(const double* q, const double* centers, std::size_t k, std::size_t d,
                    double* best_sq) {
  return impl().nearest(q, centers, k, d, best_sq);
}

void two_nearest(const double* q, const double* centers, std::size_t k, std::size_t d,
                 std::size_t idx[2], double sq[2]) {
  double b0 = std::numeric_limits<double>::infinity();
  double b1 = std::numeric_limits<double>::infinity();
  std::size_t i0 = 0, i1 = 0;
  for (std::size_t i = 0; i < k; ++i) {
    const double s = impl().sqdist(q, centers + i * d, d);
    if (s < b0) {
      b1 = b0;
      i1 = i0;
      b0 = s;
      i0 = i;
    } else if (s < b1) {
      b1 = s;
      i1 = i;
    }
  }
  idx[0] = i0;
  idx[1] = i1;
  sq[0] = b0;
  sq[1] = b1;
}

}  // namespace stocon::kern
