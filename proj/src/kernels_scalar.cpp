#include "stocon/kernels.hpp"

#include <limits>

namespace stocon::kern::detail {
namespace {

double dot_s(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_s(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void matvec_s(const double* a, std::size_t rows, std::size_t cols,
              const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_s(a + r * cols, x, cols);
}

void matvec_t_s(const double* a, std::size_t rows, std::size_t cols,
                const double* x, double* y) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) axpy_s(x[r], a + r * cols, y, cols);
}

void outer_acc_s(double* a, std::size_t rows, std::size_t cols, double alpha,
                 const double* u, const double* v) {
  for (std::size_t r = 0; r < rows; ++r) axpy_s(alpha * u[r], v, a + r * cols, cols);
}

double sum_s(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sumsq_s(const double* x, std::size_t n) { return dot_s(x, x, n); }

double sqdist_s(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return acc;
}

std::size_t nearest_s(const double* q, const double* centers, std::size_t k,
                      std::size_t d, double* best_sq) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < k; ++i) {
    const double sq = sqdist_s(q, centers + i * d, d);
    if (sq < bd) {
      bd = sq;
      best = i;
    }
  }
  if (best_sq) *best_sq = bd;
  return best;
}

}  // namespace

const Impl& scalar_impl() {
  static const Impl impl{dot_s,   axpy_s,  matvec_s, matvec_t_s, outer_acc_s,
                         sum_s,   sumsq_s, sqdist_s, nearest_s};
  return impl;
}

}  // namespace stocon::kern::detail
