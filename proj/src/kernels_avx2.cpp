// AVX2+FMA kernel variants. This translation unit is the only one compiled
// with -mavx2 -mfma; callers go through the dispatch table so the binary
// still runs on plain SSE hardware.

#include "stocon/kernels.hpp"

#if defined(__AVX2__)

#include <immintrin.h>

#include <limits>

namespace stocon::kern::detail {
namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d swapped = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

double dot_v(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4)
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void axpy_v(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d vy = _mm256_loadu_pd(y + i);
    vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
    _mm256_storeu_pd(y + i, vy);
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void matvec_v(const double* a, std::size_t rows, std::size_t cols,
              const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_v(a + r * cols, x, cols);
}

void matvec_t_v(const double* a, std::size_t rows, std::size_t cols,
                const double* x, double* y) {
  for (std::size_t c = 0; c < cols; ++c) y[c] = 0.0;
  for (std::size_t r = 0; r < rows; ++r) axpy_v(x[r], a + r * cols, y, cols);
}

void outer_acc_v(double* a, std::size_t rows, std::size_t cols, double alpha,
                 const double* u, const double* v) {
  for (std::size_t r = 0; r < rows; ++r) axpy_v(alpha * u[r], v, a + r * cols, cols);
}

double sum_v(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i];
  return s;
}

double sumsq_v(const double* x, std::size_t n) { return dot_v(x, x, n); }

double sqdist_v(const double* a, const double* b, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

// 1-D centers scanned four at a time; higher dimensions reuse sqdist per
// center. Tie rule (lowest index wins) is preserved by the strict compare
// on the lane-reduced candidates.
std::size_t nearest_v(const double* q, const double* centers, std::size_t k,
                      std::size_t d, double* best_sq) {
  std::size_t best = 0;
  double bd = std::numeric_limits<double>::infinity();
  if (d == 1) {
    const __m256d vq = _mm256_set1_pd(q[0]);
    std::size_t i = 0;
    for (; i + 4 <= k; i += 4) {
      const __m256d diff = _mm256_sub_pd(_mm256_loadu_pd(centers + i), vq);
      const __m256d sq = _mm256_mul_pd(diff, diff);
      alignas(32) double lane[4];
      _mm256_store_pd(lane, sq);
      for (int j = 0; j < 4; ++j) {
        if (lane[j] < bd) {
          bd = lane[j];
          best = i + static_cast<std::size_t>(j);
        }
      }
    }
    for (; i < k; ++i) {
      const double diff = centers[i] - q[0];
      const double sq = diff * diff;
      if (sq < bd) {
        bd = sq;
        best = i;
      }
    }
  } else {
    for (std::size_t i = 0; i < k; ++i) {
      const double sq = sqdist_v(q, centers + i * d, d);
      if (sq < bd) {
        bd = sq;
        best = i;
      }
    }
  }
  if (best_sq) *best_sq = bd;
  return best;
}

}  // namespace

const Impl& avx2_impl() {
  static const Impl impl{dot_v,   axpy_v,  matvec_v, matvec_t_v, outer_acc_v,
                         sum_v,   sumsq_v, sqdist_v, nearest_v};
  return impl;
}

}  // namespace stocon::kern::detail

#else

namespace stocon::kern::detail {
const Impl& avx2_impl() { return scalar_impl(); }
}  // namespace stocon::kern::detail

#endif
