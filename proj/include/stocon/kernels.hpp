#pragma once

#include <cstddef>
#include <cstdint>

// Dense numeric inner loops used by the networks, the quantizer and the
// grid solvers. Every entry point has a scalar reference implementation
// and an AVX2+FMA variant; the active one is picked at runtime (or forced
// through select(), e.g. from the CLI config).

namespace stocon::kern {

enum class Isa { Auto, Scalar, Avx2 };

bool avx2_available();
void select(Isa isa);          // Auto resolves to the best available
Isa active();                  // never returns Auto
const char* active_name();

double dot(const double* a, const double* b, std::size_t n);

// y += alpha * x
void axpy(double alpha, const double* x, double* y, std::size_t n);

// Row-major A (rows x cols): y = A x, y' = A^T x
void matvec(const double* a, std::size_t rows, std::size_t cols,
            const double* x, double* y);
void matvec_t(const double* a, std::size_t rows, std::size_t cols,
              const double* x, double* y);

// A += alpha * u v^T  (A row-major rows x cols, u rows, v cols)
void outer_acc(double* a, std::size_t rows, std::size_t cols, double alpha,
               const double* u, const double* v);

double sum(const double* x, std::size_t n);
double sumsq(const double* x, std::size_t n);
double sqdist(const double* a, const double* b, std::size_t n);

// Index of the center closest to q (K centers of dimension d, contiguous
// row-major). Ties resolve to the lowest index. best_sq may be null.
std::size_t nearest(const double* q, const double* centers, std::size_t k,
                    std::size_t d, double* best_sq);

// Two closest centers, idx[0] the closer one. Requires k >= 2.
void two_nearest(const double* q, const double* centers, std::size_t k,
                 std::size_t d, std::size_t idx[2], double sq[2]);

namespace detail {
struct Impl {
  double (*dot)(const double*, const double*, std::size_t);
  void (*axpy)(double, const double*, double*, std::size_t);
  void (*matvec)(const double*, std::size_t, std::size_t, const double*, double*);
  void (*matvec_t)(const double*, std::size_t, std::size_t, const double*, double*);
  void (*outer_acc)(double*, std::size_t, std::size_t, double, const double*, const double*);
  double (*sum)(const double*, std::size_t);
  double (*sumsq)(const double*, std::size_t);
  double (*sqdist)(const double*, const double*, std::size_t);
  std::size_t (*nearest)(const double*, const double*, std::size_t, std::size_t, double*);
};
const Impl& scalar_impl();
const Impl& avx2_impl();   // only valid to call through if avx2_available()
}  // namespace detail

}  // namespace stocon::kern
