#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <vector>

#include "doctest.h"
#include "stocon/kernels.hpp"
#include "stocon/rng.hpp"

using namespace stocon;

namespace {

std::vector<double> random_vec(Rng& rng, std::size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (auto& x : v) x = scale * (2.0 * rng.uniform() - 1.0);
  return v;
}

}  // namespace

TEST_CASE("dot and sum match naive loops") {
  Rng rng(7);
  for (std::size_t n : {0u, 1u, 3u, 8u, 17u, 257u}) {
    auto a = random_vec(rng, n), b = random_vec(rng, n);
    double d = 0.0, s = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      d += a[i] * b[i];
      s += a[i];
      s2 += a[i] * a[i];
    }
    CHECK(kern::dot(a.data(), b.data(), n) == doctest::Approx(d).epsilon(1e-12));
    CHECK(kern::sum(a.data(), n) == doctest::Approx(s).epsilon(1e-12));
    CHECK(kern::sumsq(a.data(), n) == doctest::Approx(s2).epsilon(1e-12));
  }
}

TEST_CASE("axpy, matvec, matvec_t, outer_acc") {
  Rng rng(8);
  const int rows = 7, cols = 13;
  auto A = random_vec(rng, rows * cols);
  auto x = random_vec(rng, cols);
  auto u = random_vec(rng, rows);

  std::vector<double> y(rows, 0.0);
  kern::matvec(A.data(), rows, cols, x.data(), y.data());
  for (int i = 0; i < rows; ++i) {
    double want = 0.0;
    for (int j = 0; j < cols; ++j) want += A[i * cols + j] * x[j];
    CHECK(y[i] == doctest::Approx(want).epsilon(1e-12));
  }

  std::vector<double> yt(cols, 0.0);
  kern::matvec_t(A.data(), rows, cols, u.data(), yt.data());
  for (int j = 0; j < cols; ++j) {
    double want = 0.0;
    for (int i = 0; i < rows; ++i) want += A[i * cols + j] * u[i];
    CHECK(yt[j] == doctest::Approx(want).epsilon(1e-12));
  }

  auto y2 = y;
  kern::axpy(0.5, x.data(), yt.data(), cols);

  auto B = A;
  kern::outer_acc(B.data(), rows, cols, 2.0, u.data(), x.data());
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      CHECK(B[i * cols + j] == doctest::Approx(A[i * cols + j] + 2.0 * u[i] * x[j]));
  (void)y2;
}

TEST_CASE("nearest returns argmin with lowest-index ties") {
  const std::vector<double> centers = {-1.0, 1.0, 1.0, 4.0};
  double best = 0.0;
  CHECK(kern::nearest(&centers[1], centers.data(), 4, 1, &best) == 1);  // exact duplicate: first
  const double q = 0.0;
  CHECK(kern::nearest(&q, centers.data(), 4, 1, &best) == 0);  // tie between -1 and 1
  CHECK(best == doctest::Approx(1.0));
  const double q2 = 3.0;
  CHECK(kern::nearest(&q2, centers.data(), 4, 1, &best) == 3);
}

TEST_CASE("two_nearest orders by distance") {
  const std::vector<double> centers = {0.0, 1.0, 10.0};
  std::size_t idx[2];
  double sq[2];
  const double q = 1.5;
  kern::two_nearest(&q, centers.data(), 3, 1, idx, sq);
  CHECK(idx[0] == 1);
  CHECK(idx[1] == 0);
  CHECK(sq[0] == doctest::Approx(0.25));
  CHECK(sq[1] == doctest::Approx(2.25));
}

TEST_CASE("scalar and vector implementations agree") {
  if (!kern::avx2_available()) return;
  Rng rng(9);
  const int rows = 11, cols = 29;
  auto A = random_vec(rng, rows * cols);
  auto x = random_vec(rng, cols);
  auto u = random_vec(rng, rows);
  auto big = random_vec(rng, 1000);
  auto big2 = random_vec(rng, 1000);

  auto run_all = [&] {
    struct Out {
      double dot, sum, sumsq, sqdist;
      std::vector<double> mv, mvt, outer, ax;
      std::size_t near;
    } o;
    o.dot = kern::dot(big.data(), big2.data(), big.size());
    o.sum = kern::sum(big.data(), big.size());
    o.sumsq = kern::sumsq(big.data(), big.size());
    o.sqdist = kern::sqdist(big.data(), big2.data(), big.size());
    o.mv.assign(rows, 0.0);
    kern::matvec(A.data(), rows, cols, x.data(), o.mv.data());
    o.mvt.assign(cols, 0.0);
    kern::matvec_t(A.data(), rows, cols, u.data(), o.mvt.data());
    o.outer = A;
    kern::outer_acc(o.outer.data(), rows, cols, 1.5, u.data(), x.data());
    o.ax = big;
    kern::axpy(-0.3, big2.data(), o.ax.data(), big.size());
    double bsq;
    o.near = kern::nearest(big2.data(), big.data(), big.size(), 1, &bsq);
    return o;
  };

  kern::select(kern::Isa::Scalar);
  auto s = run_all();
  kern::select(kern::Isa::Avx2);
  auto v = run_all();
  kern::select(kern::Isa::Auto);

  CHECK(s.dot == doctest::Approx(v.dot).epsilon(1e-12));
  CHECK(s.sum == doctest::Approx(v.sum).epsilon(1e-12));
  CHECK(s.sumsq == doctest::Approx(v.sumsq).epsilon(1e-12));
  CHECK(s.sqdist == doctest::Approx(v.sqdist).epsilon(1e-12));
  CHECK(s.near == v.near);
  for (int i = 0; i < rows; ++i) CHECK(s.mv[i] == doctest::Approx(v.mv[i]).epsilon(1e-12));
  for (int j = 0; j < cols; ++j) CHECK(s.mvt[j] == doctest::Approx(v.mvt[j]).epsilon(1e-12));
  for (std::size_t i = 0; i < s.outer.size(); ++i)
    CHECK(s.outer[i] == doctest::Approx(v.outer[i]).epsilon(1e-12));
  for (std::size_t i = 0; i < s.ax.size(); ++i)
    CHECK(s.ax[i] == doctest::Approx(v.ax[i]).epsilon(1e-12));
}
