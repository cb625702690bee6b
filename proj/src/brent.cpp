#include "stocon/brent.hpp"

#include <algorithm>
#include <cmath>

#include "stocon/mdp.hpp"

namespace stocon {

namespace {

constexpr double kGolden = 0.3819660112501051;  // (3 - sqrt(5)) / 2

// Brent's localmin on [a, b] starting from x0 with f(x0) = f0 known.
BrentResult localmin(const std::function<double(double)>& fn, double a, double b, double x0,
                     double f0, double tol) {
  double x = x0, w = x0, v = x0;
  double fx = f0, fw = f0, fv = f0;
  double d = 0.0, e = 0.0;
  for (int iter = 0; iter < 200; ++iter) {
    const double m = 0.5 * (a + b);
    const double tol1 = tol * std::abs(x) + 1e-12;
    const double tol2 = 2.0 * tol1;
    if (std::abs(x - m) <= tol2 - 0.5 * (b - a)) break;
    bool golden = true;
    if (std::abs(e) > tol1) {
      const double r = (x - w) * (fx - fv);
      double q = (x - v) * (fx - fw);
      double p = (x - v) * q - (x - w) * r;
      q = 2.0 * (q - r);
      if (q > 0.0) p = -p;
      q = std::abs(q);
      const double etemp = e;
      e = d;
      if (std::abs(p) < std::abs(0.5 * q * etemp) && p > q * (a - x) && p < q * (b - x)) {
        d = p / q;
        const double u = x + d;
        if (u - a < tol2 || b - u < tol2) d = std::copysign(tol1, m - x);
        golden = false;
      }
    }
    if (golden) {
      e = (x < m ? b : a) - x;
      d = kGolden * e;
    }
    const double u = std::abs(d) >= tol1 ? x + d : x + std::copysign(tol1, d);
    const double fu = fn(u);
    if (fu <= fx) {
      if (u < x)
        b = x;
      else
        a = x;
      v = w;
      fv = fw;
      w = x;
      fw = fx;
      x = u;
      fx = fu;
    } else {
      if (u < x)
        a = u;
      else
        b = u;
      if (fu <= fw || w == x) {
        v = w;
        fv = fw;
        w = u;
        fw = fu;
      } else if (fu <= fv || v == x || v == w) {
        v = u;
        fv = fu;
      }
    }
  }
  return {x, fx};
}

}  // namespace

BrentResult brent_minimize(const std::function<double(double)>& fn, double lower, double upper,
                           double tol, int multistart) {
  if (!(lower < upper)) {
    if (lower == upper) return {lower, fn(lower)};
    throw SolverError("brent_minimize: empty interval");
  }
  const int m = std::max(2, multistart);
  int best = 0;
  double bestf = 0.0;
  Vec seeds(m), fs(m);
  for (int i = 0; i < m; ++i) {
    seeds[i] = lower + (upper - lower) * i / (m - 1);
    fs[i] = fn(seeds[i]);
    if (!std::isfinite(fs[i])) throw SolverError("brent_minimize: non-finite objective");
    if (i == 0 || fs[i] < bestf) {
      best = i;
      bestf = fs[i];
    }
  }
  const double a = seeds[std::max(0, best - 1)];
  const double b = seeds[std::min(m - 1, best + 1)];
  const BrentResult r = localmin(fn, a, b, seeds[best], bestf, tol);
  if (r.fx < bestf) return r;
  return {seeds[best], bestf};
}

}  // namespace stocon
