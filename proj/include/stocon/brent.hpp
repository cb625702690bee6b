#pragma once

#include <functional>

namespace stocon {

struct BrentResult {
  double x;
  double fx;
};

// Global-ish 1-D minimization on [lower, upper]: the best of `multistart`
// evenly spaced seeds (endpoints included) picks the bracket, then Brent's
// golden-section/parabolic refinement runs inside it. Ties between seeds keep
// the lowest seed, so a constant function returns the lower bound.
BrentResult brent_minimize(const std::function<double(double)>& fn, double lower, double upper,
                           double tol = 1e-5, int multistart = 10);

}  // namespace stocon
