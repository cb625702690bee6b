#include <cmath>
#include <string>
#include <vector>

#include "stocon/oracles.hpp"

namespace stocon {

namespace {

void check_symmetric_psd(const std::vector<Vec>& A, int d, const char* who) {
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < i; ++j)
      if (std::abs(A[i][j] - A[j][i]) > 1e-12 * (1.0 + std::abs(A[i][j])))
        throw SolverError(std::string(who) + ": matrix not symmetric");
  // Cholesky with a tiny ridge; a failing pivot means an eigenvalue below
  // the tolerance.
  std::vector<Vec> L(d, Vec(d, 0.0));
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j <= i; ++j) {
      double s = A[i][j] + (i == j ? 1e-10 : 0.0);
      for (int k = 0; k < j; ++k) s -= L[i][k] * L[j][k];
      if (i == j) {
        if (s <= 0.0)
          throw SolverError(std::string(who) + ": matrix not positive semidefinite");
        L[i][i] = std::sqrt(s);
      } else {
        L[i][j] = s / L[j][j];
      }
    }
  }
}

// dK/ds for s = T - t: B^T K + K B + Q - (K C)(K C)^T / (lambda + tr K),
// with B = I and C = (1,..,1) unless nulled out.
void rhs(const Vec& K, const std::vector<Vec>& Q_mat, int d, double lambda,
         bool zero_B, bool zero_C, Vec* out) {
  Vec u(d, 0.0);  // K C = row sums
  double trace = 0.0;
  for (int i = 0; i < d; ++i) {
    trace += K[i * d + i];
    if (!zero_C) {
      double s = 0.0;
      for (int j = 0; j < d; ++j) s += K[i * d + j];
      u[i] = s;
    }
  }
  const double denom = lambda + trace;
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) {
      double v = Q_mat[i][j];
      if (!zero_B) v += 2.0 * K[i * d + j];
      if (!zero_C) v -= u[i] * u[j] / denom;
      out[0][i * d + j] = v;
    }
}

}  // namespace

RiccatiSolution riccati_solve_general(int d, double T, double lambda,
                                      const std::vector<Vec>& Q_mat,
                                      const std::vector<Vec>& P_mat,
                                      int ode_steps, bool zero_B, bool zero_C) {
  if (d < 1) throw SolverError("riccati_solve: d must be >= 1");
  if (ode_steps < 100) throw SolverError("riccati_solve: ode_steps must be >= 100");
  if (T <= 0.0) throw SolverError("riccati_solve: T must be > 0");
  if (lambda <= 0.0) throw SolverError("riccati_solve: lambda must be > 0");
  if (static_cast<int>(Q_mat.size()) != d || static_cast<int>(P_mat.size()) != d)
    throw SolverError("riccati_solve: coefficient dimension mismatch");
  check_symmetric_psd(Q_mat, d, "riccati_solve[Q]");
  check_symmetric_psd(P_mat, d, "riccati_solve[P]");

  RiccatiSolution sol;
  sol.d = d;
  sol.T = T;
  sol.lambda = lambda;
  sol.ode_steps = ode_steps;
  sol.K.assign(ode_steps + 1, Vec(static_cast<std::size_t>(d) * d));

  const double hs = T / ode_steps;
  Vec K(static_cast<std::size_t>(d) * d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) K[i * d + j] = P_mat[i][j];
  // Index s counts time-to-go; slot ode_steps - s holds K(t = T - s*hs).
  sol.K[ode_steps] = K;

  Vec k1(K.size()), k2(K.size()), k3(K.size()), k4(K.size()), tmp(K.size());
  for (int s = 0; s < ode_steps; ++s) {
    rhs(K, Q_mat, d, lambda, zero_B, zero_C, &k1);
    for (std::size_t i = 0; i < K.size(); ++i) tmp[i] = K[i] + 0.5 * hs * k1[i];
    rhs(tmp, Q_mat, d, lambda, zero_B, zero_C, &k2);
    for (std::size_t i = 0; i < K.size(); ++i) tmp[i] = K[i] + 0.5 * hs * k2[i];
    rhs(tmp, Q_mat, d, lambda, zero_B, zero_C, &k3);
    for (std::size_t i = 0; i < K.size(); ++i) tmp[i] = K[i] + hs * k3[i];
    rhs(tmp, Q_mat, d, lambda, zero_B, zero_C, &k4);
    for (std::size_t i = 0; i < K.size(); ++i)
      K[i] += hs / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < i; ++j) {
        const double m = 0.5 * (K[i * d + j] + K[j * d + i]);
        K[i * d + j] = K[j * d + i] = m;
      }
    sol.K[ode_steps - (s + 1)] = K;
  }
  return sol;
}

RiccatiSolution riccati_solve(const LqSpec& spec, int ode_steps) {
  std::vector<Vec> eye(spec.d, Vec(spec.d, 0.0));
  for (int i = 0; i < spec.d; ++i) eye[i][i] = 1.0;
  auto sol =
      riccati_solve_general(spec.d, spec.T, spec.lambda, eye, eye, ode_steps,
                            /*zero_B=*/false, /*zero_C=*/false);
  return sol;
}

double RiccatiSolution::value_at(double t, const Vec& x) const {
  if (t < 0.0 || t > T) throw SolverError("riccati value_at: t outside [0, T]");
  if (static_cast<int>(x.size()) != d)
    throw SolverError("riccati value_at: state dimension mismatch");
  const double pos = t / T * ode_steps;
  const int lo = std::min(static_cast<int>(pos), ode_steps - 1);
  const double frac = pos - lo;
  auto quad = [&](const Vec& K) {
    double s = 0.0;
    for (int i = 0; i < d; ++i) {
      double row = 0.0;
      for (int j = 0; j < d; ++j) row += K[i * d + j] * x[j];
      s += x[i] * row;
    }
    return s;
  };
  return (1.0 - frac) * quad(K[lo]) + frac * quad(K[lo + 1]);
}

double RiccatiSolution::feedback_at(double t, const Vec& x) const {
  if (t < 0.0 || t > T) throw SolverError("riccati feedback_at: t outside [0, T]");
  if (static_cast<int>(x.size()) != d)
    throw SolverError("riccati feedback_at: state dimension mismatch");
  const int idx = std::min(static_cast<int>(t / T * ode_steps + 0.5), ode_steps);
  const Vec& Kt = K[idx];
  double num = 0.0, trace = 0.0;
  for (int i = 0; i < d; ++i) {
    trace += Kt[i * d + i];
    double row = 0.0;
    for (int j = 0; j < d; ++j) row += Kt[i * d + j] * x[j];
    num += row;
  }
  return -num / (lambda + trace);
}

}  // namespace stocon
