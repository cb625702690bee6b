#include <algorithm>
#include <cmath>

#include "stocon/oracles.hpp"

namespace stocon {

namespace {

// Moments of the trinomial return.
struct Moments {
  double nu;   // E[R]
  double m2;   // E[R^2]
};

Moments moments(const HedgingSpec& spec) {
  Moments m;
  m.nu = spec.p_up * spec.r_up + spec.p_dn * spec.r_dn;
  m.m2 = spec.p_up * spec.r_up * spec.r_up + spec.p_dn * spec.r_dn * spec.r_dn;
  return m;
}

}  // namespace

int HedgingSolution::node_index(int n, int i, int j) const {
  // Nodes ordered by i, then j; i + j <= n.
  return i * (n + 1) - i * (i - 1) / 2 + j;
}

double HedgingSolution::node_price(int i, int j) const {
  return spec.price0 * std::pow(1.0 + spec.r_up, i) * std::pow(1.0 + spec.r_dn, j);
}

void HedgingSolution::locate(int n, double p, int* oi, int* oj) const {
  if (!(p > 0.0)) throw SolverError("hedging locate: price must be > 0");
  double best = 1e300;
  const double lp = std::log(p);
  for (int i = 0; i <= n; ++i)
    for (int j = 0; i + j <= n; ++j) {
      const double d = std::abs(lp - std::log(node_price(i, j)));
      if (d < best) {
        best = d;
        *oi = i;
        *oj = j;
      }
    }
}

double HedgingSolution::value(int n, double w, double p) const {
  if (n < 0 || n > spec.N) throw SolverError("hedging value: time index out of range");
  int i, j;
  locate(n, p, &i, &j);
  const int node = node_index(n, i, j);
  return K[n] * w * w - 2.0 * Z[n][node] * w + C[n][node];
}

double HedgingSolution::feedback(int n, double w, double p) const {
  if (n < 0 || n >= spec.N)
    throw SolverError("hedging feedback: time index out of range");
  const Moments m = moments(spec);
  int i, j;
  locate(n, p, &i, &j);
  // E[Z_{n+1}((1+R) p) R] over the three successor nodes.
  const double ezr =
      spec.p_up * spec.r_up * Z[n + 1][node_index(n + 1, i + 1, j)] +
      spec.p_dn * spec.r_dn * Z[n + 1][node_index(n + 1, i, j + 1)];
  return (ezr / K[n + 1] - m.nu * w) / m.m2;
}

HedgingSolution hedging_recursion(const HedgingSpec& spec) {
  const Moments m = moments(spec);
  if (m.m2 <= 1e-15)
    throw SolverError("hedging_recursion: degenerate return second moment");
  const double factor = 1.0 - m.nu * m.nu / m.m2;

  HedgingSolution sol;
  sol.spec = spec;
  const int N = spec.N;
  sol.K.assign(N + 1, 0.0);
  sol.Z.resize(N + 1);
  sol.C.resize(N + 1);

  sol.K[N] = 1.0;
  sol.Z[N].resize(sol.nodes(N));
  sol.C[N].resize(sol.nodes(N));
  for (int i = 0; i <= N; ++i)
    for (int j = 0; i + j <= N; ++j) {
      const double payoff = std::max(sol.node_price(i, j) - spec.strike, 0.0);
      const int node = sol.node_index(N, i, j);
      sol.Z[N][node] = payoff;
      sol.C[N][node] = payoff * payoff;
    }

  const double p_mid = spec.p_mid();
  for (int n = N - 1; n >= 0; --n) {
    sol.K[n] = sol.K[n + 1] * factor;
    sol.Z[n].resize(sol.nodes(n));
    sol.C[n].resize(sol.nodes(n));
    for (int i = 0; i <= n; ++i)
      for (int j = 0; i + j <= n; ++j) {
        const double z_up = sol.Z[n + 1][sol.node_index(n + 1, i + 1, j)];
        const double z_mid = sol.Z[n + 1][sol.node_index(n + 1, i, j)];
        const double z_dn = sol.Z[n + 1][sol.node_index(n + 1, i, j + 1)];
        const double c_up = sol.C[n + 1][sol.node_index(n + 1, i + 1, j)];
        const double c_mid = sol.C[n + 1][sol.node_index(n + 1, i, j)];
        const double c_dn = sol.C[n + 1][sol.node_index(n + 1, i, j + 1)];
        const double ez = spec.p_up * z_up + p_mid * z_mid + spec.p_dn * z_dn;
        const double ezr = spec.p_up * spec.r_up * z_up + spec.p_dn * spec.r_dn * z_dn;
        const double ec = spec.p_up * c_up + p_mid * c_mid + spec.p_dn * c_dn;
        const int node = sol.node_index(n, i, j);
        sol.Z[n][node] = ez - m.nu / m.m2 * ezr;
        sol.C[n][node] = ec - ezr * ezr / (sol.K[n + 1] * m.m2);
      }
  }

  sol.w0_star = sol.Z[0][0] / sol.K[0];
  sol.value0_at_w0_star = sol.C[0][0] - sol.Z[0][0] * sol.Z[0][0] / sol.K[0];
  return sol;
}

}  // namespace stocon
