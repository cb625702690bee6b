#include "solver_common.hpp"
#include "stocon/algos.hpp"

namespace stocon {

std::vector<RegionRow> decision_region(const PolicySet& policy, int n, int axis1,
                                       int axis2, const Vec& axis1_pts,
                                       const Vec& axis2_pts, const Vec& base_state) {
  const ControlProblem& p = policy.problem;
  detail::require(static_cast<int>(base_state.size()) == p.dim_state,
                  "decision_region base state dimension mismatch");
  detail::require(axis1 >= 0 && axis1 < p.dim_state && axis2 >= 0 &&
                      axis2 < p.dim_state && axis1 != axis2,
                  "decision_region needs two distinct state axes");
  detail::require(!axis1_pts.empty() && !axis2_pts.empty(),
                  "decision_region needs non-empty axis point sets");
  std::vector<RegionRow> rows;
  rows.reserve(axis1_pts.size() * axis2_pts.size());
  Vec x = base_state;
  Vec a(p.control_space.dim());
  for (double c1 : axis1_pts) {
    x[axis1] = c1;
    for (double c2 : axis2_pts) {
      x[axis2] = c2;
      policy.control(n, x.data(), a.data());
      rows.push_back(RegionRow{c1, c2, a});
    }
  }
  return rows;
}

}  // namespace stocon
