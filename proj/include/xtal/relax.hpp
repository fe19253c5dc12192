#ifndef XTAL_RELAX_HPP
#define XTAL_RELAX_HPP

#include <vector>

#include "xtal/energy.hpp"
#include "xtal/model.hpp"

namespace xtal {

struct RelaxSettings {
  int depth = 2;         // image depth of the surface being descended
  int report_depth = 6;  // depth of the final reported energy
  int max_iters = 500;
  double grad_tol = 1e-3;        // eV/angstrom, max |component|
  double initial_step = 0.1;     // angstrom, first-trial max displacement
  double backtrack_factor = 0.5;
  double armijo_c = 1e-4;
};

struct RelaxResult {
  Structure structure;
  EnergyReport energy;  // evaluated at report_depth
  int iterations = 0;
  bool converged = false;
  std::vector<double> energy_trace;  // at the working depth, non-increasing
};

/// Fixed-cell gradient descent with backtracking Armijo line search on the
/// depth-k energy surface. Positions step in cartesian space and re-wrap to
/// fractional; the cell never changes. A line search that cannot find any
/// decreasing step returns converged=false with the best iterate so far.
RelaxResult relax(const Structure& s, const ForceField& ff, const RelaxSettings& settings);

}  // namespace xtal

#endif
