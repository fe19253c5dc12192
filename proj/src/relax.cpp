#include "xtal/relax.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "xtal/lattice.hpp"

namespace xtal {

namespace {

void validate(const RelaxSettings& st) {
  if (st.depth < 1 || st.report_depth < 1) throw std::invalid_argument("relax: depth must be >= 1");
  if (st.max_iters < 1) throw std::invalid_argument("relax: max_iters must be >= 1");
  if (!(st.grad_tol > 0.0)) throw std::invalid_argument("relax: grad_tol must be > 0");
  if (!(st.initial_step > 0.0)) throw std::invalid_argument("relax: initial_step must be > 0");
  if (!(st.backtrack_factor > 0.0 && st.backtrack_factor < 1.0))
    throw std::invalid_argument("relax: backtrack_factor must lie in (0,1)");
  if (!(st.armijo_c > 0.0 && st.armijo_c < 1.0))
    throw std::invalid_argument("relax: armijo_c must lie in (0,1)");
}

double grad_inf_norm(const std::vector<Eigen::Vector3d>& g) {
  double m = 0.0;
  for (const auto& v : g) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

double grad_sq_norm(const std::vector<Eigen::Vector3d>& g) {
  double s = 0.0;
  for (const auto& v : g) s += v.squaredNorm();
  return s;
}

}  // namespace

RelaxResult relax(const Structure& s, const ForceField& ff, const RelaxSettings& settings) {
  validate(settings);

  const int n = s.size();
  EnergyContext ctx(s, ff, settings.depth);
  const LatticeMatrix& lm = ctx.lattice();

  std::vector<int> all_sites(n);
  std::iota(all_sites.begin(), all_sites.end(), 0);

  std::vector<Eigen::Vector3d> frac_cur(n);
  for (int i = 0; i < n; ++i) frac_cur[i] = ctx.structure().sites[i].frac;

  // the base-point evaluation may throw: a singular input is a fault
  EnergyGradient eg = ctx.energy_gradient();

  RelaxResult result;
  result.energy_trace.push_back(eg.report.total);

  bool converged = false;
  int iters = 0;
  double prev_alpha = std::numeric_limits<double>::quiet_NaN();

  while (iters < settings.max_iters) {
    const double g_inf = grad_inf_norm(eg.gradient);
    if (g_inf <= settings.grad_tol) {
      converged = true;
      break;
    }
    const double g_sq = grad_sq_norm(eg.gradient);

    // warm-start the trial step from the last accepted one, capped so no
    // site ever moves more than the configured per-step displacement
    double alpha = std::isnan(prev_alpha)
                       ? settings.initial_step / g_inf
                       : std::min(2.0 * prev_alpha, settings.initial_step / g_inf);
    bool accepted = false;
    std::vector<Eigen::Vector3d> trial(n);
    while (alpha * g_inf >= 1e-14) {
      for (int i = 0; i < n; ++i)
        trial[i] = lm.to_frac(lm.to_cart(frac_cur[i]) - alpha * eg.gradient[i]);
      ctx.apply(all_sites, trial);
      double e_trial = std::numeric_limits<double>::infinity();
      try {
        e_trial = ctx.energy().total;
      } catch (const SingularityError&) {
        // a singular trial point is just an unacceptable step
      }
      if (e_trial <= result.energy_trace.back() - settings.armijo_c * alpha * g_sq) {
        for (int i = 0; i < n; ++i) frac_cur[i] = ctx.structure().sites[i].frac;
        result.energy_trace.push_back(e_trial);
        prev_alpha = alpha;
        accepted = true;
        break;
      }
      alpha *= settings.backtrack_factor;
    }
    if (!accepted) {
      ctx.apply(all_sites, frac_cur);  // restore the last accepted iterate
      break;                           // no decreasing step at machine precision
    }
    ++iters;
    eg = ctx.energy_gradient();
  }

  if (!converged) converged = grad_inf_norm(eg.gradient) <= settings.grad_tol;

  result.structure = ctx.structure();
  result.energy = depth_energy(result.structure, ff, settings.report_depth);
  result.iterations = iters;
  result.converged = converged;
  return result;
}

}  // namespace xtal
