#include "xtal/search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "xtal/energy.hpp"
#include "xtal/lattice.hpp"

namespace xtal {

namespace {

void validate(const SearchSettings& st) {
  if (st.patience < 1) throw std::invalid_argument("search: patience must be >= 1");
  if (st.max_relaxations < 1)
    throw std::invalid_argument("search: max_relaxations must be >= 1");
  if (st.k_report < 1 || st.k_local_search < 1)
    throw std::invalid_argument("search: energy depths must be >= 1");
  if (st.max_ls_steps < 0) throw std::invalid_argument("search: max_ls_steps must be >= 0");
  if (st.temperature < 0.0) throw std::invalid_argument("search: temperature must be >= 0");
  if (!(st.perturb_sigma > 0.0))
    throw std::invalid_argument("search: perturb_sigma must be > 0");
}

/// Gaussian via Box-Muller on the portable uniform stream, so runs stay
/// reproducible across standard libraries.
double gaussian(std::mt19937_64& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Structure perturb(const Structure& base, const LatticeMatrix& lm, double sigma,
                  std::mt19937_64& rng, int max_attempts) {
  const ImageShell shell = ImageShell::cube(1);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    Structure jittered = base;
    for (auto& site : jittered.sites) {
      const Eigen::Vector3d noise(gaussian(rng), gaussian(rng), gaussian(rng));
      site.frac = wrap_unit(site.frac + lm.to_frac(sigma * noise));
    }
    if (is_feasible(jittered, shell)) return jittered;
  }
  throw std::runtime_error("search: could not perturb incumbent into a feasible structure");
}

RunRecord run_search(const UnitCell& cell, const Composition& composition,
                     const ForceField& ff, const SearchSettings& settings) {
  validate(settings);
  if (settings.mode == SearchMode::axes_bh &&
      settings.neighborhood.kind != NeighborhoodKind::axes)
    throw std::invalid_argument("axes_bh requires an axes neighborhood");

  std::mt19937_64 rng(settings.seed);
  const LatticeMatrix lm = LatticeMatrix::from_cell(cell);
  const ImageShell feas_shell = ImageShell::cube(1);

  RunRecord record;
  record.mode = settings.mode;
  record.seed = settings.seed;

  std::optional<Structure> walk_base;  // perturbation base (classic formulation)
  double walk_energy = 0.0;
  int fails = 0;

  while (record.total_relaxations < settings.max_relaxations && fails < settings.patience) {
    IterationRecord row;
    row.iteration = static_cast<int>(record.iterations.size());

    Structure start =
        (settings.perturb_incumbent && walk_base)
            ? perturb(*walk_base, lm, settings.perturb_sigma, rng, settings.max_draw_attempts)
            : random_feasible(cell, composition, rng, settings.max_draw_attempts);
    row.pre_relax_energy = depth_energy(start, ff, settings.k_report).total;

    Structure to_relax = start;
    if (settings.mode == SearchMode::axes_bh) {
      LocalSearchResult ls = local_search(start, settings.neighborhood, ff,
                                          settings.k_local_search, settings.max_ls_steps);
      to_relax = ls.structure;
      row.ls_steps = ls.steps;
      record.total_ls_steps += ls.steps;
      row.post_ls_energy = depth_energy(to_relax, ff, settings.k_report).total;
    }

    const RelaxResult relaxed = relax(to_relax, ff, settings.relax);
    ++record.total_relaxations;
    row.relaxations = record.total_relaxations;
    row.post_relax_energy = depth_energy(relaxed.structure, ff, settings.k_report).total;

    const bool usable =
        !settings.require_feasible_accept || is_feasible(relaxed.structure, feas_shell);
    const bool improved =
        usable && (!record.best_energy || row.post_relax_energy < *record.best_energy);
    if (improved) {
      record.best_energy = row.post_relax_energy;
      record.best_structure = relaxed.structure;
      walk_base = relaxed.structure;
      walk_energy = row.post_relax_energy;
      fails = 0;
      row.accepted = true;
    } else {
      ++fails;
      if (usable && settings.temperature > 0.0 && walk_base) {
        const double gap = row.post_relax_energy - walk_energy;
        if (gap <= 0.0 || uniform01(rng) < std::exp(-gap / settings.temperature)) {
          walk_base = relaxed.structure;  // Metropolis move of the walk base only
          walk_energy = row.post_relax_energy;
        }
      }
    }
    row.best_energy = record.best_energy;
    record.iterations.push_back(row);
  }
  return record;
}

SummaryStat summarize(std::vector<double> values) {
  SummaryStat stat;
  const std::size_t n = values.size();
  double sum = 0.0;
  for (double v : values) sum += v;
  stat.mean = sum / static_cast<double>(n);
  double sq = 0.0;
  for (double v : values) sq += (v - stat.mean) * (v - stat.mean);
  stat.stdev = n > 1 ? std::sqrt(sq / static_cast<double>(n - 1)) : 0.0;
  std::sort(values.begin(), values.end());
  stat.median = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
  return stat;
}

}  // namespace

RunRecord basin_hopping(const UnitCell& cell, const Composition& composition,
                        const ForceField& ff, const SearchSettings& settings) {
  SearchSettings st = settings;
  st.mode = SearchMode::basin_hopping;
  return run_search(cell, composition, ff, st);
}

RunRecord axes_bh(const UnitCell& cell, const Composition& composition, const ForceField& ff,
                  const SearchSettings& settings) {
  SearchSettings st = settings;
  st.mode = SearchMode::axes_bh;
  return run_search(cell, composition, ff, st);
}

RunStats run_stats(std::span<const RunRecord> records) {
  if (records.empty()) throw std::invalid_argument("run_stats: no records");

  std::vector<double> relaxations, ls_steps, best;
  std::size_t max_len = 0;
  for (const auto& r : records) {
    relaxations.push_back(static_cast<double>(r.total_relaxations));
    ls_steps.push_back(static_cast<double>(r.total_ls_steps));
    if (r.best_energy) best.push_back(*r.best_energy);
    max_len = std::max(max_len, r.iterations.size());
  }

  RunStats stats;
  stats.relaxations = summarize(relaxations);
  stats.ls_steps = summarize(ls_steps);
  if (!best.empty()) stats.best_energy = summarize(best);

  stats.envelope.resize(max_len, std::numeric_limits<double>::infinity());
  for (const auto& r : records) {
    double running = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < max_len; ++t) {
      if (t < r.iterations.size())
        running = std::min(running, r.iterations[t].post_relax_energy);
      stats.envelope[t] = std::min(stats.envelope[t], running);
    }
  }
  return stats;
}

}  // namespace xtal
