#ifndef XTAL_SEARCH_HPP
#define XTAL_SEARCH_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "xtal/localsearch.hpp"
#include "xtal/model.hpp"
#include "xtal/relax.hpp"

namespace xtal {

enum class SearchMode { basin_hopping, axes_bh };

struct SearchSettings {
  SearchMode mode = SearchMode::basin_hopping;
  std::uint64_t seed = 0;
  int patience = 10;          // consecutive non-improving relaxations before stop
  int max_relaxations = 50;
  NeighborhoodSpec neighborhood{NeighborhoodKind::axes, 1, 1.0};  // axes_bh only
  RelaxSettings relax;
  int k_report = 6;           // depth of recorded energies
  int k_local_search = 1;     // depth of the combinatorial descent (axes_bh)
  int max_ls_steps = 1000;
  int max_draw_attempts = 100000;
  double temperature = 0.0;   // optional Metropolis acceptance of the walk base
  bool perturb_incumbent = false;  // classic formulation: jitter the incumbent
  double perturb_sigma = 0.3;      // angstrom
  bool require_feasible_accept = true;  // discard collapsed relaxation products
};

struct IterationRecord {
  int iteration = 0;
  double pre_relax_energy = 0.0;            // random (or perturbed) start, at k_report
  std::optional<double> post_ls_energy;     // after combinatorial descent (axes_bh)
  double post_relax_energy = 0.0;           // at k_report
  std::optional<double> best_energy;        // cumulative best so far
  int relaxations = 0;                      // cumulative count
  int ls_steps = 0;
  bool accepted = false;
};

struct RunRecord {
  SearchMode mode = SearchMode::basin_hopping;
  std::uint64_t seed = 0;
  std::vector<IterationRecord> iterations;
  int total_relaxations = 0;
  long total_ls_steps = 0;
  std::optional<Structure> best_structure;
  std::optional<double> best_energy;
};

/// Plain basin hopping: draw a random feasible structure, relax it, keep the
/// best. Stops when `patience` consecutive relaxations fail to improve or the
/// relaxation budget is spent. Deterministic per seed.
RunRecord basin_hopping(const UnitCell& cell, const Composition& composition,
                        const ForceField& ff, const SearchSettings& settings);

/// Basin hopping with a combinatorial descent (Axes neighborhood by default)
/// driven to a local minimum before every relaxation.
RunRecord axes_bh(const UnitCell& cell, const Composition& composition, const ForceField& ff,
                  const SearchSettings& settings);

struct SummaryStat {
  double mean = 0.0;
  double median = 0.0;
  double stdev = 0.0;
};

struct RunStats {
  SummaryStat relaxations;
  SummaryStat ls_steps;
  SummaryStat best_energy;
  /// envelope[t] = best energy any record had reached after t+1 relaxations
  /// (records that ended earlier contribute their final best).
  std::vector<double> envelope;
};

/// Aggregates of a set of runs. Throws std::invalid_argument on empty input.
RunStats run_stats(std::span<const RunRecord> records);

}  // namespace xtal

#endif
