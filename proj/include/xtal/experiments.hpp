#ifndef XTAL_EXPERIMENTS_HPP
#define XTAL_EXPERIMENTS_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "xtal/localsearch.hpp"
#include "xtal/model.hpp"
#include "xtal/search.hpp"

namespace xtal {

/// Deterministic per-trial seed stream derived from a base seed.
std::uint64_t trial_seed(std::uint64_t base, int index);

// ---------------------------------------------------------------------------
// depth convergence: per-ion |E_k - E_ref| over seeded random structures

struct DepthConvergenceConfig {
  Composition composition;
  UnitCell cell;
  ForceField forcefield;
  int n_structures = 100;
  int k_min = 1;
  int k_max = 6;
  int k_ref = 10;
  std::uint64_t seed = 1;
  int max_draw_attempts = 100000;
};

struct DepthConvergenceRow {
  int structure = 0;
  int k = 0;
  double per_ion = 0.0;
  double abs_diff = 0.0;  // |per_ion(k) - per_ion(k_ref)|
};

struct DepthConvergenceResult {
  std::vector<DepthConvergenceRow> rows;
  std::vector<std::pair<int, double>> mean_abs_diff;  // (k, mean)
};

DepthConvergenceResult run_depth_convergence(const DepthConvergenceConfig& config);
std::string depth_convergence_rows_csv(const DepthConvergenceResult& r);
std::string depth_convergence_summary_csv(const DepthConvergenceResult& r);

// ---------------------------------------------------------------------------
// ordering preservation: verdict agreement between a shallow and a deep sum

struct OrderingConfig {
  Composition composition;
  UnitCell cell;
  ForceField forcefield;
  int n_pairs = 500;
  int k_low = 1;
  int k_high = 6;
  std::uint64_t seed = 1;
  int max_draw_attempts = 100000;
};

struct OrderingRow {
  int pair = 0;
  double a_low = 0.0, b_low = 0.0, a_high = 0.0, b_high = 0.0;
  Ordering verdict_low = Ordering::tie;
  Ordering verdict_high = Ordering::tie;
  bool agree = false;
};

struct OrderingResult {
  std::vector<OrderingRow> rows;
  double agreement_pct = 0.0;
};

OrderingResult run_ordering(const OrderingConfig& config);
std::string ordering_rows_csv(const OrderingResult& r);
std::string ordering_summary_csv(const OrderingResult& r);

// ---------------------------------------------------------------------------
// neighborhood comparison: energy drop of greedy descent per neighborhood

struct NeighborhoodCompareConfig {
  Composition composition;
  UnitCell cell;
  ForceField forcefield;
  int n_starts = 50;
  double delta = 1.0;
  int swap_k = 2;      // arity of the two swap neighborhoods
  int k_energy = 1;
  int max_steps = 10000;
  std::uint64_t seed = 1;
  int max_draw_attempts = 100000;
};

struct NeighborhoodCompareRow {
  int start = 0;
  std::string neighborhood;
  double e_initial = 0.0;
  double e_final = 0.0;
  double drop = 0.0;
  int steps = 0;
};

struct NeighborhoodSummaryRow {
  std::string neighborhood;
  double mean_drop = 0.0;
  double stdev_drop = 0.0;
  double mean_steps = 0.0;
};

struct NeighborhoodCompareResult {
  std::vector<NeighborhoodCompareRow> rows;
  std::vector<NeighborhoodSummaryRow> summary;  // axes, k-ion-swap, k-swap order
};

NeighborhoodCompareResult run_neighborhood_compare(const NeighborhoodCompareConfig& config);
std::string neighborhood_rows_csv(const NeighborhoodCompareResult& r);
std::string neighborhood_summary_csv(const NeighborhoodCompareResult& r);

// ---------------------------------------------------------------------------
// search comparison: paired basin hopping vs axes-enhanced basin hopping

struct SearchCompareConfig {
  Composition composition;
  UnitCell cell;
  ForceField forcefield;
  Structure reference;  // its relaxed energy defines the target to reach
  double reach_tolerance = 0.05;  // eV above the relaxed reference energy
  int n_pairs = 20;
  SearchSettings settings;  // shared by both algorithms; seed is overridden per pair
  std::uint64_t seed = 1;
};

struct SearchCompareRow {
  int pair = 0;
  int bh_reached_at = 0;    // relaxation count of first reach; budget+1 if never
  int axes_reached_at = 0;
  double bh_best = 0.0;
  double axes_best = 0.0;
  int bh_relaxations = 0;
  int axes_relaxations = 0;
};

struct SearchCompareResult {
  std::vector<SearchCompareRow> rows;
  double target_energy = 0.0;      // relaxed reference at k_report
  double axes_le_bh_pct = 0.0;     // pairs where axes reached with <= relaxations
  std::vector<double> envelope_bh;
  std::vector<double> envelope_axes;
};

SearchCompareResult run_search_compare(const SearchCompareConfig& config);
std::string search_compare_rows_csv(const SearchCompareResult& r);
std::string search_compare_summary_csv(const SearchCompareResult& r);
std::string search_compare_envelope_csv(const SearchCompareResult& r);

}  // namespace xtal

#endif
