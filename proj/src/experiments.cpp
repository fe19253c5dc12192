#include "xtal/experiments.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "xtal/energy.hpp"
#include "xtal/io.hpp"
#include "xtal/lattice.hpp"
#include "xtal/relax.hpp"

namespace xtal {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Runs f(0..n-1) across a small pool; results must be stored by index so
/// output never depends on scheduling.
void parallel_for_index(int n, const std::function<void(int)>& f) {
  const int workers =
      std::max(1, std::min<int>(static_cast<int>(std::thread::hardware_concurrency()), n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      try {
        for (int i = next++; i < n; i = next++) f(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

const char* ordering_name(Ordering o) {
  switch (o) {
    case Ordering::a_lower: return "A";
    case Ordering::b_lower: return "B";
    default: return "tie";
  }
}

}  // namespace

std::uint64_t trial_seed(std::uint64_t base, int index) {
  return splitmix64(base ^ splitmix64(static_cast<std::uint64_t>(index) + 1));
}

// ---------------------------------------------------------------------------

DepthConvergenceResult run_depth_convergence(const DepthConvergenceConfig& config) {
  if (config.n_structures < 1) throw std::invalid_argument("n_structures must be >= 1");
  if (config.k_min < 1 || config.k_max < config.k_min || config.k_ref <= config.k_max)
    throw std::invalid_argument("depth range must satisfy 1 <= k_min <= k_max < k_ref");
  if (config.k_ref > 10) throw std::invalid_argument("depth range is capped at 10");

  const int n_k = config.k_max - config.k_min + 1;
  std::vector<std::vector<DepthConvergenceRow>> per_structure(config.n_structures);

  parallel_for_index(config.n_structures, [&](int i) {
    const Structure s = random_feasible(config.cell, config.composition,
                                        trial_seed(config.seed, i), config.max_draw_attempts);
    const double ref = depth_energy(s, config.forcefield, config.k_ref).per_ion;
    auto& rows = per_structure[i];
    rows.reserve(n_k);
    for (int k = config.k_min; k <= config.k_max; ++k) {
      const double per_ion = depth_energy(s, config.forcefield, k).per_ion;
      rows.push_back({i, k, per_ion, std::abs(per_ion - ref)});
    }
  });

  DepthConvergenceResult result;
  result.rows.reserve(static_cast<std::size_t>(config.n_structures) * n_k);
  for (auto& rows : per_structure)
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());

  for (int k = config.k_min; k <= config.k_max; ++k) {
    double sum = 0.0;
    for (const auto& row : result.rows)
      if (row.k == k) sum += row.abs_diff;
    result.mean_abs_diff.emplace_back(k, sum / config.n_structures);
  }
  return result;
}

std::string depth_convergence_rows_csv(const DepthConvergenceResult& r) {
  std::ostringstream out;
  out << "structure,k,per_ion_eV,abs_diff_eV\n";
  for (const auto& row : r.rows)
    out << row.structure << ',' << row.k << ',' << format_double(row.per_ion) << ','
        << format_double(row.abs_diff) << '\n';
  return out.str();
}

std::string depth_convergence_summary_csv(const DepthConvergenceResult& r) {
  std::ostringstream out;
  out << "k,mean_abs_diff_eV\n";
  for (const auto& [k, mean] : r.mean_abs_diff)
    out << k << ',' << format_double(mean) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------

OrderingResult run_ordering(const OrderingConfig& config) {
  if (config.n_pairs < 1) throw std::invalid_argument("n_pairs must be >= 1");
  if (config.k_low < 1 || config.k_high <= config.k_low || config.k_high > 10)
    throw std::invalid_argument("need 1 <= k_low < k_high <= 10");

  OrderingResult result;
  result.rows.resize(config.n_pairs);

  parallel_for_index(config.n_pairs, [&](int i) {
    std::mt19937_64 rng(trial_seed(config.seed, i));
    const Structure a =
        random_feasible(config.cell, config.composition, rng, config.max_draw_attempts);
    const Structure b =
        random_feasible(config.cell, config.composition, rng, config.max_draw_attempts);
    OrderingRow row;
    row.pair = i;
    row.a_low = depth_energy(a, config.forcefield, config.k_low).total;
    row.b_low = depth_energy(b, config.forcefield, config.k_low).total;
    row.a_high = depth_energy(a, config.forcefield, config.k_high).total;
    row.b_high = depth_energy(b, config.forcefield, config.k_high).total;
    auto verdict = [](double ea, double eb) {
      if (std::abs(ea - eb) <= kEnergyTie) return Ordering::tie;
      return ea < eb ? Ordering::a_lower : Ordering::b_lower;
    };
    row.verdict_low = verdict(row.a_low, row.b_low);
    row.verdict_high = verdict(row.a_high, row.b_high);
    row.agree = row.verdict_low == row.verdict_high;
    result.rows[i] = row;
  });

  int agreed = 0;
  for (const auto& row : result.rows) agreed += row.agree ? 1 : 0;
  result.agreement_pct = 100.0 * agreed / config.n_pairs;
  return result;
}

std::string ordering_rows_csv(const OrderingResult& r) {
  std::ostringstream out;
  out << "pair,a_low_eV,b_low_eV,a_high_eV,b_high_eV,verdict_low,verdict_high,agree\n";
  for (const auto& row : r.rows) {
    out << row.pair << ',' << format_double(row.a_low) << ',' << format_double(row.b_low)
        << ',' << format_double(row.a_high) << ',' << format_double(row.b_high) << ','
        << ordering_name(row.verdict_low) << ',' << ordering_name(row.verdict_high) << ','
        << (row.agree ? 1 : 0) << '\n';
  }
  return out.str();
}

std::string ordering_summary_csv(const OrderingResult& r) {
  std::ostringstream out;
  out << "pairs,agreement_pct\n";
  out << r.rows.size() << ',' << format_double(r.agreement_pct) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------

NeighborhoodCompareResult run_neighborhood_compare(const NeighborhoodCompareConfig& config) {
  if (config.n_starts < 1) throw std::invalid_argument("n_starts must be >= 1");

  struct Candidate {
    std::string label;
    NeighborhoodSpec spec;
  };
  const std::vector<Candidate> candidates = {
      {"axes", {NeighborhoodKind::axes, 1, config.delta}},
      {std::to_string(config.swap_k) + "-ion-swap",
       {NeighborhoodKind::k_ion_swap, config.swap_k, config.delta}},
      {std::to_string(config.swap_k) + "-swap",
       {NeighborhoodKind::k_swap, config.swap_k, config.delta}},
  };

  std::vector<std::vector<NeighborhoodCompareRow>> per_start(config.n_starts);
  parallel_for_index(config.n_starts, [&](int i) {
    const Structure start = random_feasible(config.cell, config.composition,
                                            trial_seed(config.seed, i),
                                            config.max_draw_attempts);
    const double e0 = depth_energy(start, config.forcefield, config.k_energy).total;
    for (const auto& cand : candidates) {
      const LocalSearchResult ls =
          local_search(start, cand.spec, config.forcefield, config.k_energy, config.max_steps);
      const double ef = ls.energy_trace.back();
      per_start[i].push_back({i, cand.label, e0, ef, e0 - ef, ls.steps});
    }
  });

  NeighborhoodCompareResult result;
  for (auto& rows : per_start)
    result.rows.insert(result.rows.end(), rows.begin(), rows.end());

  for (const auto& cand : candidates) {
    NeighborhoodSummaryRow summary;
    summary.neighborhood = cand.label;
    double sum = 0.0, steps = 0.0;
    int count = 0;
    for (const auto& row : result.rows) {
      if (row.neighborhood != cand.label) continue;
      sum += row.drop;
      steps += row.steps;
      ++count;
    }
    summary.mean_drop = sum / count;
    summary.mean_steps = steps / count;
    double sq = 0.0;
    for (const auto& row : result.rows)
      if (row.neighborhood == cand.label)
        sq += (row.drop - summary.mean_drop) * (row.drop - summary.mean_drop);
    summary.stdev_drop = count > 1 ? std::sqrt(sq / (count - 1)) : 0.0;
    result.summary.push_back(summary);
  }
  return result;
}

std::string neighborhood_rows_csv(const NeighborhoodCompareResult& r) {
  std::ostringstream out;
  out << "start,neighborhood,e_initial_eV,e_final_eV,drop_eV,steps\n";
  for (const auto& row : r.rows)
    out << row.start << ',' << row.neighborhood << ',' << format_double(row.e_initial) << ','
        << format_double(row.e_final) << ',' << format_double(row.drop) << ',' << row.steps
        << '\n';
  return out.str();
}

std::string neighborhood_summary_csv(const NeighborhoodCompareResult& r) {
  std::ostringstream out;
  out << "neighborhood,mean_drop_eV,stdev_drop_eV,mean_steps\n";
  for (const auto& row : r.summary)
    out << row.neighborhood << ',' << format_double(row.mean_drop) << ','
        << format_double(row.stdev_drop) << ',' << format_double(row.mean_steps) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------

namespace {

int first_reach(const RunRecord& record, double target) {
  for (const auto& row : record.iterations)
    if (row.best_energy && *row.best_energy <= target) return row.relaxations;
  return record.total_relaxations + 1;  // censored: never reached the target
}

}  // namespace

SearchCompareResult run_search_compare(const SearchCompareConfig& config) {
  if (config.n_pairs < 1) throw std::invalid_argument("n_pairs must be >= 1");
  if (!(config.reach_tolerance >= 0.0))
    throw std::invalid_argument("reach_tolerance must be >= 0");

  SearchCompareResult result;
  const RelaxResult ref = relax(config.reference, config.forcefield, config.settings.relax);
  result.target_energy =
      depth_energy(ref.structure, config.forcefield, config.settings.k_report).total;
  const double target = result.target_energy + config.reach_tolerance;

  std::vector<RunRecord> bh_records(config.n_pairs), axes_records(config.n_pairs);
  // each pair runs its two algorithms on the same derived seed
  parallel_for_index(config.n_pairs * 2, [&](int slot) {
    const int pair = slot / 2;
    SearchSettings st = config.settings;
    st.seed = trial_seed(config.seed, pair);
    if (slot % 2 == 0) {
      bh_records[pair] = basin_hopping(config.cell, config.composition, config.forcefield, st);
    } else {
      axes_records[pair] = axes_bh(config.cell, config.composition, config.forcefield, st);
    }
  });

  int axes_le = 0;
  for (int pair = 0; pair < config.n_pairs; ++pair) {
    SearchCompareRow row;
    row.pair = pair;
    row.bh_reached_at = first_reach(bh_records[pair], target);
    row.axes_reached_at = first_reach(axes_records[pair], target);
    row.bh_best = bh_records[pair].best_energy.value_or(
        std::numeric_limits<double>::quiet_NaN());
    row.axes_best = axes_records[pair].best_energy.value_or(
        std::numeric_limits<double>::quiet_NaN());
    row.bh_relaxations = bh_records[pair].total_relaxations;
    row.axes_relaxations = axes_records[pair].total_relaxations;
    if (row.axes_reached_at <= row.bh_reached_at) ++axes_le;
    result.rows.push_back(row);
  }
  result.axes_le_bh_pct = 100.0 * axes_le / config.n_pairs;
  result.envelope_bh = run_stats(bh_records).envelope;
  result.envelope_axes = run_stats(axes_records).envelope;
  return result;
}

std::string search_compare_rows_csv(const SearchCompareResult& r) {
  std::ostringstream out;
  out << "pair,bh_reached_at,axes_reached_at,bh_best_eV,axes_best_eV,bh_relaxations,"
         "axes_relaxations\n";
  for (const auto& row : r.rows)
    out << row.pair << ',' << row.bh_reached_at << ',' << row.axes_reached_at << ','
        << format_double(row.bh_best) << ',' << format_double(row.axes_best) << ','
        << row.bh_relaxations << ',' << row.axes_relaxations << '\n';
  return out.str();
}

std::string search_compare_summary_csv(const SearchCompareResult& r) {
  std::ostringstream out;
  out << "pairs,target_energy_eV,axes_le_bh_pct\n";
  out << r.rows.size() << ',' << format_double(r.target_energy) << ','
      << format_double(r.axes_le_bh_pct) << '\n';
  return out.str();
}

std::string search_compare_envelope_csv(const SearchCompareResult& r) {
  std::ostringstream out;
  out << "relaxation,bh_envelope_eV,axes_envelope_eV\n";
  const std::size_t n = std::max(r.envelope_bh.size(), r.envelope_axes.size());
  for (std::size_t t = 0; t < n; ++t) {
    out << (t + 1) << ',';
    if (t < r.envelope_bh.size()) out << format_double(r.envelope_bh[t]);
    out << ',';
    if (t < r.envelope_axes.size()) out << format_double(r.envelope_axes[t]);
    out << '\n';
  }
  return out.str();
}

}  // namespace xtal
