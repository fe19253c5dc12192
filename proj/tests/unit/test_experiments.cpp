#include <doctest.h>

#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "helpers.hpp"
#include "xtal/experiments.hpp"

using namespace xtal;

namespace {

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream fields(line);
    std::string cell;
    while (std::getline(fields, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

DepthConvergenceConfig tiny_depth_config() {
  DepthConvergenceConfig config{testutil::srtio3(1), testutil::cubic_cell(5.0),
                                testutil::table6_forcefield()};
  config.n_structures = 6;
  config.k_min = 1;
  config.k_max = 3;
  config.k_ref = 5;
  config.seed = 3;
  return config;
}

}  // namespace

TEST_CASE("depth convergence rows aggregate into the summary") {
  const auto result = run_depth_convergence(tiny_depth_config());
  REQUIRE(result.rows.size() == 6 * 3);
  REQUIRE(result.mean_abs_diff.size() == 3);

  // re-aggregate the emitted CSV and compare against the summary CSV
  const auto rows = parse_csv(depth_convergence_rows_csv(result));
  std::map<int, std::pair<double, int>> acc;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const int k = std::stoi(rows[i][1]);
    acc[k].first += std::stod(rows[i][3]);
    acc[k].second += 1;
  }
  const auto summary = parse_csv(depth_convergence_summary_csv(result));
  REQUIRE(summary.size() == 4);  // header + 3 depths
  for (std::size_t i = 1; i < summary.size(); ++i) {
    const int k = std::stoi(summary[i][0]);
    const double mean = std::stod(summary[i][1]);
    CHECK(mean == doctest::Approx(acc[k].first / acc[k].second).epsilon(1e-12));
  }
}

TEST_CASE("depth convergence is deterministic per seed") {
  const auto a = run_depth_convergence(tiny_depth_config());
  const auto b = run_depth_convergence(tiny_depth_config());
  CHECK(depth_convergence_rows_csv(a) == depth_convergence_rows_csv(b));

  auto other = tiny_depth_config();
  other.seed = 4;
  const auto c = run_depth_convergence(other);
  CHECK(depth_convergence_rows_csv(a) != depth_convergence_rows_csv(c));
}

TEST_CASE("depth convergence validates its depth range") {
  auto config = tiny_depth_config();
  config.k_ref = 3;  // must exceed k_max
  CHECK_THROWS_AS(run_depth_convergence(config), std::invalid_argument);
}

TEST_CASE("ordering rows are self-consistent with their verdicts") {
  OrderingConfig config{testutil::srtio3(1), testutil::cubic_cell(5.0),
                        testutil::table6_forcefield()};
  config.n_pairs = 12;
  config.k_low = 1;
  config.k_high = 3;
  config.seed = 5;
  const auto result = run_ordering(config);
  REQUIRE(result.rows.size() == 12);

  int agreed = 0;
  for (const auto& row : result.rows) {
    auto verdict = [](double ea, double eb) {
      if (std::abs(ea - eb) <= kEnergyTie) return Ordering::tie;
      return ea < eb ? Ordering::a_lower : Ordering::b_lower;
    };
    CHECK(row.verdict_low == verdict(row.a_low, row.b_low));
    CHECK(row.verdict_high == verdict(row.a_high, row.b_high));
    CHECK(row.agree == (row.verdict_low == row.verdict_high));
    agreed += row.agree ? 1 : 0;
  }
  CHECK(result.agreement_pct == doctest::Approx(100.0 * agreed / 12.0));
}

TEST_CASE("neighborhood comparison records descents for all three kinds") {
  NeighborhoodCompareConfig config{testutil::srtio3(1), testutil::cubic_cell(3.905),
                                   testutil::table6_forcefield()};
  config.n_starts = 3;
  config.delta = 3.905 / 2.0;
  config.seed = 7;
  const auto result = run_neighborhood_compare(config);
  REQUIRE(result.rows.size() == 9);
  REQUIRE(result.summary.size() == 3);
  CHECK(result.summary[0].neighborhood == "axes");
  CHECK(result.summary[1].neighborhood == "2-ion-swap");
  CHECK(result.summary[2].neighborhood == "2-swap");

  for (const auto& row : result.rows) {
    CHECK(row.drop >= -1e-12);  // greedy descent never goes up
    CHECK(row.drop == doctest::Approx(row.e_initial - row.e_final).epsilon(1e-12));
  }
  for (const auto& s : result.summary) {
    double sum = 0.0;
    int count = 0;
    for (const auto& row : result.rows)
      if (row.neighborhood == s.neighborhood) {
        sum += row.drop;
        ++count;
      }
    CHECK(count == 3);
    CHECK(s.mean_drop == doctest::Approx(sum / count).epsilon(1e-12));
  }
}

TEST_CASE("greedy drop ordering: grid swaps beat axes beat ion swaps") {
  NeighborhoodCompareConfig config{testutil::srtio3(1), testutil::cubic_cell(3.905),
                                   testutil::table6_forcefield()};
  config.n_starts = 40;
  config.delta = 3.905 / 2.0;
  config.seed = 2031;
  const auto result = run_neighborhood_compare(config);
  double axes = 0, ion_swap = 0, grid_swap = 0;
  for (const auto& s : result.summary) {
    if (s.neighborhood == "axes") axes = s.mean_drop;
    if (s.neighborhood == "2-ion-swap") ion_swap = s.mean_drop;
    if (s.neighborhood == "2-swap") grid_swap = s.mean_drop;
  }
  CHECK(grid_swap >= axes);
  CHECK(axes >= ion_swap);
}

TEST_CASE("experiment depth ranges are capped at 10") {
  auto config = tiny_depth_config();
  config.k_ref = 12;
  CHECK_THROWS_AS(run_depth_convergence(config), std::invalid_argument);
}

TEST_CASE("search comparison pairs runs and reports reach counts") {
  SearchCompareConfig config{testutil::srtio3(1), testutil::cubic_cell(3.905),
                             testutil::table6_forcefield(), testutil::perovskite()};
  config.n_pairs = 2;
  config.seed = 11;
  config.reach_tolerance = 0.05;
  config.settings.patience = 4;
  config.settings.max_relaxations = 4;
  config.settings.relax.max_iters = 60;
  config.settings.relax.depth = 1;
  config.settings.relax.report_depth = 2;
  config.settings.k_report = 2;
  config.settings.neighborhood = {NeighborhoodKind::axes, 1, 3.905 / 3.0};

  const auto result = run_search_compare(config);
  REQUIRE(result.rows.size() == 2);
  CHECK(result.target_energy < 0.0);
  for (const auto& row : result.rows) {
    CHECK(row.bh_reached_at >= 1);
    CHECK(row.axes_reached_at >= 1);
    CHECK(row.bh_reached_at <= row.bh_relaxations + 1);
    CHECK(row.axes_reached_at <= row.axes_relaxations + 1);
  }
  CHECK(result.axes_le_bh_pct >= 0.0);
  CHECK(result.axes_le_bh_pct <= 100.0);
  CHECK(!result.envelope_bh.empty());
  CHECK(!result.envelope_axes.empty());

  const auto again = run_search_compare(config);
  CHECK(search_compare_rows_csv(again) == search_compare_rows_csv(result));
  CHECK(search_compare_envelope_csv(again) == search_compare_envelope_csv(result));
}

TEST_CASE("trial seeds are stable and spread") {
  CHECK(trial_seed(1, 0) == trial_seed(1, 0));
  CHECK(trial_seed(1, 0) != trial_seed(1, 1));
  CHECK(trial_seed(1, 0) != trial_seed(2, 0));
}
