#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "helpers.hpp"
#include "xtal/energy.hpp"
#include "xtal/lattice.hpp"
#include "xtal/localsearch.hpp"

using namespace xtal;

namespace {

std::vector<Move> collect_moves(const Structure& s, const NeighborhoodSpec& spec) {
  std::vector<Move> moves;
  for_each_feasible_move(s, spec, [&](const Move& m) {
    moves.push_back(m);
    return true;
  });
  return moves;
}

/// Canonical fingerprint of an arrangement for set comparisons.
std::string fingerprint(const Structure& s) {
  std::string out;
  char buf[96];
  for (const auto& site : s.sites) {
    std::snprintf(buf, sizeof(buf), "%d:%.9f,%.9f,%.9f;", site.species, site.frac.x(),
                  site.frac.y(), site.frac.z());
    out += buf;
  }
  return out;
}

Structure two_ion_toy(double a = 4.0) {
  Structure s;
  s.cell = testutil::cubic_cell(a);
  s.species = {{"P", 1, 0.2}, {"M", -1, 0.2}};
  s.sites = {{0, {0.13, 0.22, 0.31}}, {1, {0.57, 0.66, 0.74}}};
  return s;
}

long binomial(int n, int k) {
  if (k > n) return 0;
  long r = 1;
  for (int d = 1; d <= k; ++d) r = r * (n - k + d) / d;
  return r;
}

long factorial(int k) {
  long r = 1;
  for (int d = 2; d <= k; ++d) r *= d;
  return r;
}

}  // namespace

TEST_CASE("axes candidates per ion: 3 lines of g points through the ion") {
  // cubic y=4, delta=1: 4 grid points per axis, 9 candidate positions per
  // ion beyond its own, so at most 18 neighbors for 2 ions
  const Structure s = two_ion_toy(4.0);
  const auto moves = collect_moves(s, {NeighborhoodKind::axes, 1, 1.0});
  CHECK(moves.size() <= 18);
  CHECK(moves.size() == 18);  // generic positions, small radii: nothing filtered
  for (const auto& m : moves) {
    CHECK(m.sites.size() == 1);
    CHECK(m.targets.size() == 1);
  }
}

TEST_CASE("axes obeys the n*(3g-2)-n cardinality bound and matches brute force") {
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 4);  // 2..5 sites
    Structure s;
    const double a = 5.0;
    s.cell = testutil::cubic_cell(a);
    s.species = {{"P", 1, 0.15}, {"M", -1, 0.15}};
    for (int i = 0; i < n; ++i)
      s.sites.push_back({i % 2, {uniform01(rng), uniform01(rng), uniform01(rng)}});
    const int g = 2 + static_cast<int>(rng() % 4);  // 2..5 points per axis
    const double delta = a / g;
    const NeighborhoodSpec spec{NeighborhoodKind::axes, 1, delta};

    const auto neighbors = enumerate_neighbors(s, spec);
    CHECK(static_cast<long>(neighbors.size()) <= static_cast<long>(n) * (3 * g - 2) - n);

    // independent brute-force enumeration straight from the definition
    const ImageShell shell = ImageShell::cube(1);
    long count = 0;
    for (int i = 0; i < n; ++i) {
      for (int d = 0; d < 3; ++d) {
        for (int j = 1; j < g; ++j) {
          Structure cand = s;
          cand.sites[i].frac[d] = wrap_unit(cand.sites[i].frac[d] + j * (delta / a));
          bool occupied = false;
          for (int t = 0; t < n; ++t) {
            if (t == i) continue;
            occupied |= (cand.sites[i].frac - cand.sites[t].frac).cwiseAbs().maxCoeff() < 1e-9;
          }
          if (!occupied && is_feasible(cand, shell)) ++count;
        }
      }
    }
    CHECK(static_cast<long>(neighbors.size()) == count);
    for (const auto& nb : neighbors) CHECK(is_feasible(nb, shell));
  }
}

TEST_CASE("2-ion swap on (A,A,B) yields exactly the species-changing swaps") {
  Structure s;
  s.cell = testutil::cubic_cell(6.0);
  s.species = {{"A", 1, 0.2}, {"B", -2, 0.2}};
  s.sites = {{0, {0.1, 0.1, 0.1}}, {0, {0.5, 0.5, 0.5}}, {1, {0.8, 0.2, 0.6}}};
  const auto moves = collect_moves(s, {NeighborhoodKind::k_ion_swap, 2, 0.0});
  CHECK(moves.size() == 2);  // A1<->B and A2<->B; A1<->A2 is an identity
}

TEST_CASE("ion swaps vanish when all sites share a species") {
  Structure s;
  s.cell = testutil::cubic_cell(6.0);
  s.species = {{"A", 1, 0.2}};
  s.sites = {{0, {0.1, 0.1, 0.1}}, {0, {0.5, 0.5, 0.5}}, {0, {0.8, 0.2, 0.6}}};
  CHECK(collect_moves(s, {NeighborhoodKind::k_ion_swap, 2, 0.0}).empty());
  CHECK(collect_moves(s, {NeighborhoodKind::k_ion_swap, 3, 0.0}).empty());
}

TEST_CASE("k-ion swap respects the C(n,k)(k!-1) bound") {
  std::mt19937_64 rng(109);
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 3 + static_cast<int>(rng() % 3);  // 3..5
    Structure s;
    s.cell = testutil::cubic_cell(6.0);
    s.species = {{"A", 1, 0.1}, {"B", -1, 0.1}, {"C", 2, 0.1}};
    for (int i = 0; i < n; ++i)
      s.sites.push_back(
          {static_cast<int>(rng() % 3), {uniform01(rng), uniform01(rng), uniform01(rng)}});
    for (int k = 2; k <= 3; ++k) {
      const auto moves = collect_moves(s, {NeighborhoodKind::k_ion_swap, k, 0.0});
      CHECK(static_cast<long>(moves.size()) <= binomial(n, k) * (factorial(k) - 1));
    }
  }
}

TEST_CASE("1-arity grid swap matches a brute-force mirror") {
  std::mt19937_64 rng(113);
  for (int trial = 0; trial < 6; ++trial) {
    const int n = 2 + static_cast<int>(rng() % 3);
    const double a = 4.0;
    Structure s;
    s.cell = testutil::cubic_cell(a);
    s.species = {{"P", 1, 0.15}, {"M", -1, 0.15}};
    for (int i = 0; i < n; ++i)
      s.sites.push_back({i % 2, {uniform01(rng), uniform01(rng), uniform01(rng)}});
    const double delta = 2.0;  // 2x2x2 grid
    const auto neighbors = enumerate_neighbors(s, {NeighborhoodKind::k_swap, 1, delta});

    // brute force: each site exchanged with each grid point
    const ImageShell shell = ImageShell::cube(1);
    std::multiset<std::string> expected;
    for (int i = 0; i < n; ++i) {
      for (int j1 = 0; j1 < 2; ++j1)
        for (int j2 = 0; j2 < 2; ++j2)
          for (int j3 = 0; j3 < 2; ++j3) {
            const Eigen::Vector3d point(j1 * 0.5, j2 * 0.5, j3 * 0.5);
            if ((point - s.sites[i].frac).cwiseAbs().maxCoeff() < 1e-9) continue;
            Structure cand = s;
            cand.sites[i].frac = point;
            for (int t = 0; t < n; ++t) {
              if (t == i) continue;
              if ((point - s.sites[t].frac).cwiseAbs().maxCoeff() < 1e-9)
                cand.sites[t].frac = s.sites[i].frac;  // swap content
            }
            if (is_feasible(cand, shell)) expected.insert(fingerprint(cand));
          }
    }
    std::multiset<std::string> got;
    for (const auto& nb : neighbors) got.insert(fingerprint(nb));
    CHECK(got == expected);
  }
}

TEST_CASE("2-arity grid swap includes singles and simultaneous pairs") {
  Structure s = two_ion_toy(4.0);
  const double delta = 2.0;  // 8 grid points
  const auto singles = enumerate_neighbors(s, {NeighborhoodKind::k_swap, 1, delta});
  const auto doubles = enumerate_neighbors(s, {NeighborhoodKind::k_swap, 2, delta});
  CHECK(doubles.size() > singles.size());
  // arity <= k: every 1-arity neighbor appears among the k=2 neighbors
  std::multiset<std::string> all;
  for (const auto& nb : doubles) all.insert(fingerprint(nb));
  for (const auto& nb : singles) CHECK(all.count(fingerprint(nb)) >= 1);
  // simultaneous pair assignments: C(2,2) * 8*7 ordered distinct targets
  // filtered for feasibility, plus the singles
  CHECK(doubles.size() <= singles.size() + 56);
}

TEST_CASE("grid swap onto an occupied point exchanges the two ions") {
  Structure s;
  s.cell = testutil::cubic_cell(4.0);
  s.species = {{"P", 1, 0.2}, {"M", -1, 0.2}};
  // M sits exactly on a grid point of the 2x2x2 grid
  s.sites = {{0, {0.1, 0.2, 0.3}}, {1, {0.5, 0.5, 0.5}}};
  const auto moves = collect_moves(s, {NeighborhoodKind::k_swap, 1, 2.0});
  bool found_swap = false;
  for (const auto& m : moves) {
    if (m.sites.size() == 2) {
      const Structure after = apply_move(s, m);
      found_swap = true;
      CHECK(after.sites[0].frac == Eigen::Vector3d(0.5, 0.5, 0.5));
      CHECK(after.sites[1].frac == Eigen::Vector3d(0.1, 0.2, 0.3));
    }
  }
  CHECK(found_swap);
}

TEST_CASE("delta above the smallest cell length is an empty-grid error") {
  const Structure s = two_ion_toy(4.0);
  CHECK_THROWS_AS(collect_moves(s, {NeighborhoodKind::axes, 1, 4.5}), EmptyGridError);
  CHECK_THROWS_AS(collect_moves(s, {NeighborhoodKind::k_swap, 1, 4.5}), EmptyGridError);
}

TEST_CASE("moves change exactly the named sites") {
  std::mt19937_64 rng(127);
  const Structure s =
      random_feasible(testutil::cubic_cell(5.2), testutil::srtio3(1), rng, 100000);
  for (auto kind : {NeighborhoodKind::axes, NeighborhoodKind::k_ion_swap,
                    NeighborhoodKind::k_swap}) {
    const NeighborhoodSpec spec{kind, 2, 5.2 / 3.0};
    for (const auto& m : collect_moves(s, spec)) {
      const Structure after = apply_move(s, m);
      for (int i = 0; i < s.size(); ++i) {
        const bool listed =
            std::find(m.sites.begin(), m.sites.end(), i) != m.sites.end();
        const bool changed = after.sites[i].frac != s.sites[i].frac;
        CHECK(changed == listed);
      }
    }
  }
}

TEST_CASE("greedy step fixes a swapped perovskite") {
  const Structure ground = testutil::perovskite();
  Structure swapped = ground;
  std::swap(swapped.sites[0].frac, swapped.sites[1].frac);  // Sr <-> Ti
  const ForceField ff = testutil::table6_forcefield();
  const NeighborhoodSpec spec{NeighborhoodKind::k_ion_swap, 2, 0.0};

  const auto improved = greedy_step(swapped, spec, ff, 1);
  REQUIRE(improved.has_value());
  CHECK(depth_energy(*improved, ff, 1).total < depth_energy(swapped, ff, 1).total);

  // the returned structure is a member of the enumerated neighborhood
  std::multiset<std::string> neighborhood;
  for (const auto& nb : enumerate_neighbors(swapped, spec))
    neighborhood.insert(fingerprint(nb));
  CHECK(neighborhood.count(fingerprint(*improved)) >= 1);
}

TEST_CASE("greedy step returns nothing at a combinatorial minimum") {
  const Structure ground = testutil::perovskite();
  const ForceField ff = testutil::table6_forcefield();
  CHECK_FALSE(greedy_step(ground, {NeighborhoodKind::k_ion_swap, 2, 0.0}, ff, 1));
}

TEST_CASE("local search terminates at a certified axes minimum") {
  std::mt19937_64 rng(131);
  const ForceField ff = testutil::table6_forcefield();
  const NeighborhoodSpec spec{NeighborhoodKind::axes, 1, 3.905 / 4.0};
  for (int trial = 0; trial < 5; ++trial) {
    const Structure start =
        random_feasible(testutil::cubic_cell(3.905), testutil::srtio3(1), rng, 100000);
    const LocalSearchResult r = local_search(start, spec, ff, 1);

    for (std::size_t t = 1; t < r.energy_trace.size(); ++t)
      CHECK(r.energy_trace[t] < r.energy_trace[t - 1]);
    CHECK(static_cast<int>(r.energy_trace.size()) == r.steps + 1);

    // certificate: full re-enumeration finds no strictly improving neighbor
    const double final_energy = depth_energy(r.structure, ff, 1).total;
    CHECK(final_energy == doctest::Approx(r.energy_trace.back()).epsilon(1e-9));
    for (const auto& nb : enumerate_neighbors(r.structure, spec))
      CHECK(depth_energy(nb, ff, 1).total >= final_energy - kEnergyTie);
  }
}

TEST_CASE("local search from a minimum takes zero steps") {
  const Structure ground = testutil::perovskite();
  const ForceField ff = testutil::table6_forcefield();
  const LocalSearchResult r =
      local_search(ground, {NeighborhoodKind::k_ion_swap, 2, 0.0}, ff, 1);
  CHECK(r.steps == 0);
  CHECK(fingerprint(r.structure) == fingerprint(ground));
}

TEST_CASE("enumeration order and local search are deterministic") {
  std::mt19937_64 rng(137);
  const Structure s =
      random_feasible(testutil::cubic_cell(5.2), testutil::srtio3(1), rng, 100000);
  const NeighborhoodSpec spec{NeighborhoodKind::axes, 1, 1.0};
  const auto a = collect_moves(s, spec);
  const auto b = collect_moves(s, spec);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].sites == b[i].sites);
    CHECK(a[i].targets[0] == b[i].targets[0]);
  }
  const ForceField ff = testutil::table6_forcefield();
  const LocalSearchResult r1 = local_search(s, spec, ff, 1);
  const LocalSearchResult r2 = local_search(s, spec, ff, 1);
  CHECK(fingerprint(r1.structure) == fingerprint(r2.structure));
  CHECK(r1.energy_trace == r2.energy_trace);
}
