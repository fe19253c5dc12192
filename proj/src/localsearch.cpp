#include "xtal/localsearch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "xtal/lattice.hpp"

namespace xtal {

namespace {

constexpr double kSamePointTol = 1e-9;  // fractional units, per coordinate

bool same_coord(double a, double b) {
  const double d = a - b;
  return std::abs(d - std::round(d)) <= kSamePointTol;
}

bool same_point(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return same_coord(a.x(), b.x()) && same_coord(a.y(), b.y()) && same_coord(a.z(), b.z());
}

void validate_spec(const NeighborhoodSpec& spec, const UnitCell& cell) {
  const bool needs_delta =
      spec.kind == NeighborhoodKind::k_swap || spec.kind == NeighborhoodKind::axes;
  const bool needs_k =
      spec.kind == NeighborhoodKind::k_ion_swap || spec.kind == NeighborhoodKind::k_swap;
  if (needs_k && spec.k < 1) throw std::invalid_argument("neighborhood: k must be >= 1");
  if (needs_delta) {
    if (!(spec.delta > 0.0)) throw std::invalid_argument("neighborhood: delta must be > 0");
    if (spec.delta > cell.lengths.minCoeff())
      throw EmptyGridError("neighborhood: delta exceeds the smallest cell length (empty grid)");
  }
}

/// Hard-sphere screening of a candidate move against the depth-1 shell,
/// restricted to pairs that involve a moved site.
class FeasibilityScan {
 public:
  explicit FeasibilityScan(const Structure& s)
      : s_(s), lm_(LatticeMatrix::from_cell(s.cell)) {
    const ImageShell shell = ImageShell::cube(1);
    offsets_.reserve(shell.offsets.size());
    for (const auto& o : shell.offsets) offsets_.push_back(lm_.cart() * o.cast<double>());
    cart_.resize(s.sites.size());
    for (std::size_t i = 0; i < s.sites.size(); ++i) cart_[i] = lm_.to_cart(s.sites[i].frac);
  }

  bool ok(const Move& move) const {
    const int n = static_cast<int>(cart_.size());
    std::vector<char> moved(n, 0);
    std::vector<Eigen::Vector3d> new_cart(move.sites.size());
    for (std::size_t m = 0; m < move.sites.size(); ++m) {
      moved[move.sites[m]] = 1;
      new_cart[m] = lm_.to_cart(wrap_unit(move.targets[m]));
    }
    for (std::size_t m = 0; m < move.sites.size(); ++m) {
      const int i = move.sites[m];
      const double ri = s_.site_species(i).radius;
      for (int j = 0; j < n; ++j) {
        if (moved[j]) continue;
        const double min_d = ri + s_.site_species(j).radius;
        const Eigen::Vector3d base = cart_[j] - new_cart[m];
        for (const auto& t : offsets_)
          if ((base + t).squaredNorm() < min_d * min_d) return false;
      }
    }
    for (std::size_t m = 0; m + 1 < move.sites.size(); ++m) {
      for (std::size_t l = m + 1; l < move.sites.size(); ++l) {
        const double min_d = s_.site_species(move.sites[m]).radius +
                             s_.site_species(move.sites[l]).radius;
        const Eigen::Vector3d base = new_cart[l] - new_cart[m];
        for (const auto& t : offsets_)
          if ((base + t).squaredNorm() < min_d * min_d) return false;
      }
    }
    return true;
  }

 private:
  const Structure& s_;
  LatticeMatrix lm_;
  std::vector<Eigen::Vector3d> offsets_;
  std::vector<Eigen::Vector3d> cart_;
};

/// Visits combinations of `arity` indices out of n in lexicographic order.
bool for_each_combination(int n, int arity, const std::function<bool(const std::vector<int>&)>& f) {
  if (arity > n) return true;
  std::vector<int> combo(arity);
  std::iota(combo.begin(), combo.end(), 0);
  while (true) {
    if (!f(combo)) return false;
    int pos = arity - 1;
    while (pos >= 0 && combo[pos] == n - arity + pos) --pos;
    if (pos < 0) return true;
    ++combo[pos];
    for (int q = pos + 1; q < arity; ++q) combo[q] = combo[q - 1] + 1;
  }
}

bool emit_ion_swaps(const Structure& s, const NeighborhoodSpec& spec,
                    const FeasibilityScan& feas,
                    const std::function<bool(const Move&)>& visit) {
  const int n = s.size();
  // choosing k sites out of fewer than k is impossible: empty neighborhood
  return for_each_combination(n, spec.k, [&](const std::vector<int>& chosen) {
    std::vector<int> perm(chosen.size());
    std::iota(perm.begin(), perm.end(), 0);
    while (std::next_permutation(perm.begin(), perm.end())) {
      // skip permutations that only exchange positions among equal species:
      // those arrangements are identical to the input
      bool species_identity = true;
      for (std::size_t m = 0; m < perm.size(); ++m) {
        if (s.sites[chosen[m]].species != s.sites[chosen[perm[m]]].species) {
          species_identity = false;
          break;
        }
      }
      if (species_identity) continue;

      Move move;
      move.kind = NeighborhoodKind::k_ion_swap;
      for (std::size_t m = 0; m < perm.size(); ++m) {
        if (perm[m] == static_cast<int>(m)) continue;  // this site does not move
        move.sites.push_back(chosen[m]);
        move.targets.push_back(s.sites[chosen[perm[m]]].frac);
      }
      if (feas.ok(move) && !visit(move)) return false;
    }
    return true;
  });
}

struct Grid {
  std::vector<Eigen::Vector3d> points;  // fractional, lexicographic in (j1,j2,j3)
};

Grid cell_grid(const UnitCell& cell, double delta) {
  Grid grid;
  Eigen::Vector3i g;
  Eigen::Vector3d step;
  for (int d = 0; d < 3; ++d) {
    g[d] = static_cast<int>(std::ceil(cell.lengths[d] / delta));
    step[d] = delta / cell.lengths[d];
  }
  grid.points.reserve(static_cast<std::size_t>(g[0]) * g[1] * g[2]);
  for (int j1 = 0; j1 < g[0]; ++j1)
    for (int j2 = 0; j2 < g[1]; ++j2)
      for (int j3 = 0; j3 < g[2]; ++j3)
        grid.points.emplace_back(j1 * step[0], j2 * step[1], j3 * step[2]);
  return grid;
}

bool emit_grid_swaps(const Structure& s, const NeighborhoodSpec& spec,
                     const FeasibilityScan& feas,
                     const std::function<bool(const Move&)>& visit) {
  const int n = s.size();
  const Grid grid = cell_grid(s.cell, spec.delta);
  const int n_points = static_cast<int>(grid.points.size());

  // occupant[p] = site currently on grid point p, if any
  std::vector<int> occupant(n_points, -1);
  for (int p = 0; p < n_points; ++p)
    for (int i = 0; i < n; ++i)
      if (same_point(grid.points[p], s.sites[i].frac)) {
        occupant[p] = i;
        break;
      }

  const int max_arity = std::min(spec.k, n);
  for (int arity = 1; arity <= max_arity; ++arity) {
    std::vector<int> assign(arity);  // grid point index per chosen site
    const bool keep_going = for_each_combination(n, arity, [&](const std::vector<int>& chosen) {
      std::fill(assign.begin(), assign.end(), -1);
      int level = 0;
      while (level >= 0) {
        ++assign[level];
        if (assign[level] >= n_points) {
          assign[level] = -1;
          --level;
          continue;
        }
        const int p = assign[level];
        bool valid = !same_point(grid.points[p], s.sites[chosen[level]].frac);
        for (int q = 0; valid && q < level; ++q)
          if (assign[q] == p) valid = false;
        if (!valid) continue;
        if (level + 1 < arity) {
          ++level;
          continue;
        }

        Move move;
        move.kind = NeighborhoodKind::k_swap;
        for (int m = 0; m < arity; ++m) {
          move.sites.push_back(chosen[m]);
          move.targets.push_back(grid.points[assign[m]]);
        }
        // occupied targets swap content: a resident ion that is not itself
        // being reassigned takes the vacated position
        for (int m = 0; m < arity; ++m) {
          const int res = occupant[assign[m]];
          if (res < 0) continue;
          if (std::find(chosen.begin(), chosen.end(), res) != chosen.end()) continue;
          move.sites.push_back(res);
          move.targets.push_back(s.sites[chosen[m]].frac);
        }
        if (feas.ok(move) && !visit(move)) return false;
      }
      return true;
    });
    if (!keep_going) return false;
  }
  return true;
}

bool emit_axes_moves(const Structure& s, const NeighborhoodSpec& spec,
                     const FeasibilityScan& feas,
                     const std::function<bool(const Move&)>& visit) {
  const int n = s.size();
  Eigen::Vector3i g;
  Eigen::Vector3d step;
  for (int d = 0; d < 3; ++d) {
    g[d] = static_cast<int>(std::ceil(s.cell.lengths[d] / spec.delta));
    step[d] = spec.delta / s.cell.lengths[d];
  }
  for (int i = 0; i < n; ++i) {
    for (int d = 0; d < 3; ++d) {
      for (int j = 1; j < g[d]; ++j) {
        Eigen::Vector3d target = s.sites[i].frac;
        target[d] = wrap_unit(target[d] + j * step[d]);
        if (same_point(target, s.sites[i].frac)) continue;
        // an occupied point is not a relocation target
        bool occupied = false;
        for (int t = 0; t < n && !occupied; ++t)
          occupied = t != i && same_point(target, s.sites[t].frac);
        if (occupied) continue;

        Move move;
        move.kind = NeighborhoodKind::axes;
        move.sites.push_back(i);
        move.targets.push_back(target);
        if (feas.ok(move) && !visit(move)) return false;
      }
    }
  }
  return true;
}

}  // namespace

Structure apply_move(const Structure& s, const Move& move) {
  Structure out = s;
  for (std::size_t m = 0; m < move.sites.size(); ++m)
    out.sites[move.sites[m]].frac = wrap_unit(move.targets[m]);
  return out;
}

void for_each_feasible_move(const Structure& s, const NeighborhoodSpec& spec,
                            const std::function<bool(const Move&)>& visit) {
  validate_spec(spec, s.cell);
  const FeasibilityScan feas(s);
  switch (spec.kind) {
    case NeighborhoodKind::k_ion_swap:
      emit_ion_swaps(s, spec, feas, visit);
      break;
    case NeighborhoodKind::k_swap:
      emit_grid_swaps(s, spec, feas, visit);
      break;
    case NeighborhoodKind::axes:
      emit_axes_moves(s, spec, feas, visit);
      break;
  }
}

std::vector<Structure> enumerate_neighbors(const Structure& s, const NeighborhoodSpec& spec) {
  std::vector<Structure> out;
  for_each_feasible_move(s, spec, [&](const Move& move) {
    out.push_back(apply_move(s, move));
    return true;
  });
  return out;
}

std::optional<Structure> greedy_step(const Structure& s, const NeighborhoodSpec& spec,
                                     const ForceField& ff, int k_energy) {
  EnergyContext ctx(s, ff, k_energy);
  double best_delta = 0.0;
  std::optional<Move> best;
  for_each_feasible_move(s, spec, [&](const Move& move) {
    const double delta = ctx.energy_delta(move.sites, move.targets);
    if (delta < best_delta) {
      best_delta = delta;
      best = move;
    }
    return true;
  });
  if (!best) return std::nullopt;
  return apply_move(s, *best);
}

LocalSearchResult local_search(const Structure& s, const NeighborhoodSpec& spec,
                               const ForceField& ff, int k_energy, int max_steps) {
  if (max_steps < 0) throw std::invalid_argument("local_search: max_steps must be >= 0");
  EnergyContext ctx(s, ff, k_energy);
  LocalSearchResult result;
  double energy = ctx.energy().total;
  result.energy_trace.push_back(energy);

  while (result.steps < max_steps) {
    double best_delta = 0.0;
    std::optional<Move> best;
    for_each_feasible_move(ctx.structure(), spec, [&](const Move& move) {
      const double delta = ctx.energy_delta(move.sites, move.targets);
      if (delta < best_delta) {
        best_delta = delta;
        best = move;
      }
      return true;
    });
    if (!best) break;
    ctx.apply(best->sites, best->targets);
    energy += best_delta;
    result.energy_trace.push_back(energy);
    ++result.steps;
  }
  result.structure = ctx.structure();
  return result;
}

}  // namespace xtal
