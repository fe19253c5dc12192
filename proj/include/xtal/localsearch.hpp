#ifndef XTAL_LOCALSEARCH_HPP
#define XTAL_LOCALSEARCH_HPP

#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "xtal/energy.hpp"
#include "xtal/model.hpp"

namespace xtal {

enum class NeighborhoodKind { k_ion_swap, k_swap, axes };

/// Neighborhoods of section-3 style local search. `k` is the swap arity for
/// the two swap kinds; `delta` (angstrom) is the discretization step for
/// k_swap (cell grid anchored at the origin) and axes (per-ion line grid
/// anchored at the ion's own coordinate).
struct NeighborhoodSpec {
  NeighborhoodKind kind = NeighborhoodKind::axes;
  int k = 2;
  double delta = 1.0;
};

class EmptyGridError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One candidate move: the listed sites take the listed fractional targets
/// simultaneously; all other sites stay put.
struct Move {
  NeighborhoodKind kind = NeighborhoodKind::axes;
  std::vector<int> sites;
  std::vector<Eigen::Vector3d> targets;
};

Structure apply_move(const Structure& s, const Move& move);

/// Streams every feasible move of the neighborhood in a fixed deterministic
/// order. The visitor returns false to stop early. Throws EmptyGridError when
/// delta exceeds the smallest cell length (grid kinds only).
void for_each_feasible_move(const Structure& s, const NeighborhoodSpec& spec,
                            const std::function<bool(const Move&)>& visit);

/// Materialized neighborhood: exactly the feasible neighbor structures.
std::vector<Structure> enumerate_neighbors(const Structure& s, const NeighborhoodSpec& spec);

/// Best neighbor by depth-k energy if strictly below the current energy,
/// otherwise nothing. Ties break to the first minimal neighbor in
/// enumeration order.
std::optional<Structure> greedy_step(const Structure& s, const NeighborhoodSpec& spec,
                                     const ForceField& ff, int k_energy);

struct LocalSearchResult {
  Structure structure;
  int steps = 0;
  std::vector<double> energy_trace;  // strictly decreasing
};

/// Greedy descent to a combinatorial local minimum (or the step cap).
LocalSearchResult local_search(const Structure& s, const NeighborhoodSpec& spec,
                               const ForceField& ff, int k_energy, int max_steps = 10000);

}  // namespace xtal

#endif
