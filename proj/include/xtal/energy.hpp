#ifndef XTAL_ENERGY_HPP
#define XTAL_ENERGY_HPP

#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "xtal/lattice.hpp"
#include "xtal/model.hpp"

namespace xtal {

/// Pair distances below this are treated as a hard error rather than an
/// energy value; feasible inputs never get close.
inline constexpr double kMinPairDistance = 1e-9;  // angstrom

/// |energy difference| at or below this compares as a tie.
inline constexpr double kEnergyTie = 1e-9;  // eV

class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EnergyReport {
  double total = 0.0;    // eV
  double per_ion = 0.0;  // eV
  int depth = 0;
  double coulomb_part = 0.0;     // eV
  double buckingham_part = 0.0;  // eV
};

/// The image sum counts every in-cell pair once from each endpoint
/// (literal); `conventional` halves that double counting.
enum class PairCounting { literal, conventional };

/// Coulomb pair energy: constant * qi * qj / d. Throws on d <= 0.
double coulomb_pair(double qi, double qj, double d, double constant);

/// Buckingham pair energy: A * exp(-d/rho) - C / d^6. Throws on d <= 0.
double buckingham_pair(const BuckinghamCoeffs& coeffs, double d);

/// Total energy of the depth-k image sum: every site i interacts with the
/// (2k+1)^3 periodic images of every site j (and its own images, excluding
/// itself at offset zero), each in-cell pair counted once from each
/// endpoint. The image window of a pair is centered on its minimum-image
/// separation, which keeps the truncated sum invariant under rigid
/// translation of the arrangement. Throws SingularityError when any pair
/// distance falls below kMinPairDistance; std::invalid_argument on depth < 1.
EnergyReport depth_energy(const Structure& s, const ForceField& ff, int depth,
                          PairCounting counting = PairCounting::literal);

/// Analytic derivative of depth_energy with respect to the cartesian
/// position of each site (eV/angstrom); all periodic images of a site move
/// rigidly with it.
std::vector<Eigen::Vector3d> depth_energy_gradient(const Structure& s, const ForceField& ff,
                                                   int depth);

struct EnergyGradient {
  EnergyReport report;
  std::vector<Eigen::Vector3d> gradient;
};

EnergyGradient depth_energy_with_gradient(const Structure& s, const ForceField& ff, int depth);

enum class Ordering { a_lower, b_lower, tie };

/// Compares depth-k totals of two structures over the same cell and
/// composition; |delta| <= kEnergyTie is a tie. Throws std::invalid_argument
/// when cells or site species sequences differ.
Ordering energy_ordering(const Structure& a, const Structure& b, const ForceField& ff,
                         int depth);

/// Precomputed state for repeated energy work on one structure: species pair
/// coefficients, cartesian offsets of the image shell, cached cartesian
/// positions. Used by local search to price candidate moves incrementally.
class EnergyContext {
 public:
  EnergyContext(const Structure& s, const ForceField& ff, int depth);

  EnergyReport energy() const;
  EnergyGradient energy_gradient() const;

  /// Exact energy change if the listed sites moved to the given fractional
  /// positions: only pair terms touching a moved site are re-evaluated
  /// (self-image terms are arrangement-independent).
  double energy_delta(std::span<const int> sites,
                      std::span<const Eigen::Vector3d> new_frac) const;

  /// Depth-1 hard-sphere check restricted to pairs touching a moved site;
  /// exact for structures that were feasible before the move.
  bool move_keeps_feasible(std::span<const int> sites,
                           std::span<const Eigen::Vector3d> new_frac) const;

  /// Commits a move to the cached structure and positions.
  void apply(std::span<const int> sites, std::span<const Eigen::Vector3d> new_frac);

  const Structure& structure() const { return s_; }
  const LatticeMatrix& lattice() const { return lm_; }
  int depth() const { return depth_; }

 private:
  struct PairCoeffs {
    double A = 0.0;
    double inv_rho = 1.0;
    double C = 0.0;
    double kqq = 0.0;      // coulomb constant * qi * qj
    double min_d2 = 0.0;   // squared hard-sphere contact distance
  };

  const PairCoeffs& coeffs(int i, int j) const {
    return pair_coeffs_[s_.sites[i].species * n_species_ + s_.sites[j].species];
  }
  double pair_phi(const PairCoeffs& pc, double d2, double* coulomb,
                  double* buckingham) const;
  double window_sum(const PairCoeffs& pc, const Eigen::Vector3d& frac_a,
                    const Eigen::Vector3d& frac_b) const;

  Structure s_;
  LatticeMatrix lm_;
  int depth_;
  int n_species_;
  std::vector<PairCoeffs> pair_coeffs_;
  std::vector<Eigen::Vector3d> offsets_cart_;       // full depth shell
  std::vector<Eigen::Vector3d> feas_offsets_cart_;  // depth-1 shell
  double self_coulomb_ = 0.0;     // arrangement-independent self-image terms
  double self_buckingham_ = 0.0;
};

}  // namespace xtal

#endif
