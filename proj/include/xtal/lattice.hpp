#ifndef XTAL_LATTICE_HPP
#define XTAL_LATTICE_HPP

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "xtal/model.hpp"

namespace xtal {

/// Realization of a triclinic cell: columns are the lattice vectors, so
/// cartesian = matrix * fractional. Determinant (cell volume) is cached.
class LatticeMatrix {
 public:
  /// Standard triclinic construction from lengths and angles. Throws
  /// std::invalid_argument when the angles do not define a cell of
  /// positive volume.
  static LatticeMatrix from_cell(const UnitCell& cell);

  const Eigen::Matrix3d& cart() const { return m_; }
  const Eigen::Matrix3d& inv() const { return inv_; }
  double volume() const { return volume_; }

  Eigen::Vector3d to_cart(const Eigen::Vector3d& frac) const { return m_ * frac; }
  Eigen::Vector3d to_frac(const Eigen::Vector3d& cart) const { return inv_ * cart; }

 private:
  Eigen::Matrix3d m_ = Eigen::Matrix3d::Identity();
  Eigen::Matrix3d inv_ = Eigen::Matrix3d::Identity();
  double volume_ = 1.0;
};

inline LatticeMatrix lattice_matrix(const UnitCell& cell) {
  return LatticeMatrix::from_cell(cell);
}

/// All integer offsets (k1,k2,k3) with max(|k1|,|k2|,|k3|) <= depth, in
/// lexicographic order; (2k+1)^3 offsets containing (0,0,0) exactly once.
struct ImageShell {
  int depth = 1;
  std::vector<Eigen::Vector3i> offsets;

  static ImageShell cube(int depth);
};

/// Euclidean distance (angstrom) between site i and the image of site j
/// translated by the given cell offset.
double distance(const Structure& s, int i, int j, const Eigen::Vector3i& offset);

/// True iff every pair of ions over the shell keeps its hard spheres apart:
/// d(i, j+offset) >= radius_i + radius_j, excluding i==j at offset (0,0,0).
bool is_feasible(const Structure& s, const ImageShell& shell);

/// Uniform rejection sampling of fractional positions until the structure
/// passes the depth-1 feasibility check. Deterministic for a fixed seed.
/// Throws std::runtime_error after max_attempts rejected draws.
Structure random_feasible(const UnitCell& cell, const Composition& composition,
                          std::uint64_t seed, int max_attempts);
Structure random_feasible(const UnitCell& cell, const Composition& composition,
                          std::mt19937_64& rng, int max_attempts);

/// Uniform double in [0,1) from the top 53 bits of the generator output;
/// identical across platforms for a given stream.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

}  // namespace xtal

#endif
