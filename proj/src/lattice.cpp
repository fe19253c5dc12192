#include "xtal/lattice.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace xtal {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

}  // namespace

LatticeMatrix LatticeMatrix::from_cell(const UnitCell& cell) {
  const double y1 = cell.lengths[0], y2 = cell.lengths[1], y3 = cell.lengths[2];
  if (!(y1 > 0.0 && y2 > 0.0 && y3 > 0.0))
    throw std::invalid_argument("cell lengths must be positive");
  for (int d = 0; d < 3; ++d) {
    const double a = cell.angles_deg[d];
    if (!(a > 0.0 && a < 180.0))
      throw std::invalid_argument("cell angles must lie in (0, 180) degrees");
  }
  const double c12 = std::cos(cell.angles_deg[0] * kDegToRad);
  const double s12 = std::sin(cell.angles_deg[0] * kDegToRad);
  const double c13 = std::cos(cell.angles_deg[1] * kDegToRad);
  const double c23 = std::cos(cell.angles_deg[2] * kDegToRad);

  // Squared scaled volume; positive exactly when the three angles are
  // geometrically realizable. Slivers below 1e-4 of the orthogonal box
  // count as degenerate.
  const double v2 = 1.0 - c12 * c12 - c13 * c13 - c23 * c23 + 2.0 * c12 * c13 * c23;
  if (!(v2 > 1e-8))
    throw std::invalid_argument("degenerate cell: angles give near-zero volume");
  const double v = std::sqrt(v2);

  LatticeMatrix lm;
  lm.m_.col(0) = Eigen::Vector3d(y1, 0.0, 0.0);
  lm.m_.col(1) = Eigen::Vector3d(y2 * c12, y2 * s12, 0.0);
  lm.m_.col(2) = Eigen::Vector3d(y3 * c13, y3 * (c23 - c13 * c12) / s12, y3 * v / s12);
  lm.volume_ = y1 * y2 * y3 * v;
  lm.inv_ = lm.m_.inverse();
  return lm;
}

ImageShell ImageShell::cube(int depth) {
  if (depth < 0) throw std::invalid_argument("shell depth must be >= 0");
  ImageShell shell;
  shell.depth = depth;
  shell.offsets.reserve(static_cast<std::size_t>(2 * depth + 1) * (2 * depth + 1) *
                        (2 * depth + 1));
  for (int k1 = -depth; k1 <= depth; ++k1)
    for (int k2 = -depth; k2 <= depth; ++k2)
      for (int k3 = -depth; k3 <= depth; ++k3) shell.offsets.emplace_back(k1, k2, k3);
  return shell;
}

double distance(const Structure& s, int i, int j, const Eigen::Vector3i& offset) {
  const LatticeMatrix lm = LatticeMatrix::from_cell(s.cell);
  const Eigen::Vector3d delta = s.sites[j].frac + offset.cast<double>() - s.sites[i].frac;
  return lm.to_cart(delta).norm();
}

bool is_feasible(const Structure& s, const ImageShell& shell) {
  const LatticeMatrix lm = LatticeMatrix::from_cell(s.cell);
  const int n = s.size();
  std::vector<Eigen::Vector3d> cart(n);
  for (int i = 0; i < n; ++i) cart[i] = lm.to_cart(s.sites[i].frac);

  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const double min_d = s.site_species(i).radius + s.site_species(j).radius;
      const double min_d2 = min_d * min_d;
      const Eigen::Vector3d base = cart[j] - cart[i];
      for (const auto& o : shell.offsets) {
        if (i == j && o == Eigen::Vector3i::Zero()) continue;
        const Eigen::Vector3d d = base + lm.cart() * o.cast<double>();
        if (d.squaredNorm() < min_d2) return false;
      }
    }
  }
  return true;
}

Structure random_feasible(const UnitCell& cell, const Composition& composition,
                          std::uint64_t seed, int max_attempts) {
  std::mt19937_64 rng(seed);
  return random_feasible(cell, composition, rng, max_attempts);
}

Structure random_feasible(const UnitCell& cell, const Composition& composition,
                          std::mt19937_64& rng, int max_attempts) {
  if (max_attempts < 1) throw std::invalid_argument("max_attempts must be >= 1");
  const auto validation = validate_composition(composition);
  if (!validation) throw std::invalid_argument("invalid composition: " + validation.violation);

  const int n = composition.sites_per_cell();
  const ImageShell shell = ImageShell::cube(1);
  std::vector<Eigen::Vector3d> frac(n);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    for (int i = 0; i < n; ++i)
      frac[i] = Eigen::Vector3d(uniform01(rng), uniform01(rng), uniform01(rng));
    Structure s = build_structure(cell, composition, frac);
    if (is_feasible(s, shell)) return s;
  }
  throw std::runtime_error("random_feasible: no feasible structure after " +
                           std::to_string(max_attempts) + " attempts (over-packed cell?)");
}

}  // namespace xtal
