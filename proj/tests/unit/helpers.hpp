#ifndef XTAL_TESTS_HELPERS_HPP
#define XTAL_TESTS_HELPERS_HPP

#include <vector>

#include "xtal/lattice.hpp"
#include "xtal/model.hpp"

namespace testutil {

/// The bundled Buckingham table (eV, angstrom, eV*angstrom^6).
inline xtal::ForceField table6_forcefield() {
  xtal::ForceField ff(14.399645);
  ff.set_pair("O", "O", {1388.77, 0.36262, 175.0});
  ff.set_pair("Y", "O", {23000.0, 0.24203, 0.0});
  ff.set_pair("Sr", "O", {1952.39, 0.33685, 19.22});
  ff.set_pair("Ti", "O", {4590.7279, 0.261, 0.0});
  return ff;
}

inline xtal::Species sr() { return {"Sr", 2, 0.55}; }
inline xtal::Species ti() { return {"Ti", 4, 0.28}; }
inline xtal::Species oxygen() { return {"O", -2, 0.72}; }
inline xtal::Species yttrium() { return {"Y", 3, 0.45}; }

inline xtal::Composition srtio3(int formula_units = 1) {
  xtal::Composition c;
  c.entries = {{sr(), 1}, {ti(), 1}, {oxygen(), 3}};
  c.formula_units = formula_units;
  return c;
}

inline xtal::Composition y2ti2o7() {
  xtal::Composition c;
  c.entries = {{yttrium(), 2}, {ti(), 2}, {oxygen(), 7}};
  c.formula_units = 1;
  return c;
}

/// Cubic SrTiO3 perovskite: Sr at the corner, Ti at the body center, O at
/// the face centers.
inline xtal::Structure perovskite() {
  const xtal::UnitCell cell{{3.905, 3.905, 3.905}, {90.0, 90.0, 90.0}};
  const std::vector<Eigen::Vector3d> frac = {
      {0.0, 0.0, 0.0}, {0.5, 0.5, 0.5}, {0.5, 0.5, 0.0}, {0.5, 0.0, 0.5}, {0.0, 0.5, 0.5}};
  return xtal::build_structure(cell, srtio3(1), frac);
}

/// Three perovskite cells stacked along the third axis (Z=3, 15 atoms).
inline xtal::Structure perovskite_z3() {
  const xtal::UnitCell cell{{3.905, 3.905, 3 * 3.905}, {90.0, 90.0, 90.0}};
  std::vector<Eigen::Vector3d> frac;
  for (int m = 0; m < 3; ++m) frac.push_back({0.0, 0.0, m / 3.0});
  for (int m = 0; m < 3; ++m) frac.push_back({0.5, 0.5, (m + 0.5) / 3.0});
  for (int m = 0; m < 3; ++m) {
    frac.push_back({0.5, 0.5, m / 3.0});
    frac.push_back({0.5, 0.0, (m + 0.5) / 3.0});
    frac.push_back({0.0, 0.5, (m + 0.5) / 3.0});
  }
  return xtal::build_structure(cell, srtio3(3), frac);
}

inline xtal::UnitCell cubic_cell(double a) { return {{a, a, a}, {90.0, 90.0, 90.0}}; }

}  // namespace testutil

#endif
