#ifndef XTAL_MODEL_HPP
#define XTAL_MODEL_HPP

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace xtal {

/// An ionic species: element symbol, integer charge (units of e) and
/// hard-sphere ionic radius in angstrom.
struct Species {
  std::string symbol;
  int charge = 0;
  double radius = 0.0;
};

struct CompositionEntry {
  Species species;
  int count = 1;  // ions of this species per formula unit
};

/// A charge-neutral multiset of species. `formula_units` is the number of
/// copies of the formula placed in one unit cell, so a cell holds
/// sum(count_i) * formula_units ions.
struct Composition {
  std::vector<CompositionEntry> entries;
  int formula_units = 1;

  int sites_per_cell() const;
  /// Distinct species in entry order.
  std::vector<Species> species_table() const;
  /// Species index for every site of a cell, entries grouped in order.
  std::vector<int> site_species_indices() const;
};

struct ValidationResult {
  bool ok = true;
  std::string violation;  // names the first violated rule when !ok
  explicit operator bool() const { return ok; }
};

ValidationResult validate_composition(const Composition& c);

/// Triclinic cell parameters: edge lengths (angstrom) and the angles
/// between edges (degrees), ordered (angle12, angle13, angle23).
struct UnitCell {
  Eigen::Vector3d lengths{1.0, 1.0, 1.0};
  Eigen::Vector3d angles_deg{90.0, 90.0, 90.0};
};

struct Site {
  int species = 0;  // index into Structure::species
  Eigen::Vector3d frac{0.0, 0.0, 0.0};
};

/// A unit cell, a species table, and one site per ion in fractional
/// coordinates wrapped into [0,1).
struct Structure {
  UnitCell cell;
  std::vector<Species> species;
  std::vector<Site> sites;

  int size() const { return static_cast<int>(sites.size()); }
  const Species& site_species(int i) const { return species[sites[i].species]; }
};

/// Wrap a fractional coordinate into [0,1). Idempotent.
double wrap_unit(double x);
Eigen::Vector3d wrap_unit(const Eigen::Vector3d& v);

struct BuckinghamCoeffs {
  double A = 0.0;    // eV
  double rho = 1.0;  // angstrom
  double C = 0.0;    // eV*angstrom^6
};

/// Symmetric table of Buckingham coefficients per species pair. Unlisted
/// pairs contribute nothing: lookup yields (0, 1, 0).
class ForceField {
 public:
  ForceField() = default;
  explicit ForceField(double coulomb_constant) : coulomb_constant_(coulomb_constant) {}

  /// Registers coefficients for {a,b} and {b,a}. Throws std::invalid_argument
  /// on A < 0, rho <= 0 or C < 0.
  void set_pair(const std::string& a, const std::string& b, const BuckinghamCoeffs& coeffs);

  BuckinghamCoeffs lookup(const std::string& a, const std::string& b) const;

  double coulomb_constant() const { return coulomb_constant_; }
  void set_coulomb_constant(double k) { coulomb_constant_ = k; }

  const std::map<std::pair<std::string, std::string>, BuckinghamCoeffs>& pairs() const {
    return pairs_;
  }

 private:
  std::map<std::pair<std::string, std::string>, BuckinghamCoeffs> pairs_;
  double coulomb_constant_ = 14.399645;  // eV*angstrom per e^2
};

/// Assembles a Structure from a cell, a composition and one fractional
/// position per site (composition order). Positions are wrapped into [0,1).
/// Throws std::invalid_argument on a count mismatch or a non-finite
/// coordinate.
Structure build_structure(const UnitCell& cell, const Composition& composition,
                          std::span<const Eigen::Vector3d> frac_positions);

}  // namespace xtal

#endif
