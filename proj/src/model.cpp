#include "xtal/model.hpp"

#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

namespace xtal {

int Composition::sites_per_cell() const {
  int n = 0;
  for (const auto& e : entries) n += e.count;
  return n * formula_units;
}

std::vector<Species> Composition::species_table() const {
  std::vector<Species> table;
  table.reserve(entries.size());
  for (const auto& e : entries) table.push_back(e.species);
  return table;
}

std::vector<int> Composition::site_species_indices() const {
  std::vector<int> indices;
  indices.reserve(sites_per_cell());
  for (int s = 0; s < static_cast<int>(entries.size()); ++s) {
    for (int c = 0; c < entries[s].count * formula_units; ++c) indices.push_back(s);
  }
  return indices;
}

ValidationResult validate_composition(const Composition& c) {
  if (c.entries.empty()) return {false, "composition has no entries"};
  for (const auto& e : c.entries) {
    if (e.species.symbol.empty()) return {false, "species with empty symbol"};
    if (e.species.charge == 0)
      return {false, "species " + e.species.symbol + " has zero charge"};
    if (e.species.radius < 0.0)
      return {false, "species " + e.species.symbol + " has negative radius"};
    if (e.count < 1)
      return {false, "species " + e.species.symbol + " has non-positive multiplicity"};
  }
  std::set<std::string> seen;
  for (const auto& e : c.entries) {
    if (!seen.insert(e.species.symbol).second)
      return {false, "duplicate species symbol " + e.species.symbol};
  }
  if (c.formula_units < 1) return {false, "formula_units must be positive"};
  long net = 0;
  for (const auto& e : c.entries)
    net += static_cast<long>(e.species.charge) * e.count * c.formula_units;
  if (net != 0) {
    std::ostringstream msg;
    msg << "unit cell has net charge " << net;
    return {false, msg.str()};
  }
  return {};
}

double wrap_unit(double x) {
  double w = x - std::floor(x);
  if (w >= 1.0) w -= 1.0;  // guards tiny negative inputs rounding up to 1
  return w;
}

Eigen::Vector3d wrap_unit(const Eigen::Vector3d& v) {
  return {wrap_unit(v.x()), wrap_unit(v.y()), wrap_unit(v.z())};
}

namespace {

std::pair<std::string, std::string> pair_key(const std::string& a, const std::string& b) {
  return a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
}

}  // namespace

void ForceField::set_pair(const std::string& a, const std::string& b,
                          const BuckinghamCoeffs& coeffs) {
  if (coeffs.A < 0.0) throw std::invalid_argument("Buckingham A must be >= 0");
  if (coeffs.rho <= 0.0) throw std::invalid_argument("Buckingham rho must be > 0");
  if (coeffs.C < 0.0) throw std::invalid_argument("Buckingham C must be >= 0");
  pairs_[pair_key(a, b)] = coeffs;
}

BuckinghamCoeffs ForceField::lookup(const std::string& a, const std::string& b) const {
  auto it = pairs_.find(pair_key(a, b));
  if (it == pairs_.end()) return {0.0, 1.0, 0.0};
  return it->second;
}

Structure build_structure(const UnitCell& cell, const Composition& composition,
                          std::span<const Eigen::Vector3d> frac_positions) {
  const auto site_species = composition.site_species_indices();
  if (frac_positions.size() != site_species.size()) {
    std::ostringstream msg;
    msg << "position count " << frac_positions.size() << " does not match composition ("
        << site_species.size() << " sites per cell)";
    throw std::invalid_argument(msg.str());
  }
  Structure s;
  s.cell = cell;
  s.species = composition.species_table();
  s.sites.reserve(site_species.size());
  for (std::size_t i = 0; i < site_species.size(); ++i) {
    if (!frac_positions[i].allFinite())
      throw std::invalid_argument("non-finite fractional coordinate at site " +
                                  std::to_string(i));
    s.sites.push_back({site_species[i], wrap_unit(frac_positions[i])});
  }
  return s;
}

}  // namespace xtal
