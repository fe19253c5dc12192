#include "xtal/io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace xtal {

namespace {

using nlohmann::json;

json parse_text(const std::string& text, const std::string& context) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(context + ": " + e.what());
  }
}

const json& require(const json& obj, const char* key, const std::string& context) {
  if (!obj.is_object() || !obj.contains(key))
    throw ParseError(context + ": missing field '" + key + "'");
  return obj.at(key);
}

double require_number(const json& obj, const char* key, const std::string& context) {
  const json& v = require(obj, key, context);
  if (!v.is_number()) throw ParseError(context + ": field '" + key + "' must be a number");
  return v.get<double>();
}

int require_int(const json& obj, const char* key, const std::string& context) {
  const json& v = require(obj, key, context);
  if (!v.is_number_integer())
    throw ParseError(context + ": field '" + key + "' must be an integer");
  return v.get<int>();
}

std::string require_string(const json& obj, const char* key, const std::string& context) {
  const json& v = require(obj, key, context);
  if (!v.is_string() || v.get<std::string>().empty())
    throw ParseError(context + ": field '" + key + "' must be a non-empty string");
  return v.get<std::string>();
}

Eigen::Vector3d require_vec3(const json& obj, const char* key, const std::string& context) {
  const json& v = require(obj, key, context);
  if (!v.is_array() || v.size() != 3)
    throw ParseError(context + ": field '" + key + "' must be an array of 3 numbers");
  Eigen::Vector3d out;
  for (int d = 0; d < 3; ++d) {
    if (!v[d].is_number())
      throw ParseError(context + ": field '" + key + "' must be an array of 3 numbers");
    out[d] = v[d].get<double>();
  }
  return out;
}

Species species_from(const json& obj, const std::string& context) {
  Species sp;
  sp.symbol = require_string(obj, "symbol", context);
  sp.charge = require_int(obj, "charge", context);
  sp.radius = require_number(obj, "radius", context);
  if (sp.charge == 0)
    throw ParseError(context + ": species " + sp.symbol + " has zero charge");
  if (sp.radius < 0.0 || !std::isfinite(sp.radius))
    throw ParseError(context + ": species " + sp.symbol + " has invalid radius");
  return sp;
}

json species_json(const Species& sp) {
  return json{{"symbol", sp.symbol}, {"charge", sp.charge}, {"radius", sp.radius}};
}

}  // namespace

std::string structure_to_json(const Structure& s) {
  json j;
  j["cell"]["lengths"] = {s.cell.lengths[0], s.cell.lengths[1], s.cell.lengths[2]};
  j["cell"]["angles_deg"] = {s.cell.angles_deg[0], s.cell.angles_deg[1],
                             s.cell.angles_deg[2]};
  j["species"] = json::array();
  for (const auto& sp : s.species) j["species"].push_back(species_json(sp));
  j["sites"] = json::array();
  for (const auto& site : s.sites) {
    j["sites"].push_back(json{{"species", site.species},
                              {"frac", {site.frac[0], site.frac[1], site.frac[2]}}});
  }
  return j.dump(2) + "\n";
}

Structure structure_from_json(const std::string& text, const std::string& context) {
  const json j = parse_text(text, context);
  Structure s;

  const json& cell = require(j, "cell", context);
  s.cell.lengths = require_vec3(cell, "lengths", context + ": cell");
  s.cell.angles_deg = require_vec3(cell, "angles_deg", context + ": cell");
  for (int d = 0; d < 3; ++d) {
    if (!(s.cell.lengths[d] > 0.0) || !std::isfinite(s.cell.lengths[d]))
      throw ParseError(context + ": cell lengths must be positive");
    if (!(s.cell.angles_deg[d] > 0.0 && s.cell.angles_deg[d] < 180.0))
      throw ParseError(context + ": cell angles must lie in (0, 180)");
  }

  const json& species = require(j, "species", context);
  if (!species.is_array() || species.empty())
    throw ParseError(context + ": field 'species' must be a non-empty array");
  for (const auto& sp : species) s.species.push_back(species_from(sp, context));

  const json& sites = require(j, "sites", context);
  if (!sites.is_array() || sites.empty())
    throw ParseError(context + ": field 'sites' must be a non-empty array");
  for (const auto& site : sites) {
    Site out;
    out.species = require_int(site, "species", context + ": site");
    if (out.species < 0 || out.species >= static_cast<int>(s.species.size()))
      throw ParseError(context + ": site species index out of range");
    const Eigen::Vector3d frac = require_vec3(site, "frac", context + ": site");
    if (!frac.allFinite()) throw ParseError(context + ": site has non-finite coordinates");
    out.frac = wrap_unit(frac);
    s.sites.push_back(out);
  }

  // depth-1 feasibility scans are only sound when every contact distance is
  // shorter than every cell length; reject structures outside that regime
  double max_contact = 0.0;
  for (const auto& a : s.sites)
    for (const auto& b : s.sites)
      max_contact = std::max(max_contact,
                             s.species[a.species].radius + s.species[b.species].radius);
  if (max_contact >= s.cell.lengths.minCoeff())
    throw ParseError(context +
                     ": radius sums must stay below every cell length "
                     "(hard-sphere checks use the depth-1 shell)");
  return s;
}

std::string forcefield_to_json(const ForceField& ff) {
  json j;
  j["coulomb_constant"] = ff.coulomb_constant();
  j["pairs"] = json::array();
  for (const auto& [key, coeffs] : ff.pairs()) {
    j["pairs"].push_back(json{{"a", key.first},
                              {"b", key.second},
                              {"A_eV", coeffs.A},
                              {"rho_ang", coeffs.rho},
                              {"C_eV_ang6", coeffs.C}});
  }
  return j.dump(2) + "\n";
}

ForceField forcefield_from_json(const std::string& text, const std::string& context) {
  const json j = parse_text(text, context);
  ForceField ff(require_number(j, "coulomb_constant", context));
  const json& pairs = require(j, "pairs", context);
  if (!pairs.is_array()) throw ParseError(context + ": field 'pairs' must be an array");
  std::set<std::pair<std::string, std::string>> seen;
  for (const auto& p : pairs) {
    const std::string a = require_string(p, "a", context + ": pair");
    const std::string b = require_string(p, "b", context + ": pair");
    BuckinghamCoeffs coeffs;
    coeffs.A = require_number(p, "A_eV", context + ": pair " + a + "-" + b);
    coeffs.rho = require_number(p, "rho_ang", context + ": pair " + a + "-" + b);
    coeffs.C = require_number(p, "C_eV_ang6", context + ": pair " + a + "-" + b);
    auto key = a <= b ? std::make_pair(a, b) : std::make_pair(b, a);
    if (!seen.insert(key).second)
      throw ParseError(context + ": duplicate pair " + a + "-" + b);
    try {
      ff.set_pair(a, b, coeffs);
    } catch (const std::invalid_argument& e) {
      throw ParseError(context + ": pair " + a + "-" + b + ": " + e.what());
    }
  }
  return ff;
}

std::string composition_to_json(const Composition& c) {
  json j;
  j["formula_units"] = c.formula_units;
  j["species"] = json::array();
  for (const auto& e : c.entries) {
    json sp = species_json(e.species);
    sp["count"] = e.count;
    j["species"].push_back(sp);
  }
  return j.dump(2) + "\n";
}

Composition composition_from_json(const std::string& text, const std::string& context) {
  const json j = parse_text(text, context);
  Composition c;
  c.formula_units = require_int(j, "formula_units", context);
  const json& species = require(j, "species", context);
  if (!species.is_array() || species.empty())
    throw ParseError(context + ": field 'species' must be a non-empty array");
  for (const auto& sp : species) {
    CompositionEntry e;
    e.species = species_from(sp, context);
    e.count = require_int(sp, "count", context + ": species " + e.species.symbol);
    c.entries.push_back(e);
  }
  const auto validation = validate_composition(c);
  if (!validation) throw ParseError(context + ": " + validation.violation);
  return c;
}

std::string energy_report_to_json(const EnergyReport& report) {
  json j;
  j["total_eV"] = report.total;
  j["per_ion_eV"] = report.per_ion;
  j["depth"] = report.depth;
  j["coulomb_eV"] = report.coulomb_part;
  j["buckingham_eV"] = report.buckingham_part;
  return j.dump(2) + "\n";
}

std::string run_record_to_json(const RunRecord& record) {
  json j;
  j["mode"] = record.mode == SearchMode::basin_hopping ? "basin_hopping" : "axes_bh";
  j["seed"] = record.seed;
  j["total_relaxations"] = record.total_relaxations;
  j["total_ls_steps"] = record.total_ls_steps;
  if (record.best_energy) j["best_energy_eV"] = *record.best_energy;
  if (record.best_structure)
    j["best_structure"] = json::parse(structure_to_json(*record.best_structure));
  j["iterations"] = json::array();
  for (const auto& row : record.iterations) {
    json r;
    r["iteration"] = row.iteration;
    r["pre_relax_eV"] = row.pre_relax_energy;
    if (row.post_ls_energy) r["post_ls_eV"] = *row.post_ls_energy;
    r["post_relax_eV"] = row.post_relax_energy;
    if (row.best_energy) r["best_eV"] = *row.best_energy;
    r["relaxations"] = row.relaxations;
    r["ls_steps"] = row.ls_steps;
    r["accepted"] = row.accepted;
    j["iterations"].push_back(r);
  }
  return j.dump(2) + "\n";
}

std::string format_double(double v) {
  // shortest decimal form that parses back to the same double
  for (int precision = 1; precision <= 17; ++precision) {
    std::ostringstream out;
    out.precision(precision);
    out << v;
    if (std::stod(out.str()) == v) return out.str();
  }
  std::ostringstream out;
  out.precision(17);
  out << v;
  return out.str();
}

std::string run_record_csv(const RunRecord& record) {
  std::ostringstream out;
  out << "iteration,pre_relax_eV,post_ls_eV,post_relax_eV,best_eV,relaxations,ls_steps,"
         "accepted\n";
  for (const auto& row : record.iterations) {
    out << row.iteration << ',' << format_double(row.pre_relax_energy) << ',';
    if (row.post_ls_energy) out << format_double(*row.post_ls_energy);
    out << ',' << format_double(row.post_relax_energy) << ',';
    if (row.best_energy) out << format_double(*row.best_energy);
    out << ',' << row.relaxations << ',' << row.ls_steps << ','
        << (row.accepted ? 1 : 0) << '\n';
  }
  return out.str();
}

void write_run_record_csv(const RunRecord& record, const std::filesystem::path& path) {
  write_text_file(path, run_record_csv(record));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string() + ": cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(path.string() + ": cannot open for writing");
  out << text;
  if (!out) throw std::runtime_error(path.string() + ": write failed");
}

Structure load_structure(const std::filesystem::path& path) {
  return structure_from_json(read_text_file(path), path.string());
}

ForceField load_forcefield(const std::filesystem::path& path) {
  return forcefield_from_json(read_text_file(path), path.string());
}

Composition load_composition(const std::filesystem::path& path) {
  return composition_from_json(read_text_file(path), path.string());
}

void save_structure(const Structure& s, const std::filesystem::path& path) {
  write_text_file(path, structure_to_json(s));
}

void save_forcefield(const ForceField& ff, const std::filesystem::path& path) {
  write_text_file(path, forcefield_to_json(ff));
}

void save_composition(const Composition& c, const std::filesystem::path& path) {
  write_text_file(path, composition_to_json(c));
}

}  // namespace xtal
