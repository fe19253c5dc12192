#ifndef XTAL_IO_HPP
#define XTAL_IO_HPP

#include <filesystem>
#include <stdexcept>
#include <string>

#include "xtal/energy.hpp"
#include "xtal/model.hpp"
#include "xtal/search.hpp"

namespace xtal {

/// Malformed or schema-violating input; the message names the offending file
/// and field (or byte offset for JSON syntax errors).
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Canonical JSON (sorted keys, two-space indent, round-trip doubles).
// save(load(f)) is bitwise identical to the canonical form of f.
std::string structure_to_json(const Structure& s);
std::string forcefield_to_json(const ForceField& ff);
std::string composition_to_json(const Composition& c);
std::string energy_report_to_json(const EnergyReport& report);
std::string run_record_to_json(const RunRecord& record);

Structure structure_from_json(const std::string& text, const std::string& context);
ForceField forcefield_from_json(const std::string& text, const std::string& context);
Composition composition_from_json(const std::string& text, const std::string& context);

Structure load_structure(const std::filesystem::path& path);
ForceField load_forcefield(const std::filesystem::path& path);
Composition load_composition(const std::filesystem::path& path);

void save_structure(const Structure& s, const std::filesystem::path& path);
void save_forcefield(const ForceField& ff, const std::filesystem::path& path);
void save_composition(const Composition& c, const std::filesystem::path& path);

/// Per-iteration rows: iteration, energies, cumulative best, relaxation count.
std::string run_record_csv(const RunRecord& record);
void write_run_record_csv(const RunRecord& record, const std::filesystem::path& path);

/// Full round-trip decimal form of a double (shortest representation that
/// parses back to the same value), shared by the CSV writers.
std::string format_double(double v);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace xtal

#endif
