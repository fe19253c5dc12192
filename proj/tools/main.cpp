#include <cmath>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "xtal/energy.hpp"
#include "xtal/experiments.hpp"
#include "xtal/io.hpp"
#include "xtal/lattice.hpp"
#include "xtal/localsearch.hpp"
#include "xtal/model.hpp"
#include "xtal/relax.hpp"
#include "xtal/search.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

struct CellFlags {
  double cell_length = 0.0;            // cubic shortcut; 0 = derive default
  std::vector<double> cell;            // a,b,c,angle12,angle13,angle23

  void attach(CLI::App* cmd) {
    cmd->add_option("--cell-length", cell_length,
                    "Cubic cell edge in angstrom (default: 3.905 * Z^(1/3), the "
                    "SrTiO3 reproduction cell)");
    cmd->add_option("--cell", cell,
                    "Explicit cell: a,b,c,angle12,angle13,angle23 (angstrom/degrees)")
        ->expected(6)
        ->delimiter(',');
  }

  xtal::UnitCell resolve(const xtal::Composition& composition) const {
    xtal::UnitCell out;
    if (!cell.empty()) {
      out.lengths = {cell[0], cell[1], cell[2]};
      out.angles_deg = {cell[3], cell[4], cell[5]};
    } else {
      const double a = cell_length > 0.0
                           ? cell_length
                           : 3.905 * std::cbrt(static_cast<double>(composition.formula_units));
      out.lengths = {a, a, a};
      out.angles_deg = {90.0, 90.0, 90.0};
    }
    return out;
  }
};

xtal::NeighborhoodKind parse_kind(const std::string& name) {
  if (name == "axes") return xtal::NeighborhoodKind::axes;
  if (name == "ion-swap") return xtal::NeighborhoodKind::k_ion_swap;
  if (name == "swap") return xtal::NeighborhoodKind::k_swap;
  throw CLI::ValidationError("--neighborhood", "must be one of axes, ion-swap, swap");
}

int cmd_energy(const std::string& structure_file, const std::string& ff_file, int depth,
               const std::string& counting) {
  const xtal::Structure s = xtal::load_structure(structure_file);
  const xtal::ForceField ff = xtal::load_forcefield(ff_file);
  if (!xtal::is_feasible(s, xtal::ImageShell::cube(1)))
    std::cerr << "warning: structure is infeasible (hard spheres overlap); "
                 "energy computed anyway\n";
  const auto mode = counting == "conventional" ? xtal::PairCounting::conventional
                                               : xtal::PairCounting::literal;
  std::cout << xtal::energy_report_to_json(xtal::depth_energy(s, ff, depth, mode));
  return kExitOk;
}

int cmd_relax(const std::string& structure_file, const std::string& ff_file,
              const xtal::RelaxSettings& settings, const std::string& out) {
  const xtal::Structure s = xtal::load_structure(structure_file);
  const xtal::ForceField ff = xtal::load_forcefield(ff_file);
  const xtal::RelaxResult result = xtal::relax(s, ff, settings);

  json j;
  j["converged"] = result.converged;
  j["iterations"] = result.iterations;
  j["energy"] = json::parse(xtal::energy_report_to_json(result.energy));
  j["initial_eV"] = result.energy_trace.front();
  j["final_eV"] = result.energy_trace.back();
  std::cout << j.dump(2) << "\n";
  if (!out.empty()) xtal::save_structure(result.structure, out);
  return kExitOk;
}

int cmd_local_search(const std::string& structure_file, const std::string& ff_file,
                     const xtal::NeighborhoodSpec& spec, int depth, int max_steps,
                     const std::string& out) {
  const xtal::Structure s = xtal::load_structure(structure_file);
  const xtal::ForceField ff = xtal::load_forcefield(ff_file);
  const xtal::LocalSearchResult result = xtal::local_search(s, spec, ff, depth, max_steps);

  json j;
  j["steps"] = result.steps;
  j["initial_eV"] = result.energy_trace.front();
  j["final_eV"] = result.energy_trace.back();
  j["trace_eV"] = result.energy_trace;
  std::cout << j.dump(2) << "\n";
  if (!out.empty()) xtal::save_structure(result.structure, out);
  return kExitOk;
}

int cmd_search(const std::string& mode, const std::string& composition_file,
               const std::string& ff_file, const CellFlags& cell_flags,
               xtal::SearchSettings settings, const std::string& out,
               const std::string& csv) {
  const xtal::Composition composition = xtal::load_composition(composition_file);
  const xtal::ForceField ff = xtal::load_forcefield(ff_file);
  const xtal::UnitCell cell = cell_flags.resolve(composition);

  settings.mode =
      mode == "axes-bh" ? xtal::SearchMode::axes_bh : xtal::SearchMode::basin_hopping;
  const xtal::RunRecord record =
      settings.mode == xtal::SearchMode::axes_bh
          ? xtal::axes_bh(cell, composition, ff, settings)
          : xtal::basin_hopping(cell, composition, ff, settings);

  const std::string record_json = xtal::run_record_to_json(record);
  if (!out.empty())
    xtal::write_text_file(out, record_json);
  else
    std::cout << record_json;
  if (!csv.empty()) xtal::write_run_record_csv(record, csv);

  if (record.best_energy)
    std::cerr << "best energy " << *record.best_energy << " eV after "
              << record.total_relaxations << " relaxations\n";
  return kExitOk;
}

int cmd_experiment(const std::string& type, const std::string& composition_file,
                   const std::string& ff_file, const CellFlags& cell_flags,
                   std::uint64_t seed, int count, int k_min, int k_max, int k_ref,
                   double delta, int swap_k, const std::string& reference_file,
                   double reach_tol, int patience, int max_relaxations,
                   const std::string& out_dir) {
  const xtal::Composition composition = xtal::load_composition(composition_file);
  const xtal::ForceField ff = xtal::load_forcefield(ff_file);
  const xtal::UnitCell cell = cell_flags.resolve(composition);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  if (type == "depth-convergence") {
    xtal::DepthConvergenceConfig config{composition, cell, ff};
    if (count > 0) config.n_structures = count;
    config.k_min = k_min;
    config.k_max = k_max;
    config.k_ref = k_ref;
    config.seed = seed;
    const auto result = xtal::run_depth_convergence(config);
    xtal::write_text_file(dir / "depth_convergence_rows.csv",
                          xtal::depth_convergence_rows_csv(result));
    xtal::write_text_file(dir / "depth_convergence_summary.csv",
                          xtal::depth_convergence_summary_csv(result));
    std::cout << xtal::depth_convergence_summary_csv(result);
  } else if (type == "ordering") {
    xtal::OrderingConfig config{composition, cell, ff};
    if (count > 0) config.n_pairs = count;
    config.k_low = k_min;
    config.k_high = k_max;
    config.seed = seed;
    const auto result = xtal::run_ordering(config);
    xtal::write_text_file(dir / "ordering_rows.csv", xtal::ordering_rows_csv(result));
    xtal::write_text_file(dir / "ordering_summary.csv", xtal::ordering_summary_csv(result));
    std::cout << xtal::ordering_summary_csv(result);
  } else if (type == "neighborhood-compare") {
    xtal::NeighborhoodCompareConfig config{composition, cell, ff};
    if (count > 0) config.n_starts = count;
    config.delta = delta;
    config.swap_k = swap_k;
    config.seed = seed;
    const auto result = xtal::run_neighborhood_compare(config);
    xtal::write_text_file(dir / "neighborhood_rows.csv", xtal::neighborhood_rows_csv(result));
    xtal::write_text_file(dir / "neighborhood_summary.csv",
                          xtal::neighborhood_summary_csv(result));
    std::cout << xtal::neighborhood_summary_csv(result);
  } else if (type == "search-compare") {
    if (reference_file.empty())
      throw CLI::ValidationError("--reference", "search-compare needs a reference structure");
    xtal::SearchCompareConfig config{composition, cell, ff, xtal::load_structure(reference_file)};
    if (count > 0) config.n_pairs = count;
    config.seed = seed;
    config.reach_tolerance = reach_tol;
    config.settings.patience = patience;
    config.settings.max_relaxations = max_relaxations;
    config.settings.neighborhood = {xtal::NeighborhoodKind::axes, 1, delta};
    const auto result = xtal::run_search_compare(config);
    xtal::write_text_file(dir / "search_compare_rows.csv",
                          xtal::search_compare_rows_csv(result));
    xtal::write_text_file(dir / "search_compare_summary.csv",
                          xtal::search_compare_summary_csv(result));
    xtal::write_text_file(dir / "search_compare_envelope.csv",
                          xtal::search_compare_envelope_csv(result));
    std::cout << xtal::search_compare_summary_csv(result);
  } else {
    throw CLI::ValidationError("--type", "unknown experiment type " + type);
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Crystal structure prediction with depth-k Buckingham-Coulomb energies"};
  app.require_subcommand(1);

  // --- energy ---------------------------------------------------------------
  auto* energy = app.add_subcommand("energy", "Depth-k energy of a structure file");
  std::string structure_file, ff_file, counting = "literal";
  int depth = 6;
  energy->add_option("--structure", structure_file, "Structure JSON")->required();
  energy->add_option("--forcefield", ff_file, "Force-field JSON")->required();
  energy->add_option("--depth", depth, "Image depth k (>= 1)")
      ->check(CLI::PositiveNumber);
  energy->add_option("--counting", counting, "Pair counting: literal | conventional")
      ->check(CLI::IsMember({"literal", "conventional"}));

  // --- relax ----------------------------------------------------------------
  auto* relax_cmd = app.add_subcommand("relax", "Fixed-cell gradient descent relaxation");
  std::string relax_structure, relax_ff, relax_out;
  xtal::RelaxSettings relax_settings;
  relax_cmd->add_option("--structure", relax_structure)->required();
  relax_cmd->add_option("--forcefield", relax_ff)->required();
  relax_cmd->add_option("--depth", relax_settings.depth, "Working depth")
      ->check(CLI::PositiveNumber);
  relax_cmd->add_option("--report-depth", relax_settings.report_depth)
      ->check(CLI::PositiveNumber);
  relax_cmd->add_option("--max-iters", relax_settings.max_iters)->check(CLI::PositiveNumber);
  relax_cmd->add_option("--grad-tol", relax_settings.grad_tol);
  relax_cmd->add_option("--step", relax_settings.initial_step);
  relax_cmd->add_option("--out", relax_out, "Write the relaxed structure here");

  // --- local-search ---------------------------------------------------------
  auto* ls_cmd = app.add_subcommand("local-search", "Greedy combinatorial descent");
  std::string ls_structure, ls_ff, ls_out, ls_kind = "axes";
  xtal::NeighborhoodSpec ls_spec;
  int ls_depth = 1, ls_max_steps = 10000;
  ls_cmd->add_option("--structure", ls_structure)->required();
  ls_cmd->add_option("--forcefield", ls_ff)->required();
  ls_cmd->add_option("--neighborhood", ls_kind, "axes | ion-swap | swap");
  ls_cmd->add_option("--k", ls_spec.k, "Swap arity")->check(CLI::PositiveNumber);
  ls_cmd->add_option("--delta", ls_spec.delta, "Discretization step (angstrom)");
  ls_cmd->add_option("--depth", ls_depth, "Energy depth")->check(CLI::PositiveNumber);
  ls_cmd->add_option("--max-steps", ls_max_steps);
  ls_cmd->add_option("--out", ls_out, "Write the final structure here");

  // --- search ---------------------------------------------------------------
  auto* search_cmd = app.add_subcommand("search", "Basin hopping global search");
  std::string search_mode = "basin-hopping", search_comp, search_ff, search_out, search_csv;
  CellFlags search_cell;
  xtal::SearchSettings search_settings;
  search_cmd->add_option("--mode", search_mode, "basin-hopping | axes-bh")
      ->check(CLI::IsMember({"basin-hopping", "axes-bh"}));
  search_cmd->add_option("--composition", search_comp)->required();
  search_cmd->add_option("--forcefield", search_ff)->required();
  search_cell.attach(search_cmd);
  search_cmd->add_option("--seed", search_settings.seed, "RNG seed")->required();
  search_cmd->add_option("--patience", search_settings.patience)->check(CLI::PositiveNumber);
  search_cmd->add_option("--max-relaxations", search_settings.max_relaxations)
      ->check(CLI::PositiveNumber);
  search_cmd->add_option("--delta", search_settings.neighborhood.delta,
                         "Axes discretization (axes-bh)");
  search_cmd->add_option("--depth-report", search_settings.k_report)
      ->check(CLI::PositiveNumber);
  search_cmd->add_option("--depth-relax", search_settings.relax.depth)
      ->check(CLI::PositiveNumber);
  search_cmd->add_option("--depth-ls", search_settings.k_local_search)
      ->check(CLI::PositiveNumber);
  search_cmd->add_option("--out", search_out, "RunRecord JSON path (default: stdout)");
  search_cmd->add_option("--csv", search_csv, "Per-iteration CSV path");

  // --- experiment -----------------------------------------------------------
  auto* exp_cmd = app.add_subcommand("experiment", "Reproduction harness (CSV output)");
  std::string exp_type, exp_comp, exp_ff, exp_reference, exp_out = "experiment_out";
  CellFlags exp_cell;
  std::uint64_t exp_seed = 1;
  int exp_count = 0, exp_k_min = 1, exp_k_max = 6, exp_k_ref = 10, exp_swap_k = 2;
  int exp_patience = 40, exp_max_relax = 40;
  double exp_delta = 1.0, exp_reach_tol = 0.05;
  exp_cmd->add_option("--type", exp_type,
                      "depth-convergence | ordering | neighborhood-compare | search-compare")
      ->required();
  exp_cmd->add_option("--composition", exp_comp)->required();
  exp_cmd->add_option("--forcefield", exp_ff)->required();
  exp_cell.attach(exp_cmd);
  exp_cmd->add_option("--seed", exp_seed, "RNG seed")->required();
  exp_cmd->add_option("--count", exp_count, "Trials (structures / pairs / starts)");
  exp_cmd->add_option("--k-min", exp_k_min)->check(CLI::PositiveNumber);
  exp_cmd->add_option("--k-max", exp_k_max)->check(CLI::PositiveNumber);
  exp_cmd->add_option("--k-ref", exp_k_ref)->check(CLI::PositiveNumber);
  exp_cmd->add_option("--delta", exp_delta, "Discretization step (angstrom)");
  exp_cmd->add_option("--swap-k", exp_swap_k)->check(CLI::PositiveNumber);
  exp_cmd->add_option("--reference", exp_reference,
                      "Reference structure (search-compare target)");
  exp_cmd->add_option("--reach-tol", exp_reach_tol, "eV above the relaxed reference");
  exp_cmd->add_option("--patience", exp_patience)->check(CLI::PositiveNumber);
  exp_cmd->add_option("--max-relaxations", exp_max_relax)->check(CLI::PositiveNumber);
  exp_cmd->add_option("--out", exp_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand(energy))
      return cmd_energy(structure_file, ff_file, depth, counting);
    if (app.got_subcommand(relax_cmd))
      return cmd_relax(relax_structure, relax_ff, relax_settings, relax_out);
    if (app.got_subcommand(ls_cmd)) {
      ls_spec.kind = parse_kind(ls_kind);
      return cmd_local_search(ls_structure, ls_ff, ls_spec, ls_depth, ls_max_steps, ls_out);
    }
    if (app.got_subcommand(search_cmd))
      return cmd_search(search_mode, search_comp, search_ff, search_cell, search_settings,
                        search_out, search_csv);
    if (app.got_subcommand(exp_cmd))
      return cmd_experiment(exp_type, exp_comp, exp_ff, exp_cell, exp_seed, exp_count,
                            exp_k_min, exp_k_max, exp_k_ref, exp_delta, exp_swap_k,
                            exp_reference, exp_reach_tol, exp_patience, exp_max_relax,
                            exp_out);
  } catch (const CLI::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const xtal::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitUsage;
}
