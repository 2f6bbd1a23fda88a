// Command-line front end: maglat <command> [options].
//
// Exit codes: 0 success, 1 config error, 2 I/O error, 3 shape error,
// 4 stability error.

#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "maglat/io/commands.hpp"

namespace {

using namespace maglat;

struct Common {
  std::string config;
  std::string out;
  std::string model;
  int threads = 1;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "Config file (key = value)");
  cmd->add_option("--out", c.out, "Output directory (overrides output_dir)");
  cmd->add_option("--model", c.model, "analytic-corrected | analytic-verbatim | magnetostatic");
  cmd->add_option("--threads", c.threads, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_option("--set", c.overrides, "Override a config key: key=value")->take_all();
}

void add_region(CLI::App* cmd, RegionFlags& r) {
  cmd->add_option("--x-min", r.x_min, "Region lower x (m)");
  cmd->add_option("--x-max", r.x_max, "Region upper x (m)");
  cmd->add_option("--y-min", r.y_min, "Region lower y (m)");
  cmd->add_option("--y-max", r.y_max, "Region upper y (m)");
  cmd->add_option("--z-min", r.z_min, "Region lower z (m)");
  cmd->add_option("--z-max", r.z_max, "Region upper z (m)");
}

void add_pair(CLI::App* cmd, PairCmdOptions& p, std::string& axis) {
  add_region(cmd, p.region);
  cmd->add_option("--seed-resolution", p.seed_resolution, "Seed points per alpha");
  cmd->add_option("--ref-x", p.ref_x, "Reference x for pair selection (m)");
  cmd->add_option("--ref-y", p.ref_y, "Reference y for pair selection (m)");
  cmd->add_option("--axis", axis, "Pair direction: x | y");
}

RunConfig load_config(const Common& c) {
  ConfigBuilder b;
  if (!c.config.empty()) b.parse_file(c.config);
  if (!c.model.empty()) b.set("model", c.model, "--model");
  if (!c.out.empty()) b.set("output_dir", c.out, "--out");
  for (const auto& kv : c.overrides) b.apply_override(kv);
  return b.build();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Magnetic lattice atom-chip simulator"};
  app.require_subcommand(1);
  Common common;

  FieldMapOptions fm;
  std::string plane = "xy";
  auto* c_fm = app.add_subcommand("field-map", "Field on a plane -> field_map.csv");
  add_common(c_fm, common);
  c_fm->add_option("--plane", plane, "xy | xz | yz");
  c_fm->add_option("--offset", fm.offset, "Plane offset (m); xy defaults to alpha");
  c_fm->add_option("--resolution", fm.resolution, "Grid points per side [16, 4096]");
  c_fm->add_option("--half-width", fm.half_width, "Lateral half-size (m), default 2 alpha");
  c_fm->add_option("--z-min", fm.z_min, "Vertical range start for xz/yz (m)");
  c_fm->add_option("--z-max", fm.z_max, "Vertical range end for xz/yz (m)");

  MinimaCmdOptions mi;
  auto* c_mi = app.add_subcommand("minima", "Trap sites -> sites.csv");
  add_common(c_mi, common);
  add_region(c_mi, mi.region);
  c_mi->add_option("--seed-resolution", mi.seed_resolution, "Seed points per alpha");

  ScanCmdOptions sc;
  std::string sc_axis = "x";
  auto* c_sc = app.add_subcommand("scan-bias", "Barrier versus bz -> bias_scan.csv");
  add_common(c_sc, common);
  add_pair(c_sc, sc.pair, sc_axis);
  c_sc->add_option("--bz-start", sc.bz_start, "First bz (T)");
  c_sc->add_option("--bz-end", sc.bz_end, "Last bz (T)");
  c_sc->add_option("--steps", sc.steps, "Scan points (>= 2)");

  PairCmdOptions ba;
  std::string ba_axis = "x";
  auto* c_ba = app.add_subcommand("barrier", "Barrier profile -> barrier.csv");
  add_common(c_ba, common);
  add_pair(c_ba, ba, ba_axis);

  SpectrumCmdOptions sp;
  std::string sp_axis = "x";
  auto* c_sp = app.add_subcommand("spectrum", "Levels along a bond -> spectrum.csv");
  add_common(c_sp, common);
  add_pair(c_sp, sp.pair, sp_axis);
  c_sp->add_option("--n-states", sp.n_states, "Number of levels");
  c_sp->add_option("--n-points", sp.n_points, "Grid points along the curve (>= 256)");
  c_sp->add_flag("--gravity", sp.gravity, "Add m g z to the potential");
  c_sp->add_flag("--splitting", sp.require_splitting, "Fail unless the curve is a double well");

  DynamicsCmdOptions dy;
  std::string chain = "grid";
  auto* c_dy = app.add_subcommand("dynamics", "Entanglement spreading -> entanglement.csv");
  add_common(c_dy, common);
  c_dy->add_option("--chain", chain, "grid | lattice");
  c_dy->add_option("--rows", dy.rows, "Grid rows");
  c_dy->add_option("--cols", dy.cols, "Grid columns");
  c_dy->add_option("--omega", dy.omega, "Grid mode frequency (rad/s)");
  c_dy->add_option("--hop", dy.hop, "Grid hopping rate (rad/s)");
  c_dy->add_option("--seeds", dy.seeds, "Bell pairs i:j:r,...");
  c_dy->add_option("--reference", dy.reference, "Reference site index");
  c_dy->add_option("--t-max", dy.t_max, "Final time (s)");
  c_dy->add_option("--t-steps", dy.t_steps, "Number of sampled times");
  add_region(c_dy, dy.region);
  c_dy->add_option("--seed-resolution", dy.seed_resolution, "Seed points per alpha (lattice chain)");

  CompareCmdOptions cm;
  auto* c_cm = app.add_subcommand("compare-models", "Analytic vs magnetostatic -> model_error.csv");
  add_common(c_cm, common);
  add_region(c_cm, cm.region);
  c_cm->add_option("--samples", cm.samples, "Samples per axis");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    const RunConfig cfg = load_config(common);
    const int t = common.threads;
    CommandOutput files;
    if (c_fm->parsed()) {
      fm.plane = parse_plane(plane);
      files = cmd_field_map(cfg, fm, t);
    } else if (c_mi->parsed()) {
      files = cmd_minima(cfg, mi, t);
    } else if (c_sc->parsed()) {
      sc.pair.axis = parse_axis(sc_axis);
      files = cmd_scan_bias(cfg, sc, t);
    } else if (c_ba->parsed()) {
      ba.axis = parse_axis(ba_axis);
      files = cmd_barrier(cfg, ba, t);
    } else if (c_sp->parsed()) {
      sp.pair.axis = parse_axis(sp_axis);
      files = cmd_spectrum(cfg, sp, t);
    } else if (c_dy->parsed()) {
      if (chain == "grid") dy.chain = ChainKind::grid;
      else if (chain == "lattice") dy.chain = ChainKind::lattice;
      else throw ConfigError("chain must be grid or lattice");
      files = cmd_dynamics(cfg, dy, t);
    } else if (c_cm->parsed()) {
      files = cmd_compare_models(cfg, cm, t);
    }
    files.push_back({"run_config.echo", echo_config(cfg)});
    write_outputs(cfg.output_dir, files);
    return 0;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 2;
  } catch (const ShapeError& e) {
    std::cerr << "shape error: " << e.what() << "\n";
    return 3;
  } catch (const StabilityError& e) {
    std::cerr << "stability error: " << e.what() << "\n";
    return 4;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
