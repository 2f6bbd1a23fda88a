#pragma once

// Pipelines behind the CLI subcommands. Each command returns the files it
// produces (name and content) so output can be tested without touching disk.

#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "maglat/gaussian_chain.hpp"
#include "maglat/io/config.hpp"
#include "maglat/io/csv.hpp"
#include "maglat/magnetostatics.hpp"
#include "maglat/schrodinger1d.hpp"
#include "maglat/trap_analysis.hpp"

namespace maglat {

struct OutputFile {
  std::string name;
  std::string content;
};
using CommandOutput = std::vector<OutputFile>;

/// Axis-aligned region; missing bounds take command-specific defaults.
struct RegionFlags {
  std::optional<double> x_min, x_max, y_min, y_max, z_min, z_max;

  Box resolve(const Box& def) const {
    Box b = def;
    if (x_min) b.lo.x() = *x_min;
    if (x_max) b.hi.x() = *x_max;
    if (y_min) b.lo.y() = *y_min;
    if (y_max) b.hi.y() = *y_max;
    if (z_min) b.lo.z() = *z_min;
    if (z_max) b.hi.z() = *z_max;
    if ((b.hi.array() < b.lo.array()).any()) throw ConfigError("region bounds are inverted");
    if (!(b.lo.z() > 0.0)) throw ConfigError("region must lie in z > 0");
    return b;
  }
};

/// Default trap search region: three pitches around the center, 0.5..3 alpha high.
inline Box default_trap_region(const LatticeSpec& s) {
  const double a = s.alpha;
  return {Vec3(-3 * a, -3 * a, 0.5 * a), Vec3(3 * a, 3 * a, 3 * a)};
}

/// Central unit cell at 0.5..2 alpha.
inline Box central_cell_region(const LatticeSpec& s) {
  const double a = s.alpha;
  return {Vec3(-a, -a, 0.5 * a), Vec3(a, a, 2 * a)};
}

inline void write_outputs(const std::filesystem::path& dir, const CommandOutput& files) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
  for (const auto& f : files) {
    const auto path = dir / f.name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << f.content;
    out.flush();
    if (!out) throw IoError("cannot write '" + path.string() + "'");
  }
}

// ---------------------------------------------------------------- field-map

enum class Plane { xy, xz, yz };

inline Plane parse_plane(const std::string& s) {
  if (s == "xy") return Plane::xy;
  if (s == "xz") return Plane::xz;
  if (s == "yz") return Plane::yz;
  throw ConfigError("plane must be xy, xz or yz");
}

struct FieldMapOptions {
  Plane plane = Plane::xy;
  double offset = 0.0;  // z for xy, y for xz, x for yz; 0 means alpha for xy
  int resolution = 64;
  std::optional<double> half_width;  // in-plane lateral half-size
  std::optional<double> z_min, z_max;  // vertical range for xz / yz
};

inline CommandOutput cmd_field_map(const RunConfig& cfg, const FieldMapOptions& opt, int threads) {
  if (opt.resolution < 16 || opt.resolution > 4096) throw ConfigError("resolution must be in [16, 4096]");
  const double a = cfg.lattice.alpha;
  const double hw = opt.half_width.value_or(2.0 * a);
  if (!(hw > 0.0)) throw ConfigError("half-width must be > 0");
  const double zlo = opt.z_min.value_or(0.25 * a), zhi = opt.z_max.value_or(3.0 * a);
  if (opt.plane != Plane::xy && !(zlo > 0.0 && zhi >= zlo)) throw ConfigError("invalid vertical range");
  double offset = opt.offset;
  if (opt.plane == Plane::xy && offset == 0.0) offset = a;
  if (opt.plane == Plane::xy && !(offset > 0.0)) throw ConfigError("xy plane offset must be > 0");

  const AnyField field(cfg.model, cfg.lattice, cfg.bias);
  const auto n = static_cast<std::size_t>(opt.resolution);
  const auto us = linspace(-hw, hw, n);
  const auto vs = opt.plane == Plane::xy ? linspace(-hw, hw, n) : linspace(zlo, zhi, n);
  std::vector<Vec3> pts(n * n);
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) {
      Vec3& p = pts[j * n + i];
      switch (opt.plane) {
        case Plane::xy: p = Vec3(us[i], vs[j], offset); break;
        case Plane::xz: p = Vec3(us[i], offset, vs[j]); break;
        case Plane::yz: p = Vec3(offset, us[i], vs[j]); break;
      }
    }
  std::vector<BVector> b(pts.size());
  parallel_for(pts.size(), threads, [&](std::size_t k) { b[k] = field.field(pts[k]); });
  CsvTable t({"x_m", "y_m", "z_m", "bx_T", "by_T", "bz_T", "bmag_T"});
  for (std::size_t k = 0; k < pts.size(); ++k)
    t.row() << pts[k].x() << pts[k].y() << pts[k].z() << b[k].x() << b[k].y() << b[k].z()
            << field_magnitude(b[k]);
  return {{"field_map.csv", t.str()}};
}

// ------------------------------------------------------------------ minima

struct MinimaCmdOptions {
  RegionFlags region;
  int seed_resolution = 8;
};

/// Sites sorted by (band, y, x).
inline std::vector<TrapSite> sites_for_output(std::vector<TrapSite> sites) {
  std::sort(sites.begin(), sites.end(), [](const TrapSite& a, const TrapSite& b) {
    return std::make_tuple(a.band_index, a.position.y(), a.position.x()) <
           std::make_tuple(b.band_index, b.position.y(), b.position.x());
  });
  return sites;
}

inline MinimaResult run_find_minima(const RunConfig& cfg, const Box& region, int seed_resolution, int threads) {
  const AnyField field(cfg.model, cfg.lattice, cfg.bias);
  MinimaOptions mo;
  mo.seed_resolution = seed_resolution;
  mo.threads = threads;
  return find_minima(field, region, cfg.atom, mo);
}

inline CommandOutput cmd_minima(const RunConfig& cfg, const MinimaCmdOptions& opt, int threads) {
  const Box region = opt.region.resolve(default_trap_region(cfg.lattice));
  const auto res = run_find_minima(cfg, region, opt.seed_resolution, threads);
  CsvTable t({"band", "x_m", "y_m", "z_m", "bmin_T", "wx_rad_s", "wy_rad_s", "wz_rad_s"});
  for (const auto& s : sites_for_output(res.sites))
    t.row() << s.band_index << s.position.x() << s.position.y() << s.position.z() << s.b_min
            << s.frequencies[0] << s.frequencies[1] << s.frequencies[2];
  CsvTable d({"seed_x_m", "seed_y_m", "seed_z_m", "reason"});
  for (const auto& s : res.dropped) d.row() << s.seed.x() << s.seed.y() << s.seed.z() << s.reason;
  return {{"sites.csv", t.str()}, {"dropped_seeds.csv", d.str()}};
}

// --------------------------------------------------------------- scan-bias

struct PairCmdOptions {
  RegionFlags region;
  int seed_resolution = 8;
  double ref_x = 0.0;
  double ref_y = 0.0;
  Axis axis = Axis::x;
};

inline Axis parse_axis(const std::string& s) {
  if (s == "x") return Axis::x;
  if (s == "y") return Axis::y;
  throw ConfigError("axis must be x or y");
}

inline ScanOptions scan_options(const RunConfig& cfg, const PairCmdOptions& opt, int threads) {
  ScanOptions so;
  so.model = cfg.model;
  so.region = opt.region.resolve(default_trap_region(cfg.lattice));
  so.kappa = cfg.kappa;
  so.selector = {Eigen::Vector2d(opt.ref_x, opt.ref_y), opt.axis};
  so.minima.seed_resolution = opt.seed_resolution;
  so.minima.threads = threads;
  return so;
}

struct ScanCmdOptions {
  PairCmdOptions pair;
  double bz_start = 0.0;
  double bz_end = -1e-4;
  int steps = 20;
};

inline CommandOutput cmd_scan_bias(const RunConfig& cfg, const ScanCmdOptions& opt, int threads) {
  if (opt.steps < 2) throw ConfigError("scan needs steps >= 2");
  if (opt.bz_start == opt.bz_end) throw ConfigError("bz-start and bz-end must differ");
  const auto bz = linspace(opt.bz_start, opt.bz_end, static_cast<std::size_t>(opt.steps));
  ScanOptions so = scan_options(cfg, opt.pair, 1);
  std::vector<BiasScanRow> rows(bz.size());
  parallel_for(bz.size(), threads, [&](std::size_t i) {
    BiasField b = cfg.bias;
    b.bz = bz[i];
    rows[i] = analyze_bias_point(cfg.lattice, b, cfg.atom, so);
  });
  CsvTable t({"bz_T", "bmin_T", "delta_b_T", "dmin_m", "band_gap_T", "merged_flag"});
  for (const auto& r : rows)
    t.row() << r.bz_bias << r.b_min << r.delta_b << r.d_min << r.band_gap << (r.merged ? 1 : 0);
  return {{"bias_scan.csv", t.str()}};
}

// ----------------------------------------------------------------- barrier

struct SelectedPair {
  TrapSite a;
  TrapSite b;
};

inline SelectedPair locate_pair(const RunConfig& cfg, const PairCmdOptions& opt, int threads) {
  const Box region = opt.region.resolve(default_trap_region(cfg.lattice));
  const auto res = run_find_minima(cfg, region, opt.seed_resolution, threads);
  const auto pair = select_pair(res.sites, {Eigen::Vector2d(opt.ref_x, opt.ref_y), opt.axis}, cfg.lattice.alpha);
  if (!pair) throw ShapeError("no adjacent first-band site pair found for the selector");
  return {res.sites[pair->first], res.sites[pair->second]};
}

inline CommandOutput cmd_barrier(const RunConfig& cfg, const PairCmdOptions& opt, int threads) {
  const auto pair = locate_pair(cfg, opt, threads);
  const AnyField field(cfg.model, cfg.lattice, cfg.bias);
  const auto prof = barrier_between(pair.a, pair.b, field);
  CsvTable t({"arclength_m", "bmag_T", "x_m", "y_m", "z_m"});
  for (std::size_t k = 0; k < prof.path.size(); ++k)
    t.row() << prof.arclength[k] << prof.bmag[k] << prof.path[k].x() << prof.path[k].y() << prof.path[k].z();
  CsvTable s({"a_x_m", "a_y_m", "a_z_m", "b_x_m", "b_y_m", "b_z_m", "delta_b_T", "straight_delta_b_T",
              "saddle_x_m", "saddle_y_m", "saddle_z_m", "straight_fallback"});
  s.row() << pair.a.position.x() << pair.a.position.y() << pair.a.position.z() << pair.b.position.x()
          << pair.b.position.y() << pair.b.position.z() << prof.delta_b << prof.straight_delta_b
          << prof.saddle_position.x() << prof.saddle_position.y() << prof.saddle_position.z()
          << (prof.straight_fallback ? 1 : 0);
  return {{"barrier.csv", t.str()}, {"barrier_summary.csv", s.str()}};
}

// ---------------------------------------------------------------- spectrum

struct SpectrumCmdOptions {
  PairCmdOptions pair;
  int n_states = 10;
  int n_points = 1024;
  bool gravity = false;
  bool require_splitting = false;
};

inline CommandOutput cmd_spectrum(const RunConfig& cfg, const SpectrumCmdOptions& opt, int threads) {
  if (opt.n_points < 256) throw ConfigError("n-points must be >= 256");
  if (opt.n_states < 1 || 4 * opt.n_states >= opt.n_points) throw ConfigError("n-states must be in [1, n-points/4)");
  const auto pair = locate_pair(cfg, opt.pair, threads);
  const AnyField field(cfg.model, cfg.lattice, cfg.bias);
  AxisPotentialOptions ao;
  ao.n_points = opt.n_points;
  ao.include_gravity = opt.gravity;
  const auto ap = extract_axis_potential(field, cfg.atom, pair.a, pair.b, ao);
  const auto spec = eigensolve(ap.curve, cfg.atom, opt.n_states);

  CommandOutput out;
  CsvTable e({"state_index", "energy_J"});
  for (std::size_t i = 0; i < spec.energies.size(); ++i) e.row() << i << spec.energies[i];
  out.push_back({"spectrum.csv", e.str()});
  CsvTable p({"s_m", "energy_J"});
  for (std::size_t i = 0; i < ap.curve.coords.size(); ++i) p.row() << ap.curve.coords[i] << ap.curve.energies[i];
  out.push_back({"potential.csv", p.str()});

  try {
    const auto split = tunneling_splitting(ap.curve, cfg.atom);
    CsvTable s({"delta_e_J", "j_hop_J"});
    s.row() << split.delta_e << split.j_hop;
    out.push_back({"splitting.csv", s.str()});
  } catch (const ShapeError&) {
    if (opt.require_splitting) throw;
  }

  CsvTable h({"site", "x_m", "y_m", "z_m", "wx_rad_s", "wy_rad_s", "wz_rad_s", "u_J"});
  int idx = 0;
  for (const TrapSite* s : {&pair.a, &pair.b})
    h.row() << idx++ << s->position.x() << s->position.y() << s->position.z() << s->frequencies[0]
            << s->frequencies[1] << s->frequencies[2] << hubbard_u_estimate(*s, cfg.atom);
  out.push_back({"hubbard.csv", h.str()});
  out.push_back({"hubbard_formula.txt", kHubbardUFormula + "\n"});
  return out;
}

// ---------------------------------------------------------------- dynamics

enum class ChainKind { grid, lattice };

struct DynamicsCmdOptions {
  ChainKind chain = ChainKind::grid;
  std::size_t rows = 4, cols = 4;
  double omega = 1.0;  // rad/s
  double hop = 0.1;    // rad/s
  std::string seeds = "5:6:1,9:10:1";
  std::size_t reference = 5;
  double t_max = 40.0;
  int t_steps = 81;
  RegionFlags region;  // lattice chain
  int seed_resolution = 8;
};

inline std::vector<BellPair> parse_seeds(const std::string& spec) {
  std::vector<BellPair> out;
  std::string_view rest(spec);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const auto item = detail::trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    if (item.empty()) continue;
    const auto c1 = item.find(':');
    const auto c2 = c1 == std::string_view::npos ? c1 : item.find(':', c1 + 1);
    if (c2 == std::string_view::npos) throw ConfigError("seed '" + std::string(item) + "' must be i:j:r");
    BellPair p;
    p.i = static_cast<std::size_t>(detail::parse_int(item.substr(0, c1), "seeds"));
    p.j = static_cast<std::size_t>(detail::parse_int(item.substr(c1 + 1, c2 - c1 - 1), "seeds"));
    p.r = detail::parse_double(item.substr(c2 + 1), "seeds");
    out.push_back(p);
  }
  return out;
}

/// First-band lattice chain with 4-nearest-neighbour adjacency and J from
/// the tunneling splitting along each bond.
inline ChainSpec lattice_chain(const RunConfig& cfg, const Box& region, int seed_resolution, int threads) {
  const auto res = run_find_minima(cfg, region, seed_resolution, threads);
  std::vector<TrapSite> sites;
  for (const auto& s : res.sites)
    if (s.band_index == 0) sites.push_back(s);
  if (sites.size() < 2) throw ShapeError("lattice chain needs at least two first-band sites");
  const double a = cfg.lattice.alpha;
  std::set<Edge> edges;
  for (std::size_t i = 0; i < sites.size(); ++i)
    for (int ax = 0; ax < 2; ++ax)
      for (double sign : {-1.0, 1.0}) {
        std::optional<std::size_t> best;
        double dbest = 0.0;
        for (std::size_t j = 0; j < sites.size(); ++j) {
          if (j == i) continue;
          const Vec3 d = sites[j].position - sites[i].position;
          const double r = d.head<2>().norm();
          if (sign * d[ax] <= 0.0 || std::abs(d[ax]) < 2.0 * std::abs(d[1 - ax]) || r > 3.0 * a) continue;
          if (!best || r < dbest) {
            best = j;
            dbest = r;
          }
        }
        if (best) edges.insert({std::min(i, *best), std::max(i, *best)});
      }
  const AnyField field(cfg.model, cfg.lattice, cfg.bias);
  const std::vector<Edge> list(edges.begin(), edges.end());
  std::vector<double> jhop(list.size());
  parallel_for(list.size(), threads, [&](std::size_t k) {
    const auto ap = extract_axis_potential(field, cfg.atom, sites[list[k].first], sites[list[k].second]);
    jhop[k] = tunneling_splitting(ap.curve, cfg.atom).j_hop;
  });
  std::map<Edge, double> split;
  for (std::size_t k = 0; k < list.size(); ++k) split[list[k]] = jhop[k];
  return chain_from_lattice(sites, split, cfg.atom);
}

inline CommandOutput cmd_dynamics(const RunConfig& cfg, const DynamicsCmdOptions& opt, int threads) {
  if (opt.t_steps < 1) throw ConfigError("t-steps must be >= 1");
  if (!(opt.t_max >= 0.0)) throw ConfigError("t-max must be >= 0");
  ChainSpec chain;
  if (opt.chain == ChainKind::grid) {
    if (opt.rows * opt.cols < 2) throw ConfigError("grid chain needs at least 2 modes");
    chain = grid_chain(opt.rows, opt.cols, opt.omega, opt.hop);
  } else {
    chain = lattice_chain(cfg, opt.region.resolve(default_trap_region(cfg.lattice)), opt.seed_resolution, threads);
  }
  const auto seeds = parse_seeds(opt.seeds);
  const auto times = linspace(0.0, opt.t_max, static_cast<std::size_t>(opt.t_steps));
  const auto rows = entanglement_profile(chain, seeds, opt.t_steps == 1 ? std::vector<double>{0.0} : times,
                                         opt.reference, threads);
  CsvTable t({"t_s", "site_index", "graph_distance", "log_negativity"});
  for (const auto& r : rows) t.row() << r.t << r.site << r.graph_distance << r.log_negativity;
  return {{"entanglement.csv", t.str()}};
}

// ---------------------------------------------------------- compare-models

struct CompareCmdOptions {
  RegionFlags region;
  int samples = 16;
};

inline CommandOutput cmd_compare_models(const RunConfig& cfg, const CompareCmdOptions& opt, int threads) {
  const Box region = opt.region.resolve(central_cell_region(cfg.lattice));
  const auto st = compare_models(cfg.lattice, cfg.bias, region, opt.samples, threads);
  CsvTable t({"max_rel_err", "mean_rel_err", "rms_rel_err", "argmax_x_m", "argmax_y_m", "argmax_z_m"});
  t.row() << st.max_rel_err << st.mean_rel_err << st.rms_rel_err << st.argmax.x() << st.argmax.y() << st.argmax.z();
  return {{"model_error.csv", t.str()}};
}

}  // namespace maglat
