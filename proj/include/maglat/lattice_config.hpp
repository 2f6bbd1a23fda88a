#pragma once

// Lattice geometry, material, bias and atom parameters.
//
// Conventions: strict SI. The film occupies -tau <= z <= 0 with its top
// surface at z = 0; atoms live at z > 0. Hole centers form a square grid of
// pitch 2*alpha centered on the origin (a hole of width alpha followed by a
// wall of width alpha).

#include <cmath>
#include <string>
#include <vector>

#include "maglat/constants.hpp"
#include "maglat/errors.hpp"
#include "maglat/types.hpp"

namespace maglat {

struct LatticeSpec {
  int n_holes_per_block = 5;
  int m_blocks = 2;
  double alpha = 5e-6;             // hole size and hole separation, m
  double tau = 1e-6;               // film thickness, m
  double m_z = 1e5;                // magnetization, A/m
  double film_half_extent = 2e-4;  // lateral half-size of the film, m

  int holes_per_side() const { return n_holes_per_block * m_blocks; }
  /// Half-width of the hole array measured to the outer hole edges.
  double array_half_width() const { return holes_per_side() * alpha - 0.5 * alpha; }
};

struct BiasField {
  double bx = 0.0;
  double by = 0.0;
  double bz = 0.0;

  Vec3 vector() const { return {bx, by, bz}; }
};

struct AtomSpec {
  double mass = 1.443e-25;  // kg
  double g_f = 0.5;
  double m_f = 2.0;
  double a_s = 5.3e-9;  // m

  /// Zeeman coupling m_F g_F mu_B, J/T.
  double zeeman_factor() const { return m_f * g_f * PhysicalConstants::mu_b; }
};

/// Default lateral film size: four times the array half-width (pitch units).
inline double default_film_half_extent(const LatticeSpec& s) {
  return 4.0 * s.holes_per_side() * s.alpha;
}

/// Returns the spec unchanged if every invariant holds, otherwise throws a
/// ValidationError naming all violations.
inline LatticeSpec validate_spec(const LatticeSpec& spec) {
  std::vector<std::string> errs;
  if (spec.n_holes_per_block <= 0) errs.emplace_back("n_holes_per_block must be > 0");
  if (spec.m_blocks <= 0) errs.emplace_back("m_blocks must be > 0");
  if (!std::isfinite(spec.alpha) || !(spec.alpha > 0)) errs.emplace_back("alpha must be > 0");
  if (!std::isfinite(spec.tau) || !(spec.tau > 0)) errs.emplace_back("tau must be > 0");
  if (!std::isfinite(spec.m_z) || !(spec.m_z >= 0)) errs.emplace_back("m_z must be >= 0");
  if (!std::isfinite(spec.film_half_extent)) {
    errs.emplace_back("film_half_extent must be finite");
  } else if (spec.n_holes_per_block > 0 && spec.m_blocks > 0 && spec.alpha > 0 &&
             spec.film_half_extent < spec.array_half_width()) {
    errs.emplace_back("film does not enclose hole array");
  }
  if (!errs.empty()) throw ValidationError(std::move(errs));
  return spec;
}

inline AtomSpec validate_atom(const AtomSpec& atom) {
  std::vector<std::string> errs;
  if (!(atom.mass > 0) || !std::isfinite(atom.mass)) errs.emplace_back("atom mass must be > 0");
  if (!(atom.g_f * atom.m_f > 0)) errs.emplace_back("g_f*m_f must be > 0 (low-field seeker)");
  if (!std::isfinite(atom.a_s)) errs.emplace_back("scattering length must be finite");
  if (!errs.empty()) throw ValidationError(std::move(errs));
  return atom;
}

inline BiasField validate_bias(const BiasField& b) {
  if (!std::isfinite(b.bx) || !std::isfinite(b.by) || !std::isfinite(b.bz))
    throw ValidationError({"bias components must be finite"});
  return b;
}

/// Surface induction B_o = mu0 * M_z / pi.
inline double b_surface(const LatticeSpec& spec) {
  return PhysicalConstants::mu0 * spec.m_z / PhysicalConstants::pi;
}

/// Lattice wavenumber pi / alpha.
inline double beta(const LatticeSpec& spec) { return PhysicalConstants::pi / spec.alpha; }

/// Hole centers on the pitch-2*alpha grid, row-major in (y, x).
inline std::vector<Eigen::Vector2d> hole_centers(const LatticeSpec& spec) {
  const int n = spec.holes_per_side();
  std::vector<Eigen::Vector2d> out;
  out.reserve(static_cast<std::size_t>(n) * n);
  // (2i - (n-1)) * alpha is an exact odd/even integer multiple, so the grid is
  // exactly symmetric under sign flips and x<->y.
  for (int j = 0; j < n; ++j) {
    const double y = static_cast<double>(2 * j - (n - 1)) * spec.alpha;
    for (int i = 0; i < n; ++i) {
      const double x = static_cast<double>(2 * i - (n - 1)) * spec.alpha;
      out.emplace_back(x, y);
    }
  }
  return out;
}

}  // namespace maglat
