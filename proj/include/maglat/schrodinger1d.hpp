#pragma once

// Stationary 1D Schrodinger problem along an inter-site path: level
// structure, tunneling splitting and an on-site interaction estimate.

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <lapacke.h>

#include "maglat/trap_analysis.hpp"

namespace maglat {

struct PotentialCurve1D {
  std::vector<double> coords;    // m, uniform
  std::vector<double> energies;  // J

  double spacing() const { return (coords.back() - coords.front()) / double(coords.size() - 1); }
};

/// Node deviation from the uniform grid accepted, relative to the span.
inline constexpr double kUniformJitter = 1e-12;

inline void validate_curve(const PotentialCurve1D& c) {
  if (c.coords.size() != c.energies.size())
    throw ShapeError("curve coords and energies differ in length");
  if (c.coords.size() < 64) throw ShapeError("curve needs at least 64 samples");
  for (std::size_t i = 0; i < c.coords.size(); ++i)
    if (!std::isfinite(c.coords[i]) || !std::isfinite(c.energies[i]))
      throw ShapeError("curve contains non-finite values");
  const double h = c.spacing();
  if (!(h > 0.0)) throw ShapeError("curve coords must be strictly increasing");
  const double span = c.coords.back() - c.coords.front();
  for (std::size_t i = 1; i < c.coords.size(); ++i) {
    if (!(c.coords[i] > c.coords[i - 1])) throw ShapeError("curve coords must be strictly increasing");
    const double ideal = c.coords.front() + h * double(i);
    if (std::abs(c.coords[i] - ideal) > kUniformJitter * span)
      throw ShapeError("curve grid is not uniform");
  }
}

struct AxisPotentialOptions {
  int n_points = 1024;
  bool include_gravity = false;
  /// Straight extension beyond each site, as a fraction of the site distance.
  double extension = 0.2;
  BarrierOptions barrier{};
};

struct AxisPotential {
  PotentialCurve1D curve;
  BarrierProfile profile;
  /// Arclength of the two sites along the curve.
  double s_a = 0.0;
  double s_b = 0.0;
};

/// Zeeman potential along the relaxed barrier path between two sites,
/// extended straight beyond each site and resampled uniformly in arclength.
/// Positions are interpolated along the path and the field re-evaluated.
template <FieldSource F>
AxisPotential extract_axis_potential(const F& field, const AtomSpec& atom, const TrapSite& a,
                                     const TrapSite& b, AxisPotentialOptions opt = {}) {
  if (opt.n_points < 256) throw ConfigError("extract_axis_potential needs n_points >= 256");
  AxisPotential out;
  out.profile = barrier_between(a, b, field, opt.barrier);
  const auto& path = out.profile.path;
  const Vec3 t = (b.position - a.position).normalized();
  const double ext = opt.extension * (b.position - a.position).norm();

  // Polyline: extension before a, the path, extension after b.
  std::vector<Vec3> poly;
  poly.reserve(path.size() + 2);
  poly.push_back(a.position - ext * t);
  poly.insert(poly.end(), path.begin(), path.end());
  poly.push_back(b.position + ext * t);
  std::vector<double> s(poly.size(), 0.0);
  for (std::size_t k = 1; k < poly.size(); ++k) s[k] = s[k - 1] + (poly[k] - poly[k - 1]).norm();
  out.s_a = s[1];
  out.s_b = s[poly.size() - 2];

  const auto n = static_cast<std::size_t>(opt.n_points);
  const double length = s.back();
  const double h = length / double(n - 1);
  out.curve.coords.resize(n);
  out.curve.energies.resize(n);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double si = h * double(i);
    out.curve.coords[i] = si;
    while (seg + 2 < poly.size() && s[seg + 1] < si) ++seg;
    const double span = s[seg + 1] - s[seg];
    const double w = span > 0.0 ? std::clamp((si - s[seg]) / span, 0.0, 1.0) : 0.0;
    const Vec3 p = (1.0 - w) * poly[seg] + w * poly[seg + 1];
    double u = zeeman_potential(atom, field_magnitude(field.field(p)));
    if (opt.include_gravity) u += atom.mass * PhysicalConstants::g_n * p.z();
    out.curve.energies[i] = u;
  }
  return out;
}

struct SpectrumResult {
  std::vector<double> energies;  // J, ascending
  /// One column per state on the full grid (zero at the ends), sum psi^2 h = 1.
  Eigen::MatrixXd wavefunctions;
};

/// Lowest k eigenpairs of -(hbar^2/2m) d^2/ds^2 + U(s), second-order central
/// differences, Dirichlet ends.
inline SpectrumResult eigensolve(const PotentialCurve1D& curve, const AtomSpec& atom, int k) {
  validate_curve(curve);
  const auto n = static_cast<lapack_int>(curve.coords.size());
  if (k < 1 || 4 * k >= n) throw ConfigError("eigensolve needs 1 <= k < n_points/4");
  const double h = curve.spacing();
  const double e0 = PhysicalConstants::hbar * PhysicalConstants::hbar / (atom.mass * h * h);
  const double umin = *std::min_element(curve.energies.begin(), curve.energies.end());

  const lapack_int m = n - 2;
  std::vector<double> d(static_cast<std::size_t>(m)), e(static_cast<std::size_t>(m), -0.5);
  for (lapack_int i = 0; i < m; ++i)
    d[static_cast<std::size_t>(i)] = 1.0 + (curve.energies[static_cast<std::size_t>(i + 1)] - umin) / e0;
  std::vector<double> w(static_cast<std::size_t>(m));
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor> z(m, k);
  std::vector<lapack_int> isuppz(2 * static_cast<std::size_t>(k));
  lapack_int found = 0;
  const lapack_int info = LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'I', m, d.data(), e.data(), 0.0, 0.0,
                                         1, k, 0.0, &found, w.data(), z.data(), m, isuppz.data());
  if (info != 0 || found != k) throw std::runtime_error("tridiagonal eigensolver failed");

  SpectrumResult out;
  out.energies.resize(static_cast<std::size_t>(k));
  out.wavefunctions = Eigen::MatrixXd::Zero(n, k);
  const double norm = 1.0 / std::sqrt(h);
  for (int j = 0; j < k; ++j) {
    out.energies[static_cast<std::size_t>(j)] = umin + e0 * w[static_cast<std::size_t>(j)];
    Eigen::VectorXd col = z.col(j) * norm;
    // Sign convention: the largest-magnitude lobe (first on ties) is positive.
    Eigen::Index arg = 0;
    col.cwiseAbs().maxCoeff(&arg);
    const double peak = std::abs(col[arg]);
    for (Eigen::Index i = 0; i < col.size(); ++i)
      if (std::abs(col[i]) > (1.0 - 1e-9) * peak) {
        if (col[i] < 0.0) col = -col;
        break;
      }
    out.wavefunctions.block(1, j, m, 1) = col;
  }
  return out;
}

/// Indices of interior strict local minima (plateaus count once).
inline std::vector<std::size_t> interior_minima(const std::vector<double>& u) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < u.size(); ++i) {
    if (!(u[i] < u[i - 1])) continue;
    std::size_t j = i;
    while (j + 1 < u.size() && u[j + 1] == u[i]) ++j;
    if (j + 1 < u.size() && u[j + 1] > u[i]) out.push_back(i);
    i = j;
  }
  return out;
}

struct TunnelingResult {
  double delta_e = 0.0;  // J
  double j_hop = 0.0;    // J
  bool symmetric = false;
  /// State 0 even and state 1 odd about the midpoint (checked for symmetric wells).
  bool parity_ok = false;
};

/// Relative tolerance for treating a curve as mirror symmetric.
inline constexpr double kSymmetryTol = 1e-8;

inline TunnelingResult tunneling_splitting(const PotentialCurve1D& curve, const AtomSpec& atom) {
  validate_curve(curve);
  if (interior_minima(curve.energies).size() != 2)
    throw ShapeError("curve is not a double well (needs exactly two interior minima)");
  const auto spec = eigensolve(curve, atom, 2);
  TunnelingResult out;
  out.delta_e = spec.energies[1] - spec.energies[0];
  out.j_hop = 0.5 * out.delta_e;

  const auto& u = curve.energies;
  const auto [lo, hi] = std::minmax_element(u.begin(), u.end());
  const double range = std::max(*hi - *lo, std::abs(*hi));
  out.symmetric = true;
  for (std::size_t i = 0; i < u.size() && out.symmetric; ++i)
    if (std::abs(u[i] - u[u.size() - 1 - i]) > kSymmetryTol * range) out.symmetric = false;
  if (out.symmetric) {
    const Eigen::VectorXd p0 = spec.wavefunctions.col(0), p1 = spec.wavefunctions.col(1);
    const double tol = 1e-6 * std::max(p0.cwiseAbs().maxCoeff(), p1.cwiseAbs().maxCoeff());
    out.parity_ok = (p0 - p0.reverse()).cwiseAbs().maxCoeff() < tol &&
                    (p1 + p1.reverse()).cwiseAbs().maxCoeff() < tol;
  }
  return out;
}

inline const std::string kHubbardUFormula =
    "U = (4 pi hbar^2 a_s / m) (2 pi)^(-3/2) / (a_x a_y a_z), a_i = sqrt(hbar / (m w_i)); "
    "Gaussian ground-state approximation";

/// On-site interaction from the harmonic (Gaussian) ground state, J.
inline double hubbard_u_estimate(const Vec3& frequencies, const AtomSpec& atom) {
  if (!(frequencies.minCoeff() > 0.0)) throw DomainError("trap frequencies must be positive");
  const double hb = PhysicalConstants::hbar;
  double vol = 1.0;
  for (int i = 0; i < 3; ++i) vol *= std::sqrt(hb / (atom.mass * frequencies[i]));
  const double g = 4.0 * PhysicalConstants::pi * hb * hb * atom.a_s / atom.mass;
  return g * std::pow(2.0 * PhysicalConstants::pi, -1.5) / vol;
}

inline double hubbard_u_estimate(const TrapSite& site, const AtomSpec& atom) {
  return hubbard_u_estimate(site.frequencies, atom);
}

}  // namespace maglat
