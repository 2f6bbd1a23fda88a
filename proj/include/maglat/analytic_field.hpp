#pragma once

// Infinite-lattice analytic field of the perforated film.
//
// corrected:  B_x = K e^{-beta z} sin(beta x) + b_x
//             B_y = K e^{-beta z} sin(beta y) + b_y
//             B_z = K e^{-beta z} [cos(beta x) + cos(beta y)] + b_z
//             with K = B_o (1 - e^{-beta tau}).
// verbatim:   the uncorrected forms, including (1 - e^{-beta z}) e^{-beta|z - tau|},
//             the e^{-beta|x - tau|} factor on B_x (or one of its two
//             plausible readings) and +b_z appended to all three components.

#include <array>
#include <cmath>

#include "maglat/errors.hpp"
#include "maglat/field_derivatives.hpp"
#include "maglat/lattice_config.hpp"

namespace maglat {

enum class EquationMode { corrected, verbatim };

/// Decay factor used on B_x in verbatim mode.
enum class VerbatimXFactor {
  literal,      // e^{-beta|x - tau|}
  abs_z_tau,    // e^{-beta|z - tau|}, matching B_y and B_z
  exp_z,        // e^{-beta z}
};

struct VerbatimOptions {
  VerbatimXFactor x_factor = VerbatimXFactor::literal;
};

class AnalyticField {
 public:
  AnalyticField(const LatticeSpec& spec, const BiasField& bias,
                EquationMode mode = EquationMode::corrected, VerbatimOptions opts = {})
      : spec_(spec),
        bias_(bias),
        mode_(mode),
        opts_(opts),
        beta_(maglat::beta(spec)),
        b0_(b_surface(spec)),
        amp_(b0_ * -std::expm1(-beta_ * spec.tau)) {}

  double length_scale() const { return spec_.alpha; }
  EquationMode mode() const { return mode_; }
  const LatticeSpec& spec() const { return spec_; }
  const BiasField& bias() const { return bias_; }

  BVector field(const Vec3& p) const {
    check_domain(p);
    const double sx = std::sin(beta_ * p.x()), cx = std::cos(beta_ * p.x());
    const double sy = std::sin(beta_ * p.y()), cy = std::cos(beta_ * p.y());
    if (mode_ == EquationMode::corrected) {
      const double a = amp_ * std::exp(-beta_ * p.z());
      return {a * sx + bias_.bx, a * sy + bias_.by, a * (cx + cy) + bias_.bz};
    }
    const double rise = -std::expm1(-beta_ * p.z());
    const double ez = std::exp(-beta_ * std::abs(p.z() - spec_.tau));
    double ex = ez;
    if (opts_.x_factor == VerbatimXFactor::literal)
      ex = std::exp(-beta_ * std::abs(p.x() - spec_.tau));
    else if (opts_.x_factor == VerbatimXFactor::exp_z)
      ex = std::exp(-beta_ * p.z());
    return {b0_ * rise * ex * sx + bias_.bz, b0_ * rise * ez * sy + bias_.bz,
            b0_ * rise * ez * (cx + cy) + bias_.bz};
  }

  /// Analytic Jacobian (corrected mode); verbatim falls back to differences.
  Mat3 jacobian(const Vec3& p) const {
    check_domain(p);
    if (mode_ == EquationMode::verbatim) return fd_jacobian(p);
    const double a = amp_ * std::exp(-beta_ * p.z());
    const double ab = a * beta_;
    const double sx = std::sin(beta_ * p.x()), cx = std::cos(beta_ * p.x());
    const double sy = std::sin(beta_ * p.y()), cy = std::cos(beta_ * p.y());
    Mat3 j;
    j << ab * cx, 0.0, -ab * sx,
         0.0, ab * cy, -ab * sy,
         -ab * sx, -ab * sy, -ab * (cx + cy);
    return j;
  }

  bool has_second_derivatives() const { return mode_ == EquationMode::corrected; }

  /// Second derivatives of each component (corrected mode only).
  std::array<Mat3, 3> second_derivatives(const Vec3& p) const {
    check_domain(p);
    if (mode_ == EquationMode::verbatim)
      throw DomainError("analytic second derivatives are only defined in corrected mode");
    const double a = amp_ * std::exp(-beta_ * p.z());
    const double ab2 = a * beta_ * beta_;
    const double sx = std::sin(beta_ * p.x()), cx = std::cos(beta_ * p.x());
    const double sy = std::sin(beta_ * p.y()), cy = std::cos(beta_ * p.y());
    std::array<Mat3, 3> h;
    h[0] << -ab2 * sx, 0.0, -ab2 * cx,
            0.0, 0.0, 0.0,
            -ab2 * cx, 0.0, ab2 * sx;
    h[1] << 0.0, 0.0, 0.0,
            0.0, -ab2 * sy, -ab2 * cy,
            0.0, -ab2 * cy, ab2 * sy;
    h[2] << -ab2 * cx, 0.0, ab2 * sx,
            0.0, -ab2 * cy, ab2 * sy,
            ab2 * sx, ab2 * sy, ab2 * (cx + cy);
    return h;
  }

 private:
  static void check_domain(const Vec3& p) {
    if (!(p.z() > 0.0)) throw DomainError("analytic field is defined for z > 0 only");
  }

  Mat3 fd_jacobian(const Vec3& p) const {
    const double h = kGradientStep * spec_.alpha;
    Mat3 j;
    for (int a = 0; a < 3; ++a)
      j.col(a) = richardson_derivative([&](const Vec3& q) { return field(q); }, p, a, h);
    return j;
  }

  LatticeSpec spec_;
  BiasField bias_;
  EquationMode mode_;
  VerbatimOptions opts_;
  double beta_;
  double b0_;
  double amp_;
};

inline BVector field_infinite(const LatticeSpec& spec, const BiasField& bias, const Vec3& point,
                              EquationMode mode = EquationMode::corrected,
                              VerbatimOptions opts = {}) {
  return AnalyticField(spec, bias, mode, opts).field(point);
}

inline double field_magnitude(const BVector& b) { return std::hypot(b[0], b[1], b[2]); }

/// U = m_F g_F mu_B |B|.
inline double zeeman_potential(const AtomSpec& atom, double b_mag) {
  if (!(b_mag >= 0.0)) throw DomainError("field magnitude must be >= 0");
  return atom.zeeman_factor() * b_mag;
}

struct GradientHessian {
  Vec3 gradient;
  Mat3 hessian;
};

inline GradientHessian field_gradient_and_hessian(const LatticeSpec& spec, const BiasField& bias,
                                                  const Vec3& point,
                                                  EquationMode mode = EquationMode::corrected) {
  const auto d = magnitude_derivatives(AnalyticField(spec, bias, mode), point);
  return {d.gradient, d.hessian};
}

}  // namespace maglat
