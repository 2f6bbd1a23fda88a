#pragma once

// Exact finite-lattice field by superposition of uniformly magnetized
// rectangular prisms: a full film slab plus through-hole prisms carrying the
// opposite magnetization.
//
// Each prism is replaced by magnetic surface charge sigma = M . n on its faces.
// For a face of charge sigma spanning [u1,u2] x [v1,v2] in its plane and a
// field point at normal offset w,
//
//   H_u = sigma/4pi sum s_ij (-ln(v + R))
//   H_v = sigma/4pi sum s_ij (-ln(u + R))
//   H_w = sigma/4pi sum s_ij atan(u v / (w R))
//
// with corner offsets u = x - u_i, v = y - v_j, R = |(u, v, w)| and
// s_ij = (-1)^(i+j). Outside material B = mu0 H.

#include <array>
#include <cmath>
#include <vector>

#include "maglat/analytic_field.hpp"
#include "maglat/errors.hpp"
#include "maglat/lattice_config.hpp"
#include "maglat/numerics.hpp"

namespace maglat {

struct Prism {
  Vec3 min_corner;
  Vec3 max_corner;
  Vec3 magnetization;  // A/m
};

/// Minimum distance (m) between an evaluation point and any prism face.
inline constexpr double kPrismClearance = 1e-9;

namespace detail {

// ln(v + R) without cancellation for v < 0. The ln(u^2 + w^2) part is common
// to the two corners sharing an edge and cancels in the alternating sum, so it
// is dropped when it is singular.
inline double log_v_plus_r(double v, double r, double uw2) {
  if (v >= 0.0) return std::log(v + r);
  const double common = uw2 > 0.0 ? std::log(uw2) : 0.0;
  return common - std::log(r - v);
}

inline double inv_v_plus_r(double v, double r, double uw2) {
  if (v >= 0.0) return 1.0 / (v + r);
  if (!(uw2 > 0.0)) throw DomainError("prism field derivative undefined on a face-edge extension");
  return (r - v) / uw2;
}

inline double box_distance(const Prism& p, const Vec3& x) {
  const Vec3 d = (p.min_corner - x).cwiseMax(x - p.max_corner).cwiseMax(0.0);
  return d.norm();
}

inline void check_exterior(const Prism& p, const Vec3& x) {
  if (box_distance(p, x) < kPrismClearance)
    throw DomainError("evaluation point inside or within clearance of a prism");
}

// Accumulates H (units of A/m times 4pi) and optionally its Jacobian for every
// face pair normal to `axis`.
inline void accumulate_faces(const Prism& p, int axis, const Vec3& x, Vec3& h, Mat3* jac) {
  const double m = p.magnetization[axis];
  if (m == 0.0) return;
  const int a1 = (axis + 1) % 3, a2 = (axis + 2) % 3;
  const double us[2] = {x[a1] - p.min_corner[a1], x[a1] - p.max_corner[a1]};
  const double vs[2] = {x[a2] - p.min_corner[a2], x[a2] - p.max_corner[a2]};
  const double faces[2] = {p.max_corner[axis], p.min_corner[axis]};
  const double charges[2] = {m, -m};
  for (int f = 0; f < 2; ++f) {
    const double w = x[axis] - faces[f];
    const double w2 = w * w;
    double hu = 0, hv = 0, hw = 0;
    Mat3 lj = Mat3::Zero();  // rows: (u, v, w) components; cols: d/d(u, v, w)
    for (int i = 0; i < 2; ++i) {
      const double u = us[i];
      for (int j = 0; j < 2; ++j) {
        const double v = vs[j];
        const double s = ((i + j) % 2 == 0) ? 1.0 : -1.0;
        const double r = std::sqrt(u * u + v * v + w2);
        const double uw2 = u * u + w2, vw2 = v * v + w2;
        hu -= s * log_v_plus_r(v, r, uw2);
        hv -= s * log_v_plus_r(u, r, vw2);
        if (w != 0.0) {
          hw += s * std::atan(u * v / (w * r));
        } else if (u * v != 0.0) {
          hw += s * std::copysign(0.5 * PhysicalConstants::pi, u * v);
        }
        if (jac) {
          const double ivr = inv_v_plus_r(v, r, uw2);
          const double iur = inv_v_plus_r(u, r, vw2);
          lj(0, 0) -= s * u * ivr / r;
          lj(0, 1) -= s / r;
          lj(0, 2) -= s * w * ivr / r;
          lj(1, 0) -= s / r;
          lj(1, 1) -= s * v * iur / r;
          lj(1, 2) -= s * w * iur / r;
          lj(2, 0) += s * v * w / (r * uw2);
          lj(2, 1) += s * u * w / (r * vw2);
          lj(2, 2) -= s * u * v * (r * r + w2) / (r * uw2 * vw2);
        }
      }
    }
    const double q = charges[f];
    h[a1] += q * hu;
    h[a2] += q * hv;
    h[axis] += q * hw;
    if (jac) {
      const int g[3] = {a1, a2, axis};
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) (*jac)(g[r], g[c]) += q * lj(r, c);
    }
  }
}

}  // namespace detail

/// Exact B of a uniformly magnetized prism at an exterior point.
inline BVector prism_field(const Prism& p, const Vec3& point) {
  detail::check_exterior(p, point);
  Vec3 h = Vec3::Zero();
  for (int axis = 0; axis < 3; ++axis) detail::accumulate_faces(p, axis, point, h, nullptr);
  return PhysicalConstants::mu0 / (4.0 * PhysicalConstants::pi) * h;
}

/// B and dB_i/dx_j of a uniformly magnetized prism.
inline std::pair<BVector, Mat3> prism_field_and_jacobian(const Prism& p, const Vec3& point) {
  detail::check_exterior(p, point);
  Vec3 h = Vec3::Zero();
  Mat3 j = Mat3::Zero();
  for (int axis = 0; axis < 3; ++axis) detail::accumulate_faces(p, axis, point, h, &j);
  const double k = PhysicalConstants::mu0 / (4.0 * PhysicalConstants::pi);
  return {k * h, k * j};
}

/// Slab of the full film plus one opposite-magnetization prism per hole.
class PerforatedFilmField {
 public:
  PerforatedFilmField(const LatticeSpec& spec, const BiasField& bias)
      : spec_(validate_spec(spec)), bias_(bias) {
    const double e = spec.film_half_extent;
    const Vec3 m(0.0, 0.0, spec.m_z);
    prisms_.push_back({Vec3(-e, -e, -spec.tau), Vec3(e, e, 0.0), m});
    const double h = 0.5 * spec.alpha;
    for (const auto& c : hole_centers(spec))
      prisms_.push_back({Vec3(c.x() - h, c.y() - h, -spec.tau), Vec3(c.x() + h, c.y() + h, 0.0), -m});
  }

  double length_scale() const { return spec_.alpha; }
  const LatticeSpec& spec() const { return spec_; }
  const BiasField& bias() const { return bias_; }
  const std::vector<Prism>& prisms() const { return prisms_; }

  BVector field(const Vec3& p) const {
    check_domain(p);
    CompensatedSum<Vec3> sum;
    for (const auto& pr : prisms_) sum.add(prism_field(pr, p));
    return sum.value() + bias_.vector();
  }

  /// Film contribution only (no bias).
  BVector film_field(const Vec3& p) const { return field(p) - bias_.vector(); }

  Mat3 jacobian(const Vec3& p) const {
    check_domain(p);
    CompensatedSum<Eigen::Matrix<double, 9, 1>> sum;
    for (const auto& pr : prisms_) {
      const Mat3 j = prism_field_and_jacobian(pr, p).second;
      sum.add(Eigen::Map<const Eigen::Matrix<double, 9, 1>>(j.data()));
    }
    const Eigen::Matrix<double, 9, 1> v = sum.value();
    return Eigen::Map<const Mat3>(v.data());
  }

 private:
  static void check_domain(const Vec3& p) {
    if (!(p.z() > 0.0)) throw DomainError("film field is evaluated on the atom side (z > 0) only");
  }

  LatticeSpec spec_;
  BiasField bias_;
  std::vector<Prism> prisms_;
};

inline BVector perforated_film_field(const LatticeSpec& spec, const BiasField& bias,
                                     const Vec3& point) {
  return PerforatedFilmField(spec, bias).field(point);
}

struct ModelErrorStats {
  double max_rel_err = 0.0;
  double mean_rel_err = 0.0;
  double rms_rel_err = 0.0;
  Vec3 argmax = Vec3::Zero();
  std::size_t samples = 0;
};

/// Relative |B| difference of the corrected analytic model against the
/// magnetostatic model on a samples^3 grid over `region`.
inline ModelErrorStats compare_models(const LatticeSpec& spec, const BiasField& bias,
                                      const Box& region, int samples, int threads = 1) {
  if (samples < 1) throw ConfigError("compare_models needs at least one sample per axis");
  if ((region.hi.array() < region.lo.array()).any()) throw ConfigError("empty comparison region");
  if (!(region.lo.z() > 0.0)) throw ConfigError("comparison region must lie in z > 0");
  const AnalyticField analytic(spec, bias, EquationMode::corrected);
  const PerforatedFilmField exact(spec, bias);
  const auto n = static_cast<std::size_t>(samples);
  const auto xs = linspace(region.lo.x(), region.hi.x(), n);
  const auto ys = linspace(region.lo.y(), region.hi.y(), n);
  const auto zs = linspace(region.lo.z(), region.hi.z(), n);
  std::vector<double> rel(n * n * n);
  parallel_for(rel.size(), threads, [&](std::size_t idx) {
    const std::size_t i = idx / (n * n), j = (idx / n) % n, k = idx % n;
    const Vec3 p(xs[i], ys[j], zs[k]);
    const double a = field_magnitude(analytic.field(p));
    const double m = field_magnitude(exact.field(p));
    const double d = std::abs(a - m);
    rel[idx] = d == 0.0 ? 0.0 : d / m;
  });
  ModelErrorStats s;
  s.samples = rel.size();
  double sum = 0, sum2 = 0;
  for (std::size_t idx = 0; idx < rel.size(); ++idx) {
    sum += rel[idx];
    sum2 += rel[idx] * rel[idx];
    if (rel[idx] > s.max_rel_err) {
      s.max_rel_err = rel[idx];
      s.argmax = Vec3(xs[idx / (n * n)], ys[(idx / n) % n], zs[idx % n]);
    }
  }
  s.mean_rel_err = sum / static_cast<double>(rel.size());
  s.rms_rel_err = std::sqrt(sum2 / static_cast<double>(rel.size()));
  return s;
}

}  // namespace maglat
