#pragma once

// Non-zero local minima of |B| (the coupled magnetic quantum wells), their
// frequencies, magnetic bands, inter-site barriers and bias dependence.

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Eigenvalues>

#include "maglat/field_derivatives.hpp"
#include "maglat/field_model.hpp"
#include "maglat/lattice_config.hpp"
#include "maglat/numerics.hpp"

namespace maglat {

struct TrapSite {
  Vec3 position = Vec3::Zero();
  double b_min = 0.0;
  Mat3 hessian = Mat3::Zero();
  Vec3 frequencies = Vec3::Zero();  // rad/s, ascending
  int band_index = -1;
  double d_min = 0.0;
};

/// Harmonic frequencies from a Hessian of |B|, ascending.
inline Vec3 trap_frequencies(const Mat3& hessian, const AtomSpec& atom) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(hessian, Eigen::EigenvaluesOnly);
  const Vec3 lambda = es.eigenvalues();
  if (!(lambda.minCoeff() > 0.0)) throw NotAMinimumError("Hessian of |B| is not positive definite");
  Vec3 w;
  for (int i = 0; i < 3; ++i) w[i] = std::sqrt(atom.zeeman_factor() * lambda[i] / atom.mass);
  return w;
}

template <FieldSource F>
Vec3 trap_frequencies(const Vec3& position, const F& field, const AtomSpec& atom) {
  return trap_frequencies(magnitude_derivatives(field, position).hessian, atom);
}

/// Relative |B| change treated as round-off (prism sums cancel strongly).
inline constexpr double kValueNoise = 1e-9;

struct NewtonOptions {
  double gradient_tol = 1e-9;  // T/m
  int max_iterations = 200;
  /// A seed whose |B| collapses by this factor is converging on a field zero.
  double zero_ratio = 1e-6;
  /// Cone test: |B| < cone_ratio * alpha * |grad |B|| also marks a field zero.
  double cone_ratio = 1e-3;
};

struct RefineOutcome {
  Vec3 position = Vec3::Zero();
  MagnitudeDerivatives derivs;
  bool converged = false;
  std::string failure;
};

namespace detail {

// Saddle-free Newton step: eigenvalues replaced by max(|lambda|, floor).
template <int N>
Eigen::Matrix<double, N, 1> saddle_free_step(const Eigen::Matrix<double, N, N>& h,
                                             const Eigen::Matrix<double, N, 1>& g) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix<double, N, N>> es(h);
  const auto& lam = es.eigenvalues();
  const double scale = std::max(lam.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
  Eigen::Matrix<double, N, 1> c = es.eigenvectors().transpose() * g;
  for (int i = 0; i < N; ++i) c[i] /= std::max(std::abs(lam[i]), 1e-8 * scale);
  return -(es.eigenvectors() * c);
}

}  // namespace detail

/// Damped Newton refinement of a |B| minimum from `seed`.
template <FieldSource F>
RefineOutcome refine_minimum(const F& field, const Vec3& seed, NewtonOptions opt = {}) {
  RefineOutcome out;
  const double max_step = 0.25 * field.length_scale();
  Vec3 p = seed;
  MagnitudeDerivatives d;
  try {
    d = magnitude_derivatives(field, p);
  } catch (const SingularPointError&) {
    out.failure = "converging on a field zero";
    return out;
  } catch (const DomainError& e) {
    out.failure = e.what();
    return out;
  }
  const double initial = d.value;
  for (int it = 0; it < opt.max_iterations; ++it) {
    if (d.gradient.norm() < opt.gradient_tol) {
      out.position = p;
      out.derivs = d;
      out.converged = true;
      return out;
    }
    if (d.value < opt.zero_ratio * initial ||
        d.value < opt.cone_ratio * field.length_scale() * d.gradient.norm()) {
      out.failure = "converging on a field zero";
      return out;
    }
    Vec3 step = detail::saddle_free_step<3>(d.hessian, d.gradient);
    if (step.norm() > max_step) step *= max_step / step.norm();
    const bool convex = Eigen::SelfAdjointEigenSolver<Mat3>(d.hessian, Eigen::EigenvaluesOnly)
                            .eigenvalues()
                            .minCoeff() > 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 40 && !accepted; ++ls, step *= 0.5) {
      const Vec3 q = p + step;
      std::pair<double, Vec3> trial;
      try {
        trial = magnitude_gradient(field, q);
      } catch (const SingularPointError&) {
        out.failure = "converging on a field zero";
        return out;
      } catch (const DomainError&) {
        continue;
      }
      // Near the minimum the value change drops below round-off; a convex
      // Newton step is then accepted on gradient decrease.
      const bool roundoff = trial.first <= d.value * (1.0 + kValueNoise);
      if (trial.first < d.value || (convex && roundoff && trial.second.norm() < d.gradient.norm())) {
        try {
          d = magnitude_derivatives(field, q);
        } catch (const SingularPointError&) {
          out.failure = "converging on a field zero";
          return out;
        }
        p = q;
        accepted = true;
      }
    }
    out.position = p;
    out.derivs = d;
    if (!accepted) {
      out.failure = "line search stalled";
      return out;
    }
  }
  out.failure = "no convergence in " + std::to_string(opt.max_iterations) + " iterations";
  return out;
}

struct DroppedSeed {
  Vec3 seed;
  std::string reason;
};

struct MinimaOptions {
  int seed_resolution = 8;  // grid points per alpha
  int threads = 1;
  NewtonOptions newton{};
};

struct MinimaResult {
  std::vector<TrapSite> sites;
  std::vector<DroppedSeed> dropped;
};

/// Clusters sites by z (sort and split at gaps > gap); ascending band order.
/// Writes band_index back into the sites.
inline std::vector<std::vector<std::size_t>> group_bands(std::vector<TrapSite>& sites,
                                                         double gap) {
  std::vector<std::size_t> order(sites.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return sites[a].position.z() < sites[b].position.z();
  });
  std::vector<std::vector<std::size_t>> bands;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || sites[order[k]].position.z() - sites[order[k - 1]].position.z() > gap)
      bands.emplace_back();
    bands.back().push_back(order[k]);
  }
  for (std::size_t b = 0; b < bands.size(); ++b) {
    std::sort(bands[b].begin(), bands[b].end());
    for (auto i : bands[b]) sites[i].band_index = static_cast<int>(b);
  }
  return bands;
}

/// Default band gap threshold alpha / 4.
inline std::vector<std::vector<std::size_t>> group_bands(std::vector<TrapSite>& sites,
                                                         const LatticeSpec& spec) {
  return group_bands(sites, 0.25 * spec.alpha);
}

template <FieldSource F>
MinimaResult find_minima(const F& field, const Box& region, const AtomSpec& atom,
                         MinimaOptions opt = {}) {
  if (!(region.lo.z() > 0.0)) throw ConfigError("search region must lie in z > 0");
  if ((region.hi.array() <= region.lo.array()).any()) throw ConfigError("empty search region");
  if (opt.seed_resolution < 8) throw ConfigError("seed_resolution must be >= 8 per alpha");
  const double alpha = field.length_scale();

  std::array<std::size_t, 3> n{};
  std::array<std::vector<double>, 3> axes;
  for (int a = 0; a < 3; ++a) {
    const double cells = std::ceil(region.extent()[a] / alpha * opt.seed_resolution);
    n[a] = static_cast<std::size_t>(std::max(3.0, cells + 1.0));
    axes[a] = linspace(region.lo[a], region.hi[a], n[a]);
  }
  const auto flat = [&](std::size_t i, std::size_t j, std::size_t k) {
    return (i * n[1] + j) * n[2] + k;
  };
  std::vector<double> mag(n[0] * n[1] * n[2]);
  parallel_for(mag.size(), opt.threads, [&](std::size_t idx) {
    const std::size_t i = idx / (n[1] * n[2]), j = (idx / n[2]) % n[1], k = idx % n[2];
    mag[idx] = field_magnitude(field.field(Vec3(axes[0][i], axes[1][j], axes[2][k])));
  });

  std::vector<Vec3> seeds;
  for (std::size_t i = 1; i + 1 < n[0]; ++i)
    for (std::size_t j = 1; j + 1 < n[1]; ++j)
      for (std::size_t k = 1; k + 1 < n[2]; ++k) {
        const double c = mag[flat(i, j, k)];
        bool le_all = true, lt_any = false;
        for (int di = -1; di <= 1 && le_all; ++di)
          for (int dj = -1; dj <= 1 && le_all; ++dj)
            for (int dk = -1; dk <= 1; ++dk) {
              if (!di && !dj && !dk) continue;
              const double o = mag[flat(i + di, j + dj, k + dk)];
              if (c > o) {
                le_all = false;
                break;
              }
              if (c < o) lt_any = true;
            }
        if (le_all && lt_any) seeds.emplace_back(axes[0][i], axes[1][j], axes[2][k]);
      }

  std::vector<RefineOutcome> refined(seeds.size());
  parallel_for(seeds.size(), opt.threads,
               [&](std::size_t s) { refined[s] = refine_minimum(field, seeds[s], opt.newton); });

  MinimaResult result;
  std::vector<TrapSite> candidates;
  for (std::size_t s = 0; s < seeds.size(); ++s) {
    const auto& r = refined[s];
    if (!r.converged) {
      result.dropped.push_back({seeds[s], r.failure});
      continue;
    }
    if (!region.contains(r.position)) {
      result.dropped.push_back({seeds[s], "refined outside region"});
      continue;
    }
    TrapSite site;
    site.position = r.position;
    site.b_min = r.derivs.value;
    site.hessian = r.derivs.hessian;
    site.d_min = r.position.z();
    try {
      site.frequencies = trap_frequencies(site.hessian, atom);
    } catch (const NotAMinimumError&) {
      result.dropped.push_back({seeds[s], "stationary point is not a minimum"});
      continue;
    }
    candidates.push_back(site);
  }

  // Deduplicate: keep the smaller |B|, ties broken by lexicographic position.
  const auto lex = [](const Vec3& a, const Vec3& b) {
    return std::tie(a[0], a[1], a[2]) < std::tie(b[0], b[1], b[2]);
  };
  std::sort(candidates.begin(), candidates.end(), [&](const TrapSite& a, const TrapSite& b) {
    if (a.b_min != b.b_min) return a.b_min < b.b_min;
    return lex(a.position, b.position);
  });
  for (const auto& c : candidates) {
    const bool dup = std::any_of(result.sites.begin(), result.sites.end(), [&](const TrapSite& k) {
      return (k.position - c.position).norm() < 0.1 * alpha;
    });
    if (!dup) result.sites.push_back(c);
  }
  std::sort(result.sites.begin(), result.sites.end(), [](const TrapSite& a, const TrapSite& b) {
    return std::tie(a.position[2], a.position[1], a.position[0]) <
           std::tie(b.position[2], b.position[1], b.position[0]);
  });
  if (!result.sites.empty()) group_bands(result.sites, 0.25 * alpha);
  return result;
}

struct BarrierProfile {
  TrapSite endpoint_a;
  TrapSite endpoint_b;
  std::vector<double> arclength;  // m
  std::vector<double> bmag;       // T
  std::vector<Vec3> path;
  double delta_b = 0.0;
  Vec3 saddle_position = Vec3::Zero();
  bool straight_fallback = false;
  /// Barrier of the unrelaxed straight segment, for reference.
  double straight_delta_b = 0.0;
};

struct BarrierOptions {
  int samples = 512;
  int max_iterations = 60;
  double gradient_tol = 1e-9;
};

namespace detail {

// Minimizes |B| over the plane through `origin` spanned by e1, e2, starting
// from offset `start`. Every accepted step decreases |B|.
template <FieldSource F>
Eigen::Vector2d relax_in_plane(const F& field, const Vec3& origin, const Vec3& e1, const Vec3& e2,
                               Eigen::Vector2d start, const BarrierOptions& opt) {
  Eigen::Matrix<double, 3, 2> basis;
  basis << e1, e2;
  const double max_step = 0.25 * field.length_scale();
  Eigen::Vector2d q = start;
  auto eval = [&](const Eigen::Vector2d& off) {
    return magnitude_derivatives(field, Vec3(origin + basis * off));
  };
  MagnitudeDerivatives d = eval(q);
  for (int it = 0; it < opt.max_iterations; ++it) {
    const Eigen::Vector2d g = basis.transpose() * d.gradient;
    if (g.norm() < opt.gradient_tol) break;
    const Eigen::Matrix2d h = basis.transpose() * d.hessian * basis;
    Eigen::Vector2d step = saddle_free_step<2>(h, g);
    if (step.norm() > max_step) step *= max_step / step.norm();
    bool accepted = false;
    for (int ls = 0; ls < 40 && !accepted; ++ls, step *= 0.5) {
      try {
        const Eigen::Vector2d trial = q + step;
        if (field_magnitude(field.field(Vec3(origin + basis * trial))) < d.value) {
          d = eval(trial);
          q = trial;
          accepted = true;
        }
      } catch (const DomainError&) {
      }
    }
    if (!accepted) break;
  }
  return q;
}

inline void finish_profile(BarrierProfile& prof) {
  prof.arclength.assign(prof.path.size(), 0.0);
  for (std::size_t k = 1; k < prof.path.size(); ++k)
    prof.arclength[k] = prof.arclength[k - 1] + (prof.path[k] - prof.path[k - 1]).norm();
  const auto it = std::max_element(prof.bmag.begin(), prof.bmag.end());
  prof.saddle_position = prof.path[static_cast<std::size_t>(it - prof.bmag.begin())];
  const double ends = std::max(prof.bmag.front(), prof.bmag.back());
  prof.delta_b = std::max(0.0, *it - ends);
}

}  // namespace detail

/// Barrier along a low path between two sites: the straight segment with each
/// interior sample relaxed perpendicular to it.
template <FieldSource F>
BarrierProfile barrier_between(const TrapSite& a, const TrapSite& b, const F& field,
                               BarrierOptions opt = {}) {
  const Vec3 d = b.position - a.position;
  const double len = d.norm();
  if (!(len > 0.0)) throw ConfigError("barrier endpoints must be distinct sites");
  if (opt.samples < 3) throw ConfigError("barrier needs at least 3 samples");
  const Vec3 t = d / len;
  Vec3 e1 = t.cross(Vec3::UnitZ());
  if (e1.norm() < 1e-9) e1 = t.cross(Vec3::UnitX());
  e1.normalize();
  const Vec3 e2 = t.cross(e1).normalized();

  const auto n = static_cast<std::size_t>(opt.samples);
  BarrierProfile straight;
  straight.endpoint_a = a;
  straight.endpoint_b = b;
  straight.path.resize(n);
  straight.bmag.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double s = static_cast<double>(k) / static_cast<double>(n - 1);
    straight.path[k] = a.position + s * d;
    straight.bmag[k] = field_magnitude(field.field(straight.path[k]));
  }
  detail::finish_profile(straight);
  straight.straight_delta_b = straight.delta_b;

  BarrierProfile relaxed = straight;
  Eigen::Vector2d prev = Eigen::Vector2d::Zero();
  const double alpha = field.length_scale();
  bool diverged = false;
  for (std::size_t k = 1; k + 1 < n && !diverged; ++k) {
    const Vec3& origin = straight.path[k];
    // Continue from the previous offset only when it starts lower than the
    // segment point, so relaxation never raises a sample.
    Eigen::Vector2d start = Eigen::Vector2d::Zero();
    try {
      const double vprev = field_magnitude(field.field(Vec3(origin + prev[0] * e1 + prev[1] * e2)));
      if (vprev < straight.bmag[k]) start = prev;
    } catch (const DomainError&) {
    }
    Eigen::Vector2d q;
    try {
      q = detail::relax_in_plane(field, origin, e1, e2, start, opt);
    } catch (const DomainError&) {
      q = start;
    }
    if (q.norm() > alpha) {
      diverged = true;
      break;
    }
    relaxed.path[k] = origin + q[0] * e1 + q[1] * e2;
    relaxed.bmag[k] = std::min(straight.bmag[k], field_magnitude(field.field(relaxed.path[k])));
    if (relaxed.bmag[k] == straight.bmag[k]) relaxed.path[k] = origin;
    prev = (relaxed.path[k] - origin).dot(e1) * Eigen::Vector2d::UnitX() +
           (relaxed.path[k] - origin).dot(e2) * Eigen::Vector2d::UnitY();
  }
  if (diverged) {
    straight.straight_fallback = true;
    return straight;
  }
  detail::finish_profile(relaxed);
  relaxed.straight_delta_b = straight.delta_b;
  return relaxed;
}

enum class Axis { x = 0, y = 1 };

/// Selects an adjacent first-band pair: the site nearest `reference` in the
/// xy plane and its nearest neighbour displaced mainly along `axis`.
struct PairSelector {
  Eigen::Vector2d reference = Eigen::Vector2d::Zero();
  Axis axis = Axis::x;
};

inline std::optional<std::pair<std::size_t, std::size_t>> select_pair(
    const std::vector<TrapSite>& sites, const PairSelector& sel, double alpha) {
  std::optional<std::size_t> first;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (sites[i].band_index != 0) continue;
    const double r = (sites[i].position.head<2>() - sel.reference).norm();
    if (r < best) {
      best = r;
      first = i;
    }
  }
  if (!first) return std::nullopt;
  const int ax = static_cast<int>(sel.axis), other = 1 - ax;
  std::optional<std::size_t> second;
  best = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < sites.size(); ++j) {
    if (j == *first || sites[j].band_index != 0) continue;
    const Vec3 d = sites[j].position - sites[*first].position;
    const double r = d.head<2>().norm();
    if (std::abs(d[ax]) < 2.0 * std::abs(d[other]) || r < 0.1 * alpha || r > 3.0 * alpha) continue;
    if (r < best) {
      best = r;
      second = j;
    }
  }
  if (!second) return std::nullopt;
  return std::make_pair(*first, *second);
}

struct BiasScanRow {
  double bz_bias = 0.0;
  double b_min = std::numeric_limits<double>::quiet_NaN();
  double delta_b = 0.0;
  double d_min = std::numeric_limits<double>::quiet_NaN();
  double band_gap = std::numeric_limits<double>::quiet_NaN();  // T
  double band_gap_z = std::numeric_limits<double>::quiet_NaN();  // m
  bool merged = false;
};

struct ScanOptions {
  FieldModelKind model = FieldModelKind::magnetostatic;
  Box region;
  double kappa = 0.0;
  PairSelector selector{};
  MinimaOptions minima{};
  BarrierOptions barrier{};
};

/// Analysis of one bias setting: minima, selected-pair barrier and band gap.
inline BiasScanRow analyze_bias_point(const LatticeSpec& spec, const BiasField& bias,
                                      const AtomSpec& atom, const ScanOptions& opt) {
  LatticeSpec eff = spec;
  eff.m_z = std::max(0.0, spec.m_z - opt.kappa * std::abs(bias.bz) / PhysicalConstants::mu0);
  const AnyField field(opt.model, eff, bias);
  auto found = find_minima(field, opt.region, atom, opt.minima);
  BiasScanRow row;
  row.bz_bias = bias.bz;
  auto& sites = found.sites;
  if (!sites.empty()) {
    const auto bands = group_bands(sites, 0.25 * spec.alpha);
    if (bands.size() >= 2) {
      auto mean = [&](const std::vector<std::size_t>& idx, auto get) {
        double s = 0;
        for (auto i : idx) s += get(sites[i]);
        return s / static_cast<double>(idx.size());
      };
      const auto bmin = [](const TrapSite& t) { return t.b_min; };
      const auto zpos = [](const TrapSite& t) { return t.position.z(); };
      row.band_gap = mean(bands[1], bmin) - mean(bands[0], bmin);
      row.band_gap_z = mean(bands[1], zpos) - mean(bands[0], zpos);
    }
  }
  const auto pair = select_pair(sites, opt.selector, spec.alpha);
  if (!pair) {
    row.merged = true;
    row.delta_b = 0.0;
    // Report the surviving site nearest the reference, if any.
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : sites) {
      const double r = (s.position.head<2>() - opt.selector.reference).norm();
      if (s.band_index == 0 && r < best) {
        best = r;
        row.b_min = s.b_min;
        row.d_min = s.d_min;
      }
    }
    return row;
  }
  const TrapSite& a = sites[pair->first];
  const TrapSite& b = sites[pair->second];
  const auto prof = barrier_between(a, b, field, opt.barrier);
  row.b_min = a.b_min;
  row.d_min = a.d_min;
  row.delta_b = prof.delta_b;
  return row;
}

/// Barrier and trap parameters over a strictly monotone sequence of bz values.
/// m_z_eff = m_z - kappa |bz| / mu0; transverse bias components are kept.
inline std::vector<BiasScanRow> scan_bias(const LatticeSpec& spec, const BiasField& base_bias,
                                          const AtomSpec& atom, const std::vector<double>& bz_values,
                                          const ScanOptions& opt) {
  if (bz_values.size() >= 2) {
    const bool inc = bz_values[1] > bz_values[0];
    for (std::size_t i = 1; i < bz_values.size(); ++i) {
      const bool ok = inc ? bz_values[i] > bz_values[i - 1] : bz_values[i] < bz_values[i - 1];
      if (!ok) throw ConfigError("bz scan values must be strictly monotone");
    }
  }
  std::vector<BiasScanRow> rows;
  rows.reserve(bz_values.size());
  for (double bz : bz_values) {
    BiasField b = base_bias;
    b.bz = bz;
    rows.push_back(analyze_bias_point(spec, b, atom, opt));
  }
  return rows;
}

}  // namespace maglat
