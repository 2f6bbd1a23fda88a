#pragma once

// Gaussian continuous-variable dynamics of a tunnel-coupled oscillator chain.
//
// Quadratures are ordered (x1, p1, ..., xN, pN) with hbar = 1; the vacuum has
// covariance I/2. The Hamiltonian H = sum w_i a_i^+ a_i + sum J_ij (a_i^+ a_j
// + h.c.) is, up to a constant, (1/2) sum M_ij (x_i x_j + p_i p_j) with
// M = diag(w) + J, so x' = M p, p' = -M x and S(t) follows from the
// eigendecomposition of M.

#include <algorithm>
#include <cmath>
#include <complex>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "maglat/errors.hpp"
#include "maglat/numerics.hpp"
#include "maglat/trap_analysis.hpp"

namespace maglat {

using Edge = std::pair<std::size_t, std::size_t>;

struct ChainSpec {
  std::size_t n_modes = 0;
  Eigen::VectorXd frequencies;  // rad/s
  Eigen::MatrixXd couplings;    // rad/s, symmetric, zero diagonal
  /// Adjacency of the chain, independent of coupling strength.
  std::vector<Edge> edges;

  Eigen::MatrixXd mode_matrix() const {
    Eigen::MatrixXd m = couplings;
    m.diagonal() += frequencies;
    return m;
  }
};

/// Checks shape, symmetry and dynamic stability (M positive definite).
/// Instability names the pair whose 2x2 block fails, or the largest coupling.
inline ChainSpec validate_chain(ChainSpec c) {
  const auto n = static_cast<Eigen::Index>(c.n_modes);
  if (c.n_modes < 2) throw ConfigError("chain needs at least 2 modes");
  if (c.frequencies.size() != n || c.couplings.rows() != n || c.couplings.cols() != n)
    throw ConfigError("chain frequencies/couplings do not match n_modes");
  if (!c.frequencies.allFinite() || !c.couplings.allFinite())
    throw ConfigError("chain parameters must be finite");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (c.couplings(i, i) != 0.0) throw ConfigError("coupling diagonal must be zero");
    for (Eigen::Index j = 0; j < i; ++j)
      if (c.couplings(i, j) != c.couplings(j, i)) throw ConfigError("couplings must be symmetric");
  }
  for (const auto& [a, b] : c.edges)
    if (a >= c.n_modes || b >= c.n_modes || a == b) throw ConfigError("invalid chain edge");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.mode_matrix(), Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() > 0.0) return c;

  for (Eigen::Index i = 0; i < n; ++i)
    if (!(c.frequencies[i] > 0.0))
      throw StabilityError("unstable chain: mode " + std::to_string(i) + " has non-positive frequency");
  Eigen::Index bi = 0, bj = 1;
  double worst = -1.0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double ratio = std::abs(c.couplings(i, j)) / std::sqrt(c.frequencies[i] * c.frequencies[j]);
      if (ratio > worst) {
        worst = ratio;
        bi = i;
        bj = j;
      }
    }
  throw StabilityError("unstable chain: coupling between modes " + std::to_string(bi) + " and " +
                       std::to_string(bj) + " is too large for the mode frequencies");
}

inline ChainSpec make_chain(const Eigen::VectorXd& frequencies, const Eigen::MatrixXd& couplings,
                            std::vector<Edge> edges) {
  ChainSpec c;
  c.n_modes = static_cast<std::size_t>(frequencies.size());
  c.frequencies = frequencies;
  c.couplings = couplings;
  c.edges = std::move(edges);
  return validate_chain(std::move(c));
}

/// Mean of the two trap frequencies whose axes are closest to the film plane.
inline double transverse_frequency(const TrapSite& site, const AtomSpec& atom) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(site.hessian);
  if (!(es.eigenvalues().minCoeff() > 0.0)) throw NotAMinimumError("site Hessian is not positive definite");
  int order[3] = {0, 1, 2};
  std::sort(order, order + 3, [&](int a, int b) {
    return std::abs(es.eigenvectors()(2, a)) < std::abs(es.eigenvectors()(2, b));
  });
  double w = 0.0;
  for (int k = 0; k < 2; ++k)
    w += std::sqrt(atom.zeeman_factor() * es.eigenvalues()[order[k]] / atom.mass);
  return 0.5 * w;
}

namespace detail {

inline std::vector<std::vector<std::size_t>> adjacency(std::size_t n, const std::vector<Edge>& edges) {
  std::vector<std::vector<std::size_t>> adj(n);
  for (const auto& [a, b] : edges) {
    adj[a].push_back(b);
    adj[b].push_back(a);
  }
  return adj;
}

}  // namespace detail

/// BFS hop distance from `from` to every mode (-1 when unreachable).
inline std::vector<int> graph_distances(const ChainSpec& c, std::size_t from) {
  const auto adj = detail::adjacency(c.n_modes, c.edges);
  std::vector<int> dist(c.n_modes, -1);
  std::deque<std::size_t> queue{from};
  dist[from] = 0;
  while (!queue.empty()) {
    const auto u = queue.front();
    queue.pop_front();
    for (auto v : adj[u])
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
  }
  return dist;
}

/// Chain from trap sites; splittings hold J_hop (J) per adjacent pair.
inline ChainSpec chain_from_lattice(const std::vector<TrapSite>& sites,
                                    const std::map<Edge, double>& splittings, const AtomSpec& atom) {
  const auto n = static_cast<Eigen::Index>(sites.size());
  Eigen::VectorXd w(n);
  for (Eigen::Index i = 0; i < n; ++i) w[i] = transverse_frequency(sites[static_cast<std::size_t>(i)], atom);
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
  std::vector<Edge> edges;
  for (const auto& [pair, jhop] : splittings) {
    const auto [a, b] = pair;
    if (a >= sites.size() || b >= sites.size() || a == b) throw ConfigError("invalid site pair in splittings");
    j(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = jhop / PhysicalConstants::hbar;
    j(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = jhop / PhysicalConstants::hbar;
    edges.emplace_back(std::min(a, b), std::max(a, b));
  }
  ChainSpec c = make_chain(w, j, edges);
  if (!edges.empty()) {
    const auto d = graph_distances(c, 0);
    if (std::any_of(d.begin(), d.end(), [](int v) { return v < 0; }))
      throw ConfigError("site pairs do not form a connected graph");
  }
  return c;
}

/// Row-major rows x cols grid with uniform frequency and nearest-neighbour hopping.
inline ChainSpec grid_chain(std::size_t rows, std::size_t cols, double omega, double hop) {
  const std::size_t n = rows * cols;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::vector<Edge> edges;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const std::size_t i = r * cols + c;
      if (c + 1 < cols) edges.emplace_back(i, i + 1);
      if (r + 1 < rows) edges.emplace_back(i, i + cols);
    }
  for (const auto& [a, b] : edges) {
    j(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = hop;
    j(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(a)) = hop;
  }
  return make_chain(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), omega), j, edges);
}

struct GaussianState {
  Eigen::VectorXd mean;
  Eigen::MatrixXd covariance;

  std::size_t n_modes() const { return static_cast<std::size_t>(mean.size() / 2); }
};

inline Eigen::MatrixXd symplectic_form(std::size_t n) {
  Eigen::MatrixXd om = Eigen::MatrixXd::Zero(2 * static_cast<Eigen::Index>(n), 2 * static_cast<Eigen::Index>(n));
  for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(n); ++k) {
    om(2 * k, 2 * k + 1) = 1.0;
    om(2 * k + 1, 2 * k) = -1.0;
  }
  return om;
}

inline GaussianState init_vacuum(std::size_t n) {
  if (n < 1) throw ConfigError("vacuum needs at least one mode");
  const auto d = 2 * static_cast<Eigen::Index>(n);
  return {Eigen::VectorXd::Zero(d), 0.5 * Eigen::MatrixXd::Identity(d, d)};
}

struct BellPair {
  std::size_t i = 0;
  std::size_t j = 0;
  double r = 1.0;
};

/// Two-mode squeezing symplectic on modes (i, j).
inline Eigen::MatrixXd two_mode_squeezer(std::size_t n, std::size_t i, std::size_t j, double r) {
  const auto d = 2 * static_cast<Eigen::Index>(n);
  Eigen::MatrixXd s = Eigen::MatrixXd::Identity(d, d);
  const double ch = std::cosh(r), sh = std::sinh(r);
  const auto a = 2 * static_cast<Eigen::Index>(i), b = 2 * static_cast<Eigen::Index>(j);
  s(a, a) = s(a + 1, a + 1) = s(b, b) = s(b + 1, b + 1) = ch;
  s(a, b) = s(b, a) = sh;
  s(a + 1, b + 1) = s(b + 1, a + 1) = -sh;
  return s;
}

inline GaussianState apply_symplectic(const GaussianState& st, const Eigen::MatrixXd& s) {
  GaussianState out{s * st.mean, s * st.covariance * s.transpose()};
  out.covariance = (0.5 * (out.covariance + out.covariance.transpose())).eval();
  return out;
}

inline GaussianState init_bell_pairs(const GaussianState& state, const std::vector<BellPair>& pairs) {
  const std::size_t n = state.n_modes();
  std::set<std::size_t> used;
  for (const auto& p : pairs) {
    if (p.i >= n || p.j >= n) throw ConfigError("Bell pair index out of range");
    if (p.i == p.j || !used.insert(p.i).second || !used.insert(p.j).second)
      throw ConfigError("Bell pair indices overlap");
    if (!(p.r >= 0.0) || !std::isfinite(p.r)) throw ConfigError("squeezing r must be >= 0");
  }
  GaussianState out = state;
  for (const auto& p : pairs)
    if (p.r != 0.0) out = apply_symplectic(out, two_mode_squeezer(n, p.i, p.j, p.r));
  return out;
}

/// Symplectic propagator S(t) by normal-mode decomposition.
inline Eigen::MatrixXd propagator(const ChainSpec& chain, double t) {
  const auto n = static_cast<Eigen::Index>(chain.n_modes);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(chain.mode_matrix());
  if (!(es.eigenvalues().minCoeff() > 0.0)) throw StabilityError("unstable chain");
  const Eigen::MatrixXd& v = es.eigenvectors();
  const Eigen::ArrayXd wt = es.eigenvalues().array() * t;
  const Eigen::MatrixXd c = v * wt.cos().matrix().asDiagonal() * v.transpose();
  const Eigen::MatrixXd sn = v * wt.sin().matrix().asDiagonal() * v.transpose();
  Eigen::MatrixXd s(2 * n, 2 * n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      s(2 * i, 2 * j) = c(i, j);
      s(2 * i, 2 * j + 1) = sn(i, j);
      s(2 * i + 1, 2 * j) = -sn(i, j);
      s(2 * i + 1, 2 * j + 1) = c(i, j);
    }
  return s;
}

inline GaussianState evolve(const GaussianState& state, const ChainSpec& chain, double t) {
  if (state.n_modes() != chain.n_modes) throw ConfigError("state and chain mode counts differ");
  if (t == 0.0) return state;
  return apply_symplectic(state, propagator(chain, t));
}

/// Symplectic eigenvalues of a covariance, ascending.
inline Eigen::VectorXd symplectic_eigenvalues(const Eigen::MatrixXd& cov) {
  const auto n = cov.rows() / 2;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (!(es.eigenvalues().minCoeff() > 0.0)) throw DomainError("covariance is not positive definite");
  const Eigen::MatrixXd root = es.operatorSqrt();
  const Eigen::MatrixXd a = root * symplectic_form(static_cast<std::size_t>(n)) * root;
  const Eigen::MatrixXcd herm = std::complex<double>(0.0, 1.0) * a.cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> hs(herm, Eigen::EigenvaluesOnly);
  return hs.eigenvalues().tail(n);
}

/// Partial transpose: momentum sign flip on the listed modes.
inline Eigen::MatrixXd partial_transpose(const Eigen::MatrixXd& cov, const std::vector<std::size_t>& modes) {
  Eigen::MatrixXd out = cov;
  for (auto m : modes) {
    const auto p = 2 * static_cast<Eigen::Index>(m) + 1;
    out.row(p) *= -1.0;
    out.col(p) *= -1.0;
  }
  return out;
}

struct EntanglementReport {
  std::vector<std::size_t> partition;
  double log_negativity = 0.0;
  double smallest_pt_symplectic_eigenvalue = 0.0;
};

/// E_N = sum over partially transposed symplectic eigenvalues below 1/2 of -log2(2 nu).
inline EntanglementReport log_negativity(const GaussianState& state, std::vector<std::size_t> partition) {
  const std::size_t n = state.n_modes();
  std::sort(partition.begin(), partition.end());
  if (partition.empty() || partition.size() >= n) throw ConfigError("partition must be proper and non-empty");
  if (std::adjacent_find(partition.begin(), partition.end()) != partition.end() || partition.back() >= n)
    throw ConfigError("partition has duplicate or out-of-range modes");
  const Eigen::VectorXd nu = symplectic_eigenvalues(partial_transpose(state.covariance, partition));
  EntanglementReport rep;
  rep.partition = partition;
  rep.smallest_pt_symplectic_eigenvalue = nu.minCoeff();
  for (Eigen::Index k = 0; k < nu.size(); ++k)
    if (nu[k] < 0.5) rep.log_negativity -= std::log2(2.0 * nu[k]);
  return rep;
}

/// Reduced state of the listed modes, in the given order.
inline GaussianState reduce(const GaussianState& st, const std::vector<std::size_t>& modes) {
  const auto k = static_cast<Eigen::Index>(modes.size());
  GaussianState out{Eigen::VectorXd(2 * k), Eigen::MatrixXd(2 * k, 2 * k)};
  for (Eigen::Index a = 0; a < 2 * k; ++a) {
    const auto ia = 2 * static_cast<Eigen::Index>(modes[static_cast<std::size_t>(a / 2)]) + a % 2;
    out.mean[a] = st.mean[ia];
    for (Eigen::Index b = 0; b < 2 * k; ++b) {
      const auto ib = 2 * static_cast<Eigen::Index>(modes[static_cast<std::size_t>(b / 2)]) + b % 2;
      out.covariance(a, b) = st.covariance(ia, ib);
    }
  }
  return out;
}

/// E_N between modes a and b of their two-mode reduced state.
inline double pairwise_log_negativity(const GaussianState& st, std::size_t a, std::size_t b) {
  return log_negativity(reduce(st, {a, b}), {0}).log_negativity;
}

struct ProfileRow {
  double t = 0.0;
  std::size_t site = 0;
  int graph_distance = -1;
  double log_negativity = 0.0;
};

/// Rows ordered by time, then site; the reference site itself is skipped.
inline std::vector<ProfileRow> entanglement_profile(const ChainSpec& chain, const std::vector<BellPair>& seeds,
                                                    const std::vector<double>& times, std::size_t reference,
                                                    int threads = 1) {
  if (reference >= chain.n_modes) throw ConfigError("reference site out of range");
  for (double t : times)
    if (!std::isfinite(t)) throw ConfigError("times must be finite");
  const GaussianState init = init_bell_pairs(init_vacuum(chain.n_modes), seeds);
  const auto dist = graph_distances(chain, reference);
  const std::size_t per = chain.n_modes - 1;
  std::vector<ProfileRow> rows(times.size() * per);
  parallel_for(times.size(), threads, [&](std::size_t ti) {
    const GaussianState st = evolve(init, chain, times[ti]);
    std::size_t k = 0;
    for (std::size_t s = 0; s < chain.n_modes; ++s) {
      if (s == reference) continue;
      rows[ti * per + k++] = {times[ti], s, dist[s], pairwise_log_negativity(st, reference, s)};
    }
  });
  return rows;
}

}  // namespace maglat
