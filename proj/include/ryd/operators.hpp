// Rydberg Hamiltonian on the Ruby lattice and its triangle-level pieces.
//
//   H = (Omega/2) sum_i (e^{-i alpha} b_i + h.c.) - sum_i Delta_i n_i
//       + sum_{i<j, r_ij <= R_trunc} V(r_ij) n_i n_j,    V(r) = Omega (R_b/r)^6
//
// b_i is taken as the raising operator |r_i><g_i|, so that the ground-state
// row of a triangle block reads <g|H|r_k> = (Omega/2) e^{i alpha}.  With
// alpha = -pi/2 this is the generator (i Omega/2) sum (b - b^dag) used for the
// Z -> X duality.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "ryd/basis.hpp"
#include "ryd/geometry.hpp"
#include "ryd/sparse.hpp"

namespace ryd {

struct ModelParams {
  double rabi = 1.0;       // Omega; energies are measured in units of Omega
  double detuning = 3.5;   // Delta (global)
  double phase = 0.0;      // alpha
  double blockade_radius = 2.4;           // R_b / a
  double trunc_radius = 2.6457513110645906;  // R_trunc / a = sqrt(7)

  void validate() const {
    require(rabi > 0, "model: rabi must be positive");
    require(blockade_radius > 0, "model: blockade_radius must be positive");
    require(trunc_radius > 0, "model: trunc_radius must be positive");
  }

  double potential(double r) const { return rabi * std::pow(blockade_radius / r, 6); }

  // Parameters of the duality-evolution generator: Delta = 0, alpha = -pi/2,
  // R_b = 1.53a, R_trunc = a.
  static ModelParams evolution(double rabi = 1.0, double rb = 1.53, double rt = 1.0) {
    ModelParams p;
    p.rabi = rabi;
    p.detuning = 0.0;
    p.phase = -kPi / 2;
    p.blockade_radius = rb;
    p.trunc_radius = rt;
    return p;
  }
};

// Duality time tau* = 4 pi / (3 sqrt(3) Omega).
inline double duality_time(double rabi = 1.0) { return 4.0 * kPi / (3.0 * kSqrt3 * rabi); }

// 4x4 block in the basis {g, r1, r2, r3}.
inline Eigen::Matrix4cd triangle_block(const ModelParams& p) {
  const cplx w = 0.5 * p.rabi * std::polar(1.0, p.phase);
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  for (int k = 1; k < 4; ++k) {
    m(0, k) = w;
    m(k, 0) = std::conj(w);
  }
  return m;
}

namespace detail {

struct PairTerm {
  int i, j;
  double v;
};

inline std::vector<PairTerm> interaction_terms(const Lattice& lat, const ModelParams& p) {
  std::vector<PairTerm> out;
  for (const auto& nb : lat.pairs_within(p.trunc_radius)) out.push_back({nb.i, nb.j, p.potential(nb.r)});
  return out;
}

}  // namespace detail

inline SparseOperator build_hamiltonian(const Lattice& lat, const ModelParams& p, const OccupationBasis& basis) {
  p.validate();
  require(basis.matches(lat), "hamiltonian: basis does not enumerate this lattice");
  const auto pairs = detail::interaction_terms(lat, p);
  const int n = lat.num_sites();
  std::vector<double> delta(n);
  for (int i = 0; i < n; ++i) delta[i] = p.detuning * lat.sites[i].detuning_scale;
  const cplx up = 0.5 * p.rabi * std::polar(1.0, -p.phase);  // <r|H|g>
  const cplx down = std::conj(up);                           // <g|H|r>
  const bool restricted = basis.mode() == BasisMode::triangle_restricted;

  auto fill = [&](std::uint64_t k, std::vector<std::pair<std::uint64_t, cplx>>& out) {
    const std::uint64_t mask = basis.config(k);
    double diag = 0;
    for (int i = 0; i < n; ++i)
      if ((mask >> i) & 1u) diag -= delta[i];
    for (const auto& t : pairs)
      if (((mask >> t.i) & 1u) && ((mask >> t.j) & 1u)) diag += t.v;
    if (diag != 0.0) out.push_back({k, cplx(diag, 0)});
    if (p.rabi == 0.0) return;
    if (!restricted) {
      for (int i = 0; i < n; ++i) {
        std::uint64_t other = k ^ (std::uint64_t{1} << i);
        out.push_back({other, ((mask >> i) & 1u) ? up : down});
      }
      return;
    }
    for (int t = 0; t < basis.num_triangles(); ++t) {
      const unsigned d = basis.digit(k, t);
      const std::uint64_t base = k & ~(std::uint64_t{3} << (2 * t));
      if (d == 0) {
        for (std::uint64_t e = 1; e < 4; ++e) out.push_back({base | (e << (2 * t)), down});
      } else {
        out.push_back({base, up});
      }
    }
  };
  return SparseOperator::from_rows(basis.dim(), fill, true);
}

// H' with Delta = 0 and alpha = -pi/2.  Radii come from p (use
// ModelParams::evolution() for the standard 1.53a / a set).
inline SparseOperator build_dual_generator(const Lattice& lat, const ModelParams& p, const OccupationBasis& basis) {
  ModelParams q = p;
  q.detuning = 0.0;
  q.phase = -kPi / 2;
  return build_hamiltonian(lat, q, basis);
}

// True when every interacting pair at radius <= trunc lies inside one triangle.
inline bool couplings_are_intra_triangle(const Lattice& lat, double trunc_radius) {
  for (const auto& nb : lat.pairs_within(trunc_radius))
    if (lat.sites[nb.i].triangle != lat.sites[nb.j].triangle) return false;
  return true;
}

// Local generator of one triangle: 4x4 in the restricted basis or 8x8 over
// the triangle's three bits (bit k = site k of the triangle) in full mode.
inline Eigen::MatrixXcd local_triangle_generator(const Lattice& lat, int t, const ModelParams& p, BasisMode mode) {
  const auto& tr = lat.triangles[t];
  const cplx up = 0.5 * p.rabi * std::polar(1.0, -p.phase);
  if (mode == BasisMode::triangle_restricted) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
    for (int k = 1; k < 4; ++k) {
      m(k, 0) = up;
      m(0, k) = std::conj(up);
      m(k, k) = -p.detuning * lat.sites[tr[k - 1]].detuning_scale;
    }
    return m;
  }
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(8, 8);
  for (int s = 0; s < 8; ++s) {
    double diag = 0;
    for (int k = 0; k < 3; ++k)
      if ((s >> k) & 1) diag -= p.detuning * lat.sites[tr[k]].detuning_scale;
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b)
        if (((s >> a) & 1) && ((s >> b) & 1)) {
          double r = lat.distance(tr[a], tr[b]) / lat.spec.spacing;
          if (r <= p.trunc_radius + 1e-9) diag += p.potential(r);
        }
    m(s, s) = diag;
    for (int k = 0; k < 3; ++k) {
      int o = s ^ (1 << k);
      m(o, s) = ((s >> k) & 1) ? std::conj(up) : up;
    }
  }
  return m;
}

}  // namespace ryd
