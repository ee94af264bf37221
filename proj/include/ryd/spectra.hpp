// Low-lying eigenpairs (Lanczos) and real-time evolution (Krylov, or exact
// per-triangle factorisation for the duality generator).
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "ryd/basis.hpp"
#include "ryd/operators.hpp"
#include "ryd/sparse.hpp"

namespace ryd {

using StateVector = Eigen::VectorXcd;

struct EigenResult {
  std::vector<double> values;  // ascending
  std::vector<StateVector> vectors;
  std::vector<double> residuals;  // ||H v - lambda v||
  std::vector<std::vector<int>> manifolds;  // groups of near-degenerate levels
  int iterations = 0;  // total matrix-vector products
  int rounds = 0;
  bool converged = true;
};

struct LanczosOptions {
  int max_krylov = 600;
  int max_restarts = 8;
  int max_rounds = 16;
  double degeneracy_tol = 1e-6;  // levels closer than this share a manifold
  int check_every = 10;
};

namespace detail {

template <class Scalar>
using DVec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
DVec<Scalar> random_vector(std::uint64_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  DVec<Scalar> v(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    if constexpr (std::is_same_v<Scalar, double>)
      v[i] = g(rng);
    else
      v[i] = Scalar(g(rng), g(rng));
  }
  return v;
}

template <class Scalar>
void orthogonalize(DVec<Scalar>& w, const std::vector<DVec<Scalar>>& basis) {
  for (int pass = 0; pass < 2; ++pass)
    for (const auto& b : basis) w -= b * b.dot(w);
}

// Both passes run over the union: projecting the locked vectors out only
// once lets round-off from the Krylov pass reintroduce them, and a small
// beta then amplifies that into a ghost copy of a converged eigenvector.
template <class Scalar>
void orthogonalize(DVec<Scalar>& w, const std::vector<DVec<Scalar>>& first, const std::vector<DVec<Scalar>>& second) {
  for (int pass = 0; pass < 2; ++pass) {
    for (const auto& b : first) w -= b * b.dot(w);
    for (const auto& b : second) w -= b * b.dot(w);
  }
}

struct RitzPair {
  double value;
  double estimate;
  Eigen::VectorXd coeffs;
};

// One deflated Lanczos run from `start`; returns the Krylov basis and the
// Ritz data of its tridiagonal matrix.
template <class Scalar>
void lanczos_run(const SparseOperator& H, DVec<Scalar> start, const std::vector<DVec<Scalar>>& locked,
                 int want, double tol, const LanczosOptions& opt, std::vector<DVec<Scalar>>& V,
                 std::vector<RitzPair>& ritz, int& matvecs) {
  const std::uint64_t n = H.dim();
  const int mmax = static_cast<int>(std::min<std::uint64_t>(opt.max_krylov, n - locked.size()));
  V.clear();
  ritz.clear();
  orthogonalize(start, locked);
  double nrm = start.norm();
  if (nrm < 1e-12) return;
  V.push_back(start / nrm);
  std::vector<double> alpha, beta;
  DVec<Scalar> w(n);
  for (int j = 0; j < mmax; ++j) {
    H.apply(V[j].data(), w.data());
    ++matvecs;
    alpha.push_back(std::real(V[j].dot(w)));
    orthogonalize(w, locked, V);
    double b = w.norm();
    const int m = j + 1;
    bool invariant = b < 1e-10 * std::max(1.0, std::abs(alpha.back()));
    if (invariant || m == mmax || m % opt.check_every == 0) {
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      ritz.clear();
      bool done = true;
      for (int i = 0; i < m; ++i) {
        double est = invariant ? 0.0 : b * std::abs(es.eigenvectors()(m - 1, i));
        ritz.push_back({es.eigenvalues()[i], est, es.eigenvectors().col(i)});
        if (i < want && est > 0.1 * tol) done = false;
      }
      if (invariant || done || m == mmax) return;
    }
    beta.push_back(b);
    V.push_back(w / b);
  }
}

template <class Scalar>
EigenResult ground_states_impl(const SparseOperator& H, int k, double tol, std::uint64_t seed,
                               const LanczosOptions& opt) {
  const std::uint64_t n = H.dim();
  std::mt19937_64 rng(seed);
  std::vector<DVec<Scalar>> locked;
  std::vector<double> locked_vals;
  EigenResult res;
  bool confirmed = false;

  for (int round = 0; round < opt.max_rounds && locked.size() < n; ++round) {
    ++res.rounds;
    DVec<Scalar> start = random_vector<Scalar>(n, rng);
    std::vector<DVec<Scalar>> fresh;
    std::vector<double> fresh_vals;
    for (int restart = 0; restart <= opt.max_restarts; ++restart) {
      std::vector<DVec<Scalar>> V;
      std::vector<RitzPair> ritz;
      std::vector<DVec<Scalar>> deflate = locked;
      deflate.insert(deflate.end(), fresh.begin(), fresh.end());
      const int want = std::max(1, k - static_cast<int>(fresh.size()));
      lanczos_run<Scalar>(H, start, deflate, want, tol, opt, V, ritz, res.iterations);
      if (V.empty()) break;
      DVec<Scalar> next = DVec<Scalar>::Zero(n);
      bool any_unconverged = false;
      for (int i = 0; i < std::min<int>(want, ritz.size()); ++i) {
        DVec<Scalar> y = DVec<Scalar>::Zero(n);
        for (std::size_t c = 0; c < V.size() && c < static_cast<std::size_t>(ritz[i].coeffs.size()); ++c)
          y += V[c] * ritz[i].coeffs[c];
        y.normalize();
        if (ritz[i].estimate <= 0.1 * tol) {
          fresh.push_back(y);
          fresh_vals.push_back(ritz[i].value);
        } else {
          next += y;
          any_unconverged = true;
        }
      }
      if (!any_unconverged) break;
      start = next;
    }

    // Nothing below the current k-th level means the low manifold is complete.
    const double cutoff = locked_vals.size() >= static_cast<std::size_t>(k) ? locked_vals[k - 1] : 1e300;
    bool improved = false;
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      if (fresh_vals[i] < cutoff - std::max(tol, 1e-12)) improved = true;
      locked.push_back(fresh[i]);
      locked_vals.push_back(fresh_vals[i]);
    }
    // Keep locked sorted.
    std::vector<int> ord(locked.size());
    for (std::size_t i = 0; i < ord.size(); ++i) ord[i] = static_cast<int>(i);
    std::sort(ord.begin(), ord.end(), [&](int a, int b) { return locked_vals[a] < locked_vals[b]; });
    std::vector<DVec<Scalar>> L2;
    std::vector<double> v2;
    for (int i : ord) {
      L2.push_back(locked[i]);
      v2.push_back(locked_vals[i]);
    }
    locked.swap(L2);
    locked_vals.swap(v2);
    if (locked.size() >= static_cast<std::size_t>(k) && !improved && round > 0) {
      confirmed = true;
      break;
    }
    if (fresh.empty() && locked.size() >= static_cast<std::size_t>(k)) {
      confirmed = true;
      break;
    }
    if (locked.size() >= n) {
      confirmed = true;
      break;
    }
  }

  const int out = std::min<int>(k, locked.size());
  res.converged = confirmed && out == k;
  DVec<Scalar> hv(n);
  for (int i = 0; i < out; ++i) {
    H.apply(locked[i].data(), hv.data());
    double lam = std::real(locked[i].dot(hv));
    double r = (hv - lam * locked[i]).norm();
    res.values.push_back(lam);
    res.residuals.push_back(r);
    if (r > tol) res.converged = false;
    StateVector sv(n);
    for (std::uint64_t q = 0; q < n; ++q) sv[q] = cplx(locked[i][q]);
    res.vectors.push_back(std::move(sv));
  }
  for (int i = 0; i < out; ++i) {
    if (i == 0 || res.values[i] - res.values[i - 1] > opt.degeneracy_tol)
      res.manifolds.push_back({i});
    else
      res.manifolds.back().push_back(i);
  }
  return res;
}

}  // namespace detail

// k lowest eigenpairs by Lanczos with full reorthogonalisation.  Each round
// starts from a fresh seeded random vector deflated against the pairs already
// found, which is what picks up additional members of degenerate manifolds.
// The iteration stops after a round finds nothing below the k-th level.
inline EigenResult ground_states(const SparseOperator& H, int k, double tol = 1e-9, std::uint64_t seed = 1,
                                 const LanczosOptions& opt = {}) {
  require(k >= 1, "ground_states: k must be >= 1");
  require(static_cast<std::uint64_t>(k) <= H.dim(), "ground_states: k exceeds dimension");
  require(H.hermitian_flag(), "ground_states: operator is not flagged Hermitian");
  if (H.is_real()) return detail::ground_states_impl<double>(H, k, tol, seed, opt);
  return detail::ground_states_impl<cplx>(H, k, tol, seed, opt);
}

// ---------------------------------------------------------------------------
// Time evolution

struct EvolveOptions {
  int krylov_dim = 30;
  double tol = 1e-12;  // target error for the whole interval
};

// psi(tau) = exp(-i tau H) psi via Lanczos-Krylov steps with adaptive length.
inline StateVector evolve(const StateVector& psi, const SparseOperator& H, double tau, const EvolveOptions& opt = {}) {
  require(static_cast<std::uint64_t>(psi.size()) == H.dim(), "evolve: state/operator dimension mismatch");
  require(H.hermitian_flag(), "evolve: generator is not flagged Hermitian");
  StateVector v = psi;
  if (tau == 0.0) return v;
  const double sign = tau > 0 ? 1.0 : -1.0;
  const double total = std::abs(tau);
  double done = 0, dt = total;
  const std::uint64_t n = H.dim();
  while (done < total * (1 - 1e-15)) {
    const double nrm = v.norm();
    if (nrm == 0) return v;
    std::vector<StateVector> V{v / nrm};
    std::vector<double> alpha, beta;
    StateVector w(n);
    bool happy = false;
    const int mmax = static_cast<int>(std::min<std::uint64_t>(opt.krylov_dim, n));
    double last_beta = 0;
    for (int j = 0; j < mmax; ++j) {
      H.apply(V[j].data(), w.data());
      alpha.push_back(std::real(V[j].dot(w)));
      for (int pass = 0; pass < 2; ++pass)
        for (auto& b : V) w -= b * b.dot(w);
      double b = w.norm();
      if (b < 1e-13) {
        happy = true;
        break;
      }
      if (j + 1 == mmax) {
        last_beta = b;
        break;
      }
      beta.push_back(b);
      V.push_back(w / b);
    }
    const int m = static_cast<int>(alpha.size());
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) {
      T(i, i) = alpha[i];
      if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    dt = std::min(dt, total - done);
    Eigen::VectorXcd y;
    for (;;) {
      Eigen::VectorXcd ph(m);
      for (int i = 0; i < m; ++i) ph[i] = std::polar(1.0, -sign * dt * es.eigenvalues()[i]) * es.eigenvectors()(0, i);
      y = es.eigenvectors().cast<cplx>() * ph;
      double err = happy ? 0.0 : last_beta * std::abs(y[m - 1]) * dt;
      if (err <= opt.tol * dt / total || happy) break;
      dt *= 0.5;
      if (dt < total * 1e-12)
        throw NumericalError("evolve: step size collapsed (error estimate " + std::to_string(err) + ")");
    }
    StateVector nv = StateVector::Zero(n);
    for (int i = 0; i < m; ++i) nv += V[i] * y[i];
    v = nrm * nv;
    done += dt;
    if (happy) dt = total - done;
    else dt = std::min(2 * dt, total - done);
  }
  return v;
}

// Exact e^{-i tau H'_T} applied triangle by triangle.  Refuses when the
// generator couples different triangles.
inline StateVector evolve_factorized(const StateVector& psi, const Lattice& lat, const OccupationBasis& basis,
                                     const ModelParams& params, double tau) {
  require(basis.matches(lat), "evolve_factorized: basis does not enumerate this lattice");
  require(static_cast<std::uint64_t>(psi.size()) == basis.dim(), "evolve_factorized: dimension mismatch");
  require(couplings_are_intra_triangle(lat, params.trunc_radius),
          "evolve_factorized: generator couples different triangles; use evolve()");
  ModelParams q = params;
  q.detuning = 0.0;
  q.phase = -kPi / 2;
  StateVector v = psi;
  const std::uint64_t dim = basis.dim();
  for (int t = 0; t < lat.num_triangles(); ++t) {
    Eigen::MatrixXcd h = local_triangle_generator(lat, t, q, basis.mode());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(h);
    Eigen::VectorXcd ph(h.rows());
    for (int i = 0; i < h.rows(); ++i) ph[i] = std::polar(1.0, -tau * es.eigenvalues()[i]);
    Eigen::MatrixXcd U = es.eigenvectors() * ph.asDiagonal() * es.eigenvectors().adjoint();
    const int L = static_cast<int>(h.rows());
    std::vector<std::uint64_t> offs(L);
    std::uint64_t tmask = 0;
    if (basis.mode() == BasisMode::triangle_restricted) {
      for (int e = 0; e < 4; ++e) offs[e] = std::uint64_t(e) << (2 * t);
      tmask = std::uint64_t{3} << (2 * t);
    } else {
      const auto& tr = lat.triangles[t];
      for (int s = 0; s < 8; ++s) {
        std::uint64_t o = 0;
        for (int k = 0; k < 3; ++k)
          if ((s >> k) & 1) o |= std::uint64_t{1} << tr[k];
        offs[s] = o;
      }
      tmask = offs[7];
    }
#pragma omp parallel for schedule(static)
    for (std::int64_t b = 0; b < static_cast<std::int64_t>(dim); ++b) {
      if (static_cast<std::uint64_t>(b) & tmask) continue;
      cplx in[8], out[8];
      for (int e = 0; e < L; ++e) in[e] = v[b | offs[e]];
      for (int r = 0; r < L; ++r) {
        cplx acc = 0;
        for (int c = 0; c < L; ++c) acc += U(r, c) * in[c];
        out[r] = acc;
      }
      for (int e = 0; e < L; ++e) v[b | offs[e]] = out[e];
    }
  }
  return v;
}

// Duality evolution: factorised when possible, sparse Krylov otherwise.
inline StateVector evolve_dual(const StateVector& psi, const Lattice& lat, const OccupationBasis& basis,
                               const ModelParams& params, double tau) {
  if (couplings_are_intra_triangle(lat, params.trunc_radius))
    return evolve_factorized(psi, lat, basis, params, tau);
  return evolve(psi, build_dual_generator(lat, params, basis), tau);
}

}  // namespace ryd
