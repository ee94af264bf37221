#include <gtest/gtest.h>

#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "ryd/operators.hpp"
#include "ryd/spectra.hpp"

using namespace ryd;

namespace {

Eigen::VectorXd dense_spectrum(const SparseOperator& H) {
  if (H.is_real()) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H.to_dense().real(), Eigen::EigenvaluesOnly);
    return es.eigenvalues();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H.to_dense(), Eigen::EigenvaluesOnly);
  return es.eigenvalues();
}

double residual(const SparseOperator& H, const StateVector& v, double e) {
  StateVector w(v.size());
  H.apply(v.data(), w.data());
  return (w - e * v).norm();
}

StateVector random_state(std::uint64_t dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  StateVector v(dim);
  for (std::uint64_t i = 0; i < dim; ++i) v[i] = {g(rng), g(rng)};
  return v.normalized();
}

struct Instance {
  const char* name;
  Lattice lat;
  BasisMode mode;
  ModelParams p;
};

std::vector<Instance> small_instances() {
  std::vector<Instance> out;
  ModelParams base;
  ModelParams tilted = base;
  tilted.phase = 0.6;
  tilted.detuning = 2.0;
  out.push_back({"open-2x1-full", build_ruby_lattice({2, 1, BoundaryY::open, 1.0}), BasisMode::full, base});
  out.push_back({"open-1x1-complex", build_ruby_lattice({1, 1, BoundaryY::open, 1.0}), BasisMode::full, tilted});
  out.push_back({"cyl-1x2-restricted", build_ruby_lattice({1, 2, BoundaryY::periodic, 1.0}),
                 BasisMode::triangle_restricted, base});
  {
    PunctureSpec p;
    p.removed_cells = {{1, 0}};
    p.edge_detuning_ratio = 0.48;
    out.push_back({"punctured-3x1-restricted", apply_puncture(build_ruby_lattice({3, 1, BoundaryY::periodic, 1.0}), p),
                   BasisMode::triangle_restricted, base});
  }
  out.push_back({"cyl-2x1-restricted", build_ruby_lattice({2, 1, BoundaryY::periodic, 1.0}),
                 BasisMode::triangle_restricted, tilted});
  return out;
}

}  // namespace

TEST(Spectra, LanczosMatchesDenseOracle) {
  for (auto& inst : small_instances()) {
    const OccupationBasis basis(inst.lat, inst.mode);
    ASSERT_LE(basis.dim(), 4096u) << inst.name;
    const auto H = build_hamiltonian(inst.lat, inst.p, basis);
    const auto exact = dense_spectrum(H);
    // Residual tolerance 1e-9: the full-basis instances span a spectral width
    // of about 2300, so 1e-10 is close to the round-off floor of the matvec.
    const auto r = ground_states(H, 4, 1e-9, 5);
    ASSERT_TRUE(r.converged) << inst.name;
    ASSERT_GE(r.values.size(), 4u) << inst.name;
    for (int i = 0; i < 4; ++i) {
      EXPECT_NEAR(r.values[i], exact[i], 1e-9) << inst.name << " level " << i;
      EXPECT_LE(r.residuals[i], 1e-8) << inst.name;
      EXPECT_LE(residual(H, r.vectors[i], r.values[i]), 1e-8) << inst.name;
      EXPECT_NEAR(r.vectors[i].norm(), 1.0, 1e-12);
    }
  }
}

TEST(Spectra, EigenvectorsAreOrthonormal) {
  const Lattice lat = build_ruby_lattice({2, 1, BoundaryY::periodic, 1.0});
  const OccupationBasis basis(lat, BasisMode::triangle_restricted);
  const auto H = build_hamiltonian(lat, ModelParams{}, basis);
  const auto r = ground_states(H, 5, 1e-10, 2);
  for (std::size_t i = 0; i < r.vectors.size(); ++i)
    for (std::size_t j = 0; j < r.vectors.size(); ++j)
      EXPECT_NEAR(std::abs(r.vectors[i].dot(r.vectors[j])), i == j ? 1.0 : 0.0, 1e-9);
}

TEST(Spectra, DegenerateManifoldsAreResolved) {
  // Two identical random blocks: every level is exactly twofold degenerate.
  const int b = 40;
  std::mt19937_64 rng(9);
  std::normal_distribution<double> g;
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(b, b);
  for (int i = 0; i < b; ++i)
    for (int j = i; j < b; ++j) A(i, j) = A(j, i) = g(rng);
  std::vector<Triplet> t;
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < b; ++j) {
      t.push_back({std::uint64_t(i), std::uint64_t(j), A(i, j)});
      t.push_back({std::uint64_t(b + i), std::uint64_t(b + j), A(i, j)});
    }
  const auto H = SparseOperator::from_triplets(2 * b, t, true);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  const auto r = ground_states(H, 4, 1e-10, 3);
  ASSERT_GE(r.values.size(), 4u);
  EXPECT_NEAR(r.values[0], es.eigenvalues()[0], 1e-9);
  EXPECT_NEAR(r.values[1], es.eigenvalues()[0], 1e-9);
  EXPECT_NEAR(r.values[2], es.eigenvalues()[1], 1e-9);
  EXPECT_NEAR(r.values[3], es.eigenvalues()[1], 1e-9);
  ASSERT_GE(r.manifolds.size(), 2u);
  EXPECT_EQ(r.manifolds[0], (std::vector<int>{0, 1}));
  EXPECT_EQ(r.manifolds[1], (std::vector<int>{2, 3}));
}

TEST(Spectra, SeedsGiveTheSameEnergies) {
  const Lattice lat = build_ruby_lattice({1, 2, BoundaryY::periodic, 1.0});
  const OccupationBasis basis(lat, BasisMode::triangle_restricted);
  const auto H = build_hamiltonian(lat, ModelParams{}, basis);
  const auto a = ground_states(H, 3, 1e-10, 1), b = ground_states(H, 3, 1e-10, 77);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-9);
  const auto c = ground_states(H, 3, 1e-10, 1);
  for (int i = 0; i < 3; ++i) EXPECT_EQ(a.values[i], c.values[i]);  // bitwise reproducible
}

TEST(Spectra, RejectsBadRequests) {
  const auto H = SparseOperator::from_triplets(2, {{0, 0, 1.0}, {1, 1, 2.0}}, true);
  EXPECT_THROW(ground_states(H, 0), ValidationError);
  EXPECT_THROW(ground_states(H, 3), ValidationError);
  const auto nh = SparseOperator::from_triplets(2, {{0, 1, 1.0}}, false);
  EXPECT_THROW(ground_states(nh, 1), ValidationError);
}

TEST(Spectra, KrylovEvolutionMatchesDenseExponential) {
  const Lattice lat = build_ruby_lattice({2, 1, BoundaryY::open, 1.0});
  const OccupationBasis basis(lat, BasisMode::triangle_restricted);
  ModelParams p;
  p.phase = 0.3;
  const auto H = build_hamiltonian(lat, p, basis);
  const auto psi = random_state(basis.dim(), 4);
  for (double tau : {0.1, 1.7, -2.5}) {
    const StateVector exact = (cplx(0, -tau) * H.to_dense()).exp() * psi;
    EXPECT_LT((evolve(psi, H, tau) - exact).norm(), 1e-10) << "tau " << tau;
  }
  EXPECT_EQ((evolve(psi, H, 0.0) - psi).norm(), 0.0);
}

TEST(Spectra, FactorisedEvolutionMatchesSparseEvolution) {
  const ModelParams evo = ModelParams::evolution();
  const double tau = duality_time();
  for (auto mode : {BasisMode::triangle_restricted, BasisMode::full}) {
    const Lattice lat = build_ruby_lattice({mode == BasisMode::full ? 1 : 2, 2, BoundaryY::periodic, 1.0});
    const OccupationBasis basis(lat, mode);
    const auto psi = random_state(basis.dim(), 8);
    const StateVector a = evolve_factorized(psi, lat, basis, evo, tau);
    const StateVector b = evolve(psi, build_dual_generator(lat, evo, basis), tau);
    EXPECT_LT((a - b).norm(), 1e-10);
    EXPECT_NEAR(a.norm(), 1.0, 1e-12);
  }
}

TEST(Spectra, FactorisedEvolutionRefusesLongRangeGenerators) {
  const Lattice lat = build_ruby_lattice({2, 2, BoundaryY::periodic, 1.0});
  const OccupationBasis basis(lat, BasisMode::triangle_restricted);
  ModelParams far = ModelParams::evolution();
  far.trunc_radius = 2.0;
  const auto psi = random_state(basis.dim(), 1);
  EXPECT_THROW(evolve_factorized(psi, lat, basis, far, 1.0), ValidationError);
  // evolve_dual falls back to the sparse route instead.
  const StateVector v = evolve_dual(psi, lat, basis, far, 0.5);
  EXPECT_LT((v - evolve(psi, build_dual_generator(lat, far, basis), 0.5)).norm(), 1e-10);
}
