#include <gtest/gtest.h>

#include <random>
#include <unsupported/Eigen/MatrixFunctions>

#include "ryd/operators.hpp"

using namespace ryd;

namespace {

Eigen::Matrix4cd z1z2() { return Eigen::Vector4cd(1, -1, -1, 1).asDiagonal(); }

// |g><r3| + |r1><r2| + h.c. in the basis (g, r1, r2, r3).
Eigen::Matrix4cd x3_tilde() {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 3) = m(3, 0) = 1;
  m(1, 2) = m(2, 1) = 1;
  return m;
}

Eigen::VectorXcd random_state(std::uint64_t dim, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Eigen::VectorXcd v(dim);
  for (std::uint64_t i = 0; i < dim; ++i) v[i] = {g(rng), g(rng)};
  return v.normalized();
}

// H psi computed from the model definition on an open lattice, one basis
// state at a time, without the library's operator builder.
Eigen::VectorXcd reference_apply(const Lattice& lat, const ModelParams& p, const Eigen::VectorXcd& psi) {
  const int n = lat.num_sites();
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(psi.size());
  const cplx g_from_r = 0.5 * p.rabi * std::exp(cplx(0, p.phase));  // <g|H|r>
  for (std::uint64_t s = 0; s < (std::uint64_t{1} << n); ++s) {
    double diag = 0;
    for (int i = 0; i < n; ++i) {
      if (!((s >> i) & 1)) continue;
      diag -= p.detuning * lat.sites[i].detuning_scale;
      for (int j = i + 1; j < n; ++j) {
        if (!((s >> j) & 1)) continue;
        const double r = std::hypot(lat.sites[i].x - lat.sites[j].x, lat.sites[i].y - lat.sites[j].y);
        if (r <= p.trunc_radius + 1e-9) diag += p.rabi * std::pow(p.blockade_radius / r, 6);
      }
    }
    out[s] += diag * psi[s];
    for (int i = 0; i < n; ++i) {
      const std::uint64_t t = s ^ (std::uint64_t{1} << i);
      // (H psi)[s] += <s|H|t> psi[t]
      out[s] += ((s >> i) & 1 ? std::conj(g_from_r) : g_from_r) * psi[t];
    }
  }
  return out;
}

Eigen::VectorXcd apply(const SparseOperator& H, const Eigen::VectorXcd& v) {
  Eigen::VectorXcd out(v.size());
  H.apply(v.data(), out.data());
  return out;
}

}  // namespace

TEST(Operators, DualityTimeValue) { EXPECT_NEAR(duality_time(1.0), 4 * kPi / (3 * std::sqrt(3.0)), 1e-15); }

TEST(Operators, TriangleDualityIdentity) {
  // Oracle: Pade/scaling-squaring matrix exponential, independent of the
  // library's eigendecomposition and Krylov code.
  const ModelParams evo = ModelParams::evolution();
  const Eigen::Matrix4cd H = triangle_block(evo);
  const double tau = duality_time(evo.rabi);
  const Eigen::Matrix4cd Up = (cplx(0, tau) * H).exp();
  const Eigen::Matrix4cd Um = (cplx(0, -tau) * H).exp();
  const Eigen::Matrix4cd lhs = Up * z1z2() * Um;
  const double err = (lhs - x3_tilde()).operatorNorm();
  RecordProperty("operator_norm_error", std::to_string(err));
  EXPECT_LE(err, 1e-10);
}

TEST(Operators, TriangleIdentityFailsAwayFromTheDualityTime) {
  const ModelParams evo = ModelParams::evolution();
  const Eigen::Matrix4cd H = triangle_block(evo);
  const double tau = 0.9 * duality_time(evo.rabi);
  const Eigen::Matrix4cd lhs = (cplx(0, tau) * H).exp() * z1z2() * (cplx(0, -tau) * H).exp();
  EXPECT_GT((lhs - x3_tilde()).operatorNorm(), 1e-2);
}

TEST(Operators, BarePauliXOnTheBlockadedSpaceIsNotEquivalent) {
  // Projected sigma^x_3 = |g><r3| + h.c. has spectrum (1, -1, 0, 0), unlike
  // Z1 Z2; the exchange form above is the one the duality produces.
  Eigen::Matrix4cd bare = Eigen::Matrix4cd::Zero();
  bare(0, 3) = bare(3, 0) = 1;
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> a(bare), b(z1z2());
  EXPECT_GT((a.eigenvalues() - b.eigenvalues()).norm(), 0.5);
}

TEST(Operators, TriangleBlockFollowsThePhaseConvention) {
  ModelParams p;
  p.rabi = 2.0;
  p.phase = 0.3;
  const auto m = triangle_block(p);
  for (int k = 1; k < 4; ++k) {
    EXPECT_NEAR(std::abs(m(0, k) - std::polar(1.0, 0.3)), 0, 1e-15);
    EXPECT_NEAR(std::abs(m(k, 0) - std::polar(1.0, -0.3)), 0, 1e-15);
  }
}

TEST(Operators, FullBasisHamiltonianMatchesModelDefinition) {
  for (auto [cx, phase] : {std::pair{1, 0.0}, {2, 0.7}}) {
    const Lattice lat = build_ruby_lattice({cx, 1, BoundaryY::open, 1.0});
    const OccupationBasis basis(lat, BasisMode::full);
    ModelParams p;
    p.detuning = 1.3;
    p.phase = phase;
    const auto H = build_hamiltonian(lat, p, basis);
    EXPECT_LT(H.hermiticity_defect(), 1e-14);
    EXPECT_EQ(H.is_real(), phase == 0.0);
    const auto psi = random_state(basis.dim(), 11);
    EXPECT_LT((apply(H, psi) - reference_apply(lat, p, psi)).norm(), 1e-10);
  }
}

TEST(Operators, RestrictedHamiltonianIsTheProjectedFullOne) {
  // On configurations with at most one excitation per triangle the
  // intra-triangle repulsion never acts, so the restricted matrix must equal
  // the corresponding block of the full matrix.
  const Lattice lat = build_ruby_lattice({2, 1, BoundaryY::open, 1.0});
  const OccupationBasis full(lat, BasisMode::full), red(lat, BasisMode::triangle_restricted);
  ModelParams p;
  p.phase = 0.4;
  const auto Hf = build_hamiltonian(lat, p, full);
  const auto Hr = build_hamiltonian(lat, p, red);
  EXPECT_EQ(red.dim(), 256u);
  for (std::uint64_t a = 0; a < red.dim(); ++a)
    for (std::uint64_t b = 0; b < red.dim(); ++b)
      ASSERT_NEAR(std::abs(Hr.coeff(a, b) - Hf.coeff(red.config(a), red.config(b))), 0, 1e-12) << a << "," << b;
}

TEST(Operators, EdgeSitesUseTheReducedDetuning) {
  Lattice lat = build_ruby_lattice({3, 2, BoundaryY::periodic, 1.0});
  PunctureSpec ps;
  ps.removed_cells = {{1, 0}};
  ps.edge_detuning_ratio = 0.48;
  lat = apply_puncture(lat, ps);
  const OccupationBasis basis(lat, BasisMode::triangle_restricted);
  ModelParams p;
  p.detuning = 3.5;
  const auto H = build_hamiltonian(lat, p, basis);
  const int e = lat.punctures[0].e_segment.at(0), m = lat.punctures[0].m_segment.at(0);
  std::uint64_t ke = 0, km = 0;
  ASSERT_TRUE(basis.index_of(std::uint64_t{1} << e, ke));
  ASSERT_TRUE(basis.index_of(std::uint64_t{1} << m, km));
  EXPECT_NEAR(H.coeff(ke, ke).real(), -0.48 * 3.5, 1e-12);
  EXPECT_NEAR(H.coeff(km, km).real(), -3.5, 1e-12);
}

TEST(Operators, DualGeneratorParameters) {
  const Lattice lat = build_ruby_lattice({2, 2, BoundaryY::periodic, 1.0});
  const OccupationBasis basis(lat, BasisMode::triangle_restricted);
  const ModelParams evo = ModelParams::evolution();
  EXPECT_DOUBLE_EQ(evo.detuning, 0.0);
  EXPECT_DOUBLE_EQ(evo.phase, -kPi / 2);
  EXPECT_DOUBLE_EQ(evo.blockade_radius, 1.53);
  EXPECT_DOUBLE_EQ(evo.trunc_radius, 1.0);
  // R_trunc = a keeps only intra-triangle couplings; sqrt7 a does not.
  EXPECT_TRUE(couplings_are_intra_triangle(lat, evo.trunc_radius));
  EXPECT_FALSE(couplings_are_intra_triangle(lat, std::sqrt(7.0)));

  ModelParams noisy = evo;
  noisy.detuning = 5;
  noisy.phase = 1;
  const auto a = build_dual_generator(lat, noisy, basis);
  const auto b = build_hamiltonian(lat, evo, basis);
  const auto psi = random_state(basis.dim(), 3);
  EXPECT_LT((apply(a, psi) - apply(b, psi)).norm(), 1e-12);
  // Restricted generator is a sum of commuting triangle blocks: purely
  // off-diagonal, imaginary entries.
  a.for_each([&](std::uint64_t r, std::uint64_t c, cplx v) {
    EXPECT_NE(r, c);
    EXPECT_NEAR(v.real(), 0, 1e-15);
  });
}

TEST(Operators, LocalGeneratorMatchesTriangleBlockPlusDetuning) {
  const Lattice lat = build_ruby_lattice({1, 1, BoundaryY::open, 1.0});
  ModelParams p;
  p.detuning = 2.0;
  p.phase = 0.25;
  const Eigen::MatrixXcd loc = local_triangle_generator(lat, 0, p, BasisMode::triangle_restricted);
  Eigen::Matrix4cd ref = triangle_block(p);
  for (int k = 1; k < 4; ++k) ref(k, k) = -2.0;
  EXPECT_LT((loc - Eigen::MatrixXcd(ref)).norm(), 1e-14);
}

TEST(Operators, CooExportHeader) {
  const Lattice lat = build_ruby_lattice({1, 1, BoundaryY::open, 1.0});
  const OccupationBasis basis(lat, BasisMode::triangle_restricted);
  const auto H = build_hamiltonian(lat, ModelParams{}, basis);
  std::ostringstream os;
  H.write_coo(os);
  const std::string s = os.str();
  EXPECT_EQ(s.rfind("# dim 16 nnz " + std::to_string(H.nnz()) + " hermitian 1", 0), 0u);
  EXPECT_EQ(static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')), H.nnz() + 1);
}

TEST(Operators, InvalidParametersAreRejected) {
  const Lattice lat = build_ruby_lattice({1, 1, BoundaryY::open, 1.0});
  const OccupationBasis basis(lat, BasisMode::full);
  ModelParams p;
  p.blockade_radius = -1;
  EXPECT_THROW(build_hamiltonian(lat, p, basis), ValidationError);
  const Lattice other = build_ruby_lattice({2, 1, BoundaryY::open, 1.0});
  EXPECT_THROW(build_hamiltonian(other, ModelParams{}, basis), ValidationError);
}
