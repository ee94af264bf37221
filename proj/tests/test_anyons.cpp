#include <gtest/gtest.h>

#include <random>

#include "ryd/anyons.hpp"

using namespace ryd;

namespace {

Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}

Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

// Dense product of generator matrices in written order.
Matrix word_matrix(const std::string& text, int N) {
  const auto w = BraidWord::parse(text);
  const Eigen::Index d = Eigen::Index{1} << register_size(N);
  Matrix m = Matrix::Identity(d, d);
  for (const auto& l : w.letters) m = m * braid_generator(N, l.index).matrix(l.exponent);
  return m;
}

}  // namespace

TEST(Anyons, StabilizersCommuteAndFixTheLogicalSubspace) {
  for (int N = 1; N <= 3; ++N) {
    const auto s = build_stabilizers(N);
    ASSERT_EQ(s.words.size(), static_cast<std::size_t>(N + 2));
    for (const auto& a : s.words)
      for (const auto& b : s.words) {
        const Matrix A = dense_matrix(a), B = dense_matrix(b);
        EXPECT_LT((A * B - B * A).norm(), 1e-12);
      }
    const auto basis = logical_subspace(N);
    ASSERT_EQ(basis.vectors.cols(), Eigen::Index{1} << N);
    const Matrix gram = basis.vectors.adjoint() * basis.vectors;
    EXPECT_LT((gram - Matrix::Identity(gram.rows(), gram.cols())).norm(), 1e-12);
    for (const auto& w : s.words) {
      const Matrix S = dense_matrix(w);
      EXPECT_LT((S * basis.vectors - basis.vectors).norm(), 1e-12) << N;
    }
    // Every exchange preserves the stabilizer group.
    for (int i = 1; i < register_size(N); ++i)
      for (const auto& w : s.words) EXPECT_TRUE(braid_generator(N, i).word.commutes_with(w)) << "R" << i;
  }
}

TEST(Anyons, StabilizerDescriptions) {
  const auto d = build_stabilizers(1).describe();
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[0], "+ Xa1 Xa2 Xa3 Xa4");
  EXPECT_EQ(d[1], "- Za1 Za2");
  EXPECT_EQ(d[2], "- Za3 Za4");
}

TEST(Anyons, BraidRelations) {
  const int N = 2;
  const int n = register_size(N);
  for (int i = 1; i + 1 < n; ++i) {
    const Matrix a = braid_generator(N, i).matrix(), b = braid_generator(N, i + 1).matrix();
    EXPECT_LT((a * b * a - b * a * b).norm(), 1e-10) << "R" << i;
  }
  for (int i = 1; i < n; ++i)
    for (int j = i + 2; j < n; ++j) {
      const Matrix a = braid_generator(N, i).matrix(), b = braid_generator(N, j).matrix();
      EXPECT_LT((a * b - b * a).norm(), 1e-10) << "R" << i << " R" << j;
    }
}

TEST(Anyons, GeneratorsAreUnitaryOfOrderEight) {
  for (int i = 1; i < register_size(1); ++i) {
    const Matrix r = braid_generator(1, i).matrix();
    const Matrix id = Matrix::Identity(r.rows(), r.cols());
    EXPECT_LT((r.adjoint() * r - id).norm(), 1e-12);
    EXPECT_LT((r * braid_generator(1, i).matrix(-1) - id).norm(), 1e-12);
    Matrix p = id;
    for (int k = 0; k < 8; ++k) p = p * r;
    EXPECT_LT((p - id).norm(), 1e-12);
    Matrix q = id;
    for (int k = 0; k < 4; ++k) q = q * r;
    EXPECT_GT((q - id).norm(), 1.0);
  }
}

TEST(Anyons, CompiledWordMatchesDenseProduct) {
  // Oracle: restrict the dense word matrix to the logical basis directly.
  for (const auto* text : {"R2 R2", "R1^-1 R2 R1^-1", "R3 R2 R1", "R2^-1 R4 R3"}) {
    const int N = 2;
    const auto c = compile_braid(BraidWord::parse(text), N);
    const auto b = logical_subspace(N);
    const Matrix W = word_matrix(text, N);
    const Matrix ref = b.vectors.adjoint() * W * b.vectors;
    EXPECT_LT((c.raw - ref).norm(), 1e-12) << text;
    EXPECT_LT(c.leakage, 1e-10);
    EXPECT_LT((c.logical.adjoint() * c.logical - Matrix::Identity(4, 4)).norm(), 1e-12);
    EXPECT_EQ((c.lattice - c.logical.transpose()).norm(), 0.0);
  }
}

TEST(Anyons, DoubleExchangeIsLogicalX) {
  const auto c = compile_braid(BraidWord::parse("R2 R2"), 1);
  cplx phase;
  EXPECT_LT(phase_distance(c.raw, pauli_x(), &phase), 1e-10);
  EXPECT_NEAR(std::abs(phase - cplx(0, -1)), 0, 1e-10);
  EXPECT_LT(max_entry_diff(c.logical, pauli_x()), 1e-10);
}

TEST(Anyons, FusionMatrixFromThreeExchanges) {
  const auto c = compile_braid(BraidWord::parse("R1^-1 R2 R1^-1"), 1);
  const Matrix F = fusion_matrix();
  for (Eigen::Index r = 0; r < 2; ++r)
    for (Eigen::Index k = 0; k < 2; ++k) EXPECT_NEAR(std::abs(F(r, k)), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_LT((F * F - Matrix::Identity(2, 2)).norm(), 1e-15);
  cplx phase;
  EXPECT_LT(phase_distance(c.raw, F, &phase), 1e-10);
  RecordProperty("global_phase", std::to_string(phase.real()) + "," + std::to_string(phase.imag()));
  for (Eigen::Index r = 0; r < 2; ++r)
    for (Eigen::Index k = 0; k < 2; ++k) EXPECT_NEAR(std::abs(c.logical(r, k)), 1 / std::sqrt(2.0), 1e-10);
}

TEST(Anyons, SingleExchangeIsNotAPauli) {
  const auto c = compile_braid(BraidWord::parse("R2"), 1);
  EXPECT_GT(phase_distance(c.raw, pauli_x()), 0.1);
  EXPECT_GT(phase_distance(c.raw, pauli_z()), 0.1);
  EXPECT_GT(phase_distance(c.raw, Matrix::Identity(2, 2)), 0.1);
}

TEST(Anyons, ControlledZDecomposition) {
  const auto rep = controlled_z_decomposition();
  ASSERT_EQ(rep.checks.size(), 2u);
  EXPECT_EQ(rep.checks[0].exchange, "R56");
  EXPECT_TRUE(rep.checks[0].holds) << rep.checks[0].residual;
  EXPECT_LT(rep.checks[0].residual, 1e-10);
  EXPECT_NEAR(std::abs(rep.checks[0].c), 1.0, 1e-10);
  EXPECT_NEAR(std::abs(rep.checks[0].g), 1.0, 1e-10);
  EXPECT_EQ(rep.checks[1].exchange, "R34");
  EXPECT_FALSE(rep.checks[1].holds);
  EXPECT_GT(rep.checks[1].residual, 0.1);
  // R12 squares to Z up to a phase.
  EXPECT_LT(rep.r12_squared_defect, 1e-10);
}

TEST(Anyons, WordParserRoundTripAndErrors) {
  const auto w = BraidWord::parse("  R1^-1 R12   R3^+1 R2^1 ");
  ASSERT_EQ(w.letters.size(), 4u);
  EXPECT_EQ(w.letters[1].index, 12);
  EXPECT_EQ(w.str(), "R1^-1 R12 R3 R2");
  EXPECT_EQ(BraidWord::parse(w.str()).str(), w.str());
  for (const auto* bad : {"X1", "R", "R1^2", "Ra", "R1^-"}) EXPECT_THROW(BraidWord::parse(bad), ValidationError) << bad;
  EXPECT_THROW(compile_braid(BraidWord::parse("R4"), 1), ValidationError);
  EXPECT_THROW(compile_braid(BraidWord::parse("R0"), 1), ValidationError);
}

TEST(Anyons, BellReadoutStatistics) {
  const int N = 1;
  const int n = register_size(N);
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  Vector psi(Eigen::Index{1} << n);
  for (Eigen::Index k = 0; k < psi.size(); ++k) psi[k] = {g(rng), g(rng)};
  psi.normalize();

  // Probabilities of all joint outcomes sum to one.
  double total = 0;
  std::map<std::string, double> expected;
  for (int a : {1, -1})
    for (int b : {1, -1})
      for (int c : {1, -1})
        for (int d : {1, -1}) {
          const double p = bell_probability(psi, {a, c}, {b, d});
          total += p;
          expected[std::to_string(a) + std::to_string(b) + std::to_string(c) + std::to_string(d)] = p;
        }
  EXPECT_NEAR(total, 1.0, 1e-12);

  std::map<std::string, int> counts;
  const int shots = 4000;
  for (int s = 0; s < shots; ++s) {
    const auto r = measure_bell_pairs(psi, rng);
    ++counts[std::to_string(r.xx[0]) + std::to_string(r.zz[0]) + std::to_string(r.xx[1]) + std::to_string(r.zz[1])];
  }
  for (const auto& [key, p] : expected) {
    const double sd = std::sqrt(p * (1 - p) / shots);
    EXPECT_NEAR(double(counts[key]) / shots, p, 5 * sd + 1e-3) << key;
  }
}

TEST(Anyons, LogicalStatesReadOutDeterministically) {
  const int N = 2;
  const auto basis = logical_subspace(N);
  std::mt19937_64 rng(4);
  for (int L = 0; L < (1 << N); ++L) {
    const auto sigma = sigma_string(N, L);
    const auto r = measure_bell_pairs(basis.vectors.col(L), rng);
    EXPECT_EQ(r.xx, sigma) << L;
    EXPECT_EQ(r.zz, std::vector<int>(N + 1, -1));
    EXPECT_NEAR(r.probability, 1.0, 1e-12);
    for (const auto& name : r.names()) EXPECT_EQ(name.substr(0, 3), "Psi");
  }
  // A zero-probability branch is rejected.
  auto wrong = sigma_string(N, 0);
  wrong[0] = -wrong[0];
  EXPECT_THROW(prepare_logical(basis.vectors.col(0), wrong), ValidationError);
  EXPECT_THROW(measure_bell_pairs(basis.vectors.col(0), rng, {}, std::vector<int>(N + 1, 1)), ValidationError);
}
