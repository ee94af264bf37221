// Ancilla-register algebra for Ising-anyon logic with 2N+2 mixed punctures.
//
// Register: ancillas a_1 ... a_{2N+2}; a_1 is the most significant bit of
// the dense index.  Logical basis: Bell strings
//   |psi^{s_1...s_{N+1}}> = |Psi^{s_1}>_{a1a2} ... |Psi^{s_{N+1}}>_{a_{2N+1}a_{2N+2}},
// with an even number of minus signs; logical bit k (k = 1..N, bit 1 most
// significant) is 0 for s_k = + and 1 for s_k = -, and s_{N+1} is fixed by
// parity.  Each |Psi^-> = (|01> - |10>)/sqrt2 factor carries a phase i.
#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ryd/core.hpp"
#include "ryd/pauli.hpp"

namespace ryd {

using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline int register_size(int N) { return 2 * N + 2; }

// Pauli word on ancillas given by 1-based labels.
inline PauliString ancilla_word(int n_qubits, char p, const std::vector<int>& ancillas) {
  std::vector<int> q;
  for (int a : ancillas) {
    require(a >= 1 && a <= n_qubits, "ancilla label out of range");
    q.push_back(n_qubits - a);
  }
  return PauliString::on(n_qubits, p, q);
}

inline Vector apply_pauli(const PauliString& p, const Vector& v) {
  require(v.size() == (Eigen::Index{1} << p.n), "pauli: vector length does not match the register");
  std::uint64_t xm = 0, zm = 0;
  int ny = 0;
  for (int q = 0; q < p.n; ++q) {
    if (p.get_x(q)) xm |= std::uint64_t{1} << q;
    if (p.get_z(q)) zm |= std::uint64_t{1} << q;
    if (p.get_x(q) && p.get_z(q)) ++ny;
  }
  static const cplx ipow[4] = {1.0, cplx(0, 1), -1.0, cplx(0, -1)};
  const cplx base = ipow[ny % 4] * (p.negative ? -1.0 : 1.0);
  Vector out(v.size());
  for (std::uint64_t k = 0; k < static_cast<std::uint64_t>(v.size()); ++k)
    out[k ^ xm] = ((std::popcount(k & zm) & 1) ? -base : base) * v[k];
  return out;
}

inline Matrix dense_matrix(const PauliString& p) {
  const Eigen::Index d = Eigen::Index{1} << p.n;
  Matrix m(d, d);
  for (Eigen::Index k = 0; k < d; ++k) {
    Vector e = Vector::Zero(d);
    e[k] = 1;
    m.col(k) = apply_pauli(p, e);
  }
  return m;
}

// ---------------------------------------------------------------------------
// Stabilizers

struct StabilizerSet {
  int N = 1;
  std::vector<PauliString> words;  // signs included

  std::vector<std::string> describe() const {
    std::vector<std::string> out;
    const int n = register_size(N);
    for (const auto& w : words) {
      std::string s = w.negative ? "-" : "+";
      for (int a = 1; a <= n; ++a)
        if (char c = w.at(n - a); c != 'I') s += std::string(" ") + c + "a" + std::to_string(a);
      out.push_back(s);
    }
    return out;
  }
};

// prod_i X_{a_i} = +1 and Z_{a_{2i-1}} Z_{a_{2i}} = -1 for i = 1..N+1.
inline StabilizerSet build_stabilizers(int N) {
  require(N >= 1, "stabilizers: N must be >= 1");
  const int n = register_size(N);
  StabilizerSet s;
  s.N = N;
  std::vector<int> all;
  for (int a = 1; a <= n; ++a) all.push_back(a);
  s.words.push_back(ancilla_word(n, 'X', all));
  for (int i = 1; i <= N + 1; ++i) {
    auto w = ancilla_word(n, 'Z', {2 * i - 1, 2 * i});
    w.negative = true;
    s.words.push_back(w);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Logical basis

// (|01> + s|10>)/sqrt2 on (a_{2k-1}, a_{2k}); the phase i for s = -1 is
// applied by the caller.
inline Eigen::Vector4cd bell_state(int sigma) {
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  v[1] = 1.0 / std::sqrt(2.0);
  v[2] = double(sigma) / std::sqrt(2.0);
  return v;
}

struct LogicalBasis {
  int N = 1;
  std::vector<std::vector<int>> sigmas;  // per logical index, N+1 signs
  Matrix vectors;                        // columns

  Eigen::Index dim() const { return vectors.cols(); }
};

inline std::vector<int> sigma_string(int N, int logical_index) {
  std::vector<int> s(N + 1);
  int parity = 1;
  for (int k = 0; k < N; ++k) {
    s[k] = ((logical_index >> (N - 1 - k)) & 1) ? -1 : 1;
    parity *= s[k];
  }
  s[N] = parity;
  return s;
}

inline std::string sigma_label(const std::vector<int>& s) {
  std::string out;
  for (int v : s) out += v > 0 ? '+' : '-';
  return out;
}

inline Vector bell_string_vector(const std::vector<int>& sigma) {
  Vector v = Vector::Ones(1);
  for (int s : sigma) {
    Eigen::Vector4cd b = bell_state(s) * (s > 0 ? cplx(1) : cplx(0, 1));
    Vector nv(v.size() * 4);
    for (Eigen::Index i = 0; i < v.size(); ++i)
      for (int j = 0; j < 4; ++j) nv[4 * i + j] = v[i] * b[j];
    v = nv;
  }
  return v;
}

inline LogicalBasis logical_subspace(int N) {
  require(N >= 1 && N <= 6, "logical_subspace: N must be in 1..6");
  LogicalBasis b;
  b.N = N;
  const Eigen::Index dim = Eigen::Index{1} << register_size(N);
  b.vectors = Matrix::Zero(dim, Eigen::Index{1} << N);
  for (int L = 0; L < (1 << N); ++L) {
    b.sigmas.push_back(sigma_string(N, L));
    b.vectors.col(L) = bell_string_vector(b.sigmas.back());
  }
  return b;
}

// ---------------------------------------------------------------------------
// Exchange generators and braid words

struct BraidGenerator {
  int N = 1;
  int i = 1;  // exchanges punctures i and i+1
  PauliString word;
  double theta = 0;  // exp(i theta P)

  // exp(i e theta P) v with e = +-1.
  Vector apply(const Vector& v, int exponent = 1) const {
    const double t = exponent * theta;
    return std::cos(t) * v + cplx(0, std::sin(t)) * apply_pauli(word, v);
  }

  Matrix matrix(int exponent = 1) const {
    const Eigen::Index d = Eigen::Index{1} << word.n;
    const double t = exponent * theta;
    return std::cos(t) * Matrix::Identity(d, d) + cplx(0, std::sin(t)) * dense_matrix(word);
  }
};

// R~_{i,i+1} = exp(+i pi/4 X X) for odd i, exp(-i pi/4 Z Z) for even i.
inline BraidGenerator braid_generator(int N, int i) {
  const int n = register_size(N);
  require(N >= 1, "braid_generator: N must be >= 1");
  require(i >= 1 && i <= n - 1, "braid_generator: index " + std::to_string(i) + " outside 1.." + std::to_string(n - 1));
  BraidGenerator g;
  g.N = N;
  g.i = i;
  if (i % 2 == 1) {
    g.word = ancilla_word(n, 'X', {i, i + 1});
    g.theta = kPi / 4;
  } else {
    g.word = ancilla_word(n, 'Z', {i, i + 1});
    g.theta = -kPi / 4;
  }
  return g;
}

struct BraidLetter {
  int index = 1;
  int exponent = 1;
};

struct BraidWord {
  std::vector<BraidLetter> letters;  // matrix product in written order

  std::string str() const {
    std::string out;
    for (const auto& l : letters) {
      if (!out.empty()) out += ' ';
      out += "R" + std::to_string(l.index) + (l.exponent < 0 ? "^-1" : "");
    }
    return out;
  }

  // Whitespace-separated tokens R{i} or R{i}^-1.
  static BraidWord parse(const std::string& text) {
    BraidWord w;
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) {
      require(tok.size() >= 2 && tok[0] == 'R', "braid word: bad token '" + tok + "'");
      BraidLetter l;
      std::string body = tok.substr(1);
      if (auto pos = body.find('^'); pos != std::string::npos) {
        const std::string ex = body.substr(pos + 1);
        require(ex == "-1" || ex == "1" || ex == "+1", "braid word: exponent must be +-1 in '" + tok + "'");
        l.exponent = ex == "-1" ? -1 : 1;
        body = body.substr(0, pos);
      }
      require(!body.empty() && body.find_first_not_of("0123456789") == std::string::npos,
              "braid word: bad index in '" + tok + "'");
      l.index = std::stoi(body);
      w.letters.push_back(l);
    }
    return w;
  }
};

// Applies the word to v (the rightmost letter acts first).
inline Vector apply_word(const BraidWord& w, int N, Vector v) {
  for (auto it = w.letters.rbegin(); it != w.letters.rend(); ++it) v = braid_generator(N, it->index).apply(v, it->exponent);
  return v;
}

// Phase of the first entry of column 0 whose magnitude is within 1e-9 of
// the column maximum.
inline cplx reference_phase(const Matrix& m) {
  const double mx = m.col(0).cwiseAbs().maxCoeff();
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    if (std::abs(m(r, 0)) > mx - 1e-9) return m(r, 0) / std::abs(m(r, 0));
  return 1.0;
}

struct CompiledBraid {
  BraidWord word;
  int N = 1;
  Matrix raw;          // <logical_j| W |logical_k>, ancilla side
  cplx global_phase;   // raw = global_phase * logical
  Matrix logical;      // phase-normalised ancilla-side matrix
  Matrix lattice;      // action on the lattice anyons: transpose of `logical`
  double leakage = 0;  // ||(1 - P) W P||
};

inline CompiledBraid compile_braid(const BraidWord& w, int N) {
  for (const auto& l : w.letters) braid_generator(N, l.index);  // range check
  const LogicalBasis b = logical_subspace(N);
  CompiledBraid c;
  c.word = w;
  c.N = N;
  Matrix image(b.vectors.rows(), b.vectors.cols());
  for (Eigen::Index k = 0; k < b.vectors.cols(); ++k) image.col(k) = apply_word(w, N, b.vectors.col(k));
  c.raw = b.vectors.adjoint() * image;
  c.leakage = (image - b.vectors * c.raw).norm();
  if (c.leakage > 1e-10) throw NumericalError("compile_braid: word leaks out of the logical subspace");
  c.global_phase = reference_phase(c.raw);
  c.logical = c.raw / c.global_phase;
  c.lattice = c.logical.transpose();
  return c;
}

inline Eigen::Matrix2cd fusion_matrix() {
  const double r = 1.0 / std::sqrt(2.0);
  Eigen::Matrix2cd f;
  f << r, r, r, -r;
  return f;
}

// Largest |a_ij - b_ij|.
inline double max_entry_diff(const Matrix& a, const Matrix& b) { return (a - b).cwiseAbs().maxCoeff(); }

// Smallest max-entry distance between a and e^{i phi} b over phi.
inline double phase_distance(const Matrix& a, const Matrix& b, cplx* phase = nullptr) {
  const cplx ov = (b.adjoint() * a).trace();
  const cplx ph = std::abs(ov) > 0 ? ov / std::abs(ov) : cplx(1);
  if (phase) *phase = ph;
  return max_entry_diff(a, ph * b);
}

// ---------------------------------------------------------------------------
// Controlled-Z check at N = 2

struct BlockDecomposition {
  std::string exchange;  // "R56" or "R34"
  Matrix lattice;        // 4x4 lattice-side matrix (raw phase)
  cplx c;                // phase attached to R12 (c R12)
  cplx g;                // global phase: lattice = g (P0 (x) cR + i P1 (x) (cR)^-1)
  double residual = 0;
  bool holds = false;
};

struct ControlledZReport {
  Matrix r12;  // 2x2 lattice-side R12 (raw phase), extracted from the N = 2 register
  std::vector<BlockDecomposition> checks;
  Matrix r12_squared_over_z;  // R12^2 Z^-1, proportional to identity when R12^2 ~ Z
  double r12_squared_defect = 0;
  cplx r12_squared_phase;
};

inline BlockDecomposition decompose_controlled(const std::string& name, const Matrix& M, const Matrix& R) {
  BlockDecomposition d;
  d.exchange = name;
  d.lattice = M;
  const Matrix Rinv = R.inverse();
  // From entries (0,0) and (2,2): M00 = g c R00, M22 = g i R^-1_00 / c.
  const cplx c2 = cplx(0, 1) * M(0, 0) * Rinv(0, 0) / (M(2, 2) * R(0, 0));
  d.c = std::sqrt(c2);
  d.g = M(0, 0) / (d.c * R(0, 0));
  Matrix rhs = Matrix::Zero(4, 4);
  rhs.block(0, 0, 2, 2) = d.c * R;
  rhs.block(2, 2, 2, 2) = cplx(0, 1) * Rinv / d.c;
  d.residual = max_entry_diff(M, d.g * rhs);
  d.holds = d.residual < 1e-10;
  return d;
}

inline ControlledZReport controlled_z_decomposition() {
  ControlledZReport rep;
  const auto r12 = compile_braid(BraidWord::parse("R1"), 2);
  const Matrix full = r12.raw.transpose();
  // R12 (x) I: the 2x2 factor sits on logical qubit 1 (most significant).
  rep.r12 = Matrix(2, 2);
  rep.r12 << full(0, 0), full(0, 2), full(2, 0), full(2, 2);
  for (auto [name, idx] : std::vector<std::pair<std::string, int>>{{"R56", 5}, {"R34", 3}}) {
    const auto m = compile_braid(BraidWord::parse("R" + std::to_string(idx)), 2);
    rep.checks.push_back(decompose_controlled(name, m.raw.transpose(), rep.r12));
  }
  Matrix z(2, 2);
  z << 1, 0, 0, -1;
  rep.r12_squared_over_z = rep.r12 * rep.r12 * z;
  rep.r12_squared_defect = phase_distance(rep.r12 * rep.r12, z, &rep.r12_squared_phase);
  return rep;
}

// ---------------------------------------------------------------------------
// Bell-basis readout of ancilla pairs

struct BellReadout {
  std::vector<int> xx;   // X_{2k-1} X_{2k} outcomes
  std::vector<int> zz;   // Z_{2k-1} Z_{2k} outcomes
  double probability = 0;
  Vector state;          // post-measurement state

  // Bell-state names per pair: Psi+- when ZZ = -1, Phi+- when ZZ = +1.
  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (std::size_t k = 0; k < xx.size(); ++k)
      out.push_back(std::string(zz[k] < 0 ? "Psi" : "Phi") + (xx[k] > 0 ? "+" : "-"));
    return out;
  }
};

namespace detail {
inline Vector project(const PauliString& p, int outcome, const Vector& v) {
  return 0.5 * (v + double(outcome) * apply_pauli(p, v));
}
}  // namespace detail

// Probability of the joint outcome (xx, zz) on all pairs.
inline double bell_probability(const Vector& psi, const std::vector<int>& xx, const std::vector<int>& zz) {
  const int n = static_cast<int>(std::lround(std::log2(static_cast<double>(psi.size()))));
  require(n % 2 == 0 && static_cast<int>(xx.size()) == n / 2 && zz.size() == xx.size(),
          "bell_probability: outcome lists must have one entry per pair");
  Vector v = psi / psi.norm();
  for (int k = 0; k < n / 2; ++k) {
    v = detail::project(ancilla_word(n, 'X', {2 * k + 1, 2 * k + 2}), xx[k], v);
    v = detail::project(ancilla_word(n, 'Z', {2 * k + 1, 2 * k + 2}), zz[k], v);
  }
  return v.squaredNorm();
}

// Measures every pair in the Bell basis (X X first, then Z Z).  With
// `forced_xx`/`forced_zz` non-empty the requested branch is projected onto
// instead of sampled; a zero-probability request is an error.
inline BellReadout measure_bell_pairs(const Vector& psi, std::mt19937_64& rng, const std::vector<int>& forced_xx = {},
                                      const std::vector<int>& forced_zz = {}) {
  const int n = static_cast<int>(std::lround(std::log2(static_cast<double>(psi.size()))));
  require((Eigen::Index{1} << n) == psi.size() && n % 2 == 0, "bell readout: register must hold an even number of qubits");
  BellReadout r;
  r.state = psi / psi.norm();
  r.probability = 1.0;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto step = [&](const PauliString& p, int forced) {
    Vector plus = detail::project(p, 1, r.state);
    const double pp = plus.squaredNorm();
    int o = forced;
    if (o == 0) o = u(rng) < pp ? 1 : -1;
    const double prob = o > 0 ? pp : 1 - pp;
    if (prob < 1e-14) throw ValidationError("bell readout: requested outcome has zero probability");
    r.state = (o > 0 ? plus : Vector(r.state - plus)) / std::sqrt(prob);
    r.probability *= prob;
    return o;
  };
  for (int k = 0; k < n / 2; ++k) {
    r.xx.push_back(step(ancilla_word(n, 'X', {2 * k + 1, 2 * k + 2}), forced_xx.empty() ? 0 : forced_xx[k]));
    r.zz.push_back(step(ancilla_word(n, 'Z', {2 * k + 1, 2 * k + 2}), forced_zz.empty() ? 0 : forced_zz[k]));
  }
  return r;
}

// Projects the ancillas onto the Bell string `sigma` (Z Z = -1 on every pair).
inline BellReadout prepare_logical(const Vector& psi, const std::vector<int>& sigma) {
  std::mt19937_64 unused(0);
  return measure_bell_pairs(psi, unused, sigma, std::vector<int>(sigma.size(), -1));
}

}  // namespace ryd
