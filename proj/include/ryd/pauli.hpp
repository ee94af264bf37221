// Pauli strings, a stabilizer tableau (Aaronson-Gottesman, with
// destabilizers) and a small dense state-vector simulator used as its oracle.
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ryd/core.hpp"

namespace ryd {

// Hermitian Pauli word (-1)^negative * prod_j sigma(x_j, z_j), with
// sigma(1,0) = X, sigma(0,1) = Z, sigma(1,1) = Y.
struct PauliString {
  int n = 0;
  std::vector<std::uint64_t> x, z;
  bool negative = false;

  PauliString() = default;
  explicit PauliString(int nq) : n(nq), x((nq + 63) / 64, 0), z((nq + 63) / 64, 0) {}

  bool get_x(int q) const { return (x[q >> 6] >> (q & 63)) & 1u; }
  bool get_z(int q) const { return (z[q >> 6] >> (q & 63)) & 1u; }
  void set(int q, char p) {
    require(q >= 0 && q < n, "pauli: qubit index out of range");
    const std::uint64_t b = std::uint64_t{1} << (q & 63);
    x[q >> 6] &= ~b;
    z[q >> 6] &= ~b;
    if (p == 'X' || p == 'Y') x[q >> 6] |= b;
    if (p == 'Z' || p == 'Y') z[q >> 6] |= b;
  }
  char at(int q) const {
    const bool a = get_x(q), b = get_z(q);
    return a ? (b ? 'Y' : 'X') : (b ? 'Z' : 'I');
  }

  static PauliString on(int nq, char p, const std::vector<int>& qubits) {
    PauliString s(nq);
    for (int q : qubits) s.set(q, p);
    return s;
  }

  // "-X0 Z3 Y5" style text.
  static PauliString parse(int nq, const std::string& text) {
    PauliString s(nq);
    std::istringstream is(text);
    std::string tok;
    while (is >> tok) {
      if (tok == "-") {
        s.negative = !s.negative;
        continue;
      }
      if (tok[0] == '-') {
        s.negative = !s.negative;
        tok = tok.substr(1);
      } else if (tok[0] == '+') {
        tok = tok.substr(1);
      }
      require(tok.size() >= 2 && std::string("XYZ").find(tok[0]) != std::string::npos,
              "pauli: bad token '" + tok + "'");
      const int q = std::stoi(tok.substr(1));
      require(q >= 0 && q < nq, "pauli: qubit " + std::to_string(q) + " out of range");
      s.set(q, tok[0]);
    }
    return s;
  }

  std::string str() const {
    std::string out = negative ? "-" : "+";
    for (int q = 0; q < n; ++q)
      if (char c = at(q); c != 'I') out += std::string(" ") + c + std::to_string(q);
    return out;
  }

  bool commutes_with(const PauliString& o) const {
    int c = 0;
    for (std::size_t w = 0; w < x.size(); ++w) c += std::popcount((x[w] & o.z[w]) ^ (z[w] & o.x[w]));
    return (c & 1) == 0;
  }

  bool is_identity() const {
    for (std::size_t w = 0; w < x.size(); ++w)
      if (x[w] | z[w]) return false;
    return true;
  }

  int weight() const {
    int c = 0;
    for (std::size_t w = 0; w < x.size(); ++w) c += std::popcount(x[w] | z[w]);
    return c;
  }

  // this <- other * this.  The sign is tracked when the two words commute;
  // with track_sign = false it is left meaningless (destabilizer rows).
  void left_multiply(const PauliString& o, bool track_sign = true) {
    if (track_sign) {
      int e = (negative ? 2 : 0) + (o.negative ? 2 : 0) + detail_phase(o, *this);
      e = ((e % 4) + 4) % 4;
      require(e == 0 || e == 2, "pauli: product of anticommuting words is not Hermitian");
      negative = e == 2;
    }
    for (std::size_t w = 0; w < x.size(); ++w) {
      x[w] ^= o.x[w];
      z[w] ^= o.z[w];
    }
  }

  // Exponent of i picked up when sigma(a) * sigma(b) is rewritten as sigma(a xor b).
  static int detail_phase(const PauliString& a, const PauliString& b) {
    int s = 0;
    for (std::size_t w = 0; w < a.x.size(); ++w) {
      const std::uint64_t x1 = a.x[w], z1 = a.z[w], x2 = b.x[w], z2 = b.z[w];
      const std::uint64_t Y1 = x1 & z1, X1 = x1 & ~z1, Z1 = ~x1 & z1;
      const std::uint64_t plus = (Y1 & z2 & ~x2) | (X1 & z2 & x2) | (Z1 & x2 & ~z2);
      const std::uint64_t minus = (Y1 & x2 & ~z2) | (X1 & z2 & ~x2) | (Z1 & x2 & z2);
      s += std::popcount(plus) - std::popcount(minus);
    }
    return s;
  }
};

// Outcome of a Pauli measurement.
struct MeasureResult {
  int outcome = 1;           // eigenvalue +-1
  bool deterministic = true;
};

// Stabilizer state on n qubits, rows 0..n-1 destabilizers, n..2n-1 stabilizers.
class Tableau {
 public:
  explicit Tableau(int n = 0) : n_(n) {
    rows_.reserve(2 * n);
    for (int i = 0; i < n; ++i) rows_.push_back(PauliString::on(n, 'X', {i}));
    for (int i = 0; i < n; ++i) rows_.push_back(PauliString::on(n, 'Z', {i}));
  }

  int num_qubits() const { return n_; }
  const PauliString& stabilizer(int i) const { return rows_[n_ + i]; }
  const PauliString& destabilizer(int i) const { return rows_[i]; }

  void h(int a) {
    for (auto& r : rows_) {
      const bool xa = r.get_x(a), za = r.get_z(a);
      if (xa && za) r.negative = !r.negative;
      r.set(a, xa ? (za ? 'Y' : 'Z') : (za ? 'X' : 'I'));
    }
  }
  void s(int a) {
    for (auto& r : rows_) {
      const bool xa = r.get_x(a), za = r.get_z(a);
      if (xa && za) r.negative = !r.negative;
      r.set(a, xa ? (za ? 'X' : 'Y') : (za ? 'Z' : 'I'));
    }
  }
  void cnot(int c, int t) {
    require(c != t, "tableau: cnot needs distinct qubits");
    for (auto& r : rows_) {
      const bool xc = r.get_x(c), zc = r.get_z(c), xt = r.get_x(t), zt = r.get_z(t);
      if (xc && zt && (xt == zc)) r.negative = !r.negative;
      const bool nxt = xt ^ xc, nzc = zc ^ zt;
      r.set(t, nxt ? (zt ? 'Y' : 'X') : (zt ? 'Z' : 'I'));
      r.set(c, xc ? (nzc ? 'Y' : 'X') : (nzc ? 'Z' : 'I'));
    }
  }
  void cz(int a, int b) {
    h(b);
    cnot(a, b);
    h(b);
  }
  // Pauli gate: flips the sign of every row that anticommutes with P.
  void apply_pauli(const PauliString& p) {
    for (auto& r : rows_)
      if (!r.commutes_with(p)) r.negative = !r.negative;
  }

  // Value of P if determined by the state (+-1), 0 if the outcome is random.
  int peek(const PauliString& p) const {
    check(p);
    for (int i = n_; i < 2 * n_; ++i)
      if (!rows_[i].commutes_with(p)) return 0;
    return deterministic_value(p);
  }

  // Projective measurement.  forced = +-1 selects that branch when the
  // outcome is random; forced = 0 draws it from rng.
  MeasureResult measure(const PauliString& p, std::mt19937_64* rng, int forced = 0) {
    check(p);
    int pivot = -1;
    for (int i = n_; i < 2 * n_; ++i)
      if (!rows_[i].commutes_with(p)) {
        pivot = i;
        break;
      }
    if (pivot < 0) return {deterministic_value(p), true};
    for (int i = 0; i < 2 * n_; ++i)
      if (i != pivot && !rows_[i].commutes_with(p)) rows_[i].left_multiply(rows_[pivot], i >= n_);
    rows_[pivot - n_] = rows_[pivot];
    int outcome = forced;
    if (outcome == 0) {
      require(rng != nullptr, "tableau: random measurement without a generator");
      outcome = ((*rng)() & 1u) ? -1 : 1;
    }
    PauliString row = p;
    if (outcome < 0) row.negative = !row.negative;
    rows_[pivot] = row;
    return {outcome, false};
  }

  // Stabilizers commute pairwise, destabilizer i anticommutes only with
  // stabilizer i, and destabilizers commute pairwise.
  bool valid() const {
    for (int i = 0; i < 2 * n_; ++i)
      for (int j = i + 1; j < 2 * n_; ++j) {
        const bool anti = !rows_[i].commutes_with(rows_[j]);
        const bool expect = (i < n_ && j == i + n_);
        if (anti != expect) return false;
      }
    return true;
  }

 private:
  void check(const PauliString& p) const { require(p.n == n_, "tableau: Pauli word has the wrong qubit count"); }

  int deterministic_value(const PauliString& p) const {
    PauliString acc(n_);
    for (int i = 0; i < n_; ++i)
      if (!rows_[i].commutes_with(p)) acc.left_multiply(rows_[i + n_]);
    // acc equals +-p up to sign.
    return (acc.negative == p.negative) ? 1 : -1;
  }

  int n_;
  std::vector<PauliString> rows_;
};

// Dense simulator for small registers (qubit q is bit q of the index).
class DenseState {
 public:
  explicit DenseState(int n) : n_(n), amp_(std::size_t{1} << n, cplx{}) {
    require(n >= 1 && n <= 26, "dense: qubit count out of range");
    amp_[0] = 1.0;
  }

  int num_qubits() const { return n_; }
  const std::vector<cplx>& amplitudes() const { return amp_; }

  struct Masks {
    std::uint64_t x = 0, z = 0;
    cplx base = 1.0;
  };
  Masks masks(const PauliString& p) const {
    require(p.n == n_, "dense: Pauli word has the wrong qubit count");
    Masks m;
    int ny = 0;
    for (int q = 0; q < n_; ++q) {
      if (p.get_x(q)) m.x |= std::uint64_t{1} << q;
      if (p.get_z(q)) m.z |= std::uint64_t{1} << q;
      if (p.get_x(q) && p.get_z(q)) ++ny;
    }
    static const cplx ipow[4] = {1.0, cplx(0, 1), -1.0, cplx(0, -1)};
    m.base = ipow[ny % 4] * (p.negative ? -1.0 : 1.0);
    return m;
  }
  // <j| P |k> for j = k ^ x.
  static cplx element(const Masks& m, std::uint64_t k) {
    return (std::popcount(k & m.z) & 1) ? -m.base : m.base;
  }

  void apply_pauli(const PauliString& p) {
    const Masks m = masks(p);
    if (m.x == 0) {
      for (std::uint64_t k = 0; k < amp_.size(); ++k) amp_[k] *= element(m, k);
      return;
    }
    for (std::uint64_t k = 0; k < amp_.size(); ++k) {
      const std::uint64_t j = k ^ m.x;
      if (j < k) continue;
      const cplx ak = amp_[k], aj = amp_[j];
      amp_[j] = element(m, k) * ak;
      amp_[k] = element(m, j) * aj;
    }
  }

  double expectation(const PauliString& p) const {
    const Masks m = masks(p);
    double acc = 0;
    for (std::uint64_t k = 0; k < amp_.size(); ++k)
      acc += std::real(std::conj(amp_[k ^ m.x]) * element(m, k) * amp_[k]);
    return acc;
  }

  void h(int a) {
    const std::uint64_t b = std::uint64_t{1} << a;
    const double r = 1.0 / std::sqrt(2.0);
    for (std::uint64_t k = 0; k < amp_.size(); ++k)
      if (!(k & b)) {
        cplx u = amp_[k], v = amp_[k | b];
        amp_[k] = r * (u + v);
        amp_[k | b] = r * (u - v);
      }
  }
  void s(int a) {
    const std::uint64_t b = std::uint64_t{1} << a;
    for (std::uint64_t k = 0; k < amp_.size(); ++k)
      if (k & b) amp_[k] *= cplx(0, 1);
  }
  void cnot(int c, int t) {
    const std::uint64_t bc = std::uint64_t{1} << c, bt = std::uint64_t{1} << t;
    for (std::uint64_t k = 0; k < amp_.size(); ++k)
      if ((k & bc) && !(k & bt)) std::swap(amp_[k], amp_[k | bt]);
  }
  void cz(int a, int b) {
    const std::uint64_t m = (std::uint64_t{1} << a) | (std::uint64_t{1} << b);
    for (std::uint64_t k = 0; k < amp_.size(); ++k)
      if ((k & m) == m) amp_[k] = -amp_[k];
  }

  // Value if the state is an eigenstate of p (+-1 within 1e-9), else 0.
  int peek(const PauliString& p) const {
    const double e = expectation(p);
    if (std::abs(e - 1) < 1e-9) return 1;
    if (std::abs(e + 1) < 1e-9) return -1;
    return 0;
  }

  MeasureResult measure(const PauliString& p, std::mt19937_64* rng, int forced = 0) {
    const double e = expectation(p);
    const double p_plus = 0.5 * (1 + e);
    MeasureResult res;
    res.deterministic = p_plus > 1 - 1e-12 || p_plus < 1e-12;
    if (res.deterministic) {
      res.outcome = p_plus > 0.5 ? 1 : -1;
    } else if (forced != 0) {
      res.outcome = forced;
    } else {
      require(rng != nullptr, "dense: random measurement without a generator");
      res.outcome = std::uniform_real_distribution<double>(0.0, 1.0)(*rng) < p_plus ? 1 : -1;
    }
    // Project with (1 + outcome P) / 2.
    const Masks m = masks(p);
    const double o = res.outcome;
    double nrm = 0;
    for (std::uint64_t k = 0; k < amp_.size(); ++k) {
      const std::uint64_t j = k ^ m.x;
      if (j < k) continue;
      const cplx ak = amp_[k], aj = amp_[j];
      if (j == k) {
        amp_[k] = 0.5 * (ak + o * element(m, k) * ak);
        nrm += std::norm(amp_[k]);
      } else {
        amp_[k] = 0.5 * (ak + o * element(m, j) * aj);
        amp_[j] = 0.5 * (aj + o * element(m, k) * ak);
        nrm += std::norm(amp_[k]) + std::norm(amp_[j]);
      }
    }
    nrm = std::sqrt(nrm);
    for (auto& a : amp_) a /= nrm;
    return res;
  }

 private:
  int n_;
  std::vector<cplx> amp_;
};

}  // namespace ryd
