// Ideal-limit oracle: planar surface code (qubits on edges of a square grid)
// with a rough outer boundary and mixed-boundary punctures, plus ancillas
// that control string operators.
//
// Grid: faces (r, c) with 0 <= r < rows, 0 <= c < cols; vertices (r, c) with
// 0 <= r <= rows, 0 <= c <= cols.  Horizontal edge h(r, c) joins vertices
// (r, c) and (r, c+1); vertical edge v(r, c) joins (r, c) and (r+1, c).
// Stars (X on the edges at an active vertex) and plaquettes (Z on the edges
// of an active face) are the generators.
//
// Rough outer boundary: the outer vertex ring carries no star and edges
// between two ring vertices are dropped, so Z strings end there.
// Mixed puncture at face (r, c): the face and its two top corners (r, c),
// (r, c+1) are inactive and the top edge h(r, c) is dropped.  The top corners
// are the rough (m) segment, where Z strings end; the removed face is the
// smooth (e) segment, where X strings end.
#pragma once

#include <map>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <tuple>
#include <array>
#include <string>
#include <vector>

#include "ryd/observables.hpp"
#include "ryd/pauli.hpp"

namespace ryd {

enum class OuterBoundary { rough, smooth };

struct PatchLayout {
  int rows = 7;
  int cols = 11;
  OuterBoundary outer = OuterBoundary::rough;
  std::vector<std::pair<int, int>> punctures{{3, 3}, {3, 7}};  // (row, col) of the removed face
  int ancillas = 2;

  void validate() const {
    require(rows >= 1 && cols >= 1, "patch: rows and cols must be >= 1");
    require(ancillas >= 0, "patch: negative ancilla count");
    std::set<std::pair<int, int>> seen;
    for (auto [r, c] : punctures) {
      require(r >= 1 && r + 1 < rows && c >= 1 && c + 1 < cols,
              "patch: puncture at face (" + std::to_string(r) + "," + std::to_string(c) + ") is not interior");
      for (auto [r2, c2] : seen)
        require(std::abs(r2 - r) > 1 || std::abs(c2 - c) > 1, "patch: punctures overlap or touch");
      seen.insert({r, c});
    }
  }

  static PatchLayout two_punctures() { return {}; }
  static PatchLayout four_punctures() {
    PatchLayout l;
    l.cols = 19;
    l.punctures = {{3, 3}, {3, 7}, {3, 11}, {3, 15}};
    l.ancillas = 4;
    return l;
  }
  // Smallest patch whose loop operators are logical: 3x3 faces, smooth outer
  // boundary, one centre puncture, 23 code qubits.
  static PatchLayout minimal() {
    PatchLayout l;
    l.rows = 3;
    l.cols = 3;
    l.outer = OuterBoundary::smooth;
    l.punctures = {{1, 1}};
    l.ancillas = 1;
    return l;
  }
};

class CodePatch {
 public:
  explicit CodePatch(PatchLayout layout) : layout_(std::move(layout)) {
    layout_.validate();
    const int R = layout_.rows, C = layout_.cols;
    auto ring = [&](int r, int c) { return r == 0 || r == R || c == 0 || c == C; };
    for (int r = 0; r <= R; ++r)
      for (int c = 0; c <= C; ++c)
        if (layout_.outer == OuterBoundary::rough && ring(r, c)) inactive_v_.insert({r, c});
    for (auto [r, c] : layout_.punctures) {
      inactive_f_.insert({r, c});
      inactive_v_.insert({r, c});
      inactive_v_.insert({r, c + 1});
    }
    auto add_edge = [&](char o, int r, int c, std::pair<int, int> a, std::pair<int, int> b) {
      if (inactive_v_.count(a) && inactive_v_.count(b)) return;
      edge_index_[{o, r, c}] = static_cast<int>(edges_.size());
      edges_.push_back({o, r, c});
    };
    for (int r = 0; r <= R; ++r)
      for (int c = 0; c < C; ++c) add_edge('h', r, c, {r, c}, {r, c + 1});
    for (int r = 0; r < R; ++r)
      for (int c = 0; c <= C; ++c) add_edge('v', r, c, {r, c}, {r + 1, c});
    n_code_ = static_cast<int>(edges_.size());

    for (int r = 0; r <= R; ++r)
      for (int c = 0; c <= C; ++c) {
        if (inactive_v_.count({r, c})) continue;
        std::vector<int> q;
        for (auto e : std::vector<EdgeKey>{{'h', r, c}, {'h', r, c - 1}, {'v', r, c}, {'v', r - 1, c}})
          if (int i = edge(e); i >= 0) q.push_back(i);
        if (!q.empty()) generators_.push_back(PauliString::on(num_qubits(), 'X', q));
      }
    for (int r = 0; r < R; ++r)
      for (int c = 0; c < C; ++c) {
        if (inactive_f_.count({r, c})) continue;
        auto q = face_edges(r, c);
        if (!q.empty()) generators_.push_back(PauliString::on(num_qubits(), 'Z', q));
      }
    for (std::size_t i = 0; i < generators_.size(); ++i)
      for (std::size_t j = i + 1; j < generators_.size(); ++j)
        require(generators_[i].commutes_with(generators_[j]), "patch: generators do not commute");
    // Loops and connectors must be logical operators; a puncture too close to
    // the outer boundary clips its co-loop.
    auto logical = [&](const PauliString& op, const std::string& name) {
      for (const auto& g : generators_)
        require(g.commutes_with(op), "patch: " + name + " is not a logical operator (puncture too close to the edge)");
    };
    for (int p = 0; p < num_punctures(); ++p) {
      logical(z_loop(p), "ZC" + std::to_string(p + 1));
      logical(x_loop(p), "XC" + std::to_string(p + 1));
    }
    for (int p = 0; p + 1 < num_punctures(); ++p) {
      if (layout_.punctures[p].first != layout_.punctures[p + 1].first) continue;
      logical(z_string(p, p + 1), "ZS" + std::to_string(p + 1) + std::to_string(p + 2));
      logical(x_string(p, p + 1), "XS" + std::to_string(p + 1) + std::to_string(p + 2));
    }
  }

  struct EdgeKey {
    char orient;
    int r, c;
    bool operator<(const EdgeKey& o) const { return std::tie(orient, r, c) < std::tie(o.orient, o.r, o.c); }
  };

  const PatchLayout& layout() const { return layout_; }
  int num_code_qubits() const { return n_code_; }
  int num_qubits() const { return n_code_ + layout_.ancillas; }
  int ancilla(int k) const {
    require(k >= 0 && k < layout_.ancillas, "patch: ancilla index out of range");
    return n_code_ + k;
  }
  int num_punctures() const { return static_cast<int>(layout_.punctures.size()); }
  const std::vector<PauliString>& generators() const { return generators_; }
  const std::vector<EdgeKey>& edges() const { return edges_; }

  int edge(EdgeKey e) const {
    auto it = edge_index_.find(e);
    return it == edge_index_.end() ? -1 : it->second;
  }

  std::vector<int> face_edges(int r, int c) const {
    std::vector<int> q;
    for (auto e : std::vector<EdgeKey>{{'h', r, c}, {'h', r + 1, c}, {'v', r, c}, {'v', r, c + 1}})
      if (int i = edge(e); i >= 0) q.push_back(i);
    return q;
  }

  // Rank over GF(2) of the generator set.
  int generator_rank() const { return gf2_rank(generators_); }
  // Number of encoded qubits of the code (ancillas excluded).
  int logical_qubits() const { return n_code_ - generator_rank(); }

  // Z loop around puncture p: the three remaining edges of the removed face.
  std::vector<int> z_loop_edges(int p) const {
    auto [r, c] = puncture(p);
    return face_edges(r, c);
  }
  // X co-loop around puncture p: edges with exactly one endpoint among the
  // four corners of the removed face.
  std::vector<int> x_loop_edges(int p) const {
    auto [r, c] = puncture(p);
    std::set<std::pair<int, int>> corners{{r, c}, {r, c + 1}, {r + 1, c}, {r + 1, c + 1}};
    std::vector<int> q;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      auto [a, b] = endpoints(edges_[i]);
      if (corners.count(a) != corners.count(b)) q.push_back(static_cast<int>(i));
    }
    return q;
  }
  // Z string from the top-right corner of p to the top-left corner of q
  // along the top row of the punctures (m segment to m segment).
  std::vector<int> z_string_edges(int p, int q) const {
    auto [r1, c1, r2, c2] = pair_geometry(p, q);
    std::vector<int> out;
    for (int c = c1 + 1; c < c2; ++c) out.push_back(must_edge({'h', r1, c}));
    return out;
  }
  // X string crossing the vertical edges of the face row from p to q
  // (e segment to e segment).
  std::vector<int> x_string_edges(int p, int q) const {
    auto [r1, c1, r2, c2] = pair_geometry(p, q);
    std::vector<int> out;
    for (int c = c1 + 1; c <= c2; ++c) out.push_back(must_edge({'v', r1, c}));
    return out;
  }

  // Strings from puncture p to the left outer edge along its face row: Z on
  // the horizontal edges up to the top-left corner (rough outer boundary), X
  // across the vertical edges from the outer edge into the removed face
  // (smooth outer boundary).
  std::vector<int> z_edge_string_edges(int p) const {
    auto [r, c] = puncture(p);
    std::vector<int> out;
    for (int k = 0; k < c; ++k)
      if (int i = edge({'h', r, k}); i >= 0) out.push_back(i);
    return out;
  }
  std::vector<int> x_edge_string_edges(int p) const {
    auto [r, c] = puncture(p);
    std::vector<int> out;
    for (int k = 0; k <= c; ++k)
      if (int i = edge({'v', r, k}); i >= 0) out.push_back(i);
    return out;
  }

  PauliString z_loop(int p) const { return PauliString::on(num_qubits(), 'Z', z_loop_edges(p)); }
  PauliString x_loop(int p) const { return PauliString::on(num_qubits(), 'X', x_loop_edges(p)); }
  PauliString z_string(int p, int q) const { return PauliString::on(num_qubits(), 'Z', z_string_edges(p, q)); }
  PauliString x_string(int p, int q) const { return PauliString::on(num_qubits(), 'X', x_string_edges(p, q)); }
  PauliString z_edge_string(int p) const { return PauliString::on(num_qubits(), 'Z', z_edge_string_edges(p)); }
  PauliString x_edge_string(int p) const { return PauliString::on(num_qubits(), 'X', x_edge_string_edges(p)); }

  // Named operators: ZC1, XC1, ZS12, XS12, ZL1, XL1 (1-based punctures), or a raw
  // Pauli text such as "X0 Z5"; ancillas may be written a1, a2, ... in
  // words like "Xa1 Xa2".
  PauliString named(const std::string& name) const {
    auto num = [&](char ch) {
      int v = ch - '0';
      require(v >= 1 && v <= num_punctures(), "patch: puncture label out of range in '" + name + "'");
      return v - 1;
    };
    if (name.size() == 3 && name[1] == 'C' && (name[0] == 'Z' || name[0] == 'X'))
      return name[0] == 'Z' ? z_loop(num(name[2])) : x_loop(num(name[2]));
    if (name.size() == 3 && name[1] == 'L' && (name[0] == 'Z' || name[0] == 'X'))
      return name[0] == 'Z' ? z_edge_string(num(name[2])) : x_edge_string(num(name[2]));
    if (name.size() == 4 && name[1] == 'S' && (name[0] == 'Z' || name[0] == 'X'))
      return name[0] == 'Z' ? z_string(num(name[2]), num(name[3])) : x_string(num(name[2]), num(name[3]));
    std::string text;
    std::istringstream is(name);
    std::string tok;
    while (is >> tok) {
      std::string sign;
      if (tok[0] == '-' || tok[0] == '+') {
        sign = tok.substr(0, 1);
        tok = tok.substr(1);
      }
      if (tok.size() >= 3 && tok[1] == 'a') tok = tok.substr(0, 1) + std::to_string(ancilla(std::stoi(tok.substr(2)) - 1));
      text += sign + tok + " ";
    }
    return PauliString::parse(num_qubits(), text);
  }

  static int gf2_rank(std::vector<PauliString> rows) {
    int rank = 0;
    if (rows.empty()) return 0;
    const int n = rows.front().n;
    for (int col = 0; col < 2 * n && rank < static_cast<int>(rows.size()); ++col) {
      auto bit = [&](const PauliString& p) { return col < n ? p.get_x(col) : p.get_z(col - n); };
      int piv = -1;
      for (std::size_t i = rank; i < rows.size(); ++i)
        if (bit(rows[i])) {
          piv = static_cast<int>(i);
          break;
        }
      if (piv < 0) continue;
      std::swap(rows[rank], rows[piv]);
      for (std::size_t i = 0; i < rows.size(); ++i)
        if (static_cast<int>(i) != rank && bit(rows[i])) rows[i].left_multiply(rows[rank], false);
      ++rank;
    }
    return rank;
  }

 private:
  std::pair<int, int> puncture(int p) const {
    require(p >= 0 && p < num_punctures(), "patch: puncture index out of range");
    return layout_.punctures[p];
  }
  std::array<int, 4> pair_geometry(int p, int q) const {
    auto [r1, c1] = puncture(p);
    auto [r2, c2] = puncture(q);
    require(r1 == r2 && c1 < c2, "patch: connector strings need two punctures in one row, left to right");
    return {r1, c1, r2, c2};
  }
  int must_edge(EdgeKey e) const {
    int i = edge(e);
    require(i >= 0, "patch: connector crosses a missing edge");
    return i;
  }
  static std::pair<std::pair<int, int>, std::pair<int, int>> endpoints(const EdgeKey& e) {
    if (e.orient == 'h') return {{e.r, e.c}, {e.r, e.c + 1}};
    return {{e.r, e.c}, {e.r + 1, e.c}};
  }

  PatchLayout layout_;
  std::set<std::pair<int, int>> inactive_v_, inactive_f_;
  std::vector<EdgeKey> edges_;
  std::map<EdgeKey, int> edge_index_;
  int n_code_ = 0;
  std::vector<PauliString> generators_;
};

// ---------------------------------------------------------------------------
// Simulation context: tableau (or dense oracle) + seeded outcome generator.

struct ProtocolRecord {
  int step = 0;
  std::string op;
  std::string target;
  int outcome = 0;  // +-1 for measurements, 0 for gates
  bool deterministic = true;
  std::string note;
};

template <class State>
class CodeSim {
 public:
  CodeSim(const CodePatch& patch, std::uint64_t seed) : patch_(&patch), state_(patch.num_qubits()), rng_(seed) {}

  const CodePatch& patch() const { return *patch_; }
  State& state() { return state_; }
  const State& state() const { return state_; }
  std::mt19937_64& rng() { return rng_; }
  const std::vector<ProtocolRecord>& log() const { return log_; }

  // Fix every code generator, then Z_C and X_C' of every puncture, to +1.
  // Operators that are products of earlier ones must already be +1.
  void prepare_identity_sector() {
    for (const auto& g : patch_->generators()) force(g, 1, "generator");
    for (int p = 0; p < patch_->num_punctures(); ++p) {
      force(patch_->z_loop(p), 1, "ZC" + std::to_string(p + 1));
      force(patch_->x_loop(p), 1, "XC" + std::to_string(p + 1));
    }
  }

  void prepare_ancilla_plus(int k) {
    state_.h(patch_->ancilla(k));
    record("prep_plus", "a" + std::to_string(k + 1), 0, true);
  }

  void apply(const PauliString& p, const std::string& label) {
    state_.apply_pauli(p);
    record("pauli", label, 0, true);
  }

  // Controlled string: CZ (kind Z) or CNOT (kind X) from the ancilla onto
  // every qubit of the word.
  void controlled_string(int k, const PauliString& word, StringKind kind, const std::string& label) {
    const int a = patch_->ancilla(k);
    for (int q = 0; q < patch_->num_code_qubits(); ++q) {
      const char c = word.at(q);
      if (c == 'I') continue;
      if (kind == StringKind::Z) {
        require(c == 'Z', "controlled Z string: word '" + label + "' is not a Z word");
        state_.cz(a, q);
      } else {
        require(c == 'X', "controlled X string: word '" + label + "' is not an X word");
        state_.cnot(a, q);
      }
    }
    record(kind == StringKind::Z ? "cz_string" : "cx_string", label + "@a" + std::to_string(k + 1), 0, true);
  }

  MeasureResult measure(const PauliString& p, const std::string& label, int force_outcome = 0) {
    auto r = state_.measure(p, &rng_, force_outcome);
    record("measure", label, r.outcome, r.deterministic);
    return r;
  }

  // Outcome must be `want`; random outcomes are projected onto it, and a
  // deterministic opposite outcome is a zero-probability branch.
  void force(const PauliString& p, int want, const std::string& label) {
    auto r = state_.measure(p, &rng_, want);
    if (r.outcome != want)
      throw ValidationError("codesim: " + label + " is deterministically " + std::to_string(r.outcome) +
                            "; requested branch has zero probability");
    record("project", label, r.outcome, r.deterministic);
  }

  // Bell measurement of an ancilla pair: X X first, then Z Z.
  std::pair<int, int> bell_measure(int k1, int k2) {
    const int a = patch_->ancilla(k1), b = patch_->ancilla(k2);
    const auto xx = state_.measure(PauliString::on(patch_->num_qubits(), 'X', {a, b}), &rng_, 0);
    record("measure", "Xa" + std::to_string(k1 + 1) + " Xa" + std::to_string(k2 + 1), xx.outcome, xx.deterministic);
    const auto zz = state_.measure(PauliString::on(patch_->num_qubits(), 'Z', {a, b}), &rng_, 0);
    record("measure", "Za" + std::to_string(k1 + 1) + " Za" + std::to_string(k2 + 1), zz.outcome, zz.deterministic);
    return {xx.outcome, zz.outcome};
  }

  int peek(const PauliString& p) const { return state_.peek(p); }

  // (Z_C, X_C', Z_S, X_S') for punctures p < q; random -> 0.
  std::array<int, 4> signature(int p = 0, int q = 1) const {
    return {peek(patch_->z_loop(p)), peek(patch_->x_loop(p)), peek(patch_->z_string(p, q)),
            peek(patch_->x_string(p, q))};
  }

  GroundStateLabel label(int p = 0, int q = 1) const {
    auto s = signature(p, q);
    return classify_ground_state(std::array<double, 4>{double(s[0]), double(s[1]), double(s[2]), double(s[3])});
  }

  void record(const std::string& op, const std::string& target, int outcome, bool det, std::string note = {}) {
    log_.push_back({static_cast<int>(log_.size()), op, target, outcome, det, std::move(note)});
  }

 private:
  const CodePatch* patch_;
  State state_;
  std::mt19937_64 rng_;
  std::vector<ProtocolRecord> log_;
};

using TableauSim = CodeSim<Tableau>;
using DenseSim = CodeSim<DenseState>;

// ---------------------------------------------------------------------------
// Reference states and protocols

enum class Table1State { I, e, m, epsilon, plus, minus };

inline const char* to_string(Table1State s) {
  constexpr const char* names[] = {"I", "e", "m", "epsilon", "plus", "minus"};
  return names[static_cast<int>(s)];
}

// Prepares one of the six reference states on punctures p1, p2.
template <class State>
void prepare_reference(CodeSim<State>& sim, Table1State which) {
  const auto& patch = sim.patch();
  sim.prepare_identity_sector();
  switch (which) {
    case Table1State::I: break;
    case Table1State::e: sim.apply(patch.x_string(0, 1), "XS12"); break;
    case Table1State::m: sim.apply(patch.z_string(0, 1), "ZS12"); break;
    case Table1State::epsilon:
      sim.apply(patch.x_string(0, 1), "XS12");
      sim.apply(patch.z_string(0, 1), "ZS12");
      break;
    case Table1State::plus:
    case Table1State::minus: {
      const int v = which == Table1State::plus ? 1 : -1;
      sim.force(patch.z_string(0, 1), v, "ZS12");
      sim.force(patch.x_string(0, 1), v, "XS12");
      break;
    }
  }
}

struct PrepOutcome {
  int xx = 0;            // X_a1 X_a2 outcome: +1 -> Psi+, -1 -> Psi-
  int zz = 0;            // Z_a1 Z_a2 outcome (always -1 after the projection)
  std::array<int, 4> signature{};
  GroundStateLabel label;
  int zs_xs = 0;         // value of Z_S X_S' after the measurement
  int zc_xc = 0;         // value of Z_C X_C'
};

// Two-puncture preparation: ancillas in |+>|+>, CX along S' from a1 and CZ
// along S from a2, projection onto Z_a1 Z_a2 = -1, then Bell measurement.
template <class State>
PrepOutcome run_two_puncture_prep(CodeSim<State>& sim) {
  const auto& patch = sim.patch();
  require(patch.layout().ancillas >= 2 && patch.num_punctures() >= 2, "prep: needs two punctures and two ancillas");
  sim.prepare_identity_sector();
  sim.prepare_ancilla_plus(0);
  sim.prepare_ancilla_plus(1);
  sim.controlled_string(0, patch.x_string(0, 1), StringKind::Xdual, "XS12");
  sim.controlled_string(1, patch.z_string(0, 1), StringKind::Z, "ZS12");
  sim.force(patch.named("Za1 Za2"), -1, "Za1 Za2");
  PrepOutcome out;
  auto [xx, zz] = sim.bell_measure(0, 1);
  out.xx = xx;
  out.zz = zz;
  out.signature = sim.signature(0, 1);
  out.label = sim.label(0, 1);
  PauliString zx = patch.z_string(0, 1);
  zx.left_multiply(patch.x_string(0, 1));
  out.zs_xs = sim.peek(zx);
  PauliString cc = patch.z_loop(0);
  cc.left_multiply(patch.x_loop(0));
  out.zc_xc = sim.peek(cc);
  return out;
}

struct FourPunctureOutcome {
  int pair_product = 0;   // (Z_S12 X_S'12)(Z_S34 X_S'34)
  int pair12 = 0;         // Z_S12 X_S'12 alone
  int zz23 = 0;           // outcome of Z_a2 Z_a3 (when measured)
  int zc1_zc3 = 0;        // Z_C1 Z_C3 afterwards
  int zc1_zc3_before = 0;
};

// Four punctures, four ancillas: controlled strings on pairs (12) and (34),
// projection onto the ancilla constraints X_a1..X_a4 = +1, Z_a1 Z_a2 = -1,
// Z_a3 Z_a4 = -1; optionally followed by a Z_a2 Z_a3 measurement.
template <class State>
FourPunctureOutcome run_four_puncture_prep(CodeSim<State>& sim, bool measure_z23) {
  const auto& patch = sim.patch();
  require(patch.layout().ancillas >= 4 && patch.num_punctures() >= 4, "prep: needs four punctures and four ancillas");
  sim.prepare_identity_sector();
  for (int k = 0; k < 4; ++k) sim.prepare_ancilla_plus(k);
  sim.controlled_string(0, patch.x_string(0, 1), StringKind::Xdual, "XS12");
  sim.controlled_string(1, patch.z_string(0, 1), StringKind::Z, "ZS12");
  sim.controlled_string(2, patch.x_string(2, 3), StringKind::Xdual, "XS34");
  sim.controlled_string(3, patch.z_string(2, 3), StringKind::Z, "ZS34");
  sim.force(patch.named("Xa1 Xa2 Xa3 Xa4"), 1, "Xa1 Xa2 Xa3 Xa4");
  sim.force(patch.named("Za1 Za2"), -1, "Za1 Za2");
  sim.force(patch.named("Za3 Za4"), -1, "Za3 Za4");
  FourPunctureOutcome out;
  PauliString p12 = patch.z_string(0, 1);
  p12.left_multiply(patch.x_string(0, 1));
  PauliString p34 = patch.z_string(2, 3);
  p34.left_multiply(patch.x_string(2, 3));
  out.pair12 = sim.peek(p12);
  PauliString both = p12;
  both.left_multiply(p34);
  out.pair_product = sim.peek(both);
  PauliString zc = patch.z_loop(0);
  zc.left_multiply(patch.z_loop(2));
  out.zc1_zc3_before = sim.peek(zc);
  if (measure_z23) {
    out.zz23 = sim.measure(patch.named("Za2 Za3"), "Za2 Za3").outcome;
    out.zc1_zc3 = sim.peek(zc);
  }
  return out;
}

}  // namespace ryd
