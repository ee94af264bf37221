// String and loop observables, their normalisation, and phase / ground-state
// classification.
#pragma once

#include <array>
#include <bit>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "ryd/basis.hpp"
#include "ryd/geometry.hpp"
#include "ryd/operators.hpp"
#include "ryd/spectra.hpp"

namespace ryd {

inline std::uint64_t site_mask(const StringPath& s) {
  std::uint64_t m = 0;
  for (int i : s.sites) {
    require(i >= 0 && i < 62, "string: site index does not fit a 64-bit mask");
    m ^= std::uint64_t{1} << i;
  }
  return m;
}

// <psi| prod_{i in mask} Z_i |psi>, Z = 1 - 2n.
inline double expect_z_mask(const StateVector& psi, const OccupationBasis& basis, std::uint64_t mask) {
  require(static_cast<std::uint64_t>(psi.size()) == basis.dim(), "expect: state/basis dimension mismatch");
  double acc = 0;
#pragma omp parallel for reduction(+ : acc) schedule(static)
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(basis.dim()); ++k) {
    const double p = std::norm(psi[k]);
    if (p == 0) continue;
    acc += (std::popcount(basis.config(k) & mask) & 1) ? -p : p;
  }
  return acc;
}

inline double expect_z_string(const StateVector& psi, const OccupationBasis& basis, const StringPath& s) {
  require(s.kind == StringKind::Z, "expect_z_string: path '" + s.id + "' is not a Z path");
  return expect_z_mask(psi, basis, site_mask(s));
}

// Basis-state permutation of the direct X string.  In the full basis this is
// the bit flip.  In the triangle-restricted basis each site acts with the
// 4-state operator |g><r_k| + |r_i><r_j| + h.c., which is what the triangle
// duality maps Z_i Z_j onto.
inline std::uint64_t x_string_image(const OccupationBasis& basis, const Lattice& lat, const std::vector<int>& sites,
                                    std::uint64_t k) {
  if (basis.mode() == BasisMode::full) {
    for (int i : sites) k ^= std::uint64_t{1} << i;
    return k;
  }
  for (int i : sites) {
    const int t = lat.sites[i].triangle;
    const auto& tr = lat.triangles[t];
    const unsigned e = (i == tr[0]) ? 1u : (i == tr[1]) ? 2u : 3u;
    const unsigned d = basis.digit(k, t);
    const unsigned nd = d == 0 ? e : d == e ? 0u : 6u - e - d;
    k = (k & ~(std::uint64_t{3} << (2 * t))) | (std::uint64_t(nd) << (2 * t));
  }
  return k;
}

inline void check_x_path(const Lattice& lat, const StringPath& s) {
  require(s.kind == StringKind::Xdual, "x-string: path '" + s.id + "' is not an Xdual path");
  for (auto& [t, c] : triangle_cuts(lat, s))
    require(c.size() == 1, "x-string: path visits triangle " + std::to_string(t) + " more than once");
}

// <psi| prod X |psi> evaluated directly on the amplitudes.
inline double expect_x_direct(const StateVector& psi, const Lattice& lat, const OccupationBasis& basis,
                              const StringPath& s) {
  check_x_path(lat, s);
  require(basis.matches(lat), "expect_x_direct: basis does not enumerate this lattice");
  require(static_cast<std::uint64_t>(psi.size()) == basis.dim(), "expect_x_direct: dimension mismatch");
  double acc = 0;
#pragma omp parallel for reduction(+ : acc) schedule(static)
  for (std::int64_t k = 0; k < static_cast<std::int64_t>(basis.dim()); ++k) {
    if (psi[k] == cplx{}) continue;
    acc += std::real(std::conj(psi[x_string_image(basis, lat, s.sites, k)]) * psi[k]);
  }
  return acc;
}

// State after the duality evolution, e^{-i tau* H'} psi.  Z strings measured
// on it give the X strings of the original state.
inline StateVector dual_frame(const StateVector& psi, const Lattice& lat, const OccupationBasis& basis,
                              const ModelParams& evo = ModelParams::evolution()) {
  return evolve_dual(psi, lat, basis, evo, duality_time(evo.rabi));
}

// X string via the duality route: evolve, then measure the pre-image Z string.
inline double expect_x_string(const StateVector& psi, const StringPath& s, const Lattice& lat,
                              const OccupationBasis& basis, const ModelParams& evo = ModelParams::evolution()) {
  check_x_path(lat, s);
  const StringPath pre = dual_path(lat, s);
  return expect_z_string(dual_frame(psi, lat, basis, evo), basis, pre);
}

// ---------------------------------------------------------------------------
// Normalisation over a family of parallel strings

struct StringMeasurement {
  std::string path_id;
  double raw = 0;         // mean raw expectation over the family
  double normalized = 0;  // mean normalised ratio over neighbouring pairs
  double stderr_ = 0;     // population standard error over pairs
  int samples = 1;
  bool has_normalized = false;
  bool indeterminate = false;
  std::vector<double> raw_values;

  double value() const { return has_normalized && !indeterminate ? normalized : raw; }
  double error() const { return stderr_; }

  static StringMeasurement exact(double v, std::string id = {}) {
    StringMeasurement m;
    m.path_id = std::move(id);
    m.raw = v;
    m.raw_values = {v};
    return m;
  }
};

// From single expectations v_i and neighbouring joint expectations
// j_i = <S_i S_{i+1}>: ratio_i = (v_i + v_{i+1}) / (2 sqrt(j_i)).
inline StringMeasurement normalize_family(const std::vector<double>& singles, const std::vector<double>& joints,
                                          std::string id = {}) {
  require(singles.size() >= 2, "normalized_expectation: need at least two parallel strings");
  require(joints.size() == singles.size() - 1, "normalized_expectation: need one joint value per neighbouring pair");
  StringMeasurement m;
  m.path_id = std::move(id);
  m.raw_values = singles;
  m.samples = static_cast<int>(joints.size());
  double s = 0;
  for (double v : singles) s += v;
  m.raw = s / singles.size();
  std::vector<double> ratios;
  for (std::size_t i = 0; i < joints.size(); ++i) {
    if (!(joints[i] > 0)) {
      m.indeterminate = true;
      continue;
    }
    ratios.push_back((singles[i] + singles[i + 1]) / (2 * std::sqrt(joints[i])));
  }
  if (ratios.empty()) return m;
  double mean = 0;
  for (double r : ratios) mean += r;
  mean /= ratios.size();
  double var = 0;
  for (double r : ratios) var += (r - mean) * (r - mean);
  var /= ratios.size();
  m.normalized = mean;
  m.stderr_ = std::sqrt(var / ratios.size());
  m.has_normalized = true;
  return m;
}

// Normalised expectation of a family of parallel strings of one kind.  X
// families are measured through one shared duality evolution.
inline StringMeasurement normalized_expectation(const StateVector& psi, const Lattice& lat,
                                                const OccupationBasis& basis, const std::vector<StringPath>& family,
                                                const ModelParams& evo = ModelParams::evolution()) {
  require(family.size() >= 2, "normalized_expectation: need at least two parallel strings");
  const StringKind kind = family.front().kind;
  std::vector<std::uint64_t> masks;
  for (const auto& s : family) {
    require(s.kind == kind, "normalized_expectation: mixed string kinds in one family");
    if (kind == StringKind::Xdual) {
      check_x_path(lat, s);
      masks.push_back(site_mask(dual_path(lat, s)));
    } else {
      masks.push_back(site_mask(s));
    }
  }
  const StateVector frame = (kind == StringKind::Xdual) ? dual_frame(psi, lat, basis, evo) : psi;
  std::vector<double> singles, joints;
  for (auto m : masks) singles.push_back(expect_z_mask(frame, basis, m));
  for (std::size_t i = 0; i + 1 < masks.size(); ++i)
    joints.push_back(expect_z_mask(frame, basis, masks[i] ^ masks[i + 1]));
  return normalize_family(singles, joints, family.front().id);
}

// ---------------------------------------------------------------------------
// Classification

enum class PhaseLabel { trivial, QSL, VBS, indeterminate };

inline const char* to_string(PhaseLabel p) {
  switch (p) {
    case PhaseLabel::trivial: return "trivial";
    case PhaseLabel::QSL: return "QSL";
    case PhaseLabel::VBS: return "VBS";
    default: return "indeterminate";
  }
}

struct PhaseThresholds {
  double vanishing = 0.1;  // |v| below this counts as zero
  double finite = 0.3;     // |v| above this counts as finite
};

inline PhaseLabel classify_phase(const StringMeasurement& closed_z, const StringMeasurement& closed_x,
                                 const StringMeasurement& open_z, const StringMeasurement& open_x,
                                 const PhaseThresholds& th = {}) {
  auto zero = [&](const StringMeasurement& m) { return std::abs(m.value()) < th.vanishing; };
  auto fin = [&](const StringMeasurement& m) { return std::abs(m.value()) > th.finite; };
  if (zero(closed_z) && fin(closed_x)) return PhaseLabel::trivial;
  if (zero(closed_x) && fin(closed_z)) return PhaseLabel::VBS;
  if (fin(closed_z) && fin(closed_x) && zero(open_z) && zero(open_x)) return PhaseLabel::QSL;
  return PhaseLabel::indeterminate;
}

enum class GroundStateKind { I, e, m, epsilon, plus, minus, indeterminate };

inline const char* to_string(GroundStateKind g) {
  switch (g) {
    case GroundStateKind::I: return "I";
    case GroundStateKind::e: return "e";
    case GroundStateKind::m: return "m";
    case GroundStateKind::epsilon: return "epsilon";
    case GroundStateKind::plus: return "plus";
    case GroundStateKind::minus: return "minus";
    default: return "indeterminate";
  }
}

struct GroundStateLabel {
  GroundStateKind kind = GroundStateKind::indeterminate;
  std::array<double, 4> values{};  // Z_C, X_C', Z_S, X_S'
  std::array<int, 4> pattern{};    // ternary image; 2 marks an ambiguous value
};

// Signature rows (Z_C, X_C', Z_S, X_S') of the six reference states.
inline constexpr std::array<std::pair<GroundStateKind, std::array<int, 4>>, 6> kSignatureTable = {{
    {GroundStateKind::I, {1, 1, 0, 0}},
    {GroundStateKind::e, {-1, 1, 0, 0}},
    {GroundStateKind::m, {1, -1, 0, 0}},
    {GroundStateKind::epsilon, {-1, -1, 0, 0}},
    {GroundStateKind::plus, {0, 0, 1, 1}},
    {GroundStateKind::minus, {0, 0, -1, -1}},
}};

// True when |v| <= k * stderr.
inline bool consistent_with_zero(const StringMeasurement& m, double k = 2.0) {
  return std::abs(m.value()) <= k * m.error();
}

// 0 when within max(tol, 2 stderr) of zero, +-1 when within tol of +-1,
// 2 otherwise.
inline int ternary(const StringMeasurement& m, double tol) {
  const double v = m.value();
  if (std::abs(v) <= std::max(tol, 2.0 * m.error())) return 0;
  if (std::abs(v) >= 1.0 - tol) return v > 0 ? 1 : -1;
  return 2;
}

inline GroundStateLabel classify_ground_state(const StringMeasurement& zc, const StringMeasurement& xc,
                                              const StringMeasurement& zs, const StringMeasurement& xs,
                                              double tol = 0.1) {
  GroundStateLabel out;
  const StringMeasurement* ms[4] = {&zc, &xc, &zs, &xs};
  for (int i = 0; i < 4; ++i) {
    out.values[i] = ms[i]->value();
    out.pattern[i] = ternary(*ms[i], tol);
  }
  for (const auto& [kind, row] : kSignatureTable)
    if (row == out.pattern) out.kind = kind;
  return out;
}

inline GroundStateLabel classify_ground_state(const std::array<double, 4>& v, double tol = 1e-9) {
  return classify_ground_state(StringMeasurement::exact(v[0]), StringMeasurement::exact(v[1]),
                               StringMeasurement::exact(v[2]), StringMeasurement::exact(v[3]), tol);
}

}  // namespace ryd
