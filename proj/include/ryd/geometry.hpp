// Ruby-lattice geometry: sites, triangles, punctures and string paths.
//
// Coordinates (lattice spacing a = nearest-neighbour distance):
//   Bravais vectors  a1 = (4, 0) a,  a2 = (2, 2*sqrt(3)) a.
//   Each unit cell holds an "up" triangle U and a "down" triangle D.  The six
//   sites are the midpoints of Kagome links (Kagome bond length 2a):
//     U: u0 = (1, 0)        u1 = (1.5, sqrt3/2)   u2 = (0.5, sqrt3/2)
//     D: d0 = (1.5, 1.5 sqrt3)  d1 = (0.5, 1.5 sqrt3)  d2 = (1, 2 sqrt3)
//   This is the rho = sqrt(3) Ruby lattice.  Neighbour shells sit at a,
//   sqrt(3) a, 2a, sqrt(7) a, so R_b = 2.4a blockades exactly six neighbours.
//   Cylinder mode identifies cells along a2 (circumference cells_y * |a2|).
//
// Kagome vertices of cell (x, y) are A = R, B = R + (2, 0), C = R + (1, sqrt3),
// with R = x a1 + y a2.  Site k of a triangle is the link between two of them:
//   u0 = A-B, u1 = B-C, u2 = C-A,
//   d0 = C(x,y)-A(x,y+1), d1 = C(x,y)-B(x-1,y+1), d2 = A(x,y+1)-B(x-1,y+1).
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ryd/core.hpp"

namespace ryd {

enum class BoundaryY { open, periodic };

struct LatticeSpec {
  int cells_x = 1;
  int cells_y = 1;
  BoundaryY boundary_y = BoundaryY::open;
  double spacing = 1.0;

  void validate() const {
    require(cells_x >= 1, "cells_x must be >= 1");
    require(cells_y >= 1, "cells_y must be >= 1");
    require(spacing > 0, "spacing must be positive");
  }
};

enum class SiteTag { bulk, e_boundary, m_boundary };

struct Site {
  double x = 0, y = 0;  // unwrapped position, units of length
  int triangle = -1;
  int cell_x = 0, cell_y = 0;
  int slot = 0;  // 0..2 up triangle, 3..5 down triangle
  double detuning_scale = 1.0;
  SiteTag tag = SiteTag::bulk;
  int puncture = -1;  // owning puncture for boundary sites
};

struct Neighbor {
  int i, j;
  double r;
};

struct PunctureInfo {
  std::vector<std::pair<int, int>> removed_cells;
  double cx = 0, cy = 0;        // centre of the removed sites
  std::vector<int> e_segment;   // site indices, detuning reduced
  std::vector<int> m_segment;
};

namespace detail {
inline constexpr std::array<std::array<double, 2>, 6> kSlotOffset = {{
    {1.0, 0.0},
    {1.5, kSqrt3 / 2},
    {0.5, kSqrt3 / 2},
    {1.5, 1.5 * kSqrt3},
    {0.5, 1.5 * kSqrt3},
    {1.0, 2.0 * kSqrt3},
}};
inline constexpr double kEps = 1e-9;
}  // namespace detail

class Lattice {
 public:
  LatticeSpec spec;
  std::vector<Site> sites;
  std::vector<std::array<int, 3>> triangles;
  std::vector<Neighbor> adjacency;  // all image pairs with r <= adjacency_cutoff
  double adjacency_cutoff = 0;      // units of a
  std::vector<PunctureInfo> punctures;

  bool periodic() const { return spec.boundary_y == BoundaryY::periodic; }
  int num_sites() const { return static_cast<int>(sites.size()); }
  int num_triangles() const { return static_cast<int>(triangles.size()); }

  // Translation that maps the cylinder onto itself.
  std::array<double, 2> period() const {
    return {2.0 * spec.cells_y * spec.spacing, 2.0 * kSqrt3 * spec.cells_y * spec.spacing};
  }

  std::array<double, 2> displacement(int i, int j) const {
    double dx = sites[j].x - sites[i].x, dy = sites[j].y - sites[i].y;
    if (!periodic()) return {dx, dy};
    auto L = period();
    double best = 1e300;
    std::array<double, 2> out{dx, dy};
    for (int k = -2; k <= 2; ++k) {
      double ex = dx + k * L[0], ey = dy + k * L[1];
      double d = ex * ex + ey * ey;
      if (d < best) {
        best = d;
        out = {ex, ey};
      }
    }
    return out;
  }

  double distance(int i, int j) const {
    auto d = displacement(i, j);
    return std::hypot(d[0], d[1]);
  }

  // Every (i<j, image) pair within cutoff (units of a).  On narrow cylinders a
  // pair can appear more than once, one entry per periodic image.
  std::vector<Neighbor> pairs_within(double cutoff) const {
    std::vector<Neighbor> out;
    const double c = cutoff * spec.spacing + detail::kEps;
    auto L = period();
    const int kmax = periodic() ? 2 : 0;
    for (int i = 0; i < num_sites(); ++i) {
      for (int j = i + 1; j < num_sites(); ++j) {
        for (int k = -kmax; k <= kmax; ++k) {
          double dx = sites[j].x - sites[i].x + k * L[0];
          double dy = sites[j].y - sites[i].y + k * L[1];
          double r = std::hypot(dx, dy);
          if (r <= c) out.push_back({i, j, r / spec.spacing});
        }
      }
    }
    return out;
  }

  int site_at(int cx, int cy, int slot) const {
    auto it = index_.find(key(cx, cy, slot));
    return it == index_.end() ? -1 : it->second;
  }

  int wrap_y(int y) const {
    if (!periodic()) return y;
    int m = spec.cells_y;
    return ((y % m) + m) % m;
  }

  void rebuild_index() {
    index_.clear();
    for (int i = 0; i < num_sites(); ++i)
      index_[key(sites[i].cell_x, sites[i].cell_y, sites[i].slot)] = i;
  }

 private:
  static long long key(int cx, int cy, int slot) {
    return (static_cast<long long>(cx) * 1000003LL + cy) * 8 + slot;
  }
  std::map<long long, int> index_;
};

inline Lattice build_ruby_lattice(const LatticeSpec& spec, double adjacency_cutoff = std::sqrt(7.0)) {
  spec.validate();
  Lattice lat;
  lat.spec = spec;
  lat.adjacency_cutoff = adjacency_cutoff;
  const double a = spec.spacing;
  for (int x = 0; x < spec.cells_x; ++x) {
    for (int y = 0; y < spec.cells_y; ++y) {
      const double rx = 4.0 * x + 2.0 * y, ry = 2.0 * kSqrt3 * y;
      for (int half = 0; half < 2; ++half) {
        std::array<int, 3> tri{};
        for (int k = 0; k < 3; ++k) {
          const int slot = 3 * half + k;
          Site s;
          s.x = a * (rx + detail::kSlotOffset[slot][0]);
          s.y = a * (ry + detail::kSlotOffset[slot][1]);
          s.cell_x = x;
          s.cell_y = y;
          s.slot = slot;
          s.triangle = lat.num_triangles();
          tri[k] = lat.num_sites();
          lat.sites.push_back(s);
        }
        lat.triangles.push_back(tri);
      }
    }
  }
  lat.rebuild_index();
  lat.adjacency = lat.pairs_within(adjacency_cutoff);
  return lat;
}

// ---------------------------------------------------------------------------
// Kagome vertices and hexagons (used by path construction)

struct VertexKey {
  int kind;  // 0 = A, 1 = B, 2 = C
  int x, y;
  auto operator<=>(const VertexKey&) const = default;
};

inline std::pair<VertexKey, VertexKey> site_vertices(const Lattice& lat, int i) {
  const Site& s = lat.sites[i];
  const int x = s.cell_x, y = s.cell_y;
  auto V = [&](int kind, int vx, int vy) { return VertexKey{kind, vx, lat.wrap_y(vy)}; };
  switch (s.slot) {
    case 0: return {V(0, x, y), V(1, x, y)};
    case 1: return {V(1, x, y), V(2, x, y)};
    case 2: return {V(2, x, y), V(0, x, y)};
    case 3: return {V(2, x, y), V(0, x, y + 1)};
    case 4: return {V(2, x, y), V(1, x - 1, y + 1)};
    default: return {V(0, x, y + 1), V(1, x - 1, y + 1)};
  }
}

// Number of present sites (Kagome links) touching each vertex.
inline std::map<VertexKey, int> vertex_degrees(const Lattice& lat) {
  std::map<VertexKey, int> deg;
  for (int i = 0; i < lat.num_sites(); ++i) {
    auto [a, b] = site_vertices(lat, i);
    ++deg[a];
    ++deg[b];
  }
  return deg;
}

// Every site borders exactly one Kagome hexagon; hexagon (hx, hy) is centred
// at (3, sqrt3) + hx a1 + hy a2.
inline std::pair<int, int> hexagon_of(const Lattice& lat, int i) {
  static constexpr std::array<std::array<int, 2>, 6> kHexCell = {{
      {0, -1}, {0, 0}, {-1, 0}, {0, 0}, {-1, 0}, {-1, 1},
  }};
  const Site& s = lat.sites[i];
  return {s.cell_x + kHexCell[s.slot][0], lat.wrap_y(s.cell_y + kHexCell[s.slot][1])};
}

inline std::map<std::pair<int, int>, std::vector<int>> hexagon_members(const Lattice& lat) {
  std::map<std::pair<int, int>, std::vector<int>> out;
  for (int i = 0; i < lat.num_sites(); ++i) out[hexagon_of(lat, i)].push_back(i);
  return out;
}

// ---------------------------------------------------------------------------
// Punctures

enum class SegmentRule { all_m, all_e, half, explicit_sites };

struct PunctureSpec {
  std::vector<std::pair<int, int>> removed_cells;
  SegmentRule rule = SegmentRule::half;
  // For explicit_sites: (cell_x, cell_y, slot) of the e-segment sites.
  std::vector<std::array<int, 3>> e_sites;
  double edge_detuning_ratio = 0.48;
};

// Sites within this distance (units of a) of a removed site form the puncture
// boundary.  2a is the outer edge of the blockaded shell.
inline constexpr double kBoundaryReach = 2.0;

inline Lattice apply_puncture(const Lattice& lat, const PunctureSpec& p) {
  require(!p.removed_cells.empty(), "puncture: empty removal set");
  require(p.edge_detuning_ratio > 0, "puncture: edge detuning ratio must be positive");
  const auto& sp = lat.spec;
  std::set<std::pair<int, int>> cells(p.removed_cells.begin(), p.removed_cells.end());
  for (auto [cx, cy] : cells) {
    require(cx >= 1 && cx <= sp.cells_x - 2,
            "puncture: cell (" + std::to_string(cx) + "," + std::to_string(cy) + ") touches the outer edge");
    if (lat.periodic())
      require(cy >= 0 && cy < sp.cells_y, "puncture: cell y out of range");
    else
      require(cy >= 1 && cy <= sp.cells_y - 2,
              "puncture: cell (" + std::to_string(cx) + "," + std::to_string(cy) + ") touches the outer edge");
    for (int slot = 0; slot < 6; ++slot)
      require(lat.site_at(cx, cy, slot) >= 0, "puncture: cell already removed (overlapping punctures)");
  }

  std::vector<int> removed;
  for (int i = 0; i < lat.num_sites(); ++i)
    if (cells.count({lat.sites[i].cell_x, lat.sites[i].cell_y})) removed.push_back(i);

  // Centre: removed positions unwrapped relative to the first removed site.
  double cx = 0, cy = 0;
  for (int i : removed) {
    auto d = lat.displacement(removed[0], i);
    cx += d[0];
    cy += d[1];
  }
  cx = lat.sites[removed[0]].x + cx / removed.size();
  cy = lat.sites[removed[0]].y + cy / removed.size();

  std::vector<int> boundary;
  std::vector<char> is_removed(lat.num_sites(), 0);
  for (int i : removed) is_removed[i] = 1;
  const double reach = kBoundaryReach * sp.spacing + detail::kEps;
  for (int i = 0; i < lat.num_sites(); ++i) {
    if (is_removed[i]) continue;
    for (int j : removed) {
      if (lat.distance(i, j) <= reach) {
        require(lat.sites[i].puncture < 0, "puncture: boundary overlaps an existing puncture");
        boundary.push_back(i);
        break;
      }
    }
  }

  // Angle of each boundary site around the centre (minimal image).
  auto angle_of = [&](int i) {
    double dx = lat.sites[i].x - cx, dy = lat.sites[i].y - cy;
    if (lat.periodic()) {
      auto L = lat.period();
      double best = 1e300, bx = dx, by = dy;
      for (int k = -2; k <= 2; ++k) {
        double ex = dx + k * L[0], ey = dy + k * L[1];
        if (ex * ex + ey * ey < best) {
          best = ex * ex + ey * ey;
          bx = ex;
          by = ey;
        }
      }
      dx = bx;
      dy = by;
    }
    return std::atan2(dy, dx);
  };

  std::set<int> e_set;
  switch (p.rule) {
    case SegmentRule::all_m: break;
    case SegmentRule::all_e: e_set.insert(boundary.begin(), boundary.end()); break;
    case SegmentRule::half:
      for (int i : boundary) {
        double th = angle_of(i);
        if (th >= -1e-12 && th < kPi - 1e-12) e_set.insert(i);
      }
      break;
    case SegmentRule::explicit_sites:
      for (auto& e : p.e_sites) {
        int i = lat.site_at(e[0], e[1], e[2]);
        require(i >= 0 && std::find(boundary.begin(), boundary.end(), i) != boundary.end(),
                "puncture: explicit e-site is not on the puncture boundary");
        e_set.insert(i);
      }
      break;
  }

  // Rebuild with removed sites dropped and indices compacted.
  Lattice out;
  out.spec = lat.spec;
  out.adjacency_cutoff = lat.adjacency_cutoff;
  std::vector<int> remap(lat.num_sites(), -1);
  for (int i = 0; i < lat.num_sites(); ++i) {
    if (is_removed[i]) continue;
    remap[i] = out.num_sites();
    out.sites.push_back(lat.sites[i]);
  }
  for (const auto& t : lat.triangles) {
    if (is_removed[t[0]]) continue;
    std::array<int, 3> nt{remap[t[0]], remap[t[1]], remap[t[2]]};
    for (int k = 0; k < 3; ++k) out.sites[nt[k]].triangle = out.num_triangles();
    out.triangles.push_back(nt);
  }
  for (auto pi : lat.punctures) {
    for (auto& v : pi.e_segment) v = remap[v];
    for (auto& v : pi.m_segment) v = remap[v];
    out.punctures.push_back(pi);
  }
  PunctureInfo info;
  info.removed_cells.assign(cells.begin(), cells.end());
  info.cx = cx;
  info.cy = cy;
  const int pid = static_cast<int>(out.punctures.size());
  for (int i : boundary) {
    Site& s = out.sites[remap[i]];
    s.puncture = pid;
    if (e_set.count(i)) {
      s.tag = SiteTag::e_boundary;
      s.detuning_scale = p.edge_detuning_ratio;
      info.e_segment.push_back(remap[i]);
    } else {
      s.tag = SiteTag::m_boundary;
      info.m_segment.push_back(remap[i]);
    }
  }
  out.punctures.push_back(info);
  out.rebuild_index();
  out.adjacency = out.pairs_within(out.adjacency_cutoff);
  return out;
}

// ---------------------------------------------------------------------------
// String paths

enum class StringKind { Z, Xdual };
enum class Topology { open, loop };

struct StringPath {
  StringKind kind = StringKind::Z;
  std::vector<int> sites;
  Topology topology = Topology::open;
  std::optional<std::pair<std::string, std::string>> anchors;
  int winding = 0;
  std::string id;
};

inline const char* to_string(StringKind k) { return k == StringKind::Z ? "Z" : "Xdual"; }
inline const char* to_string(Topology t) { return t == Topology::open ? "open" : "loop"; }

// Triangles touched by a path, with the sites hit in each.
inline std::map<int, std::vector<int>> triangle_cuts(const Lattice& lat, const StringPath& s) {
  std::map<int, std::vector<int>> cuts;
  std::set<int> seen;
  for (int i : s.sites) {
    require(i >= 0 && i < lat.num_sites(), "path: site index out of range");
    require(seen.insert(i).second, "path: repeated site " + std::to_string(i));
    cuts[lat.sites[i].triangle].push_back(i);
  }
  return cuts;
}

// Z-paths cut each triangle at two sites; the dual X-path holds the third.
// Applied to an X-path it returns the two complementary sites per triangle,
// so dual_path(dual_path(s)) covers the same triangles as s.
inline StringPath dual_path(const Lattice& lat, const StringPath& s) {
  StringPath out;
  out.topology = s.topology;
  out.anchors = s.anchors;
  out.winding = s.winding;
  out.id = s.id.empty() ? std::string() : s.id + "'";
  auto cuts = triangle_cuts(lat, s);
  // Preserve path order: triangles in order of first appearance.
  std::vector<int> order;
  std::set<int> done;
  for (int i : s.sites) {
    int t = lat.sites[i].triangle;
    if (done.insert(t).second) order.push_back(t);
  }
  if (s.kind == StringKind::Z) {
    out.kind = StringKind::Xdual;
    for (int t : order) {
      const auto& c = cuts[t];
      require(c.size() == 2, "dual_path: triangle " + std::to_string(t) + " cut at " +
                                 std::to_string(c.size()) + " site(s), need exactly 2");
      for (int k : lat.triangles[t])
        if (k != c[0] && k != c[1]) out.sites.push_back(k);
    }
  } else {
    out.kind = StringKind::Z;
    for (int t : order) {
      const auto& c = cuts[t];
      require(c.size() == 1, "dual_path: X-path must visit one site per triangle");
      for (int k : lat.triangles[t])
        if (k != c[0]) out.sites.push_back(k);
    }
  }
  return out;
}

// Closed Z loop at column c: the links touching the vertices B(c-1, y) for all
// y, i.e. sites d1, d2 of every down triangle in column c.  Its dual is the
// d0 site of the same triangles.
inline StringPath loop_path(const Lattice& lat, int column, StringKind kind) {
  require(lat.periodic(), "loop_path: lattice is not a cylinder");
  require(column >= 0 && column < lat.spec.cells_x, "loop_path: column out of range");
  StringPath z;
  z.kind = StringKind::Z;
  z.topology = Topology::loop;
  z.winding = 1;
  z.id = "loop" + std::to_string(column);
  for (int y = 0; y < lat.spec.cells_y; ++y) {
    int s1 = lat.site_at(column, y, 4), s2 = lat.site_at(column, y, 5);
    require(s1 >= 0 && s2 >= 0, "loop_path: column " + std::to_string(column) + " crosses a puncture");
    z.sites.push_back(s1);
    z.sites.push_back(s2);
  }
  if (kind == StringKind::Z) return z;
  auto x = dual_path(lat, z);
  x.id = "xloop" + std::to_string(column);
  return x;
}

// Short open strings away from the lattice edge.
//  Z: the two sites of one triangle that meet at a fully coordinated Kagome
//     vertex (a dual path entering and leaving through distinct hexagons).
//  Xdual: two links of different triangles sharing a vertex, both far
//     endpoints fully coordinated and distinct.
// Cut pairs around an edge vertex of coordination 2 are excluded: there both
// hexagons are the exterior, so the string is closed.
inline std::vector<StringPath> open_strings(const Lattice& lat, StringKind kind) {
  auto deg = vertex_degrees(lat);
  std::vector<StringPath> out;
  auto full = [&](const VertexKey& v) { return deg[v] == 4; };
  if (kind == StringKind::Z) {
    for (int t = 0; t < lat.num_triangles(); ++t) {
      const auto& tr = lat.triangles[t];
      for (int a = 0; a < 3; ++a) {
        for (int b = a + 1; b < 3; ++b) {
          auto [p1, p2] = site_vertices(lat, tr[a]);
          auto [q1, q2] = site_vertices(lat, tr[b]);
          VertexKey shared = (p1 == q1 || p1 == q2) ? p1 : p2;
          if (!full(shared)) continue;
          StringPath s;
          s.kind = StringKind::Z;
          s.sites = {tr[a], tr[b]};
          s.id = "openZ_t" + std::to_string(t) + "_" + std::to_string(a) + std::to_string(b);
          out.push_back(s);
        }
      }
    }
  } else {
    std::map<VertexKey, std::vector<int>> touching;
    for (int i = 0; i < lat.num_sites(); ++i) {
      auto [a, b] = site_vertices(lat, i);
      touching[a].push_back(i);
      touching[b].push_back(i);
    }
    for (auto& [v, links] : touching) {
      for (std::size_t p = 0; p < links.size(); ++p) {
        for (std::size_t q = p + 1; q < links.size(); ++q) {
          int i = links[p], j = links[q];
          if (lat.sites[i].triangle == lat.sites[j].triangle) continue;
          auto [i1, i2] = site_vertices(lat, i);
          auto [j1, j2] = site_vertices(lat, j);
          VertexKey ei = (i1 == v) ? i2 : i1, ej = (j1 == v) ? j2 : j1;
          if (ei == ej || !full(ei) || !full(ej)) continue;
          StringPath s;
          s.kind = StringKind::Xdual;
          s.sites = {i, j};
          s.id = "openX_" + std::to_string(i) + "_" + std::to_string(j);
          out.push_back(s);
        }
      }
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Connector paths between puncture boundary segments.

struct Anchor {
  int puncture = 0;
  char segment = 'm';  // 'e' or 'm'

  std::string label() const { return "p" + std::to_string(puncture) + ":" + segment; }

  static Anchor parse(const std::string& s) {
    // "p0:m"
    require(s.size() >= 4 && s[0] == 'p', "anchor: expected pN:e or pN:m, got '" + s + "'");
    auto colon = s.find(':');
    require(colon != std::string::npos && colon + 2 == s.size(), "anchor: malformed '" + s + "'");
    Anchor a;
    a.puncture = std::stoi(s.substr(1, colon - 1));
    a.segment = s[colon + 1];
    require(a.segment == 'e' || a.segment == 'm', "anchor: segment must be e or m");
    return a;
  }
};

// Shortest dual path that leaves one puncture and enters another.  The walk
// alternates between crossing a triangle (enter at one site, leave at another)
// and crossing an intact hexagon to the next triangle.  For Z strings the
// entry site of the first triangle and the exit site of the last one lie on
// the m-segments; for Xdual strings the third site of the first and last
// triangles lies on the e-segments and the result is the dual of the walk.
inline StringPath connector_path(const Lattice& lat, const Anchor& from, const Anchor& to, StringKind kind) {
  const char want = (kind == StringKind::Z) ? 'm' : 'e';
  require(from.segment == want && to.segment == want,
          std::string("connector_path: ") + to_string(kind) + " strings connect " + want +
              "-segments, got " + from.label() + " -> " + to.label());
  const int np = static_cast<int>(lat.punctures.size());
  require(from.puncture >= 0 && from.puncture < np && to.puncture >= 0 && to.puncture < np,
          "connector_path: puncture index out of range");
  require(from.puncture != to.puncture, "connector_path: anchors on the same puncture");

  auto seg = [&](const Anchor& a) {
    const auto& pi = lat.punctures[a.puncture];
    const auto& v = a.segment == 'e' ? pi.e_segment : pi.m_segment;
    return std::set<int>(v.begin(), v.end());
  };
  const auto src = seg(from), dst = seg(to);
  auto members = hexagon_members(lat);
  auto intact = [&](std::pair<int, int> h) { return members[h].size() == 6; };

  auto third = [&](int t, int in, int out) {
    for (int k : lat.triangles[t])
      if (k != in && k != out) return k;
    return -1;
  };

  // BFS over crossings (in, out) of a triangle, encoded as 3*in + slot(out).
  const int n = lat.num_sites();
  auto local = [&](int site) {
    const auto& tr = lat.triangles[lat.sites[site].triangle];
    return site == tr[0] ? 0 : site == tr[1] ? 1 : 2;
  };
  auto enc = [&](int in, int out) { return 3 * in + local(out); };
  std::vector<int> prev(3 * n, -2);
  std::queue<std::pair<int, int>> q;
  for (int t = 0; t < lat.num_triangles(); ++t) {
    for (int in : lat.triangles[t]) {
      if (intact(hexagon_of(lat, in))) continue;  // must border a hole
      for (int out : lat.triangles[t]) {
        if (out == in) continue;
        int anchor_site = (kind == StringKind::Z) ? in : third(t, in, out);
        if (!src.count(anchor_site)) continue;
        prev[enc(in, out)] = -1;
        q.push({in, out});
      }
    }
  }
  int goal = -1;
  while (!q.empty() && goal < 0) {
    auto [in, out] = q.front();
    q.pop();
    const int t = lat.sites[in].triangle;
    const auto h = hexagon_of(lat, out);
    if (!intact(h)) {
      int anchor_site = (kind == StringKind::Z) ? out : third(t, in, out);
      if (dst.count(anchor_site)) goal = enc(in, out);
      continue;
    }
    for (int nxt : members[h]) {
      if (lat.sites[nxt].triangle == t) continue;
      for (int nout : lat.triangles[lat.sites[nxt].triangle]) {
        if (nout == nxt || prev[enc(nxt, nout)] != -2) continue;
        prev[enc(nxt, nout)] = enc(in, out);
        q.push({nxt, nout});
      }
    }
  }
  require(goal >= 0, "connector_path: no path between " + from.label() + " and " + to.label());

  std::vector<std::pair<int, int>> steps;
  for (int cur = goal; cur >= 0; cur = prev[cur]) {
    int in = cur / 3;
    steps.push_back({in, lat.triangles[lat.sites[in].triangle][cur % 3]});
  }
  std::reverse(steps.begin(), steps.end());

  StringPath z;
  z.kind = StringKind::Z;
  z.topology = Topology::open;
  std::set<int> tris;
  for (auto [in, out] : steps) {
    require(tris.insert(lat.sites[in].triangle).second, "connector_path: walk revisits a triangle");
    z.sites.push_back(in);
    z.sites.push_back(out);
  }
  z.anchors = std::make_pair(from.label(), to.label());
  z.id = std::string(kind == StringKind::Z ? "S" : "S'") + "_" + from.label() + "_" + to.label();
  if (kind == StringKind::Z) return z;
  auto x = dual_path(lat, z);
  x.id = z.id;
  return x;
}

}  // namespace ryd
