// Occupation-number bases over a lattice.
//
// full:                one bit per site, 2^N states, index == bit mask.
// triangle_restricted: at most one Rydberg excitation per triangle, 4^T
//                      states.  Index = sum_t d_t 4^t with digit d_t = 0 for
//                      the triangle ground state and d_t = k+1 when site k of
//                      triangle t is excited.
#pragma once

#include <cstdint>
#include <vector>

#include "ryd/core.hpp"
#include "ryd/geometry.hpp"

namespace ryd {

enum class BasisMode { full, triangle_restricted };

class OccupationBasis {
 public:
  OccupationBasis() = default;

  OccupationBasis(const Lattice& lat, BasisMode mode) : mode_(mode) {
    n_sites_ = lat.num_sites();
    triangles_ = lat.triangles;
    require(n_sites_ <= 62, "basis: more than 62 sites is not supported");
    if (mode == BasisMode::full) {
      require(n_sites_ <= 30, "basis: full mode limited to 30 sites");
      dim_ = std::uint64_t{1} << n_sites_;
    } else {
      require(2 * triangles_.size() <= 60, "basis: triangle_restricted mode limited to 30 triangles");
      dim_ = std::uint64_t{1} << (2 * triangles_.size());
    }
  }

  BasisMode mode() const { return mode_; }
  std::uint64_t dim() const { return dim_; }
  int num_sites() const { return n_sites_; }
  int num_triangles() const { return static_cast<int>(triangles_.size()); }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }

  // Occupation bit mask (bit i = site i excited) of basis state k.
  std::uint64_t config(std::uint64_t k) const {
    if (mode_ == BasisMode::full) return k;
    std::uint64_t mask = 0;
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
      unsigned d = (k >> (2 * t)) & 3u;
      if (d) mask |= std::uint64_t{1} << triangles_[t][d - 1];
    }
    return mask;
  }

  bool occupied(std::uint64_t k, int site) const { return (config(k) >> site) & 1u; }

  // Inverse of config(); returns false when the mask is outside the basis.
  bool index_of(std::uint64_t mask, std::uint64_t& k) const {
    if (mode_ == BasisMode::full) {
      k = mask;
      return mask < dim_;
    }
    k = 0;
    std::uint64_t seen = 0;
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
      int hits = 0;
      for (int j = 0; j < 3; ++j) {
        if ((mask >> triangles_[t][j]) & 1u) {
          ++hits;
          k |= std::uint64_t(j + 1) << (2 * t);
          seen |= std::uint64_t{1} << triangles_[t][j];
        }
      }
      if (hits > 1) return false;
    }
    return seen == mask;
  }

  unsigned digit(std::uint64_t k, int t) const { return (k >> (2 * t)) & 3u; }

  bool matches(const Lattice& lat) const {
    return lat.num_sites() == n_sites_ && lat.triangles == triangles_;
  }

 private:
  BasisMode mode_ = BasisMode::full;
  int n_sites_ = 0;
  std::vector<std::array<int, 3>> triangles_;
  std::uint64_t dim_ = 0;
};

}  // namespace ryd
