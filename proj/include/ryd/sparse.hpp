// Compressed-row sparse operator with complex entries.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cstdint>
#include <ostream>
#include <vector>

#include "ryd/core.hpp"

namespace ryd {

struct Triplet {
  std::uint64_t row, col;
  cplx value;
};

class SparseOperator {
 public:
  SparseOperator() = default;

  // Builds rows independently via fill(row, out_entries).  Duplicate columns
  // within a row are summed.  fill must be safe to call concurrently.
  template <class RowFill>
  static SparseOperator from_rows(std::uint64_t dim, RowFill&& fill, bool hermitian) {
    SparseOperator op;
    op.dim_ = dim;
    op.hermitian_ = hermitian;
    std::vector<std::vector<std::pair<std::uint64_t, cplx>>> rows(dim);
#pragma omp parallel for schedule(static)
    for (std::int64_t r = 0; r < static_cast<std::int64_t>(dim); ++r) {
      auto& e = rows[r];
      fill(static_cast<std::uint64_t>(r), e);
      std::sort(e.begin(), e.end(), [](auto& a, auto& b) { return a.first < b.first; });
      std::size_t w = 0;
      for (std::size_t i = 0; i < e.size(); ++i) {
        if (w > 0 && e[w - 1].first == e[i].first)
          e[w - 1].second += e[i].second;
        else
          e[w++] = e[i];
      }
      e.resize(w);
    }
    op.row_ptr_.assign(dim + 1, 0);
    for (std::uint64_t r = 0; r < dim; ++r) op.row_ptr_[r + 1] = op.row_ptr_[r] + rows[r].size();
    op.col_.resize(op.row_ptr_[dim]);
    op.val_.resize(op.row_ptr_[dim]);
    for (std::uint64_t r = 0; r < dim; ++r) {
      std::size_t p = op.row_ptr_[r];
      for (auto& [c, v] : rows[r]) {
        op.col_[p] = c;
        op.val_[p] = v;
        ++p;
      }
    }
    op.refresh_real();
    return op;
  }

  static SparseOperator from_triplets(std::uint64_t dim, const std::vector<Triplet>& t, bool hermitian) {
    std::vector<std::vector<std::pair<std::uint64_t, cplx>>> rows(dim);
    for (auto& x : t) {
      require(x.row < dim && x.col < dim, "sparse: triplet index out of range");
      rows[x.row].push_back({x.col, x.value});
    }
    return from_rows(
        dim, [&](std::uint64_t r, auto& out) { out = rows[r]; }, hermitian);
  }

  std::uint64_t dim() const { return dim_; }
  std::size_t nnz() const { return val_.size(); }
  bool hermitian_flag() const { return hermitian_; }
  bool is_real() const { return real_; }

  // y = A x.  Rows are independent, so the parallel loop is deterministic.
  template <class Scalar>
  void apply(const Scalar* x, Scalar* y) const {
    if constexpr (std::is_same_v<Scalar, double>) {
      require(real_, "sparse: real matvec on a complex operator");
#pragma omp parallel for schedule(static)
      for (std::int64_t r = 0; r < static_cast<std::int64_t>(dim_); ++r) {
        double acc = 0;
        for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) acc += re_[p] * x[col_[p]];
        y[r] = acc;
      }
    } else {
#pragma omp parallel for schedule(static)
      for (std::int64_t r = 0; r < static_cast<std::int64_t>(dim_); ++r) {
        cplx acc = 0;
        for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) acc += val_[p] * x[col_[p]];
        y[r] = acc;
      }
    }
  }

  template <class Vec>
  Vec operator*(const Vec& x) const {
    Vec y(x.size());
    apply(x.data(), y.data());
    return y;
  }

  cplx coeff(std::uint64_t r, std::uint64_t c) const {
    auto b = col_.begin() + row_ptr_[r], e = col_.begin() + row_ptr_[r + 1];
    auto it = std::lower_bound(b, e, c);
    return (it != e && *it == c) ? val_[it - col_.begin()] : cplx{};
  }

  // max |A_ij - conj(A_ji)| over stored entries.
  double hermiticity_defect() const {
    double worst = 0;
    for (std::uint64_t r = 0; r < dim_; ++r)
      for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p)
        worst = std::max(worst, std::abs(val_[p] - std::conj(coeff(col_[p], r))));
    return worst;
  }

  Eigen::MatrixXcd to_dense() const {
    require(dim_ <= 8192, "sparse: refusing to densify a large operator");
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(dim_, dim_);
    for (std::uint64_t r = 0; r < dim_; ++r)
      for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) m(r, col_[p]) += val_[p];
    return m;
  }

  template <class F>
  void for_each(F&& f) const {
    for (std::uint64_t r = 0; r < dim_; ++r)
      for (std::size_t p = row_ptr_[r]; p < row_ptr_[r + 1]; ++p) f(r, col_[p], val_[p]);
  }

  // Coordinate list, one "row col re im" line per stored entry.
  void write_coo(std::ostream& os) const {
    os << "# dim " << dim_ << " nnz " << nnz() << " hermitian " << (hermitian_ ? 1 : 0) << "\n";
    os.precision(17);
    for_each([&](std::uint64_t r, std::uint64_t c, cplx v) {
      os << r << ' ' << c << ' ' << v.real() << ' ' << v.imag() << '\n';
    });
  }

 private:
  void refresh_real() {
    real_ = std::all_of(val_.begin(), val_.end(), [](cplx v) { return v.imag() == 0.0; });
    re_.clear();
    if (real_) {
      re_.resize(val_.size());
      for (std::size_t i = 0; i < val_.size(); ++i) re_[i] = val_[i].real();
    }
  }

  std::uint64_t dim_ = 0;
  bool hermitian_ = false;
  bool real_ = true;
  std::vector<std::size_t> row_ptr_;
  std::vector<std::uint64_t> col_;
  std::vector<cplx> val_;
  std::vector<double> re_;
};

}  // namespace ryd
