#ifndef IRKPREC_BANDED_HPP
#define IRKPREC_BANDED_HPP

#include "irkprec/core.hpp"
#include "irkprec/linop.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace irkprec {

/// Exact solver for a cyclic banded matrix A = B + C, where B holds the entries with
/// |i - j| <= p and C the periodic corner entries. B is factored by band LU without
/// pivoting; C enters through a rank-2p Sherman-Morrison-Woodbury correction.
class CyclicBandedLU {
 public:
  CyclicBandedLU() = default;

  explicit CyclicBandedLU(const SparseMatrix& A) : n_(A.rows()) {
    if (A.rows() != A.cols()) throw DimensionMismatch("CyclicBandedLU: matrix not square");
    p_ = cyclic_half_bandwidth(A);
    if (2 * p_ + 1 >= n_) p_ = n_ - 1;  // no separable corners; plain band LU of full width
    width_ = 2 * p_ + 1;
    band_.assign(static_cast<std::size_t>(n_ * width_), 0.0);

    std::vector<double> row_norm(static_cast<std::size_t>(n_), 0.0);
    for (Index i = 0; i < A.outerSize(); ++i)
      for (SparseMatrix::InnerIterator it(A, i); it; ++it) {
        const Index r = it.row(), c = it.col();
        row_norm[static_cast<std::size_t>(r)] += std::abs(it.value());
        if (std::abs(r - c) <= p_) {
          at(r, c) += it.value();
        } else {
          corners_.push_back({r, c, it.value()});
        }
      }
    factor_band(row_norm);
    if (!corners_.empty()) build_capacitance();
  }

  Index size() const { return n_; }
  Index half_bandwidth() const { return p_; }

  void solve(const Vector& b, Vector& x) const {
    require_same_size(b.size(), n_, "CyclicBandedLU::solve");
    x = b;
    band_solve(x);
    if (corners_.empty()) return;
    Vector t = Vector::Zero(static_cast<Index>(corner_rows_.size()));
    for (const auto& e : corners_) t[slot_of(e.row)] += e.value * x[e.col];
    x.noalias() -= Z_ * cap_.solve(t);
  }

  Vector solve(const Vector& b) const {
    Vector x;
    solve(b, x);
    return x;
  }

 private:
  struct Entry {
    Index row, col;
    double value;
  };

  double& at(Index i, Index j) { return band_[static_cast<std::size_t>(i * width_ + (j - i + p_))]; }
  double at(Index i, Index j) const {
    return band_[static_cast<std::size_t>(i * width_ + (j - i + p_))];
  }

  void factor_band(const std::vector<double>& row_norm) {
    for (Index k = 0; k < n_; ++k) {
      const double pivot = at(k, k);
      if (std::abs(pivot) <= 1e-14 * row_norm[static_cast<std::size_t>(k)] || pivot == 0.0)
        throw FactorizationFailure("banded LU: zero pivot at row " + std::to_string(k));
      const Index last = std::min(n_ - 1, k + p_);
      for (Index i = k + 1; i <= last; ++i) {
        const double l = at(i, k) / pivot;
        at(i, k) = l;
        if (l == 0.0) continue;
        for (Index j = k + 1; j <= last; ++j) at(i, j) -= l * at(k, j);
      }
    }
  }

  void band_solve(Vector& x) const {
    for (Index i = 0; i < n_; ++i) {
      double acc = x[i];
      for (Index j = std::max<Index>(0, i - p_); j < i; ++j) acc -= at(i, j) * x[j];
      x[i] = acc;
    }
    for (Index i = n_ - 1; i >= 0; --i) {
      double acc = x[i];
      const Index last = std::min(n_ - 1, i + p_);
      for (Index j = i + 1; j <= last; ++j) acc -= at(i, j) * x[j];
      x[i] = acc / at(i, i);
    }
  }

  Index slot_of(Index row) const {
    const auto it = std::lower_bound(corner_rows_.begin(), corner_rows_.end(), row);
    return static_cast<Index>(it - corner_rows_.begin());
  }

  void build_capacitance() {
    for (const auto& e : corners_) corner_rows_.push_back(e.row);
    std::sort(corner_rows_.begin(), corner_rows_.end());
    corner_rows_.erase(std::unique(corner_rows_.begin(), corner_rows_.end()), corner_rows_.end());
    const Index m = static_cast<Index>(corner_rows_.size());
    Z_.resize(n_, m);
    Vector col(n_);
    for (Index k = 0; k < m; ++k) {
      col.setZero();
      col[corner_rows_[static_cast<std::size_t>(k)]] = 1.0;
      band_solve(col);
      Z_.col(k) = col;
    }
    Matrix K = Matrix::Identity(m, m);
    for (const auto& e : corners_) K.row(slot_of(e.row)) += e.value * Z_.row(e.col);
    cap_ = Eigen::PartialPivLU<Matrix>(K);
    if (!std::isfinite(cap_.rcond()) || cap_.rcond() < 1e-14)
      throw FactorizationFailure("cyclic banded LU: singular corner correction");
  }

  Index n_ = 0;
  Index p_ = 0;
  Index width_ = 1;
  std::vector<double> band_;
  std::vector<Entry> corners_;
  std::vector<Index> corner_rows_;
  Matrix Z_;
  Eigen::PartialPivLU<Matrix> cap_;
};

}  // namespace irkprec

#endif  // IRKPREC_BANDED_HPP
