// Copyright 2026 The tcqsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense and sparse complex operators on tensor-product Hilbert spaces.
//
// Factor ordering is big-endian: site 0 is the most significant index of the
// composite basis, so for factor_dims [d0, d1, ..., dk] the basis label
// (i0, i1, ..., ik) maps to ((i0 * d1 + i1) * d2 + ...) + ik.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "tcqsim/errors.hpp"

namespace tcq {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;
using SparseMatrixRM = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;
inline constexpr cplx kI{0.0, 1.0};

enum class Axis { x, y, z };

inline char axis_letter(Axis a) {
  switch (a) {
    case Axis::x:
      return 'x';
    case Axis::y:
      return 'y';
    default:
      return 'z';
  }
}

/// max_ij |A - A^dagger|_ij
inline double hermiticity_error(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("hermiticity_error: matrix is not square");
  if (a.size() == 0) return 0.0;
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

/// Square operator in canonical triplet form: entries sorted by (row, col),
/// duplicates summed, exact zeros removed.
class SparseOperator {
 public:
  struct Entry {
    std::size_t row;
    std::size_t col;
    cplx value;
  };

  SparseOperator() = default;

  SparseOperator(std::size_t dim, std::vector<Entry> entries, std::vector<std::size_t> support = {})
      : dim_(dim), entries_(std::move(entries)), support_(std::move(support)) {
    canonicalize();
  }

  static SparseOperator identity(std::size_t dim) {
    std::vector<Entry> e;
    e.reserve(dim);
    for (std::size_t i = 0; i < dim; ++i) e.push_back({i, i, 1.0});
    return SparseOperator(dim, std::move(e));
  }

  static SparseOperator from_dense(const ComplexMatrix& m) {
    if (m.rows() != m.cols()) throw ShapeError("SparseOperator::from_dense: matrix is not square");
    std::vector<Entry> e;
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      for (Eigen::Index r = 0; r < m.rows(); ++r)
        if (m(r, c) != cplx{0.0, 0.0})
          e.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c), m(r, c)});
    return SparseOperator(static_cast<std::size_t>(m.rows()), std::move(e));
  }

  std::size_t dim() const noexcept { return dim_; }
  std::size_t nnz() const noexcept { return entries_.size(); }
  const std::vector<Entry>& entries() const noexcept { return entries_; }
  /// Factors of the owning HilbertSpace this operator acts on (empty if unknown).
  const std::vector<std::size_t>& support() const noexcept { return support_; }

  ComplexMatrix to_dense() const {
    ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
    for (const auto& e : entries_) m(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col)) = e.value;
    return m;
  }

  SparseMatrixRM to_eigen() const {
    std::vector<Eigen::Triplet<cplx>> t;
    t.reserve(entries_.size());
    for (const auto& e : entries_)
      t.emplace_back(static_cast<Eigen::Index>(e.row), static_cast<Eigen::Index>(e.col), e.value);
    SparseMatrixRM m(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
    m.setFromTriplets(t.begin(), t.end());
    m.makeCompressed();
    return m;
  }

  SparseOperator adjoint() const {
    std::vector<Entry> e;
    e.reserve(entries_.size());
    for (const auto& x : entries_) e.push_back({x.col, x.row, std::conj(x.value)});
    return SparseOperator(dim_, std::move(e), support_);
  }

  bool is_diagonal() const noexcept {
    return std::all_of(entries_.begin(), entries_.end(), [](const Entry& e) { return e.row == e.col; });
  }

  ComplexVector apply(const ComplexVector& v) const {
    if (static_cast<std::size_t>(v.size()) != dim_) throw ShapeError("SparseOperator::apply: dimension mismatch");
    ComplexVector out = ComplexVector::Zero(v.size());
    for (const auto& e : entries_) out(static_cast<Eigen::Index>(e.row)) += e.value * v(static_cast<Eigen::Index>(e.col));
    return out;
  }

  friend SparseOperator operator*(const SparseOperator& a, const SparseOperator& b) {
    if (a.dim_ != b.dim_) throw ShapeError("SparseOperator product: dimension mismatch");
    // b is row-sorted, so index its rows once.
    std::vector<std::size_t> row_start(b.dim_ + 1, 0);
    for (const auto& e : b.entries_) ++row_start[e.row + 1];
    std::partial_sum(row_start.begin(), row_start.end(), row_start.begin());
    std::vector<Entry> out;
    for (const auto& ea : a.entries_)
      for (std::size_t k = row_start[ea.col]; k < row_start[ea.col + 1]; ++k)
        out.push_back({ea.row, b.entries_[k].col, ea.value * b.entries_[k].value});
    return SparseOperator(a.dim_, std::move(out), merge_support(a.support_, b.support_));
  }

  friend SparseOperator operator+(const SparseOperator& a, const SparseOperator& b) {
    if (a.dim_ != b.dim_) throw ShapeError("SparseOperator sum: dimension mismatch");
    std::vector<Entry> out = a.entries_;
    out.insert(out.end(), b.entries_.begin(), b.entries_.end());
    return SparseOperator(a.dim_, std::move(out), merge_support(a.support_, b.support_));
  }

  friend SparseOperator operator-(const SparseOperator& a, const SparseOperator& b) { return a + (-1.0) * b; }

  friend SparseOperator operator*(cplx s, const SparseOperator& a) {
    std::vector<Entry> out = a.entries_;
    for (auto& e : out) e.value *= s;
    return SparseOperator(a.dim_, std::move(out), a.support_);
  }

  /// Exact equality of canonical forms (support metadata is ignored).
  friend bool operator==(const SparseOperator& a, const SparseOperator& b) {
    if (a.dim_ != b.dim_ || a.entries_.size() != b.entries_.size()) return false;
    for (std::size_t i = 0; i < a.entries_.size(); ++i) {
      const auto& x = a.entries_[i];
      const auto& y = b.entries_[i];
      if (x.row != y.row || x.col != y.col || x.value != y.value) return false;
    }
    return true;
  }

 private:
  static std::vector<std::size_t> merge_support(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
    std::set<std::size_t> s(a.begin(), a.end());
    s.insert(b.begin(), b.end());
    return {s.begin(), s.end()};
  }

  void canonicalize() {
    for (const auto& e : entries_)
      if (e.row >= dim_ || e.col >= dim_) throw RangeError("SparseOperator: entry index out of range");
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });
    std::vector<Entry> merged;
    merged.reserve(entries_.size());
    for (const auto& e : entries_) {
      if (!merged.empty() && merged.back().row == e.row && merged.back().col == e.col)
        merged.back().value += e.value;
      else
        merged.push_back(e);
    }
    std::erase_if(merged, [](const Entry& e) { return e.value == cplx{0.0, 0.0}; });
    entries_ = std::move(merged);
  }

  std::size_t dim_ = 0;
  std::vector<Entry> entries_;
  std::vector<std::size_t> support_;
};

class HilbertSpace {
 public:
  HilbertSpace() = default;
  explicit HilbertSpace(std::vector<std::size_t> factor_dims) : dims_(std::move(factor_dims)) {
    for (auto d : dims_)
      if (d == 0) throw ShapeError("HilbertSpace: zero-dimensional factor");
  }

  const std::vector<std::size_t>& factor_dims() const noexcept { return dims_; }
  std::size_t num_factors() const noexcept { return dims_.size(); }

  std::size_t dim() const noexcept {
    return std::accumulate(dims_.begin(), dims_.end(), std::size_t{1}, std::multiplies<>());
  }

  /// Product of the dimensions of all factors after `site`.
  std::size_t stride(std::size_t site) const {
    if (site >= dims_.size()) throw RangeError("HilbertSpace::stride: site out of range");
    std::size_t s = 1;
    for (std::size_t k = site + 1; k < dims_.size(); ++k) s *= dims_[k];
    return s;
  }

  friend bool operator==(const HilbertSpace&, const HilbertSpace&) = default;

 private:
  std::vector<std::size_t> dims_;
};

struct DensityMatrix {
  HilbertSpace space;
  ComplexMatrix matrix;

  DensityMatrix() = default;
  DensityMatrix(HilbertSpace s, ComplexMatrix m) : space(std::move(s)), matrix(std::move(m)) {
    if (matrix.rows() != matrix.cols() || static_cast<std::size_t>(matrix.rows()) != space.dim())
      throw ShapeError("DensityMatrix: matrix does not match space dimension");
  }

  static DensityMatrix pure(HilbertSpace s, const ComplexVector& psi) {
    if (static_cast<std::size_t>(psi.size()) != s.dim()) throw ShapeError("DensityMatrix::pure: dimension mismatch");
    return DensityMatrix(std::move(s), psi * psi.adjoint());
  }

  cplx trace() const { return matrix.trace(); }
  double hermiticity_error() const { return tcq::hermiticity_error(matrix); }
  double min_eigenvalue() const {
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (matrix + matrix.adjoint()), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("DensityMatrix::min_eigenvalue: eigensolver failed");
    return es.eigenvalues().minCoeff();
  }
};

inline ComplexMatrix identity(std::size_t n) {
  return ComplexMatrix::Identity(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
}

/// Truncated annihilation operator: a[i, i+1] = sqrt(i+1).
inline ComplexMatrix destroy(std::size_t n) {
  if (n < 2) throw ShapeError("destroy: dimension must be at least 2");
  ComplexMatrix a = ComplexMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i + 1 < n; ++i)
    a(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i + 1)) = std::sqrt(static_cast<double>(i + 1));
  return a;
}

inline ComplexMatrix pauli(Axis axis) {
  ComplexMatrix p(2, 2);
  switch (axis) {
    case Axis::x:
      p << 0.0, 1.0, 1.0, 0.0;
      break;
    case Axis::y:
      p << 0.0, -kI, kI, 0.0;
      break;
    case Axis::z:
      p << 1.0, 0.0, 0.0, -1.0;
      break;
  }
  return p;
}

/// |level_a><level_b| in a `dim`-level space.
inline ComplexMatrix transition(std::size_t level_a, std::size_t level_b, std::size_t dim) {
  if (level_a >= dim || level_b >= dim) throw RangeError("transition: level out of range");
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
  m(static_cast<Eigen::Index>(level_a), static_cast<Eigen::Index>(level_b)) = 1.0;
  return m;
}

/// I (x) ... (x) op (x) ... (x) I with `op` on factor `site`.
inline SparseOperator tensor_embed(const ComplexMatrix& op, std::size_t site, const HilbertSpace& space) {
  if (site >= space.num_factors()) throw RangeError("tensor_embed: site out of range");
  const std::size_t d = space.factor_dims()[site];
  if (op.rows() != op.cols() || static_cast<std::size_t>(op.rows()) != d)
    throw ShapeError("tensor_embed: operator is " + std::to_string(op.rows()) + "x" + std::to_string(op.cols()) +
                     " but factor " + std::to_string(site) + " has dimension " + std::to_string(d));
  const std::size_t right = space.stride(site);
  const std::size_t left = space.dim() / (d * right);
  std::vector<SparseOperator::Entry> entries;
  for (Eigen::Index i = 0; i < op.rows(); ++i)
    for (Eigen::Index j = 0; j < op.cols(); ++j) {
      const cplx v = op(i, j);
      if (v == cplx{0.0, 0.0}) continue;
      for (std::size_t l = 0; l < left; ++l)
        for (std::size_t r = 0; r < right; ++r)
          entries.push_back({(l * d + static_cast<std::size_t>(i)) * right + r,
                             (l * d + static_cast<std::size_t>(j)) * right + r, v});
    }
  return SparseOperator(space.dim(), std::move(entries), {site});
}

namespace detail {

inline double relative_scale(const ComplexMatrix& a) { return std::max(1.0, a.cwiseAbs().maxCoeff()); }

}  // namespace detail

/// Matrix exponential. Hermitian and skew-Hermitian inputs go through an
/// eigendecomposition (unitary output to machine precision for the latter);
/// everything else through Pade scaling-and-squaring.
inline ComplexMatrix expm(const ComplexMatrix& a) {
  if (a.rows() != a.cols()) throw ShapeError("expm: matrix is not square");
  if (a.size() == 0) return a;
  const double tol = 1e-14 * detail::relative_scale(a);
  const double herm = (a - a.adjoint()).cwiseAbs().maxCoeff();
  const double skew = (a + a.adjoint()).cwiseAbs().maxCoeff();
  if (herm <= tol || skew <= tol) {
    const bool skew_path = skew <= tol && herm > tol;
    const ComplexMatrix h = skew_path ? ComplexMatrix(-kI * a) : ComplexMatrix(a);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(0.5 * (h + h.adjoint()));
    if (es.info() != Eigen::Success) throw NumericalError("expm: eigensolver failed");
    ComplexVector d(es.eigenvalues().size());
    for (Eigen::Index k = 0; k < d.size(); ++k) {
      const double l = es.eigenvalues()(k);
      d(k) = skew_path ? std::exp(kI * l) : cplx{std::exp(l), 0.0};
    }
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
  }
  return a.exp();
}

/// Reduced density matrix on the factors in `keep` (kept in original order).
inline DensityMatrix partial_trace(const DensityMatrix& rho, const std::set<std::size_t>& keep) {
  if (keep.empty()) throw RangeError("partial_trace: empty keep set");
  const auto& dims = rho.space.factor_dims();
  for (auto s : keep)
    if (s >= dims.size()) throw RangeError("partial_trace: site out of range");
  std::vector<std::size_t> kept_dims, traced_sites, kept_sites(keep.begin(), keep.end());
  for (std::size_t s = 0; s < dims.size(); ++s) {
    if (keep.count(s))
      kept_dims.push_back(dims[s]);
    else
      traced_sites.push_back(s);
  }
  HilbertSpace out_space(kept_dims);
  const std::size_t dk = out_space.dim();
  std::size_t dt = 1;
  for (auto s : traced_sites) dt *= dims[s];

  // Full-space index for (kept multi-index, traced multi-index).
  auto full_index = [&](std::size_t ik, std::size_t it) {
    std::vector<std::size_t> digits(dims.size());
    for (std::size_t k = kept_sites.size(); k-- > 0;) {
      digits[kept_sites[k]] = ik % dims[kept_sites[k]];
      ik /= dims[kept_sites[k]];
    }
    for (std::size_t k = traced_sites.size(); k-- > 0;) {
      digits[traced_sites[k]] = it % dims[traced_sites[k]];
      it /= dims[traced_sites[k]];
    }
    std::size_t idx = 0;
    for (std::size_t s = 0; s < dims.size(); ++s) idx = idx * dims[s] + digits[s];
    return static_cast<Eigen::Index>(idx);
  };

  std::vector<Eigen::Index> map(dk * dt);
  for (std::size_t ik = 0; ik < dk; ++ik)
    for (std::size_t it = 0; it < dt; ++it) map[ik * dt + it] = full_index(ik, it);

  ComplexMatrix out = ComplexMatrix::Zero(static_cast<Eigen::Index>(dk), static_cast<Eigen::Index>(dk));
  for (std::size_t j = 0; j < dk; ++j)
    for (std::size_t i = 0; i < dk; ++i) {
      cplx s{0.0, 0.0};
      for (std::size_t t = 0; t < dt; ++t) s += rho.matrix(map[i * dt + t], map[j * dt + t]);
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s;
    }
  return DensityMatrix(std::move(out_space), std::move(out));
}

/// Tr[op rho]
inline cplx expect(const SparseOperator& op, const DensityMatrix& rho) {
  if (op.dim() != rho.space.dim()) throw ShapeError("expect: operator and state dimensions differ");
  cplx s{0.0, 0.0};
  for (const auto& e : op.entries())
    s += e.value * rho.matrix(static_cast<Eigen::Index>(e.col), static_cast<Eigen::Index>(e.row));
  return s;
}

/// Kronecker product of dense matrices.
inline ComplexMatrix kron(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

/// Largest singular value.
inline double operator_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::BDCSVD<ComplexMatrix> svd(a);
  return svd.singularValues()(0);
}

}  // namespace tcq
