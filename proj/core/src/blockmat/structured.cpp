#include "hivp/blockmat/structured.hpp"

#include <string>

#include "hivp/blockmat/kernels.hpp"

namespace hivp {

BlockDiagonal::BlockDiagonal(std::vector<DenseBlock> blocks) : blocks_(std::move(blocks)) {
  for (const auto& b : blocks_) {
    row_offsets_.push_back(row_offsets_.back() + b.rows());
    col_offsets_.push_back(col_offsets_.back() + b.cols());
  }
}

std::vector<Index> BlockDiagonal::row_dims() const {
  std::vector<Index> d;
  for (const auto& b : blocks_) d.push_back(b.rows());
  return d;
}

std::vector<Index> BlockDiagonal::col_dims() const {
  std::vector<Index> d;
  for (const auto& b : blocks_) d.push_back(b.cols());
  return d;
}

void BlockDiagonal::apply(const Vector& v, Vector& out) const {
  require_dims(v.size(), cols(), "block_diag_matvec");
  out.resize(rows());
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    out.segment(row_offsets_[i], b.rows()) =
        kernels::matvec(b, v.segment(col_offsets_[i], b.cols()));
  }
}

void BlockDiagonal::apply_transpose(const Vector& v, Vector& out) const {
  require_dims(v.size(), rows(), "block_diag_matvec_transpose");
  out.resize(cols());
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    const auto& b = blocks_[i];
    out.segment(col_offsets_[i], b.cols()) =
        kernels::matvec_transpose(b, v.segment(row_offsets_[i], b.rows()));
  }
}

BlockDiagonal BlockDiagonal::transpose() const {
  std::vector<DenseBlock> t;
  t.reserve(blocks_.size());
  for (const auto& b : blocks_) t.emplace_back(b.transpose());
  return BlockDiagonal(std::move(t));
}

DenseBlock BlockDiagonal::dense() const {
  DenseBlock d = DenseBlock::Zero(rows(), cols());
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    d.block(row_offsets_[i], col_offsets_[i], blocks_[i].rows(), blocks_[i].cols()) = blocks_[i];
  }
  return d;
}

std::int64_t BlockDiagonal::storage_bytes() const {
  std::int64_t n = 0;
  for (const auto& b : blocks_) n += b.size();
  return n * static_cast<std::int64_t>(sizeof(double));
}

Vector block_diag_matvec(const BlockDiagonal& a, const Vector& v) {
  Vector out;
  a.apply(v, out);
  return out;
}

BlockLowerBidiagonal::BlockLowerBidiagonal(std::vector<DenseBlock> diagonal,
                                           std::vector<DenseBlock> subdiagonal)
    : diagonal_(std::move(diagonal)), subdiagonal_(std::move(subdiagonal)) {
  const std::size_t n = diagonal_.size();
  if (subdiagonal_.size() + 1 != n && !(n == 0 && subdiagonal_.empty())) {
    throw StructureError("lower bidiagonal: need " + std::to_string(n == 0 ? 0 : n - 1) +
                         " subdiagonal blocks, got " + std::to_string(subdiagonal_.size()));
  }
  for (const auto& d : diagonal_) {
    if (d.rows() != d.cols()) throw StructureError("lower bidiagonal: diagonal block not square");
    dims_.push_back(d.rows());
    offsets_.push_back(offsets_.back() + d.rows());
    unit_diagonal_ = unit_diagonal_ && d.isIdentity(0.0);
  }
  for (std::size_t l = 0; l < subdiagonal_.size(); ++l) {
    const auto& s = subdiagonal_[l];
    if (s.rows() != dims_[l + 1] || s.cols() != dims_[l]) {
      throw DimensionMismatch("lower bidiagonal: subdiagonal block " + std::to_string(l) +
                              " has shape " + std::to_string(s.rows()) + "x" +
                              std::to_string(s.cols()));
    }
  }
}

BlockLowerBidiagonal BlockLowerBidiagonal::unit(const std::vector<Index>& dims,
                                                std::vector<DenseBlock> subdiagonal) {
  std::vector<DenseBlock> diagonal;
  diagonal.reserve(dims.size());
  for (Index d : dims) diagonal.push_back(DenseBlock::Identity(d, d));
  return BlockLowerBidiagonal(std::move(diagonal), std::move(subdiagonal));
}

Vector BlockLowerBidiagonal::apply(const Vector& v) const {
  require_dims(v.size(), rows(), "lower bidiagonal apply");
  Vector out = Vector::Zero(rows());
  for (std::size_t l = 0; l < diagonal_.size(); ++l) {
    auto seg = out.segment(offsets_[l], dims_[l]);
    kernels::matvec_add(diagonal_[l], v.segment(offsets_[l], dims_[l]), seg);
    if (l > 0) kernels::matvec_add(subdiagonal_[l - 1], v.segment(offsets_[l - 1], dims_[l - 1]), seg);
  }
  return out;
}

DenseBlock BlockLowerBidiagonal::dense() const {
  DenseBlock d = DenseBlock::Zero(rows(), rows());
  for (std::size_t l = 0; l < diagonal_.size(); ++l) {
    d.block(offsets_[l], offsets_[l], dims_[l], dims_[l]) = diagonal_[l];
    if (l > 0) d.block(offsets_[l], offsets_[l - 1], dims_[l], dims_[l - 1]) = subdiagonal_[l - 1];
  }
  return d;
}

std::int64_t BlockLowerBidiagonal::storage_bytes() const {
  std::int64_t n = 0;
  for (const auto& b : diagonal_) n += b.size();
  for (const auto& b : subdiagonal_) n += b.size();
  return n * static_cast<std::int64_t>(sizeof(double));
}

void BlockLowerBidiagonal::solve(const Vector& rhs, Vector& out) const {
  if (!unit_diagonal_) throw StructureError("lower bidiagonal solve requires unit diagonal");
  require_dims(rhs.size(), rows(), "lower_bidiag_solve");
  out = rhs;
  for (std::size_t l = 1; l < diagonal_.size(); ++l) {
    kernels::matvec_add(subdiagonal_[l - 1], out.segment(offsets_[l - 1], dims_[l - 1]),
                        out.segment(offsets_[l], dims_[l]), -1.0);
  }
}

void BlockLowerBidiagonal::solve_transpose(const Vector& rhs, Vector& out) const {
  if (!unit_diagonal_) throw StructureError("lower bidiagonal solve requires unit diagonal");
  require_dims(rhs.size(), rows(), "lower_bidiag_solve_transpose");
  out = rhs;
  for (std::size_t l = diagonal_.size(); l-- > 1;) {
    kernels::matvec_transpose_add(subdiagonal_[l - 1], out.segment(offsets_[l], dims_[l]),
                                  out.segment(offsets_[l - 1], dims_[l - 1]), -1.0);
  }
}

Vector lower_bidiag_solve(const BlockLowerBidiagonal& m, const Vector& rhs) {
  Vector out;
  m.solve(rhs, out);
  return out;
}

Vector lower_bidiag_solve_transpose(const BlockLowerBidiagonal& m, const Vector& rhs) {
  Vector out;
  m.solve_transpose(rhs, out);
  return out;
}

ShiftOperator::ShiftOperator(std::vector<Index> activation_dims)
    : dims_(std::move(activation_dims)) {
  if (dims_.size() < 2) throw StructureError("shift operator needs dims a_0..a_L with L >= 1");
}

Index ShiftOperator::input_size() const {
  Index n = 0;
  for (std::size_t l = 1; l < dims_.size(); ++l) n += dims_[l];
  return n;
}

Index ShiftOperator::output_size() const {
  Index n = 0;
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) n += dims_[l];
  return n;
}

void ShiftOperator::apply(const Vector& v, Vector& out) const {
  require_dims(v.size(), input_size(), "shift_apply");
  const Index first = dims_.front();
  const Index moved = output_size() - first;
  out.resize(output_size());
  out.head(first).setZero();
  out.tail(moved) = v.head(moved);
}

void ShiftOperator::apply_transpose(const Vector& v, Vector& out) const {
  require_dims(v.size(), output_size(), "shift_apply_transpose");
  const Index first = dims_.front();
  const Index last = dims_.back();
  const Index moved = output_size() - first;
  out.resize(input_size());
  out.head(moved) = v.tail(moved);
  out.tail(last).setZero();
}

DenseBlock ShiftOperator::dense() const {
  const Index first = dims_.front();
  const Index moved = output_size() - first;
  DenseBlock d = DenseBlock::Zero(output_size(), input_size());
  d.block(first, 0, moved, moved).setIdentity();
  return d;
}

Vector shift_apply(const ShiftOperator& p, const Vector& v) {
  Vector out;
  p.apply(v, out);
  return out;
}

Vector shift_apply_transpose(const ShiftOperator& p, const Vector& v) {
  Vector out;
  p.apply_transpose(v, out);
  return out;
}

}  // namespace hivp
