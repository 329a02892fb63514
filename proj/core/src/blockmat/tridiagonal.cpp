#include "hivp/blockmat/tridiagonal.hpp"

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>

#include "hivp/blockmat/kernels.hpp"

namespace hivp {

namespace {

std::int64_t bytes_of(Index entries) {
  return static_cast<std::int64_t>(entries) * static_cast<std::int64_t>(sizeof(double));
}

std::string shape(Index r, Index c) { return std::to_string(r) + "x" + std::to_string(c); }

}  // namespace

LayeredBlockMatrix::LayeredBlockMatrix(std::vector<Index> row_dims, std::vector<Index> col_dims)
    : row_dims_(std::move(row_dims)), col_dims_(std::move(col_dims)) {
  row_offsets_ = offsets(row_dims_);
  col_offsets_ = offsets(col_dims_);
}

LayeredBlockMatrix LayeredBlockMatrix::from(const BlockDiagonal& d) {
  LayeredBlockMatrix m(d.row_dims(), d.col_dims());
  for (std::size_t i = 0; i < d.size(); ++i) m.set(i, i, d.block(i));
  return m;
}

LayeredBlockMatrix LayeredBlockMatrix::from(const BlockLowerBidiagonal& b) {
  LayeredBlockMatrix m(b.dims(), b.dims());
  for (std::size_t i = 0; i < b.size(); ++i) {
    m.set(i, i, b.diagonal_blocks()[i]);
    if (i > 0) m.set(i, i - 1, b.subdiagonal_blocks()[i - 1]);
  }
  return m;
}

void LayeredBlockMatrix::set(std::size_t i, std::size_t j, DenseBlock block) {
  if (i >= row_dims_.size() || j >= col_dims_.size()) {
    throw StructureError("layered block (" + std::to_string(i) + "," + std::to_string(j) +
                         ") out of range");
  }
  if (block.rows() != row_dims_[i] || block.cols() != col_dims_[j]) {
    throw DimensionMismatch("layered block (" + std::to_string(i) + "," + std::to_string(j) +
                            ") expects " + shape(row_dims_[i], col_dims_[j]) + ", got " +
                            shape(block.rows(), block.cols()));
  }
  blocks_[{i, j}] = std::move(block);
}

const DenseBlock* LayeredBlockMatrix::find(std::size_t i, std::size_t j) const {
  auto it = blocks_.find({i, j});
  return it == blocks_.end() ? nullptr : &it->second;
}

Vector LayeredBlockMatrix::apply(const Vector& v) const {
  require_dims(v.size(), cols(), "layered block apply");
  Vector out = Vector::Zero(rows());
  for (const auto& [key, b] : blocks_) {
    kernels::matvec_add(b, v.segment(col_offsets_[key.second], b.cols()),
                        out.segment(row_offsets_[key.first], b.rows()));
  }
  return out;
}

LayeredBlockMatrix LayeredBlockMatrix::transpose() const {
  LayeredBlockMatrix t(col_dims_, row_dims_);
  for (const auto& [key, b] : blocks_) t.set(key.second, key.first, b.transpose());
  return t;
}

DenseBlock LayeredBlockMatrix::dense() const {
  DenseBlock d = DenseBlock::Zero(rows(), cols());
  for (const auto& [key, b] : blocks_) {
    d.block(row_offsets_[key.first], col_offsets_[key.second], b.rows(), b.cols()) = b;
  }
  return d;
}

std::int64_t LayeredBlockMatrix::storage_bytes() const {
  Index n = 0;
  for (const auto& [key, b] : blocks_) n += b.size();
  return bytes_of(n);
}

namespace {

void check_square_grid(const BlockGrid& grid) {
  for (const auto& row : grid) {
    if (row.size() != grid.size()) throw StructureError("block grid is not square");
  }
  for (std::size_t u = 0; u < grid.size(); ++u) {
    for (std::size_t v = 0; v < grid.size(); ++v) {
      if (grid[u][v].rows() != grid[u][0].rows() || grid[u][v].cols() != grid[0][v].cols()) {
        throw DimensionMismatch("block grid: inconsistent group sizes at (" + std::to_string(u) +
                                "," + std::to_string(v) + ")");
      }
    }
  }
}

}  // namespace

DenseBlock dense(const BlockGrid& grid) {
  check_square_grid(grid);
  std::vector<Index> sizes;
  for (const auto& row : grid) sizes.push_back(row.front().rows());
  const auto off = offsets(sizes);
  DenseBlock d = DenseBlock::Zero(off.back(), off.back());
  for (std::size_t u = 0; u < grid.size(); ++u) {
    for (std::size_t v = 0; v < grid.size(); ++v) {
      d.block(off[u], off[v], sizes[u], sizes[v]) = grid[u][v].dense();
    }
  }
  return d;
}

Vector apply(const BlockGrid& grid, const Vector& v) {
  check_square_grid(grid);
  std::vector<Index> sizes;
  for (const auto& row : grid) sizes.push_back(row.front().rows());
  const auto off = offsets(sizes);
  require_dims(v.size(), off.back(), "block grid apply");
  Vector out = Vector::Zero(off.back());
  for (std::size_t u = 0; u < grid.size(); ++u) {
    for (std::size_t w = 0; w < grid.size(); ++w) {
      out.segment(off[u], sizes[u]) += grid[u][w].apply(v.segment(off[w], sizes[w]));
    }
  }
  return out;
}

BlockTridiagonal::BlockTridiagonal(std::vector<DenseBlock> diag, std::vector<DenseBlock> lower,
                                   std::vector<DenseBlock> upper)
    : diag_(std::move(diag)), lower_(std::move(lower)), upper_(std::move(upper)) {
  const std::size_t n = diag_.size();
  const std::size_t off = n == 0 ? 0 : n - 1;
  if (lower_.size() != off || upper_.size() != off) {
    throw StructureError("block tridiagonal: need " + std::to_string(off) +
                         " off-diagonal blocks on each side");
  }
  Index entries = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (diag_[i].rows() != diag_[i].cols()) {
      throw DimensionMismatch("block tridiagonal: diagonal block " + std::to_string(i) +
                              " is not square");
    }
    dims_.push_back(diag_[i].rows());
    entries += diag_[i].size();
  }
  offsets_ = hivp::offsets(dims_);
  for (std::size_t i = 0; i < off; ++i) {
    if (lower_[i].rows() != dims_[i + 1] || lower_[i].cols() != dims_[i] ||
        upper_[i].rows() != dims_[i] || upper_[i].cols() != dims_[i + 1]) {
      throw DimensionMismatch("block tridiagonal: off-diagonal blocks at " + std::to_string(i) +
                              " are not conformant");
    }
    entries += lower_[i].size() + upper_[i].size();
  }
  tracked_.reset(bytes_of(entries));
}

Vector BlockTridiagonal::apply(const Vector& v) const {
  require_dims(v.size(), rows(), "block tridiagonal apply");
  Vector out = Vector::Zero(rows());
  for (std::size_t i = 0; i < size(); ++i) {
    auto seg = out.segment(offsets_[i], dims_[i]);
    kernels::matvec_add(diag_[i], v.segment(offsets_[i], dims_[i]), seg);
    if (i > 0) kernels::matvec_add(lower_[i - 1], v.segment(offsets_[i - 1], dims_[i - 1]), seg);
    if (i + 1 < size()) {
      kernels::matvec_add(upper_[i], v.segment(offsets_[i + 1], dims_[i + 1]), seg);
    }
  }
  return out;
}

DenseBlock BlockTridiagonal::dense() const {
  DenseBlock d = DenseBlock::Zero(rows(), rows());
  for (std::size_t i = 0; i < size(); ++i) {
    d.block(offsets_[i], offsets_[i], dims_[i], dims_[i]) = diag_[i];
    if (i + 1 < size()) {
      d.block(offsets_[i + 1], offsets_[i], dims_[i + 1], dims_[i]) = lower_[i];
      d.block(offsets_[i], offsets_[i + 1], dims_[i], dims_[i + 1]) = upper_[i];
    }
  }
  return d;
}

BlockTridiagonal pivot_to_tridiagonal(const BlockGrid& grid, const CommutationPermutation& pi) {
  check_square_grid(grid);
  const std::size_t groups = pi.outer_count();
  const std::size_t layers = pi.inner_count();
  if (grid.size() != groups) {
    throw DimensionMismatch("pivot: grid has " + std::to_string(grid.size()) +
                            " groups, permutation has " + std::to_string(groups));
  }
  for (std::size_t u = 0; u < groups; ++u) {
    for (std::size_t v = 0; v < groups; ++v) {
      if (grid[u][v].row_dims() != pi.inner_dims()[u] ||
          grid[u][v].col_dims() != pi.inner_dims()[v]) {
        throw DimensionMismatch("pivot: grid block (" + std::to_string(u) + "," +
                                std::to_string(v) + ") does not match permutation dims");
      }
      for (const auto& [key, b] : grid[u][v].blocks()) {
        const auto [i, j] = key;
        const std::size_t gap = i > j ? i - j : j - i;
        if (gap > 1 && !b.isZero(0.0)) {
          throw StructureError("pivot: grid block (" + std::to_string(u) + "," +
                               std::to_string(v) + ") has nonzero sub-block (" +
                               std::to_string(i) + "," + std::to_string(j) +
                               ") outside the tridiagonal envelope");
        }
      }
    }
  }

  auto gather = [&](std::size_t i, std::size_t j) {
    DenseBlock b = DenseBlock::Zero(pi.layer_size(i), pi.layer_size(j));
    for (std::size_t u = 0; u < groups; ++u) {
      for (std::size_t v = 0; v < groups; ++v) {
        if (const DenseBlock* s = grid[u][v].find(i, j)) {
          b.block(pi.offset_in_layer(u, i), pi.offset_in_layer(v, j), s->rows(), s->cols()) = *s;
        }
      }
    }
    return b;
  };

  std::vector<DenseBlock> diag, lower, upper;
  for (std::size_t i = 0; i < layers; ++i) {
    diag.push_back(gather(i, i));
    if (i + 1 < layers) {
      lower.push_back(gather(i + 1, i));
      upper.push_back(gather(i, i + 1));
    }
  }
  return BlockTridiagonal(std::move(diag), std::move(lower), std::move(upper));
}

namespace {

void factor_pivot(LDUFactorization::PivotLU& lu, const DenseBlock& s, std::size_t index,
                  double tolerance) {
  const Index n = s.rows();
  require_finite(s, "block LDU pivot");
  if (n == 0) return;
  instrument::add_flops(static_cast<std::uint64_t>(2 * n * n * n / 3));
  lu.compute(s);
  const double scale = s.cwiseAbs().maxCoeff();
  const double smallest = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  if (scale == 0.0 || !(smallest >= tolerance * scale)) {
    throw SingularPivotBlock(index, smallest, scale);
  }
}

}  // namespace

LDUFactorization block_ldu_factorize(const BlockTridiagonal& t, double pivot_tolerance) {
  LDUFactorization f;
  const std::size_t n = t.size();
  f.dims_ = t.dims();
  f.offsets_ = t.offsets();
  f.pivots_.resize(n);
  f.upper_ = t.upper();

  Index entries = 0;
  DenseBlock schur;
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0) {
      schur = t.diag()[0];
    } else {
      // lower_{i-1} = B_{i,i-1} S_{i-1}^{-1}, via S_{i-1}^T X^T = B_{i,i-1}^T.
      const auto& prev = f.pivots_[i - 1];
      const DenseBlock& b = t.lower()[i - 1];
      const Index m = f.dims_[i - 1];
      DenseBlock lower = DenseBlock::Zero(b.rows(), b.cols());
      if (m > 0) {
        instrument::add_flops(static_cast<std::uint64_t>(2 * m * m * b.rows()));
        DenseBlock lower_t(m, b.rows());
        prev._solve_impl_transposed<false>(DenseBlock(b.transpose()), lower_t);
        lower = lower_t.transpose();
      }
      schur = t.diag()[i] - kernels::matmul(lower, t.upper()[i - 1]);
      instrument::add_flops(static_cast<std::uint64_t>(schur.size()));
      entries += lower.size();
      f.lower_.push_back(std::move(lower));
    }
    factor_pivot(f.pivots_[i], schur, i, pivot_tolerance);
    entries += schur.size();
  }
  for (const auto& u : f.upper_) entries += u.size();
  f.tracked_.reset(bytes_of(entries));
  return f;
}

std::vector<double> LDUFactorization::pivot_condition_estimates() const {
  std::vector<double> out;
  out.reserve(pivots_.size());
  for (const auto& lu : pivots_) {
    if (lu.matrixLU().rows() == 0) {
      out.push_back(1.0);
      continue;
    }
    const double rc = lu.rcond();
    out.push_back(rc > 0.0 ? 1.0 / rc : std::numeric_limits<double>::infinity());
  }
  return out;
}

Vector LDUFactorization::solve(const Vector& rhs) const {
  require_dims(rhs.size(), offsets_.back(), "ldu_solve");
  const std::size_t n = pivots_.size();
  Vector y = rhs;
  for (std::size_t i = 1; i < n; ++i) {
    kernels::matvec_add(lower_[i - 1], y.segment(offsets_[i - 1], dims_[i - 1]),
                        y.segment(offsets_[i], dims_[i]), -1.0);
  }
  Vector x(rhs.size());
  for (std::size_t i = n; i-- > 0;) {
    Vector r = y.segment(offsets_[i], dims_[i]);
    if (i + 1 < n) {
      kernels::matvec_add(upper_[i], x.segment(offsets_[i + 1], dims_[i + 1]), r, -1.0);
    }
    if (dims_[i] == 0) continue;
    instrument::add_flops(static_cast<std::uint64_t>(2 * dims_[i] * dims_[i]));
    x.segment(offsets_[i], dims_[i]) = pivots_[i].solve(r);
  }
  require_finite(x, "ldu_solve");
  return x;
}

DenseBlock LDUFactorization::dense_lower() const {
  DenseBlock d = DenseBlock::Identity(offsets_.back(), offsets_.back());
  for (std::size_t i = 0; i < lower_.size(); ++i) {
    d.block(offsets_[i + 1], offsets_[i], dims_[i + 1], dims_[i]) = lower_[i];
  }
  return d;
}

DenseBlock LDUFactorization::dense_diagonal() const {
  DenseBlock d = DenseBlock::Zero(offsets_.back(), offsets_.back());
  for (std::size_t i = 0; i < pivots_.size(); ++i) {
    if (dims_[i] == 0) continue;
    d.block(offsets_[i], offsets_[i], dims_[i], dims_[i]) = pivots_[i].reconstructedMatrix();
  }
  return d;
}

DenseBlock LDUFactorization::dense_upper() const {
  DenseBlock d = DenseBlock::Identity(offsets_.back(), offsets_.back());
  for (std::size_t i = 0; i < upper_.size(); ++i) {
    if (dims_[i] == 0) continue;
    d.block(offsets_[i], offsets_[i + 1], dims_[i], dims_[i + 1]) = pivots_[i].solve(upper_[i]);
  }
  return d;
}

Vector ldu_solve(const LDUFactorization& f, const Vector& rhs) { return f.solve(rhs); }

}  // namespace hivp
