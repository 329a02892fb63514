#pragma once

#include <Eigen/Core>

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace hivp {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
// Column-major, so the natural flattening of a block is vec(.).
using DenseBlock = Eigen::MatrixXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class NonFiniteValue : public Error {
 public:
  using Error::Error;
};

class StructureError : public Error {
 public:
  using Error::Error;
};

class SizeGuardExceeded : public Error {
 public:
  SizeGuardExceeded(Index requested, Index limit);
  Index requested() const { return requested_; }
  Index limit() const { return limit_; }

 private:
  Index requested_;
  Index limit_;
};

// Raised by block-LDU when the factorized Schur complement of a diagonal block
// has a pivot below tolerance. The index is 0-based over the diagonal blocks.
class SingularPivotBlock : public Error {
 public:
  SingularPivotBlock(std::size_t block_index, double pivot, double scale);
  std::size_t block_index() const { return block_index_; }
  double pivot() const { return pivot_; }
  double scale() const { return scale_; }

 private:
  std::size_t block_index_;
  double pivot_;
  double scale_;
};

class NoConvergence : public Error {
 public:
  NoConvergence(std::size_t iterations, double residual);
  std::size_t iterations() const { return iterations_; }
  double residual() const { return residual_; }

 private:
  std::size_t iterations_;
  double residual_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

void require_dims(Index got, Index expected, const char* what);
void require_finite(const DenseBlock& m, const char* what);
void require_finite(const Vector& v, const char* what);

// Running offsets for a partition: {0, d0, d0+d1, ...}.
std::vector<Index> offsets(const std::vector<Index>& dims);
Index total(const std::vector<Index>& dims);

}  // namespace hivp
