#pragma once

#include <string>

#include "hivp/common.hpp"

// Dense kernels used by the structured types. Each one reports its flop count
// to hivp::instrument.
namespace hivp::kernels {

Vector matvec(const DenseBlock& a, const Eigen::Ref<const Vector>& x);
Vector matvec_transpose(const DenseBlock& a, const Eigen::Ref<const Vector>& x);

// y += alpha * a * x
void matvec_add(const DenseBlock& a, const Eigen::Ref<const Vector>& x, Eigen::Ref<Vector> y,
                double alpha = 1.0);
// y += alpha * a^T * x
void matvec_transpose_add(const DenseBlock& a, const Eigen::Ref<const Vector>& x,
                          Eigen::Ref<Vector> y, double alpha = 1.0);

DenseBlock matmul(const DenseBlock& a, const DenseBlock& b);

// (I_n kron row) * u for a row vector of length m and u of length m*n.
// Reshapes u into an m x n matrix U and returns U^T row, so the Kronecker
// factor is never formed.
Vector kron_identity_apply(const Vector& row, const Eigen::Ref<const Vector>& u, Index n);

// (I_n kron row) * a, column by column, for a of shape (m*n) x k.
DenseBlock kron_identity_contract(const Vector& row, const DenseBlock& a, Index n);

// Dense I_n kron row, shape n x (m*n). Oracle use only.
DenseBlock kron_identity_dense(const Vector& row, Index n);

// Row-major text grid: one matrix row per line, entries separated by spaces,
// printed with round-trip precision.
std::string to_text_grid(const DenseBlock& m);

}  // namespace hivp::kernels
