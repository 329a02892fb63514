#include "hivp/common.hpp"

#include <sstream>

namespace hivp {

SizeGuardExceeded::SizeGuardExceeded(Index requested, Index limit)
    : Error("dimension " + std::to_string(requested) + " exceeds dense guard " +
            std::to_string(limit)),
      requested_(requested),
      limit_(limit) {}

namespace {
std::string singular_message(std::size_t block_index, double pivot, double scale) {
  std::ostringstream os;
  os << "singular pivot block " << block_index << ": pivot magnitude " << pivot
     << " against block scale " << scale;
  return os.str();
}
}  // namespace

SingularPivotBlock::SingularPivotBlock(std::size_t block_index, double pivot, double scale)
    : Error(singular_message(block_index, pivot, scale)),
      block_index_(block_index),
      pivot_(pivot),
      scale_(scale) {}

NoConvergence::NoConvergence(std::size_t iterations, double residual)
    : Error("no convergence after " + std::to_string(iterations) +
            " iterations, residual " + std::to_string(residual)),
      iterations_(iterations),
      residual_(residual) {}

void require_dims(Index got, Index expected, const char* what) {
  if (got != expected) {
    throw DimensionMismatch(std::string(what) + ": expected dimension " +
                            std::to_string(expected) + ", got " + std::to_string(got));
  }
}

void require_finite(const DenseBlock& m, const char* what) {
  if (!m.allFinite()) throw NonFiniteValue(std::string(what) + ": non-finite entry");
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) throw NonFiniteValue(std::string(what) + ": non-finite entry");
}

std::vector<Index> offsets(const std::vector<Index>& dims) {
  std::vector<Index> out(dims.size() + 1, 0);
  for (std::size_t i = 0; i < dims.size(); ++i) out[i + 1] = out[i] + dims[i];
  return out;
}

Index total(const std::vector<Index>& dims) {
  Index n = 0;
  for (Index d : dims) n += d;
  return n;
}

}  // namespace hivp
