#pragma once

#include <nlohmann/json.hpp>

#include "hivp/common.hpp"

// JSON encodings for dense values: vectors are flat arrays, matrices are
// arrays of rows. Decoders check shape and finiteness and throw ParseError.
namespace hivp::json_values {

nlohmann::json encode(const Vector& v);
nlohmann::json encode(const DenseBlock& m);

Vector decode_vector(const nlohmann::json& j, const char* what);
Vector decode_vector(const nlohmann::json& j, Index size, const char* what);
DenseBlock decode_matrix(const nlohmann::json& j, Index rows, Index cols, const char* what);

// Reads a non-negative integer field.
Index decode_dim(const nlohmann::json& obj, const char* key);

}  // namespace hivp::json_values
