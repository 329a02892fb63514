#include "hivp/pipeline/json_values.hpp"

#include <cmath>
#include <string>

namespace hivp::json_values {

namespace {

[[noreturn]] void fail(const char* what, const std::string& msg) {
  throw ParseError(std::string(what) + ": " + msg);
}

double decode_number(const nlohmann::json& j, const char* what) {
  if (!j.is_number()) fail(what, "expected a number, got " + std::string(j.type_name()));
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(what, "non-finite value");
  return v;
}

}  // namespace

nlohmann::json encode(const Vector& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

nlohmann::json encode(const DenseBlock& m) {
  nlohmann::json out = nlohmann::json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    out.push_back(std::move(row));
  }
  return out;
}

Vector decode_vector(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) fail(what, "expected an array");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Index>(i)] = decode_number(j[i], what);
  return v;
}

Vector decode_vector(const nlohmann::json& j, Index size, const char* what) {
  Vector v = decode_vector(j, what);
  if (v.size() != size) {
    fail(what, "expected " + std::to_string(size) + " entries, got " + std::to_string(v.size()));
  }
  return v;
}

DenseBlock decode_matrix(const nlohmann::json& j, Index rows, Index cols, const char* what) {
  if (!j.is_array() || static_cast<Index>(j.size()) != rows) {
    fail(what, "expected an array of " + std::to_string(rows) + " rows");
  }
  DenseBlock m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    const auto& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Index>(row.size()) != cols) {
      fail(what, "row " + std::to_string(i) + " must have " + std::to_string(cols) + " entries");
    }
    for (Index c = 0; c < cols; ++c) m(i, c) = decode_number(row[static_cast<std::size_t>(c)], what);
  }
  return m;
}

Index decode_dim(const nlohmann::json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) fail(key, "missing field");
  const auto& j = obj.at(key);
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(key, "expected a non-negative integer");
  return static_cast<Index>(j.get<long long>());
}

}  // namespace hivp::json_values
