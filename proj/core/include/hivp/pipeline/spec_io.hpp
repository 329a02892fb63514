#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>

#include "hivp/pipeline/problem.hpp"

// Versioned JSON files for problems and vectors.
//
// Problem spec (version 1):
//   {
//     "version": 1,
//     "z0": [ ... ],
//     "layers": [
//       { "kind": "mixed_tanh", "input_dim": 2, ..., "params": [ ... ] },
//       { "kind": "quadratic", ..., "seed": 7 }
//     ]
//   }
// Each layer object is a Layer::config() plus either explicit "params" or a
// "seed" from which they are drawn with seeded_params().
//
// Vector file (version 1):
//   { "version": 1, "values": [ ... ] }
namespace hivp {

inline constexpr int kSpecVersion = 1;

Problem problem_from_json(const nlohmann::json& j);
nlohmann::json problem_to_json(const Problem& problem);

Vector vector_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Vector& v);

// File helpers; I/O and parse failures raise ParseError naming the path.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

Problem load_problem(const std::filesystem::path& path);
Vector load_vector(const std::filesystem::path& path);

}  // namespace hivp
