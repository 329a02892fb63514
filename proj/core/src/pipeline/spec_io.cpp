#include "hivp/pipeline/spec_io.hpp"

#include <fstream>
#include <string>

#include "hivp/pipeline/json_values.hpp"
#include "hivp/pipeline/layers.hpp"

namespace hivp {

namespace {

void check_version(const nlohmann::json& j, const char* what) {
  if (!j.is_object()) throw ParseError(std::string(what) + ": expected a JSON object");
  if (!j.contains("version") || !j.at("version").is_number_integer()) {
    throw ParseError(std::string(what) + ": missing integer field 'version'");
  }
  const int v = j.at("version").get<int>();
  if (v != kSpecVersion) {
    throw ParseError(std::string(what) + ": unsupported version " + std::to_string(v));
  }
}

}  // namespace

Problem problem_from_json(const nlohmann::json& j) {
  check_version(j, "pipeline spec");
  if (!j.contains("layers") || !j.at("layers").is_array() || j.at("layers").empty()) {
    throw ParseError("pipeline spec: 'layers' must be a non-empty array");
  }
  std::vector<LayerPtr> layers;
  std::vector<Vector> params;
  for (const auto& entry : j.at("layers")) {
    LayerPtr f = layer_from_config(entry);
    const std::string where = "layer " + std::to_string(layers.size());
    if (entry.contains("params")) {
      params.push_back(json_values::decode_vector(entry.at("params"), f->param_dim(), where.c_str()));
    } else if (entry.contains("seed") && entry.at("seed").is_number_integer() &&
               entry.at("seed").get<long long>() >= 0) {
      params.push_back(seeded_params(*f, entry.at("seed").get<std::uint64_t>()));
    } else {
      throw ParseError(where + ": needs 'params' or a non-negative integer 'seed'");
    }
    layers.push_back(std::move(f));
  }
  try {
    Pipeline pipeline(std::move(layers));
    if (!j.contains("z0")) throw ParseError("pipeline spec: missing field 'z0'");
    Vector z0 = json_values::decode_vector(j.at("z0"), pipeline.input_dim(), "z0");
    return {std::move(pipeline), std::move(z0), std::move(params)};
  } catch (const DimensionMismatch& e) {
    throw ParseError(std::string("pipeline spec: ") + e.what());
  }
}

nlohmann::json problem_to_json(const Problem& problem) {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < problem.pipeline.size(); ++l) {
    nlohmann::json entry = problem.pipeline.layer(l).config();
    entry["params"] = json_values::encode(problem.params[l]);
    layers.push_back(std::move(entry));
  }
  return {{"version", kSpecVersion}, {"z0", json_values::encode(problem.z0)}, {"layers", layers}};
}

Vector vector_from_json(const nlohmann::json& j) {
  check_version(j, "vector file");
  if (!j.contains("values")) throw ParseError("vector file: missing field 'values'");
  return json_values::decode_vector(j.at("values"), "values");
}

nlohmann::json vector_to_json(const Vector& v) {
  return {{"version", kSpecVersion}, {"values", json_values::encode(v)}};
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

Problem load_problem(const std::filesystem::path& path) {
  try {
    return problem_from_json(read_json_file(path));
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path.string(), 0) == 0) throw;
    throw ParseError(path.string() + ": " + msg);
  }
}

Vector load_vector(const std::filesystem::path& path) {
  try {
    return vector_from_json(read_json_file(path));
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    if (msg.rfind(path.string(), 0) == 0) throw;
    throw ParseError(path.string() + ": " + msg);
  }
}

}  // namespace hivp
