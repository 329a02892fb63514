#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hivp/pipeline/problem.hpp"
#include "hivp/solver/solve.hpp"

// The hivp command-line front end as a library, so tests can drive it.
namespace hivp::cli {

inline constexpr int kReportVersion = 1;

enum class Format { Json, Csv };

// One swept axis: "L=8..256x2" (geometric), "a=2..6+2" (arithmetic) or
// "p=2,4,8" (explicit). Axes are L, a and p.
struct Sweep {
  char axis = 'L';
  std::vector<Index> values;
};
Sweep parse_sweep(const std::string& text);

struct RunConfig {
  Index layers = 4;
  Index width = 4;
  Index params = 4;
  double eps = 1e-3;
  std::uint64_t seed = 0;
  // solve: residual acceptance relative to 1 + ||b||. bench: CG tolerance.
  std::optional<double> tol;
  Format format = Format::Json;
  std::optional<std::filesystem::path> spec;
  std::optional<std::filesystem::path> rhs;
  std::optional<std::filesystem::path> out;
  std::vector<Sweep> sweeps;
  std::string method = "hivp";
  std::vector<std::string> methods{"hivp", "cg", "dense"};
  // Test hook: perturbs every layer's parameter Jacobian so the
  // finite-difference checks must fail.
  bool inject_fault = false;
};

// The problem a config describes: the spec file if given, else a generated
// uniform-width problem.
Problem config_problem(const RunConfig& cfg);

// Wraps every layer so that its reported Jacobian in x is off by 0.5 in the
// leading entry while eval() is untouched.
Problem with_injected_fault(const Problem& problem);

// ---------------------------------------------------------------- verify

struct CheckResult {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  // NaN errors fail.
  bool passed() const { return error <= tolerance; }
};

struct VerifyReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  nlohmann::json to_json() const;
  std::string to_csv() const;
};

VerifyReport run_verify(const RunConfig& cfg);

// ---------------------------------------------------------------- solve

// Default residual acceptance for `solve`, relative to 1 + ||b||.
inline constexpr double kSolveTolerance = 1e-6;

// The right-hand side from --rhs, or a seeded U(-1, 1) vector.
Vector config_rhs(const RunConfig& cfg, Index n);
SolveReport run_solve(const RunConfig& cfg);
std::string solve_csv(const SolveReport& report);

// ---------------------------------------------------------------- bench

inline constexpr double kBenchCgTolerance = 1e-10;

struct BenchRecord {
  Index layers = 0;
  Index width = 0;
  Index params = 0;
  std::string method;
  // "ok", or why the cell produced no solution.
  std::string status = "ok";
  double wall_time = 0.0;
  std::uint64_t flops = 0;
  std::int64_t peak_bytes = 0;
  // Matrix-free ||(H + eps I) x - b||; empty when the cell failed.
  std::optional<double> residual;
  // ||x - x_hivp|| / ||x_hivp|| for the other methods in the same cell.
  std::optional<double> agreement;

  bool ok() const { return status == "ok"; }
};

struct SlopeFit {
  std::string method;
  Index width = 0;
  Index params = 0;
  std::string metric;  // "flops" or "peak_bytes"
  double slope = 0.0;
  std::size_t points = 0;
};

// Least-squares slope of log(metric) against log(L), per method and (a, p),
// over successful records with a positive metric. Groups with fewer than two
// distinct depths are skipped.
std::vector<SlopeFit> fit_slopes(const std::vector<BenchRecord>& records);

struct BenchReport {
  double eps = 0.0;
  std::uint64_t seed = 0;
  std::vector<BenchRecord> records;
  std::vector<SlopeFit> slopes;

  nlohmann::json to_json() const;
  std::string to_csv() const;
};

BenchReport run_bench(const RunConfig& cfg);

// ---------------------------------------------------------------- driver

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Parses argv and runs the chosen command. Results go to `out` (or --out),
// diagnostics and summaries to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Shortest round-trip decimal form; CSV and JSON share it.
std::string format_number(double x);

}  // namespace hivp::cli
