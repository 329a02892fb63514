#include "commands.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <regex>
#include <set>
#include <tuple>

#include "hivp/hessian/operator.hpp"
#include "hivp/pipeline/spec_io.hpp"

namespace hivp::cli {

namespace {

Index parse_index(const std::string& s, const std::string& text) {
  Index v = 0;
  const auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size() || v < 1)
    throw ParseError("bad sweep value '" + s + "' in '" + text + "'");
  return v;
}

void emit(const RunConfig& cfg, const std::string& text, std::ostream& out) {
  if (!cfg.out) {
    out << text;
    return;
  }
  std::ofstream f(*cfg.out);
  if (!f) throw ParseError("cannot write " + cfg.out->string());
  f << text;
}

std::string render(const RunConfig& cfg, const nlohmann::json& j, const std::string& csv) {
  return cfg.format == Format::Json ? j.dump(2) + '\n' : csv;
}

std::string optional_number(const std::optional<double>& x) {
  return x ? format_number(*x) : std::string();
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

Sweep parse_sweep(const std::string& text) {
  static const std::regex geometric(R"(([Lap])=(\d+)\.\.(\d+)x(\d+))");
  static const std::regex arithmetic(R"(([Lap])=(\d+)\.\.(\d+)\+(\d+))");
  static const std::regex list(R"(([Lap])=(\d+(?:,\d+)*))");
  std::smatch m;
  Sweep s;
  if (std::regex_match(text, m, geometric) || std::regex_match(text, m, arithmetic)) {
    s.axis = m[1].str()[0];
    const Index lo = parse_index(m[2], text), hi = parse_index(m[3], text);
    const Index step = parse_index(m[4], text);
    const bool times = text.find('x') != std::string::npos;
    if (lo > hi || (times && step < 2)) throw ParseError("empty or unbounded sweep '" + text + "'");
    for (Index v = lo; v <= hi; v = times ? v * step : v + step) s.values.push_back(v);
    return s;
  }
  if (std::regex_match(text, m, list)) {
    s.axis = m[1].str()[0];
    std::string rest = m[2];
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      const std::size_t comma = std::min(rest.find(',', pos), rest.size());
      s.values.push_back(parse_index(rest.substr(pos, comma - pos), text));
      pos = comma + 1;
    }
    return s;
  }
  throw ParseError("sweep must look like L=8..256x2, a=2..6+2 or p=2,4,8; got '" + text + "'");
}

Problem config_problem(const RunConfig& cfg) {
  if (cfg.spec) return load_problem(*cfg.spec);
  return generated_problem(cfg.layers, cfg.width, cfg.params, cfg.seed);
}

Vector config_rhs(const RunConfig& cfg, Index n) {
  if (!cfg.rhs) {
    SeededUniform rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    return rng.vector(n, 1.0);
  }
  Vector b = load_vector(*cfg.rhs);
  if (b.size() != n)
    throw ParseError(cfg.rhs->string() + ": right-hand side has " + std::to_string(b.size()) +
                     " entries, the pipeline has " + std::to_string(n) + " parameters");
  return b;
}

SolveReport run_solve(const RunConfig& cfg) {
  const Problem problem = config_problem(cfg);
  const EvaluationPoint pt = problem.evaluate();
  const Vector b = config_rhs(cfg, problem.pipeline.total_params());
  if (cfg.method == "hivp") return hivp_solve(problem.pipeline, pt, b, cfg.eps);
  if (cfg.method == "dense") return dense_solve(problem.pipeline, pt, b, cfg.eps);
  const HessianOperator h = assemble(problem.pipeline, pt);
  return cg_solve(h, b, cfg.eps, cfg.tol.value_or(kBenchCgTolerance),
                  static_cast<std::size_t>(10 * std::max<Index>(h.size(), 1)));
}

std::string solve_csv(const SolveReport& r) {
  std::string s = "key,value\n";
  s += "version," + std::to_string(kReportVersion) + '\n';
  s += "method," + r.method + '\n';
  s += "eps," + format_number(r.eps) + '\n';
  s += "residual," + format_number(r.residual) + '\n';
  s += "iterations," + std::to_string(r.iterations) + '\n';
  s += "wall_seconds," + format_number(r.wall_seconds) + '\n';
  s += "flops," + std::to_string(r.flops) + '\n';
  s += "peak_bytes," + std::to_string(r.peak_bytes) + '\n';
  for (std::size_t i = 0; i < r.condition_estimates.size(); ++i)
    s += "condition_estimates[" + std::to_string(i) + "]," + format_number(r.condition_estimates[i]) + '\n';
  for (Index i = 0; i < r.x.size(); ++i)
    s += "solution[" + std::to_string(i) + "]," + format_number(r.x[i]) + '\n';
  return s;
}

// ---------------------------------------------------------------- bench

std::vector<SlopeFit> fit_slopes(const std::vector<BenchRecord>& records) {
  using Key = std::tuple<std::string, Index, Index>;
  std::map<Key, std::vector<const BenchRecord*>> groups;
  for (const auto& r : records)
    if (r.ok()) groups[{r.method, r.width, r.params}].push_back(&r);

  std::vector<SlopeFit> fits;
  for (const auto& [key, rows] : groups) {
    for (const std::string metric : {"flops", "peak_bytes"}) {
      std::vector<double> xs, ys;
      std::set<Index> depths;
      for (const BenchRecord* r : rows) {
        const double y = metric == "flops" ? static_cast<double>(r->flops)
                                           : static_cast<double>(r->peak_bytes);
        if (y <= 0.0) continue;
        xs.push_back(std::log(static_cast<double>(r->layers)));
        ys.push_back(std::log(y));
        depths.insert(r->layers);
      }
      if (depths.size() < 2) continue;
      const double n = static_cast<double>(xs.size());
      double mx = 0, my = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i] / n, my += ys[i] / n;
      double sxy = 0, sxx = 0;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
      }
      fits.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), metric, sxy / sxx,
                      xs.size()});
    }
  }
  return fits;
}

nlohmann::json BenchReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : records) {
    rows.push_back({{"L", r.layers},
                    {"a", r.width},
                    {"p", r.params},
                    {"method", r.method},
                    {"status", r.status},
                    {"wall_time", r.wall_time},
                    {"flops", r.flops},
                    {"peak_bytes", r.peak_bytes},
                    {"residual", r.residual ? nlohmann::json(*r.residual) : nlohmann::json()},
                    {"agreement", r.agreement ? nlohmann::json(*r.agreement) : nlohmann::json()}});
  }
  nlohmann::json fits = nlohmann::json::array();
  for (const auto& f : slopes) {
    fits.push_back({{"method", f.method},
                    {"a", f.width},
                    {"p", f.params},
                    {"metric", f.metric},
                    {"slope", f.slope},
                    {"points", f.points}});
  }
  return {{"version", kReportVersion}, {"eps", eps}, {"seed", seed}, {"records", rows},
          {"slopes", fits}};
}

std::string BenchReport::to_csv() const {
  std::string s = "L,a,p,method,status,wall_time,flops,peak_bytes,residual,agreement\n";
  for (const auto& r : records) {
    s += std::to_string(r.layers) + ',' + std::to_string(r.width) + ',' +
         std::to_string(r.params) + ',' + r.method + ",\"" + r.status + "\"," +
         format_number(r.wall_time) + ',' + std::to_string(r.flops) + ',' +
         std::to_string(r.peak_bytes) + ',' + optional_number(r.residual) + ',' +
         optional_number(r.agreement) + '\n';
  }
  return s;
}

BenchReport run_bench(const RunConfig& cfg) {
  std::vector<Index> ls{8, 16, 32}, as{cfg.width}, ps{cfg.params};
  for (const auto& s : cfg.sweeps) (s.axis == 'L' ? ls : s.axis == 'a' ? as : ps) = s.values;
  for (const auto& m : cfg.methods)
    if (m != "hivp" && m != "cg" && m != "dense") throw ParseError("unknown method '" + m + "'");

  BenchReport report;
  report.eps = cfg.eps;
  report.seed = cfg.seed;
  const double cg_tol = cfg.tol.value_or(kBenchCgTolerance);
  for (const Index a : as) {
    for (const Index p : ps) {
      for (const Index layers : ls) {
        const Problem problem = generated_problem(layers, a, p, cfg.seed);
        const EvaluationPoint pt = problem.evaluate();
        const HessianOperator h = assemble(problem.pipeline, pt);
        SeededUniform rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
        const Vector b = rng.vector(h.size(), 1.0);
        std::optional<Vector> reference;
        // hivp runs first so the others can be compared against it.
        for (const std::string method : {"hivp", "cg", "dense"}) {
          if (std::find(cfg.methods.begin(), cfg.methods.end(), method) == cfg.methods.end())
            continue;
          BenchRecord rec;
          rec.layers = layers;
          rec.width = a;
          rec.params = p;
          rec.method = method;
          try {
            SolveReport r;
            if (method == "hivp") {
              r = hivp_solve(h, b, cfg.eps);
              reference = r.x;
            } else if (method == "cg") {
              r = cg_solve(h, b, cfg.eps, cg_tol, static_cast<std::size_t>(10 * h.size()));
            } else {
              r = dense_solve(h, b, cfg.eps);
            }
            rec.wall_time = r.wall_seconds;
            rec.flops = r.flops;
            rec.peak_bytes = r.peak_bytes;
            rec.residual = r.residual;
            if (method != "hivp" && reference && reference->norm() > 0.0)
              rec.agreement = (r.x - *reference).norm() / reference->norm();
          } catch (const SizeGuardExceeded& e) {
            rec.status = std::string("skipped: ") + e.what();
          } catch (const Error& e) {
            rec.status = std::string("failed: ") + e.what();
          }
          report.records.push_back(std::move(rec));
        }
      }
    }
  }
  report.slopes = fit_slopes(report.records);
  return report;
}

// ---------------------------------------------------------------- driver

namespace {

void add_problem_options(CLI::App& cmd, RunConfig& cfg) {
  cmd.add_option("--layers", cfg.layers, "Depth L of the generated pipeline")
      ->check(CLI::PositiveNumber);
  cmd.add_option("--width", cfg.width, "Activation width a")->check(CLI::PositiveNumber);
  cmd.add_option("--params", cfg.params, "Parameters per layer p")->check(CLI::PositiveNumber);
  cmd.add_option("--eps", cfg.eps, "Damping added to the Hessian diagonal")
      ->check(CLI::NonNegativeNumber);
  cmd.add_option("--seed", cfg.seed, "Seed for generated pipelines and vectors");
  cmd.add_option("--format", cfg.format, "Output format")
      ->transform(CLI::CheckedTransformer(
          std::map<std::string, Format>{{"json", Format::Json}, {"csv", Format::Csv}}));
  cmd.add_option("--out", cfg.out, "Write the report here instead of stdout");
}

int verify_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const VerifyReport r = run_verify(cfg);
  for (const auto& c : r.checks) {
    err << (c.passed() ? "[PASS] " : "[FAIL] ") << c.name << ": " << format_number(c.error)
        << " vs " << format_number(c.tolerance) << '\n';
  }
  emit(cfg, render(cfg, r.to_json(), r.to_csv()), out);
  return r.passed() ? kExitOk : kExitFailure;
}

int solve_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const SolveReport r = run_solve(cfg);
  const double b_norm = config_rhs(cfg, r.x.size()).norm();
  const double tol = cfg.tol.value_or(kSolveTolerance);
  err << r.method << ": residual " << format_number(r.residual) << " (limit "
      << format_number(tol * (1.0 + b_norm)) << "), " << r.flops << " flops\n";
  for (const auto& w : r.warnings) err << "warning: " << w << '\n';
  nlohmann::json j = r.to_json();
  emit(cfg, render(cfg, j, solve_csv(r)), out);
  return r.residual <= tol * (1.0 + b_norm) ? kExitOk : kExitFailure;
}

int bench_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  const BenchReport r = run_bench(cfg);
  for (const auto& rec : r.records)
    if (!rec.ok()) err << "L=" << rec.layers << " " << rec.method << ": " << rec.status << '\n';
  for (const auto& f : r.slopes) {
    err << "slope " << f.method << " a=" << f.width << " p=" << f.params << " " << f.metric
        << ": " << format_number(f.slope) << " over " << f.points << " points\n";
  }
  emit(cfg, render(cfg, r.to_json(), r.to_csv()), out);
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact Hessian-vector and Hessian-inverse-vector products for layered pipelines",
               "hivp"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::vector<std::string> sweeps;

  CLI::App* verify = app.add_subcommand("verify", "Run the oracle checks on one pipeline");
  add_problem_options(*verify, cfg);
  verify->add_option("--spec", cfg.spec, "Pipeline spec file")->check(CLI::ExistingFile);
  verify->add_flag("--inject-fault", cfg.inject_fault)->group("");

  CLI::App* solve = app.add_subcommand("solve", "Solve (H + eps I) x = b");
  add_problem_options(*solve, cfg);
  solve->add_option("--spec", cfg.spec, "Pipeline spec file")->check(CLI::ExistingFile);
  solve->add_option("--rhs", cfg.rhs, "Right-hand side vector file")->check(CLI::ExistingFile);
  solve->add_option("--tol", cfg.tol, "Residual limit relative to 1 + ||b||")
      ->check(CLI::PositiveNumber);
  solve->add_option("--method", cfg.method, "Solver")->check(CLI::IsMember({"hivp", "cg", "dense"}));

  CLI::App* bench = app.add_subcommand("bench", "Sweep depth and compare solvers");
  add_problem_options(*bench, cfg);
  bench->add_option("--sweep", sweeps, "Axis sweep, e.g. L=8..256x2, a=2,4 or p=2..6+2");
  bench->add_option("--tol", cfg.tol, "CG stopping tolerance")->check(CLI::PositiveNumber);
  bench->add_option("--methods", cfg.methods, "Methods to run")
      ->delimiter(',')
      ->check(CLI::IsMember({"hivp", "cg", "dense"}));

  try {
    app.parse(argc, argv);
    for (const auto& s : sweeps) cfg.sweeps.push_back(parse_sweep(s));
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (verify->parsed()) return verify_command(cfg, out, err);
    if (solve->parsed()) return solve_command(cfg, out, err);
    return bench_command(cfg, out, err);
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SizeGuardExceeded& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const SingularPivotBlock& e) {
    err << "error: singular pivot block " << e.block_index() << ": " << e.what() << '\n';
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv{"hivp"};
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace hivp::cli
