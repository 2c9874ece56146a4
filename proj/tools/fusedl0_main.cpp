// fusedl0 command line: exact fused-L0 prox, PG / PGiPN solvers, and a
// synthetic benchmark harness. JSON for configs and reports, CSV for vectors
// and traces, Matrix Market for sparse designs.

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Core>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "fusedl0/driver.hpp"
#include "fusedl0/io.hpp"
#include "fusedl0/pg.hpp"
#include "fusedl0/prox.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace fusedl0;

namespace {

constexpr int kExitParse = 2;
constexpr int kExitDimension = 3;
constexpr int kExitMaxIter = 4;

Vector bounds_from_json(const json& j, const char* key, Eigen::Index n,
                        double fallback) {
  if (!j.contains(key)) return Vector::Constant(n, fallback);
  const auto& v = j.at(key);
  if (v.is_number()) return Vector::Constant(n, v.get<double>());
  if (v.is_array()) {
    if (static_cast<Eigen::Index>(v.size()) != n)
      throw DimensionError(std::string("config: '") + key +
                           "' length does not match n");
    Vector out(n);
    for (Eigen::Index i = 0; i < n; ++i)
      out[i] = v[static_cast<std::size_t>(i)].get<double>();
    return out;
  }
  throw ParseError(std::string("config: '") + key + "' must be a number or array");
}

ProxParams prox_params_from_json(const json& j, Eigen::Index n) {
  ProxParams p;
  p.lambda1 = j.value("lambda1", 0.0);
  p.lambda2 = j.value("lambda2", 0.0);
  p.l = bounds_from_json(j, "l", n, -std::numeric_limits<double>::infinity());
  p.u = bounds_from_json(j, "u", n, std::numeric_limits<double>::infinity());
  return p;
}

SolverConfig solver_config_from_json(const json& j) {
  SolverConfig c;
  c.epsilon = j.value("epsilon", c.epsilon);
  c.max_iter = j.value("max_iter", c.max_iter);
  c.alpha = j.value("alpha", c.alpha);
  c.sigma = j.value("sigma", c.sigma);
  c.rho = j.value("rho", c.rho);
  c.beta = j.value("beta", c.beta);
  c.varsigma = j.value("varsigma", c.varsigma);
  c.b1 = j.value("b1", c.b1);
  c.b2 = j.value("b2", c.b2);
  c.tau = j.value("tau", c.tau);
  const std::string mu_mode = j.value("mu_mode", std::string("fixed"));
  if (mu_mode == "fixed")
    c.mu_mode = MuMode::fixed;
  else if (mu_mode == "interval")
    c.mu_mode = MuMode::interval;
  else
    throw ParseError("config: mu_mode must be 'fixed' or 'interval'");
  c.mu_min = j.value("mu_min", c.mu_min);
  c.mu_max = j.value("mu_max", c.mu_max);
  const std::string sw = j.value("switch", std::string("strict"));
  if (sw == "strict")
    c.switch_mode = SwitchMode::strict;
  else if (sw == "relaxed")
    c.switch_mode = SwitchMode::relaxed;
  else
    throw ParseError("config: switch must be 'strict' or 'relaxed'");
  c.eta1 = j.value("eta1", c.eta1);
  c.eta2 = j.value("eta2", c.eta2);
  const std::string gv = j.value("G_variant", std::string("G2"));
  if (gv == "G1")
    c.g_variant = GVariant::G1;
  else if (gv == "G2")
    c.g_variant = GVariant::G2;
  else if (gv == "G3")
    c.g_variant = GVariant::G3;
  else
    throw ParseError("config: G_variant must be G1, G2 or G3");
  const std::string sn = j.value("stop_norm", std::string("inf"));
  if (sn == "inf")
    c.stop_norm = StopNorm::inf;
  else if (sn == "euclid")
    c.stop_norm = StopNorm::euclid;
  else
    throw ParseError("config: stop_norm must be 'inf' or 'euclid'");
  if (j.contains("x0")) {
    const auto& v = j.at("x0");
    c.x0.resize(static_cast<Eigen::Index>(v.size()));
    for (Eigen::Index i = 0; i < c.x0.size(); ++i)
      c.x0[i] = v[static_cast<std::size_t>(i)].get<double>();
  }
  return c;
}

json echo_config(const SolverConfig& c, const ProxParams& p,
                 const std::string& loss, double nu) {
  json j;
  j["loss"] = loss;
  if (loss == "student_t") j["nu"] = nu;
  j["lambda1"] = p.lambda1;
  j["lambda2"] = p.lambda2;
  j["epsilon"] = c.epsilon;
  j["max_iter"] = c.max_iter;
  j["alpha"] = c.alpha;
  j["sigma"] = c.sigma;
  j["rho"] = c.rho;
  j["beta"] = c.beta;
  j["varsigma"] = c.varsigma;
  j["b1"] = c.b1;
  j["b2"] = c.b2;
  j["tau"] = c.tau;
  j["mu_mode"] = c.mu_mode == MuMode::fixed ? "fixed" : "interval";
  j["mu_min"] = c.mu_min;
  j["mu_max"] = c.mu_max;
  j["switch"] = c.switch_mode == SwitchMode::strict ? "strict" : "relaxed";
  j["eta1"] = c.eta1;
  j["eta2"] = c.eta2;
  j["G_variant"] = c.g_variant == GVariant::G1
                       ? "G1"
                       : (c.g_variant == GVariant::G2 ? "G2" : "G3");
  j["stop_norm"] = c.stop_norm == StopNorm::inf ? "inf" : "euclid";
  return j;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return j;
}

void write_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << j.dump(2) << '\n';
}

void write_trace_csv(const std::string& path, const SolveTrace& tr) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write " + path);
  out << "k,step_kind,F,residual_inf,S_size,T_size,alpha,inner_iters,t_ms\n";
  for (const auto& r : tr.iters) {
    out << r.k << ',' << (r.kind == StepKind::Newton ? "Newton" : "PG") << ','
        << format_double(r.F) << ',' << format_double(r.residual_inf) << ','
        << r.S_size << ',' << r.T_size << ',' << format_double(r.alpha_step)
        << ',' << r.inner_iters << ',' << format_double(r.t_ms) << '\n';
  }
}

struct LoadedProblem {
  ProblemSpec spec;
  std::string loss_name;
  double nu = 1.0;
  std::string hash;
};

LoadedProblem build_problem(const std::string& a_path,
                            const std::string& b_path, const json& cfg) {
  DesignMatrix A = read_design(a_path);
  Vector b = read_vector_csv(b_path);
  if (A.rows() != b.size())
    throw DimensionError("A has " + std::to_string(A.rows()) +
                         " rows but b has " + std::to_string(b.size()));
  const Eigen::Index n = A.cols();
  LoadedProblem out;
  out.loss_name = cfg.value("loss", std::string("least_squares"));
  out.nu = cfg.value("nu", 1.0);
  out.hash = instance_hash(A, b);
  ProxParams p = prox_params_from_json(cfg, n);
  if (out.loss_name == "least_squares") {
    out.spec = ProblemSpec{LossOracle::least_squares(std::move(A), std::move(b)),
                           std::move(p), n};
  } else if (out.loss_name == "student_t") {
    out.spec = ProblemSpec{
        LossOracle::student_t(std::move(A), std::move(b), out.nu),
        std::move(p), n};
  } else {
    throw ParseError("config: loss must be 'least_squares' or 'student_t'");
  }
  return out;
}

double recompute_residual_inf(const ProblemSpec& spec, const Vector& x,
                              double mu_bar) {
  const Vector z = x - spec.loss.gradient(x) / mu_bar;
  const ProxResult pr = prox_scaled(z, mu_bar, spec.prox_params);
  return mu_bar * (x - pr.x).cwiseAbs().maxCoeff();
}

int cmd_prox(const std::string& z_path, const std::string& cfg_path,
             const std::string& out_dir) {
  const Vector z = read_vector_csv(z_path);
  if (z.size() == 0) throw DimensionError("z is empty");
  const json cfg = cfg_path.empty() ? json::object() : load_json(cfg_path);
  ProxParams p = prox_params_from_json(cfg, z.size());
  const double mu = cfg.value("mu", 1.0);

  const auto t0 = std::chrono::steady_clock::now();
  const ProxResult res = prox_scaled(z, mu, p);
  const double ms = std::chrono::duration<double, std::milli>(
                        std::chrono::steady_clock::now() - t0)
                        .count();

  fs::create_directories(out_dir);
  write_vector_csv(out_dir + "/x.csv", res.x);
  json summary;
  summary["objective"] = res.objective;
  summary["n"] = z.size();
  summary["mu"] = mu;
  summary["n_pieces_max"] = res.max_pieces;
  summary["wall_time_ms"] = ms;
  json blocks = json::array();
  for (const auto& b : res.blocks)
    blocks.push_back({{"start", b.start}, {"end", b.end}, {"value", b.value}});
  summary["blocks"] = blocks;
  write_json(out_dir + "/summary.json", summary);
  std::cout << "prox: objective " << res.objective << ", "
            << res.blocks.size() << " blocks, written to " << out_dir << "\n";
  return 0;
}

int cmd_solve(const std::string& a_path, const std::string& b_path,
              const std::string& cfg_path, const std::string& solver,
              const std::string& out_dir, bool strict) {
  const json cfg = cfg_path.empty() ? json::object() : load_json(cfg_path);
  LoadedProblem lp = build_problem(a_path, b_path, cfg);
  SolverConfig sc = solver_config_from_json(cfg);
  if (sc.x0.size() > 0 && sc.x0.size() != lp.spec.n)
    throw DimensionError("x0 length does not match the problem dimension");

  SolveTrace tr;
  if (solver == "pgipn")
    tr = pgipn_solve(lp.spec, sc);
  else if (solver == "pg")
    tr = pg_solve(lp.spec, sc);
  else
    throw ParseError("--solver must be 'pg' or 'pgipn'");

  fs::create_directories(out_dir);
  write_vector_csv(out_dir + "/x.csv", tr.x);
  write_trace_csv(out_dir + "/trace.csv", tr);

  json report;
  report["config"] = echo_config(sc, lp.spec.prox_params, lp.loss_name, lp.nu);
  report["solver"] = solver;
  report["instance"] = {{"m", lp.spec.loss.design().rows()},
                        {"n", lp.spec.n},
                        {"lambda1", lp.spec.prox_params.lambda1},
                        {"lambda2", lp.spec.prox_params.lambda2},
                        {"A_path", fs::absolute(a_path).string()},
                        {"b_path", fs::absolute(b_path).string()},
                        {"hash", lp.hash}};
  report["results"] = {{"status", tr.status},
                       {"iters", tr.iters.size() - 1},
                       {"pg_steps", tr.pg_steps},
                       {"newton_steps", tr.newton_steps},
                       {"time_total_ms", tr.total_time_ms},
                       {"time_newton_ms", tr.newton_time_ms},
                       {"Fval", tr.F},
                       {"xNnz", tr.xNnz},
                       {"BxNnz", tr.BxNnz},
                       {"residual_inf", tr.residual_inf_final},
                       {"mu_bar_final", tr.mu_bar_final}};
  report["artifacts"] = {
      {"x_path", fs::absolute(out_dir + "/x.csv").string()},
      {"trace_path", fs::absolute(out_dir + "/trace.csv").string()}};
  write_json(out_dir + "/report.json", report);

  std::cout << "solve[" << solver << "]: " << tr.status << " in "
            << tr.iters.size() - 1 << " iterations (" << tr.newton_steps
            << " Newton), F = " << tr.F << "\n";
  if (strict && tr.status == "max_iter") return kExitMaxIter;
  return 0;
}

int cmd_verify(const std::string& report_path) {
  const json report = load_json(report_path);
  const json& cfg = report.at("config");
  LoadedProblem lp = build_problem(report.at("instance").at("A_path"),
                                   report.at("instance").at("b_path"), cfg);
  const Vector x = read_vector_csv(report.at("artifacts").at("x_path"));
  if (x.size() != lp.spec.n) throw DimensionError("stored x has wrong length");

  const json& res = report.at("results");
  const double F = eval_F(lp.spec, x);
  int xnnz = 0, bxnnz = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) xnnz += x[i] != 0.0;
  for (Eigen::Index i = 0; i + 1 < x.size(); ++i) bxnnz += x[i] != x[i + 1];
  const double resid =
      recompute_residual_inf(lp.spec, x, res.at("mu_bar_final").get<double>());

  bool ok = true;
  auto expect = [&](const char* what, double got, double want) {
    const bool match = std::abs(got - want) <= 1e-9 * (1.0 + std::abs(want));
    std::cout << (match ? "  ok    " : "  FAIL  ") << what << ": recomputed "
              << got << " vs reported " << want << "\n";
    ok = ok && match;
  };
  expect("Fval", F, res.at("Fval").get<double>());
  expect("xNnz", xnnz, res.at("xNnz").get<double>());
  expect("BxNnz", bxnnz, res.at("BxNnz").get<double>());
  expect("residual_inf", resid, res.at("residual_inf").get<double>());
  std::cout << (ok ? "verify: PASS\n" : "verify: FAIL\n");
  return ok ? 0 : 1;
}

struct BenchRow {
  std::string kind;
  std::uint64_t seed;
  Eigen::Index n, m;
  std::string solver;
  std::string status;
  std::size_t iters;
  int newton_steps;
  double time_ms, time_newton_ms, Fval;
  int xNnz, BxNnz;
  double residual_inf, psnr_db;
};

int cmd_bench(const std::string& kind_name, std::vector<std::uint64_t> seeds,
              Eigen::Index n, Eigen::Index m, double noise,
              std::vector<std::string> solvers, const std::string& cfg_path,
              const std::string& out_dir) {
  BenchKind kind;
  if (kind_name == "sparse_regression")
    kind = BenchKind::sparse_regression;
  else if (kind_name == "deblur_1d")
    kind = BenchKind::deblur_1d;
  else if (kind_name == "deblur_2d")
    kind = BenchKind::deblur_2d;
  else if (kind_name == "phoneme_like")
    kind = BenchKind::phoneme_like;
  else
    throw ParseError("--kind must be one of sparse_regression, deblur_1d, "
                     "deblur_2d, phoneme_like");
  if (seeds.empty()) seeds = {1};
  if (solvers.empty()) solvers = {"pgipn", "pg"};

  const json cfg = cfg_path.empty() ? json::object() : load_json(cfg_path);
  fs::create_directories(out_dir);

  std::vector<BenchRow> rows;
  for (const std::uint64_t seed : seeds) {
    BenchSizes sizes;
    sizes.n = n;
    sizes.m = m;
    sizes.noise = noise;
    const BenchInstance inst = generate_benchmarks(kind, seed, sizes);
    SolverConfig sc = solver_config_from_json(cfg);

    for (const std::string& solver : solvers) {
      SolveTrace tr;
      if (solver == "pgipn")
        tr = pgipn_solve(inst.spec, sc);
      else if (solver == "pg")
        tr = pg_solve(inst.spec, sc);
      else
        throw ParseError("--solver must be 'pg' or 'pgipn'");

      BenchRow row;
      row.kind = kind_name;
      row.seed = seed;
      row.n = inst.spec.n;
      row.m = inst.spec.loss.design().rows();
      row.solver = solver;
      row.status = tr.status;
      row.iters = tr.iters.size() - 1;
      row.newton_steps = tr.newton_steps;
      row.time_ms = tr.total_time_ms;
      row.time_newton_ms = tr.newton_time_ms;
      row.Fval = tr.F;
      row.xNnz = tr.xNnz;
      row.BxNnz = tr.BxNnz;
      row.residual_inf = tr.residual_inf_final;
      row.psnr_db = psnr(tr.x, inst.x_true);
      rows.push_back(row);

      const std::string run_dir = out_dir + "/run_" + kind_name + "_s" +
                                  std::to_string(seed) + "_" + solver;
      fs::create_directories(run_dir);
      write_vector_csv(run_dir + "/x.csv", tr.x);
      write_trace_csv(run_dir + "/trace.csv", tr);
    }
  }

  // comparison table, CSV and JSON; Iter column in total(newton) form
  std::ofstream csv(out_dir + "/bench.csv");
  csv << "kind,seed,n,m,solver,status,Iter,Time_ms,Fval,xNnz,BxNnz,residual_"
         "inf,PSNR\n";
  json jrows = json::array();
  for (const auto& r : rows) {
    std::string iter_fmt = std::to_string(r.iters);
    std::string time_fmt = format_double(r.time_ms);
    if (r.solver == "pgipn") {
      iter_fmt += "(" + std::to_string(r.newton_steps) + ")";
      time_fmt += "(" + format_double(r.time_newton_ms) + ")";
    }
    csv << r.kind << ',' << r.seed << ',' << r.n << ',' << r.m << ','
        << r.solver << ',' << r.status << ',' << iter_fmt << ',' << time_fmt
        << ',' << format_double(r.Fval) << ',' << r.xNnz << ',' << r.BxNnz
        << ',' << format_double(r.residual_inf) << ','
        << format_double(r.psnr_db) << '\n';
    jrows.push_back({{"kind", r.kind},
                     {"seed", r.seed},
                     {"n", r.n},
                     {"m", r.m},
                     {"solver", r.solver},
                     {"status", r.status},
                     {"iters", r.iters},
                     {"newton_steps", r.newton_steps},
                     {"iter_fmt", iter_fmt},
                     {"time_ms", r.time_ms},
                     {"time_newton_ms", r.time_newton_ms},
                     {"Fval", r.Fval},
                     {"xNnz", r.xNnz},
                     {"BxNnz", r.BxNnz},
                     {"residual_inf", r.residual_inf},
                     {"psnr", r.psnr_db}});
  }
  write_json(out_dir + "/bench.json", jrows);
  std::cout << "bench: " << rows.size() << " runs written to " << out_dir
            << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("FUSEDL0_THREADS"))
    Eigen::setNbThreads(std::max(1, std::atoi(threads)));
  else
    Eigen::setNbThreads(1);

  CLI::App app{"fused L0-norms regularization: exact prox and PGiPN solver"};
  app.require_subcommand(1);

  std::string z_path, a_path, b_path, cfg_path, out_dir = "out";
  std::string solver = "pgipn", kind = "deblur_1d", verify_path;
  bool strict = false;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> solvers;
  long long n = 0, m = 0;
  double noise = -1.0;

  auto* prox_cmd = app.add_subcommand("prox", "exact prox of the fused L0 regularizer");
  prox_cmd->add_option("--z", z_path, "input vector (one-column CSV)")->required();
  prox_cmd->add_option("--config", cfg_path, "JSON with lambda1, lambda2, l, u, mu");
  prox_cmd->add_option("--out", out_dir, "output directory");

  auto* solve_cmd = app.add_subcommand("solve", "run PG or PGiPN on f(x) = h(Ax - b)");
  solve_cmd->add_option("--A", a_path, "design matrix (.mtx or dense CSV)");
  solve_cmd->add_option("--b", b_path, "offset vector (CSV)");
  solve_cmd->add_option("--config", cfg_path, "JSON solver + model config");
  solve_cmd->add_option("--solver", solver, "pg | pgipn");
  solve_cmd->add_option("--out", out_dir, "output directory");
  solve_cmd->add_flag("--strict", strict, "exit 4 when max_iter is hit");
  solve_cmd->add_option("--verify", verify_path,
                        "re-check a report.json against its artifacts");

  auto* bench_cmd = app.add_subcommand("bench", "generate instances and compare solvers");
  bench_cmd->add_option("--kind", kind,
                        "sparse_regression | deblur_1d | deblur_2d | phoneme_like");
  bench_cmd->add_option("--seed", seeds, "instance seed(s)");
  bench_cmd->add_option("--n", n, "dimension override");
  bench_cmd->add_option("--m", m, "row count override");
  bench_cmd->add_option("--noise", noise, "noise level override");
  bench_cmd->add_option("--solver", solvers, "solver(s) to run");
  bench_cmd->add_option("--config", cfg_path, "JSON solver config overrides");
  bench_cmd->add_option("--out", out_dir, "output directory");

  try {
    app.parse(argc, argv);
    if (prox_cmd->parsed()) return cmd_prox(z_path, cfg_path, out_dir);
    if (solve_cmd->parsed()) {
      if (!verify_path.empty()) return cmd_verify(verify_path);
      if (a_path.empty() || b_path.empty())
        throw ParseError("solve needs --A and --b (or --verify)");
      return cmd_solve(a_path, b_path, cfg_path, solver, out_dir, strict);
    }
    if (bench_cmd->parsed())
      return cmd_bench(kind, seeds, n, m, noise, solvers, cfg_path, out_dir);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDimension;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
