/*
Copyright 2026 The nnfn authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/
#include <CLI11.hpp>
#include <cstdio>

#include "nnfn/nnfn.hpp"

namespace {

using namespace nnfn;

struct CommonOptions {
  std::string solver = "factored";
  std::string reg = "nnfn";
  double lambda = 0.05;
  double theta = 1.0;
  double step = 0.01;
  Index rank_k = 5;
  Index rank_cap = 0;
  double tol = 1e-4;
  Index max_iters = 10000;
  std::vector<std::uint64_t> seeds;
  std::string laplacian_file;
  double laplacian_weight = 0.0;
  std::string out_dir;
  Index eval_every = 1;
  bool no_refit = false;
  bool allow_out_of_range = false;
  std::string metric;
};

RegularizerKind parse_kind(const std::string& s) {
  if (s == "nuclear") return RegularizerKind::Nuclear;
  if (s == "nnfn") return RegularizerKind::NNFN;
  if (s == "capped-l1") return RegularizerKind::CappedL1;
  if (s == "lsp") return RegularizerKind::LSP;
  if (s == "mcp") return RegularizerKind::MCP;
  throw CLI::ValidationError("--reg", "unknown regularizer " + s);
}

void add_common_flags(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--solver", o.solver, "proximal or factored")
      ->check(CLI::IsMember({"proximal", "factored"}));
  cmd->add_option("--reg", o.reg,
                  "nuclear, nnfn, capped-l1, lsp or mcp (proximal); "
                  "nuclear or nnfn (factored)")
      ->check(CLI::IsMember({"nuclear", "nnfn", "capped-l1", "lsp", "mcp"}));
  cmd->add_option("--lambda", o.lambda, "regularization weight");
  cmd->add_option("--theta", o.theta,
                  "shape parameter for capped-l1, lsp, mcp");
  cmd->add_option("--step", o.step, "gradient/proximal stepsize");
  cmd->add_option("--rank-k", o.rank_k, "factor width (factored solver)");
  cmd->add_option("--rank-cap", o.rank_cap,
                  "SVD truncation rank, 0 = none (proximal solver)");
  cmd->add_option("--tol", o.tol, "relative objective-change tolerance");
  cmd->add_option("--max-iters", o.max_iters, "iteration budget");
  cmd->add_option("--seed", o.seeds, "seed(s); repeat for repetitions");
  cmd->add_option("--laplacian", o.laplacian_file,
                  "affinity matrix file; enables the graph-smoothness term");
  cmd->add_option("--laplacian-weight", o.laplacian_weight,
                  "weight of the graph-smoothness term");
  cmd->add_option("--out", o.out_dir, "output directory for traces/summary");
  cmd->add_option("--eval-every", o.eval_every,
                  "validation-evaluation cadence in the trace");
  cmd->add_flag("--no-refit", o.no_refit,
                "do not refit on train+validation for the final model");
  cmd->add_flag("--allow-out-of-range", o.allow_out_of_range,
                "permit lambda/step outside the default search ranges");
  cmd->add_option("--metric", o.metric, "nmse or rmse")
      ->check(CLI::IsMember({"nmse", "rmse", ""}));
  cmd->set_config("--config", "", "read options from a key=value file");
}

ExperimentConfig to_config(const CommonOptions& o) {
  ExperimentConfig cfg;
  cfg.solver =
      o.solver == "proximal" ? SolverKind::Proximal : SolverKind::Factored;
  const RegularizerKind kind = parse_kind(o.reg);
  cfg.solver_config.regularizer =
      requires_theta(kind) ? RegularizerSpec(kind, o.lambda, o.theta)
                           : RegularizerSpec(kind, o.lambda);
  cfg.solver_config.stepsize = o.step;
  cfg.solver_config.rank_k = o.rank_k;
  if (o.rank_cap > 0) cfg.solver_config.rank_cap = o.rank_cap;
  cfg.solver_config.rel_tol = o.tol;
  cfg.solver_config.max_iters = o.max_iters;
  cfg.solver_config.laplacian_weight = o.laplacian_weight;
  cfg.solver_config.eval_every = o.eval_every;
  cfg.laplacian_path = o.laplacian_file;
  if (!o.seeds.empty()) cfg.seeds = o.seeds;
  cfg.out_dir = o.out_dir;
  cfg.refit_on_validation = !o.no_refit;
  cfg.allow_out_of_range = o.allow_out_of_range;
  return cfg;
}

void print_summary(const ExperimentSummary& s, MetricKind metric) {
  for (const RunResult& r : s.runs) {
    if (r.status == SolveStatus::NumericalFailure) {
      std::printf("seed %llu: numerical failure after %lld iterations\n",
                  static_cast<unsigned long long>(r.seed),
                  static_cast<long long>(r.iterations));
      continue;
    }
    std::printf("seed %llu: %s=%.6f rank=%lld iters=%lld time=%.3fs (%s)\n",
                static_cast<unsigned long long>(r.seed), to_string(metric),
                r.report.value,
                static_cast<long long>(r.report.recovered_rank),
                static_cast<long long>(r.iterations),
                r.report.wall_time_seconds, to_string(r.status));
  }
  std::printf("mean %s = %.6f +- %.6f   mean solver time = %.3fs\n",
              to_string(metric), s.mean, s.stddev, s.mean_wall_time_s);
}

int run_prox_check() {
  int failures = 0;
  const auto report = [&](const char* name, const oracle::SuiteResult& r) {
    std::printf("[%s] %s: %d/%d cases agree (max coord err %.2e)\n",
                r.passed() ? "PASS" : "FAIL", name, r.total - r.failures,
                r.total, r.max_err);
    if (!r.passed()) ++failures;
  };
  report("l1-2 vector prox vs brute force",
         oracle::prox_l12_suite(1000, 20260809));
  report("scalar prox (capped-l1, lsp, mcp) vs brute force",
         oracle::prox_scalar_suite(400, 20260810));
  report("nnfn matrix prox local-optimality probes",
         oracle::prox_nnfn_probe_suite(100, 20260811));
  return failures;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Low-rank matrix completion with the nuclear-norm-minus-Frobenius-norm "
      "regularizer: proximal and SVD-free factored solvers plus baselines"};
  app.require_subcommand(1);

  CommonOptions synth_opts, complete_opts, grid_opts;

  auto* synth = app.add_subcommand("synth", "synthetic benchmark run");
  Index m = 500, k_star = 5;
  double noise_std = 0.1, mult = 1.0;
  synth->add_option("--m", m, "matrix side length");
  synth->add_option("--k-star", k_star, "true rank");
  synth->add_option("--noise-std", noise_std,
                    "observation noise standard deviation");
  synth->add_option("--mult", mult, "observed-count multiplier");
  add_common_flags(synth, synth_opts);

  auto* complete =
      app.add_subcommand("complete", "complete a triplet-file matrix");
  std::string input;
  Index rows = 0, cols = 0;
  bool zero_based = false;
  std::vector<double> split{0.5, 0.25, 0.25};
  complete->add_option("--input", input, "triplet file (row,col,value lines)")
      ->required();
  complete->add_option("--rows", rows, "matrix rows")->required();
  complete->add_option("--cols", cols, "matrix cols")->required();
  complete->add_flag("--zero-based", zero_based,
                     "indices start at 0 (default: 1)");
  complete->add_option("--split", split, "train/validation/test fractions")
      ->expected(3);
  add_common_flags(complete, complete_opts);

  auto* grid = app.add_subcommand("grid", "grid search over hyperparameters");
  Index gm = 500, gk_star = 5;
  double gnoise = 0.1, gmult = 1.0;
  std::string ginput;
  Index grows = 0, gcols = 0;
  bool gzero_based = false;
  std::vector<double> gsplit{0.5, 0.25, 0.25};
  std::vector<double> lambda_grid, step_grid, theta_grid;
  std::vector<Index> k_grid;
  grid->add_option("--m", gm, "matrix side length (synthetic)");
  grid->add_option("--k-star", gk_star, "true rank (synthetic)");
  grid->add_option("--noise-std", gnoise, "noise std (synthetic)");
  grid->add_option("--mult", gmult, "observed-count multiplier (synthetic)");
  grid->add_option("--input", ginput, "triplet file (omit for synthetic)");
  grid->add_option("--rows", grows, "matrix rows (triplets)");
  grid->add_option("--cols", gcols, "matrix cols (triplets)");
  grid->add_flag("--zero-based", gzero_based, "triplet indices start at 0");
  grid->add_option("--split", gsplit, "triplet split fractions")->expected(3);
  grid->add_option("--lambda-grid", lambda_grid, "lambda axis");
  grid->add_option("--step-grid", step_grid, "stepsize axis");
  grid->add_option("--rank-grid", k_grid, "rank axis (k or rank cap)");
  grid->add_option("--theta-grid", theta_grid, "theta axis");
  add_common_flags(grid, grid_opts);

  auto* prox_check = app.add_subcommand(
      "prox-check", "run the proximal-operator oracle suites");
  (void)prox_check;

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) {
      ExperimentConfig cfg = to_config(synth_opts);
      cfg.source = SyntheticSource{m, k_star, noise_std, mult};
      cfg.metric =
          synth_opts.metric == "rmse" ? MetricKind::RMSE : MetricKind::NMSE;
      const ExperimentSummary s = run_experiment(cfg);
      print_summary(s, cfg.metric);
      return s.n_failed == static_cast<Index>(s.runs.size()) ? 1 : 0;
    }
    if (complete->parsed()) {
      ExperimentConfig cfg = to_config(complete_opts);
      cfg.source = TripletSource{input, rows, cols, !zero_based,
                                 {split[0], split[1], split[2]}};
      cfg.metric = MetricKind::RMSE;  // no ground truth for triplet data
      cfg.emit_model = true;
      const ExperimentSummary s = run_experiment(cfg);
      print_summary(s, cfg.metric);
      return s.n_failed == static_cast<Index>(s.runs.size()) ? 1 : 0;
    }
    if (grid->parsed()) {
      ExperimentConfig cfg = to_config(grid_opts);
      if (ginput.empty()) {
        cfg.source = SyntheticSource{gm, gk_star, gnoise, gmult};
        cfg.metric =
            grid_opts.metric == "rmse" ? MetricKind::RMSE : MetricKind::NMSE;
      } else {
        cfg.source = TripletSource{ginput, grows, gcols, !gzero_based,
                                   {gsplit[0], gsplit[1], gsplit[2]}};
        cfg.metric = MetricKind::RMSE;
      }
      cfg.lambda_grid = lambda_grid;
      cfg.step_grid = step_grid;
      cfg.k_grid = k_grid;
      cfg.theta_grid = theta_grid;
      const GridSearchResult r = grid_search(cfg);
      std::printf("grid points evaluated: %zu\n", r.table.size());
      if (r.best.theta) {
        std::printf("best: lambda=%g step=%g k=%lld theta=%g", r.best.lambda,
                    r.best.step, static_cast<long long>(r.best.k),
                    *r.best.theta);
      } else {
        std::printf("best: lambda=%g step=%g k=%lld", r.best.lambda,
                    r.best.step, static_cast<long long>(r.best.k));
      }
      std::printf("  val_error=%.6f test_metric=%.6f\n", r.best.val_error,
                  r.best.test_metric);
      return 0;
    }
    if (prox_check->parsed()) {
      return run_prox_check();
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
