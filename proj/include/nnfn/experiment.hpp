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
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <variant>

#include <json.hpp>

#include "nnfn/data.hpp"
#include "nnfn/metrics.hpp"
#include "nnfn/solvers.hpp"

namespace nnfn {

enum class SolverKind { Proximal, Factored };

inline const char* to_string(SolverKind s) {
  return s == SolverKind::Proximal ? "proximal" : "factored";
}

struct SyntheticSource {
  Index m = 500;
  Index k_star = 5;
  double noise_std = 0.1;
  double sparsity_multiplier = 1.0;
};

struct TripletSource {
  std::string path;
  Index rows = 0;
  Index cols = 0;
  bool one_based = true;
  std::array<double, 3> fractions{0.5, 0.25, 0.25};
};

struct ExperimentConfig {
  std::variant<SyntheticSource, TripletSource> source;
  SolverKind solver = SolverKind::Factored;
  SolverConfig solver_config;
  MetricKind metric = MetricKind::NMSE;
  std::string out_dir;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  // After hyperparameter selection the final model is trained on
  // train + validation; tuning itself only ever sees the train split.
  bool refit_on_validation = true;
  bool emit_model = false;
  std::string laplacian_path;  // affinity file; L = D - A is built from it

  // grid axes (grid_search only); theta collapses for nuclear/nnfn
  std::vector<double> lambda_grid;
  std::vector<double> step_grid;
  std::vector<Index> k_grid;
  std::vector<double> theta_grid;

  bool allow_out_of_range = false;
};

inline void validate(const ExperimentConfig& cfg) {
  const auto check_lambda = [&](double l) {
    if (l != 0.0 && (l < 1e-3 || l > 1e2) && !cfg.allow_out_of_range) {
      throw std::invalid_argument(
          "config field 'lambda': value " + std::to_string(l) +
          " outside [1e-3, 1e2] (pass allow_out_of_range to override)");
    }
  };
  const auto check_step = [&](double s) {
    if ((s < 1e-5 || s > 1.0) && !cfg.allow_out_of_range) {
      throw std::invalid_argument(
          "config field 'step': value " + std::to_string(s) +
          " outside [1e-5, 1] (pass allow_out_of_range to override)");
    }
  };
  check_lambda(cfg.solver_config.regularizer.lambda);
  check_step(cfg.solver_config.stepsize);
  for (double l : cfg.lambda_grid) check_lambda(l);
  for (double s : cfg.step_grid) check_step(s);
  for (Index k : cfg.k_grid) {
    // 0 on the proximal axis means "no rank cap"
    const Index lo = cfg.solver == SolverKind::Proximal ? 0 : 1;
    if (k < lo) {
      throw std::invalid_argument("config field 'rank-k': must be >= 1");
    }
  }
  if (cfg.seeds.empty()) {
    throw std::invalid_argument("config field 'seed': need at least one seed");
  }
  if (cfg.metric == MetricKind::NMSE &&
      std::holds_alternative<TripletSource>(cfg.source)) {
    throw std::invalid_argument(
        "config field 'metric': nmse needs a ground-truth matrix; use rmse "
        "for triplet data");
  }
}

/// Writes `iter,objective,elapsed_s,val_error,rank` rows; a missing
/// validation error becomes an empty field. Full precision so that parsing
/// the file back reproduces the trace exactly.
inline void emit_trace(const SolveTrace& trace, const std::string& path) {
  if (trace.records.empty()) {
    throw std::invalid_argument("emit_trace: empty trace");
  }
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("emit_trace: cannot open " + path);
  }
  out << "iter,objective,elapsed_s,val_error,rank\n";
  char buf[96];
  for (const TraceRecord& r : trace.records) {
    std::snprintf(buf, sizeof buf, "%lld,%.17g,%.17g,",
                  static_cast<long long>(r.iter), r.objective, r.elapsed_s);
    out << buf;
    if (r.val_error) {
      std::snprintf(buf, sizeof buf, "%.17g", *r.val_error);
      out << buf;
    }
    out << "," << r.rank << "\n";
  }
  if (!out) {
    throw std::runtime_error("emit_trace: write failed for " + path);
  }
}

inline SolveTrace parse_trace(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("parse_trace: cannot open " + path);
  }
  SolveTrace trace;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TraceRecord r;
    std::size_t pos = 0;
    const auto next_field = [&]() {
      const std::size_t comma = line.find(',', pos);
      std::string f = line.substr(pos, comma - pos);
      pos = comma == std::string::npos ? line.size() : comma + 1;
      return f;
    };
    r.iter = std::stoll(next_field());
    r.objective = std::stod(next_field());
    r.elapsed_s = std::stod(next_field());
    const std::string val = next_field();
    if (!val.empty()) r.val_error = std::stod(val);
    r.rank = std::stoll(next_field());
    trace.records.push_back(r);
  }
  return trace;
}

struct RunResult {
  std::uint64_t seed = 0;
  EvaluationReport report;
  SolveStatus status = SolveStatus::MaxIters;
  Index iterations = 0;
};

struct ExperimentSummary {
  std::vector<RunResult> runs;
  double mean = 0.0;
  double stddev = 0.0;
  double mean_wall_time_s = 0.0;
  Index n_failed = 0;
};

namespace detail {

struct PreparedData {
  ObservedMatrix fit;         // what the final solver sees
  ObservedMatrix tuning_fit;  // train split only (hyperparameter selection)
  ObservedMatrix validation;
  std::optional<ObservedMatrix> test;       // triplet data
  std::optional<Matrix> ground_truth;       // synthetic data
  std::optional<ObservedMatrix> observed;   // all observed (synthetic)
};

inline PreparedData prepare(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (const auto* s = std::get_if<SyntheticSource>(&cfg.source)) {
    SyntheticInstance inst = generate_synthetic(
        s->m, s->k_star, s->noise_std, s->sparsity_multiplier, seed);
    ObservedMatrix all = inst.all_observed();
    ObservedMatrix fit = cfg.refit_on_validation ? all : inst.train;
    return {std::move(fit),
            inst.train,
            inst.validation,
            std::nullopt,
            std::move(inst.ground_truth),
            std::move(all)};
  }
  const auto& t = std::get<TripletSource>(cfg.source);
  ObservedMatrix loaded = load_triplets(t.path, t.rows, t.cols, t.one_based);
  auto parts = split_observations(loaded, t.fractions, seed);
  std::vector<Entry> fit_e = parts[0].entries();
  if (cfg.refit_on_validation) {
    fit_e.insert(fit_e.end(), parts[1].entries().begin(),
                 parts[1].entries().end());
  }
  ObservedMatrix fit(loaded.rows(), loaded.cols(), std::move(fit_e));
  return {std::move(fit), std::move(parts[0]), std::move(parts[1]),
          std::move(parts[2]), std::nullopt, std::nullopt};
}

struct FittedModel {
  std::optional<Matrix> X;
  std::optional<FactorPair> fp;
  SolveTrace trace;

  Index rank(double tol = 1e-8) const {
    return X ? numerical_rank(*X, tol) : numerical_rank(*fp, tol);
  }
};

inline FittedModel fit(const ExperimentConfig& cfg, const SolverConfig& scfg,
                       const ObservedMatrix& data,
                       const ObservedMatrix* validation) {
  SolverConfig local = scfg;
  if (!cfg.laplacian_path.empty() && local.laplacian_weight > 0.0 &&
      local.laplacian.size() == 0) {
    local.laplacian = build_laplacian(load_dense_csv(cfg.laplacian_path));
  }
  FittedModel out;
  if (cfg.solver == SolverKind::Proximal) {
    auto [X, trace] = solve_proximal(data, local, validation);
    out.X = std::move(X);
    out.trace = std::move(trace);
  } else {
    auto [fp, trace] = solve_factored(data, local, validation);
    out.fp = std::move(fp);
    out.trace = std::move(trace);
  }
  return out;
}

inline double evaluate(const ExperimentConfig& cfg, const FittedModel& model,
                       const PreparedData& data, Index* nnz_evaluated) {
  if (cfg.metric == MetricKind::NMSE) {
    const Matrix X = model.X ? *model.X : model.fp->product();
    const ObservedMatrix& excl = *data.observed;
    *nnz_evaluated = excl.rows() * excl.cols() - excl.nnz();
    return nmse_unobserved(X, *data.ground_truth, excl);
  }
  const ObservedMatrix& test = data.test ? *data.test : data.validation;
  *nnz_evaluated = test.nnz();
  return model.X ? rmse(*model.X, test) : rmse(*model.fp, test);
}

inline void write_matrix_csv(const Matrix& M, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  char buf[32];
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      std::snprintf(buf, sizeof buf, "%.17g", M(i, j));
      out << buf << (j + 1 < M.cols() ? "," : "");
    }
    out << "\n";
  }
}

inline nlohmann::json config_echo(const ExperimentConfig& cfg) {
  nlohmann::json j;
  if (const auto* s = std::get_if<SyntheticSource>(&cfg.source)) {
    j["source"] = {{"kind", "synthetic"},
                   {"m", s->m},
                   {"k_star", s->k_star},
                   {"noise_std", s->noise_std},
                   {"sparsity_multiplier", s->sparsity_multiplier}};
  } else {
    const auto& t = std::get<TripletSource>(cfg.source);
    j["source"] = {{"kind", "triplets"},
                   {"path", t.path},
                   {"rows", t.rows},
                   {"cols", t.cols},
                   {"one_based", t.one_based},
                   {"fractions", t.fractions}};
  }
  const SolverConfig& sc = cfg.solver_config;
  j["solver"] = to_string(cfg.solver);
  j["regularizer"] = to_string(sc.regularizer.kind);
  j["lambda"] = sc.regularizer.lambda;
  if (sc.regularizer.theta) j["theta"] = *sc.regularizer.theta;
  j["step"] = sc.stepsize;
  j["rel_tol"] = sc.rel_tol;
  j["max_iters"] = sc.max_iters;
  if (cfg.solver == SolverKind::Factored) j["rank_k"] = sc.rank_k;
  if (sc.rank_cap) j["rank_cap"] = *sc.rank_cap;
  j["laplacian_weight"] = sc.laplacian_weight;
  j["metric"] = to_string(cfg.metric);
  j["seeds"] = cfg.seeds;
  j["refit_on_validation"] = cfg.refit_on_validation;
  return j;
}

}  // namespace detail

/// Runs the configured solver once per seed (data rebuilt per seed), writes
/// one trace file per run plus a JSON summary with mean and standard
/// deviation across seeds. A numerical failure is recorded for its run and
/// excluded from the aggregates; it does not abort the batch.
inline ExperimentSummary run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentSummary summary;
  const bool want_files = !cfg.out_dir.empty();
  if (want_files) std::filesystem::create_directories(cfg.out_dir);

  for (std::uint64_t seed : cfg.seeds) {
    detail::PreparedData data = detail::prepare(cfg, seed);
    SolverConfig scfg = cfg.solver_config;
    scfg.seed = seed;
    detail::FittedModel model =
        detail::fit(cfg, scfg, data.fit, &data.validation);

    RunResult run;
    run.seed = seed;
    run.status = model.trace.status;
    run.iterations = model.trace.iterations();
    run.report.metric = cfg.metric;
    run.report.wall_time_seconds = model.trace.total_seconds();
    if (run.status != SolveStatus::NumericalFailure) {
      run.report.value =
          detail::evaluate(cfg, model, data, &run.report.nnz_evaluated);
      run.report.recovered_rank = model.rank();
    } else {
      ++summary.n_failed;
    }
    summary.runs.push_back(run);

    if (want_files) {
      const std::string base = cfg.out_dir + "/seed" + std::to_string(seed);
      emit_trace(model.trace, base + "_trace.csv");
      if (cfg.emit_model) {
        if (model.X) {
          detail::write_matrix_csv(*model.X, base + "_X.csv");
        } else {
          detail::write_matrix_csv(model.fp->W, base + "_W.csv");
          detail::write_matrix_csv(model.fp->H, base + "_H.csv");
        }
      }
    }
  }

  double sum = 0.0, time_sum = 0.0;
  Index n_ok = 0;
  for (const RunResult& r : summary.runs) {
    if (r.status == SolveStatus::NumericalFailure) continue;
    sum += r.report.value;
    time_sum += r.report.wall_time_seconds;
    ++n_ok;
  }
  if (n_ok > 0) {
    summary.mean = sum / static_cast<double>(n_ok);
    summary.mean_wall_time_s = time_sum / static_cast<double>(n_ok);
    double ss = 0.0;
    for (const RunResult& r : summary.runs) {
      if (r.status == SolveStatus::NumericalFailure) continue;
      ss += (r.report.value - summary.mean) * (r.report.value - summary.mean);
    }
    summary.stddev =
        n_ok > 1 ? std::sqrt(ss / static_cast<double>(n_ok - 1)) : 0.0;
  }

  if (want_files) {
    nlohmann::json j;
    j["config"] = detail::config_echo(cfg);
    j["runs"] = nlohmann::json::array();
    for (const RunResult& r : summary.runs) {
      nlohmann::json jr;
      jr["seed"] = r.seed;
      jr["status"] = to_string(r.status);
      jr["iterations"] = r.iterations;
      jr["wall_time_s"] = r.report.wall_time_seconds;
      if (r.status != SolveStatus::NumericalFailure) {
        jr["value"] = r.report.value;
        jr["rank"] = r.report.recovered_rank;
        jr["nnz_evaluated"] = r.report.nnz_evaluated;
      }
      j["runs"].push_back(jr);
    }
    j["aggregate"] = {{"n_runs", summary.runs.size()},
                      {"n_failed", summary.n_failed},
                      {"mean", summary.mean},
                      {"stddev", summary.stddev},
                      {"mean_wall_time_s", summary.mean_wall_time_s}};
    std::ofstream out(cfg.out_dir + "/summary.json");
    out << j.dump(2) << "\n";
  }
  return summary;
}

struct GridPointResult {
  double lambda = 0.0;
  double step = 0.0;
  Index k = 0;
  std::optional<double> theta;
  double val_error = 0.0;
  double test_metric = 0.0;
  double wall_time_s = 0.0;
  SolveStatus status = SolveStatus::MaxIters;
};

struct GridSearchResult {
  GridPointResult best;
  std::vector<GridPointResult> table;
};

/// Evaluates every grid point on the first seed's instance, selecting on
/// validation RMSE (the only selection signal available without ground
/// truth). Tuning runs fit the train split only. Ties break toward smaller
/// lambda, then smaller k, then smaller stepsize, then smaller theta. The
/// report preserves deterministic grid order.
inline GridSearchResult grid_search(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<double> lambdas = cfg.lambda_grid;
  std::vector<double> steps = cfg.step_grid;
  std::vector<Index> ks = cfg.k_grid;
  if (lambdas.empty()) lambdas = {cfg.solver_config.regularizer.lambda};
  if (steps.empty()) steps = {cfg.solver_config.stepsize};
  if (ks.empty()) {
    ks = {cfg.solver == SolverKind::Proximal
              ? cfg.solver_config.rank_cap.value_or(0)
              : cfg.solver_config.rank_k};
  }
  std::vector<std::optional<double>> thetas;
  if (requires_theta(cfg.solver_config.regularizer.kind)) {
    if (cfg.theta_grid.empty()) {
      thetas = {cfg.solver_config.regularizer.theta};
    } else {
      for (double t : cfg.theta_grid) thetas.emplace_back(t);
    }
  } else {
    thetas = {std::nullopt};  // axis collapses
  }

  detail::PreparedData data = detail::prepare(cfg, cfg.seeds.front());
  if (data.validation.nnz() == 0) {
    throw std::invalid_argument("grid_search: empty validation split");
  }

  GridSearchResult result;
  bool have_best = false;
  for (double lam : lambdas) {
    for (double step : steps) {
      for (Index k : ks) {
        for (const auto& th : thetas) {
          SolverConfig scfg = cfg.solver_config;
          scfg.regularizer = RegularizerSpec(
              cfg.solver_config.regularizer.kind, lam, th);
          scfg.stepsize = step;
          scfg.seed = cfg.seeds.front();
          if (cfg.solver == SolverKind::Proximal) {
            if (k > 0) scfg.rank_cap = k;
          } else {
            scfg.rank_k = k;
          }
          GridPointResult point{lam, step, k, th, 0.0, 0.0, 0.0,
                                SolveStatus::MaxIters};
          detail::FittedModel model =
              detail::fit(cfg, scfg, data.tuning_fit, &data.validation);
          point.status = model.trace.status;
          point.wall_time_s = model.trace.total_seconds();
          if (model.trace.status != SolveStatus::NumericalFailure) {
            point.val_error = model.X ? rmse(*model.X, data.validation)
                                      : rmse(*model.fp, data.validation);
            Index dummy = 0;
            point.test_metric = detail::evaluate(cfg, model, data, &dummy);
            const auto better = [&]() {
              if (!have_best) return true;
              const GridPointResult& b = result.best;
              if (point.val_error != b.val_error) {
                return point.val_error < b.val_error;
              }
              if (point.lambda != b.lambda) return point.lambda < b.lambda;
              if (point.k != b.k) return point.k < b.k;
              if (point.step != b.step) return point.step < b.step;
              return point.theta.value_or(0.0) < b.theta.value_or(0.0);
            };
            if (better()) {
              result.best = point;
              have_best = true;
            }
          }
          result.table.push_back(point);
        }
      }
    }
  }
  if (!have_best) {
    throw numerical_error("grid_search: every grid point failed numerically");
  }

  if (!cfg.out_dir.empty()) {
    std::filesystem::create_directories(cfg.out_dir);
    std::ofstream out(cfg.out_dir + "/grid.csv");
    out << "lambda,step,k,theta,val_error,test_metric,wall_time_s,status\n";
    char buf[96];
    for (const GridPointResult& p : result.table) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%lld,", p.lambda, p.step,
                    static_cast<long long>(p.k));
      out << buf;
      if (p.theta) {
        std::snprintf(buf, sizeof buf, "%.17g", *p.theta);
        out << buf;
      }
      std::snprintf(buf, sizeof buf, ",%.17g,%.17g,%.17g,", p.val_error,
                    p.test_metric, p.wall_time_s);
      out << buf << to_string(p.status) << "\n";
    }
  }
  return result;
}

}  // namespace nnfn
