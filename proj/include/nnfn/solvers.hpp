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

#include <chrono>
#include <cstdint>
#include <utility>

#include "nnfn/linalg.hpp"
#include "nnfn/metrics.hpp"
#include "nnfn/regularizers.hpp"
#include "nnfn/rng.hpp"
#include "nnfn/types.hpp"

namespace nnfn {

struct SolverConfig {
  RegularizerSpec regularizer = RegularizerSpec::nnfn(0.0);
  double stepsize = 0.01;
  Index max_iters = 10000;
  double rel_tol = 1e-4;          // relative objective change, stopping rule
  Index rank_k = 5;               // factor width (factored solver)
  std::optional<Index> rank_cap;  // SVD truncation (proximal solver)
  std::uint64_t seed = 0;
  double laplacian_weight = 0.0;
  Matrix laplacian;               // m x m, used when laplacian_weight > 0
  double zero_guard_eps = 1e-12;
  Index eval_every = 1;           // validation-error cadence in the trace
};

enum class SolveStatus { Converged, MaxIters, NumericalFailure };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIters: return "max_iters";
    case SolveStatus::NumericalFailure: return "numerical_failure";
  }
  return "?";
}

struct TraceRecord {
  Index iter = 0;
  double objective = 0.0;
  double elapsed_s = 0.0;  // solver work only; evaluation time excluded
  std::optional<double> val_error;
  Index rank = 0;
};

struct SolveTrace {
  std::vector<TraceRecord> records;
  SolveStatus status = SolveStatus::MaxIters;

  Index iterations() const {
    return records.empty() ? 0 : records.back().iter;
  }
  double total_seconds() const {
    return records.empty() ? 0.0 : records.back().elapsed_s;
  }
};

/// 0.5 ||P_Omega(X - O)||_F^2 over the observed entries.
inline double loss_value(const Matrix& X, const ObservedMatrix& obs) {
  double acc = 0.0;
  for (const Entry& e : sparse_residual(X, obs).entries()) {
    acc += e.value * e.value;
  }
  return 0.5 * acc;
}

inline double loss_value(const FactorPair& fp, const ObservedMatrix& obs) {
  double acc = 0.0;
  for (const Entry& e : sparse_residual(fp, obs).entries()) {
    acc += e.value * e.value;
  }
  return 0.5 * acc;
}

/// Full objective: loss + lambda * r(sigma(X)).
inline double full_objective(const Matrix& X, const ObservedMatrix& obs,
                             const RegularizerSpec& spec) {
  return loss_value(X, obs) +
         spec.lambda * regularizer_value(spec, thin_svd(X).sigma);
}

/// Factored objective F(W, H) = loss + (lambda/2)(||W||_F^2 + ||H||_F^2)
/// - lambda ||W H^T||_F. No SVD involved.
inline double factored_objective(const FactorPair& fp,
                                 const ObservedMatrix& obs, double lambda) {
  return loss_value(fp, obs) +
         0.5 * lambda * (fp.W.squaredNorm() + fp.H.squaredNorm()) -
         lambda * factored_frobenius_norm(fp.W, fp.H);
}

/// Graph-smoothness term weight * tr(X^T L X) with X = W H^T, plus its
/// gradient contributions 2w L W (H^T H) and 2w H (W^T L W).
struct LaplacianTerm {
  double value = 0.0;
  Matrix grad_W;
  Matrix grad_H;
};

inline void check_laplacian(const Matrix& L, double weight) {
  if (weight < 0.0) {
    throw std::invalid_argument("laplacian term: negative weight");
  }
  if (L.rows() != L.cols()) {
    throw std::invalid_argument("laplacian term: L must be square");
  }
  if ((L - L.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("laplacian term: L must be symmetric");
  }
}

inline LaplacianTerm laplacian_term(const FactorPair& fp, const Matrix& L,
                                    double weight) {
  check_laplacian(L, weight);
  if (L.rows() != fp.rows()) {
    throw std::invalid_argument("laplacian term: L size must match rows");
  }
  LaplacianTerm out;
  if (weight == 0.0) {
    out.grad_W = Matrix::Zero(fp.W.rows(), fp.W.cols());
    out.grad_H = Matrix::Zero(fp.H.rows(), fp.H.cols());
    return out;
  }
  const Matrix LW = L * fp.W;                      // m x k
  const Matrix WtLW = fp.W.transpose() * LW;       // k x k
  const Matrix HtH = fp.H.transpose() * fp.H;      // k x k
  out.value = weight * (WtLW.array() * HtH.array()).sum();
  out.grad_W = 2.0 * weight * LW * HtH;
  out.grad_H = 2.0 * weight * fp.H * WtLW;
  return out;
}

/// Full-matrix variant: value weight * tr(X^T L X), gradient 2w L X.
inline std::pair<double, Matrix> laplacian_term(const Matrix& X,
                                                const Matrix& L,
                                                double weight) {
  check_laplacian(L, weight);
  if (L.rows() != X.rows()) {
    throw std::invalid_argument("laplacian term: L size must match rows");
  }
  if (weight == 0.0) return {0.0, Matrix::Zero(X.rows(), X.cols())};
  const Matrix LX = L * X;
  return {weight * (X.array() * LX.array()).sum(), 2.0 * weight * LX};
}

/// Gradients of the factored objective, evaluated without forming W H^T:
///   grad_W = S H + lambda W - c W (H^T H)
///   grad_H = S^T W + lambda H - c H (W^T W)
/// with S the sparse residual and c = lambda / ||W H^T||_F. When the product
/// norm falls below zero_guard_eps, c is dropped to 0 for this evaluation
/// (any subgradient is valid at the origin of the norm).
inline std::pair<Matrix, Matrix> factored_gradients(
    const FactorPair& fp, const ObservedMatrix& obs, double lambda,
    double zero_guard_eps = 1e-12) {
  const ObservedMatrix S = sparse_residual(fp, obs);
  const Index k = fp.rank_k();
  Matrix gW = Matrix::Zero(fp.W.rows(), k);
  Matrix gH = Matrix::Zero(fp.H.rows(), k);
  for (const Entry& e : S.entries()) {
    gW.row(e.row) += e.value * fp.H.row(e.col);
    gH.row(e.col) += e.value * fp.W.row(e.row);
  }
  const Matrix WtW = fp.W.transpose() * fp.W;
  const Matrix HtH = fp.H.transpose() * fp.H;
  double c = 0.0;
  if (lambda != 0.0) {
    const double fro = std::sqrt(std::max((HtH.array() * WtW.array()).sum(), 0.0));
    if (fro >= zero_guard_eps) c = lambda / fro;
  }
  gW += lambda * fp.W - c * fp.W * HtH;
  gH += lambda * fp.H - c * fp.H * WtW;
  return {std::move(gW), std::move(gH)};
}

namespace detail {

using Clock = std::chrono::steady_clock;

inline double seconds_between(Clock::time_point a, Clock::time_point b) {
  return std::chrono::duration<double>(b - a).count();
}

inline std::optional<double> validation_rmse(const Matrix& X,
                                             const ObservedMatrix* val) {
  if (!val || val->nnz() == 0) return std::nullopt;
  return rmse(X, *val);
}

inline std::optional<double> validation_rmse(const FactorPair& fp,
                                             const ObservedMatrix* val) {
  if (!val || val->nnz() == 0) return std::nullopt;
  return rmse(fp, *val);
}

}  // namespace detail

/// Proximal algorithm: Z^t = X^{t-1} - eta grad f(X^{t-1}), then
/// X^t = prox with lambda scaled by eta. Stops when the relative objective
/// change drops below rel_tol. X^0 = 0.
inline std::pair<Matrix, SolveTrace> solve_proximal(
    const ObservedMatrix& obs, const SolverConfig& cfg,
    const ObservedMatrix* validation = nullptr) {
  const Index m = obs.rows(), n = obs.cols();
  const double eta = cfg.stepsize;
  const RegularizerSpec& spec = cfg.regularizer;
  const RegularizerSpec prox_spec = spec.with_lambda(eta * spec.lambda);
  const bool use_laplacian = cfg.laplacian_weight > 0.0;
  if (use_laplacian) check_laplacian(cfg.laplacian, cfg.laplacian_weight);

  Matrix X = Matrix::Zero(m, n);
  SolveTrace trace;
  trace.status = SolveStatus::MaxIters;
  double prev_obj = std::numeric_limits<double>::quiet_NaN();
  double elapsed = 0.0;

  for (Index t = 1; t <= cfg.max_iters; ++t) {
    const auto t0 = detail::Clock::now();
    Matrix Z = X;
    for (const Entry& e : obs.entries()) {
      Z(e.row, e.col) -= eta * (X(e.row, e.col) - e.value);
    }
    if (use_laplacian) {
      Z -= eta * (2.0 * cfg.laplacian_weight) * (cfg.laplacian * X);
    }
    const SpectralDecomposition sd = thin_svd(Z, cfg.rank_cap);
    const Vector shrunk = detail::prox_sigma(prox_spec, sd.sigma);
    X = detail::reassemble(sd, shrunk);

    double obj = loss_value(X, obs) +
                 spec.lambda * regularizer_value(spec, shrunk);
    if (use_laplacian) {
      obj += cfg.laplacian_weight * (X.array() * (cfg.laplacian * X).array()).sum();
    }
    elapsed += detail::seconds_between(t0, detail::Clock::now());

    Index rank = 0;
    for (Index i = 0; i < shrunk.size(); ++i) {
      if (shrunk[i] != 0.0) ++rank;
    }
    std::optional<double> val_err;
    if ((t - 1) % cfg.eval_every == 0) {
      val_err = detail::validation_rmse(X, validation);
    }
    trace.records.push_back({t, obj, elapsed, val_err, rank});

    if (!std::isfinite(obj)) {
      trace.status = SolveStatus::NumericalFailure;
      break;
    }
    if (std::isfinite(prev_obj) &&
        std::abs(prev_obj - obj) / std::max(1.0, std::abs(prev_obj)) <
            cfg.rel_tol) {
      trace.status = SolveStatus::Converged;
      break;
    }
    prev_obj = obj;
  }
  return {std::move(X), std::move(trace)};
}

/// Gradient descent on the factored objective, simultaneous updates of W and
/// H from gradients evaluated at the previous iterate. Never takes an SVD of
/// the m x n iterate. kind Nuclear selects the factored nuclear surrogate
/// (the c = 0 objective); kind NNFN subtracts the product Frobenius norm.
inline std::pair<FactorPair, SolveTrace> solve_factored(
    const ObservedMatrix& obs, const SolverConfig& cfg,
    const ObservedMatrix* validation = nullptr) {
  if (cfg.regularizer.kind != RegularizerKind::NNFN &&
      cfg.regularizer.kind != RegularizerKind::Nuclear) {
    throw std::invalid_argument(
        "solve_factored: regularizer must be nnfn or nuclear");
  }
  if (cfg.rank_k < 1) {
    throw std::invalid_argument("solve_factored: rank_k must be >= 1");
  }
  const bool with_fro = cfg.regularizer.kind == RegularizerKind::NNFN;
  const double lambda = cfg.regularizer.lambda;
  const double eta = cfg.stepsize;
  const Index m = obs.rows(), n = obs.cols(), k = cfg.rank_k;
  const bool use_laplacian = cfg.laplacian_weight > 0.0;
  if (use_laplacian) check_laplacian(cfg.laplacian, cfg.laplacian_weight);

  // i.i.d. N(0, 1/k) entries keep ||W H^T||_F of order one for any width
  Rng rng(cfg.seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(k));
  Matrix W(m, k), H(n, k);
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i < m; ++i) W(i, j) = scale * rng.normal();
  }
  for (Index j = 0; j < k; ++j) {
    for (Index i = 0; i < n; ++i) H(i, j) = scale * rng.normal();
  }

  SolveTrace trace;
  trace.status = SolveStatus::MaxIters;
  double prev_obj = std::numeric_limits<double>::quiet_NaN();
  double elapsed = 0.0;
  int rising = 0;

  for (Index t = 1; t <= cfg.max_iters; ++t) {
    auto t0 = detail::Clock::now();
    double loss = 0.0;
    Matrix gW = Matrix::Zero(m, k);
    Matrix gH = Matrix::Zero(n, k);
    for (const Entry& e : obs.entries()) {
      const double r = W.row(e.row).dot(H.row(e.col)) - e.value;
      loss += r * r;
      gW.row(e.row) += r * H.row(e.col);
      gH.row(e.col) += r * W.row(e.row);
    }
    loss *= 0.5;
    const Matrix WtW = W.transpose() * W;
    const Matrix HtH = H.transpose() * H;
    const double fro =
        std::sqrt(std::max((HtH.array() * WtW.array()).sum(), 0.0));
    double c = 0.0;
    double obj = loss + 0.5 * lambda * (WtW.trace() + HtH.trace());
    if (with_fro) {
      obj -= lambda * fro;
      if (lambda != 0.0 && fro >= cfg.zero_guard_eps) c = lambda / fro;
    }
    gW += lambda * W - c * W * HtH;
    gH += lambda * H - c * H * WtW;
    if (use_laplacian) {
      const Matrix LW = cfg.laplacian * W;
      const Matrix WtLW = W.transpose() * LW;
      obj += cfg.laplacian_weight * (WtLW.array() * HtH.array()).sum();
      gW += 2.0 * cfg.laplacian_weight * LW * HtH;
      gH += 2.0 * cfg.laplacian_weight * H * WtLW;
    }
    elapsed += detail::seconds_between(t0, detail::Clock::now());

    const bool finite = std::isfinite(obj) && W.allFinite() && H.allFinite();
    // trace bookkeeping at the current iterate, outside the timed region
    std::optional<double> val_err;
    Index rank = trace.records.empty() ? k : trace.records.back().rank;
    if (finite && (t - 1) % cfg.eval_every == 0) {
      const FactorPair snapshot(W, H);
      val_err = detail::validation_rmse(snapshot, validation);
      rank = numerical_rank(snapshot);
    }
    trace.records.push_back({t, obj, elapsed, val_err, rank});

    if (!finite) {
      trace.status = SolveStatus::NumericalFailure;
      break;
    }
    if (std::isfinite(prev_obj)) {
      if (obj > prev_obj) {
        if (++rising >= 50) {
          trace.status = SolveStatus::NumericalFailure;
          break;
        }
      } else {
        rising = 0;
      }
      if (std::abs(prev_obj - obj) / std::max(1.0, std::abs(prev_obj)) <
          cfg.rel_tol) {
        trace.status = SolveStatus::Converged;
        break;
      }
    }
    prev_obj = obj;

    t0 = detail::Clock::now();
    W -= eta * gW;
    H -= eta * gH;
    elapsed += detail::seconds_between(t0, detail::Clock::now());
  }
  if (!W.allFinite() || !H.allFinite()) {
    // diverged; the factor-pair invariant (finite entries) forces a sentinel
    return {FactorPair(Matrix::Zero(m, k), Matrix::Zero(n, k)),
            std::move(trace)};
  }
  return {FactorPair(std::move(W), std::move(H)), std::move(trace)};
}

}  // namespace nnfn
