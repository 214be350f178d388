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

#include <Eigen/Eigenvalues>

#include "nnfn/linalg.hpp"
#include "nnfn/types.hpp"

namespace nnfn {

enum class MetricKind { NMSE, RMSE };

inline const char* to_string(MetricKind m) {
  return m == MetricKind::NMSE ? "nmse" : "rmse";
}

struct EvaluationReport {
  MetricKind metric = MetricKind::NMSE;
  double value = 0.0;
  Index nnz_evaluated = 0;
  Index recovered_rank = 0;
  double wall_time_seconds = 0.0;
};

/// Normalized mean squared error restricted to a mask of positions:
/// ||P(X - G)||_F / ||P(G)||_F. Note this is a ratio of norms, not of
/// squared norms. Values stored in the mask are ignored; only its index set
/// matters.
inline double nmse(const Matrix& X, const Matrix& G,
                   const ObservedMatrix& eval_mask) {
  if (X.rows() != G.rows() || X.cols() != G.cols() ||
      eval_mask.rows() != G.rows() || eval_mask.cols() != G.cols()) {
    throw std::invalid_argument("nmse: shape mismatch");
  }
  if (eval_mask.nnz() == 0) {
    throw std::invalid_argument("nmse: empty evaluation mask");
  }
  double num = 0.0, den = 0.0;
  for (const Entry& e : eval_mask.entries()) {
    const double d = X(e.row, e.col) - G(e.row, e.col);
    num += d * d;
    den += G(e.row, e.col) * G(e.row, e.col);
  }
  if (den == 0.0) {
    throw std::invalid_argument("nmse: ground truth vanishes on the mask");
  }
  return std::sqrt(num / den);
}

/// NMSE over the complement of an observed set (every position not in obs),
/// without materializing the complement.
inline double nmse_unobserved(const Matrix& X, const Matrix& G,
                              const ObservedMatrix& obs) {
  if (X.rows() != G.rows() || X.cols() != G.cols() ||
      obs.rows() != G.rows() || obs.cols() != G.cols()) {
    throw std::invalid_argument("nmse_unobserved: shape mismatch");
  }
  std::vector<bool> seen(static_cast<std::size_t>(G.rows() * G.cols()), false);
  for (const Entry& e : obs.entries()) {
    seen[static_cast<std::size_t>(e.row) * G.cols() + e.col] = true;
  }
  double num = 0.0, den = 0.0;
  Index counted = 0;
  for (Index i = 0; i < G.rows(); ++i) {
    for (Index j = 0; j < G.cols(); ++j) {
      if (seen[static_cast<std::size_t>(i) * G.cols() + j]) continue;
      const double d = X(i, j) - G(i, j);
      num += d * d;
      den += G(i, j) * G(i, j);
      ++counted;
    }
  }
  if (counted == 0) {
    throw std::invalid_argument("nmse_unobserved: no unobserved positions");
  }
  if (den == 0.0) {
    throw std::invalid_argument(
        "nmse_unobserved: ground truth vanishes off the observed set");
  }
  return std::sqrt(num / den);
}

inline double nmse_unobserved(const FactorPair& fp, const Matrix& G,
                              const ObservedMatrix& obs) {
  return nmse_unobserved(fp.product(), G, obs);
}

/// Root mean squared error over a held-out observed set.
inline double rmse(const Matrix& X, const ObservedMatrix& test) {
  if (test.nnz() == 0) {
    throw std::invalid_argument("rmse: empty test set");
  }
  if (X.rows() != test.rows() || X.cols() != test.cols()) {
    throw std::invalid_argument("rmse: shape mismatch");
  }
  double acc = 0.0;
  for (const Entry& e : test.entries()) {
    const double d = X(e.row, e.col) - e.value;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(test.nnz()));
}

inline double rmse(const FactorPair& fp, const ObservedMatrix& test) {
  if (test.nnz() == 0) {
    throw std::invalid_argument("rmse: empty test set");
  }
  if (fp.rows() != test.rows() || fp.cols() != test.cols()) {
    throw std::invalid_argument("rmse: shape mismatch");
  }
  double acc = 0.0;
  for (const Entry& e : test.entries()) {
    const double d = fp.predict(e.row, e.col) - e.value;
    acc += d * d;
  }
  return std::sqrt(acc / static_cast<double>(test.nnz()));
}

/// Count of singular values above rel_tol * sigma_1; zero matrix has rank 0.
inline Index numerical_rank(const Matrix& X, double rel_tol = 1e-8) {
  if (X.size() == 0) return 0;
  const Vector s = thin_svd(X).sigma;
  if (s.size() == 0 || s[0] <= 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s[i] > rel_tol * s[0]) ++r;
  }
  return r;
}

/// Rank of W H^T from the k x k Gram matrices only: the squared singular
/// values of the product are the eigenvalues of C^(1/2) B C^(1/2) with
/// B = W^T W, C = H^T H. No m x n matrix is formed.
inline Index numerical_rank(const FactorPair& fp, double rel_tol = 1e-8) {
  const Matrix B = fp.W.transpose() * fp.W;
  const Matrix C = fp.H.transpose() * fp.H;
  Eigen::SelfAdjointEigenSolver<Matrix> es_c(C);
  if (es_c.info() != Eigen::Success) {
    throw numerical_error("numerical_rank: eigendecomposition failed");
  }
  const Vector evc = es_c.eigenvalues().cwiseMax(0.0);
  const Matrix Chalf = es_c.eigenvectors() *
                       evc.cwiseSqrt().asDiagonal() *
                       es_c.eigenvectors().transpose();
  Eigen::SelfAdjointEigenSolver<Matrix> es(Chalf * B * Chalf);
  if (es.info() != Eigen::Success) {
    throw numerical_error("numerical_rank: eigendecomposition failed");
  }
  const Vector ev = es.eigenvalues().cwiseMax(0.0);
  const double top = ev.maxCoeff();
  if (top <= 0.0) return 0;
  const double thresh = rel_tol * rel_tol * top;  // eigenvalues are sigma^2
  Index r = 0;
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > thresh) ++r;
  }
  return r;
}

}  // namespace nnfn
