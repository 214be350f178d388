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

#include <Eigen/SVD>

#include "nnfn/types.hpp"

namespace nnfn {

/// Thin SVD with descending nonnegative singular values. An optional rank cap
/// truncates to the leading triplets (used by the proximal solver as a
/// constant estimate of the iterate's rank).
inline SpectralDecomposition thin_svd(const Matrix& M,
                                      std::optional<Index> rank_cap = {}) {
  if (!M.allFinite()) {
    throw std::invalid_argument("thin_svd: input has non-finite entries");
  }
  Eigen::BDCSVD<Matrix> svd(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) {
    throw numerical_error("thin_svd: factorization did not converge");
  }
  Index r = std::min(M.rows(), M.cols());
  if (rank_cap && *rank_cap >= 1 && *rank_cap < r) r = *rank_cap;
  SpectralDecomposition out;
  out.U = svd.matrixU().leftCols(r);
  out.sigma = svd.singularValues().head(r);
  out.V = svd.matrixV().leftCols(r);
  return out;
}

/// Residual X - O restricted to the observed positions. Output carries the
/// same index set as obs.
inline ObservedMatrix sparse_residual(const Matrix& X,
                                      const ObservedMatrix& obs) {
  if (X.rows() != obs.rows() || X.cols() != obs.cols()) {
    throw std::invalid_argument("sparse_residual: shape mismatch");
  }
  std::vector<Entry> out(obs.entries());
  for (Entry& e : out) e.value = X(e.row, e.col) - e.value;
  return {obs.rows(), obs.cols(), std::move(out)};
}

/// Same residual with X = W * H^T evaluated entrywise; the dense product is
/// never formed.
inline ObservedMatrix sparse_residual(const FactorPair& fp,
                                      const ObservedMatrix& obs) {
  if (fp.rows() != obs.rows() || fp.cols() != obs.cols()) {
    throw std::invalid_argument("sparse_residual: shape mismatch");
  }
  std::vector<Entry> out(obs.entries());
  for (Entry& e : out) e.value = fp.predict(e.row, e.col) - e.value;
  return {obs.rows(), obs.cols(), std::move(out)};
}

/// ||W * H^T||_F from the k x k Gram matrices, sqrt(tr((H^T H)(W^T W))).
/// Cost O((m+n)k^2), no m x n product.
inline double factored_frobenius_norm(const Matrix& W, const Matrix& H) {
  if (W.cols() != H.cols()) {
    throw std::invalid_argument("factored_frobenius_norm: inner dim mismatch");
  }
  const Matrix WtW = W.transpose() * W;
  const Matrix HtH = H.transpose() * H;
  // trace of the product of two symmetric PSD matrices; clamp rounding dust
  const double tr = (HtH.array() * WtW.array()).sum();
  return std::sqrt(std::max(tr, 0.0));
}

}  // namespace nnfn
