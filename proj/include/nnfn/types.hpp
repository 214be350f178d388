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

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace nnfn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown when an underlying factorization fails or a solve produces
/// non-finite values. Distinct from std::invalid_argument (caller errors).
struct numerical_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Entry {
  Index row = 0;
  Index col = 0;
  double value = 0.0;
};

/// Sparse set of observed entries together with the matrix shape.
/// Entries are stored sorted by (row, col). Duplicate positions are a hard
/// construction error, never a silent overwrite.
class ObservedMatrix {
 public:
  ObservedMatrix(Index rows, Index cols, std::vector<Entry> entries)
      : rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (rows_ < 1 || cols_ < 1) {
      throw std::invalid_argument("ObservedMatrix: shape must be at least 1x1");
    }
    for (const Entry& e : entries_) {
      if (e.row < 0 || e.row >= rows_ || e.col < 0 || e.col >= cols_) {
        throw std::invalid_argument(
            "ObservedMatrix: entry (" + std::to_string(e.row) + ", " +
            std::to_string(e.col) + ") out of range for " +
            std::to_string(rows_) + "x" + std::to_string(cols_));
      }
      if (!std::isfinite(e.value)) {
        throw std::invalid_argument("ObservedMatrix: non-finite value at (" +
                                    std::to_string(e.row) + ", " +
                                    std::to_string(e.col) + ")");
      }
    }
    std::sort(entries_.begin(), entries_.end(),
              [](const Entry& a, const Entry& b) {
                return a.row != b.row ? a.row < b.row : a.col < b.col;
              });
    for (std::size_t i = 1; i < entries_.size(); ++i) {
      if (entries_[i].row == entries_[i - 1].row &&
          entries_[i].col == entries_[i - 1].col) {
        throw std::invalid_argument(
            "ObservedMatrix: duplicate entry at (" +
            std::to_string(entries_[i].row) + ", " +
            std::to_string(entries_[i].col) + ")");
      }
    }
  }

  Index rows() const { return rows_; }
  Index cols() const { return cols_; }
  Index nnz() const { return static_cast<Index>(entries_.size()); }
  double sparsity() const {
    return static_cast<double>(nnz()) /
           (static_cast<double>(rows_) * static_cast<double>(cols_));
  }
  const std::vector<Entry>& entries() const { return entries_; }

  /// Dense matrix with unobserved positions set to zero.
  Matrix to_dense() const {
    Matrix out = Matrix::Zero(rows_, cols_);
    for (const Entry& e : entries_) out(e.row, e.col) = e.value;
    return out;
  }

 private:
  Index rows_;
  Index cols_;
  std::vector<Entry> entries_;
};

/// Thin factor pair W (m x k), H (n x k) representing X = W * H^T.
struct FactorPair {
  Matrix W;
  Matrix H;

  FactorPair(Matrix w, Matrix h) : W(std::move(w)), H(std::move(h)) {
    if (W.cols() != H.cols() || W.cols() < 1) {
      throw std::invalid_argument("FactorPair: inner dimensions disagree");
    }
    if (!W.allFinite() || !H.allFinite()) {
      throw std::invalid_argument("FactorPair: non-finite factor entries");
    }
  }

  Index rows() const { return W.rows(); }
  Index cols() const { return H.rows(); }
  Index rank_k() const { return W.cols(); }
  double predict(Index i, Index j) const { return W.row(i).dot(H.row(j)); }
  Matrix product() const { return W * H.transpose(); }
};

/// Thin SVD triple with descending nonnegative singular values.
struct SpectralDecomposition {
  Matrix U;
  Vector sigma;
  Matrix V;

  Matrix reconstruct() const {
    return U * sigma.asDiagonal() * V.transpose();
  }
};

enum class RegularizerKind { Nuclear, NNFN, CappedL1, LSP, MCP };

inline const char* to_string(RegularizerKind k) {
  switch (k) {
    case RegularizerKind::Nuclear: return "nuclear";
    case RegularizerKind::NNFN: return "nnfn";
    case RegularizerKind::CappedL1: return "capped-l1";
    case RegularizerKind::LSP: return "lsp";
    case RegularizerKind::MCP: return "mcp";
  }
  return "?";
}

inline bool requires_theta(RegularizerKind k) {
  return k == RegularizerKind::CappedL1 || k == RegularizerKind::LSP ||
         k == RegularizerKind::MCP;
}

/// Tagged regularizer choice plus hyperparameters. theta must be present
/// exactly for the kinds that use it.
struct RegularizerSpec {
  RegularizerKind kind = RegularizerKind::NNFN;
  double lambda = 0.0;
  std::optional<double> theta;

  RegularizerSpec(RegularizerKind k, double lam,
                  std::optional<double> th = std::nullopt)
      : kind(k), lambda(lam), theta(th) {
    if (!(lambda >= 0.0)) {
      throw std::invalid_argument("RegularizerSpec: lambda must be >= 0");
    }
    if (requires_theta(kind)) {
      if (!theta || !(*theta > 0.0)) {
        throw std::invalid_argument(std::string("RegularizerSpec: ") +
                                    to_string(kind) + " requires theta > 0");
      }
    } else if (theta) {
      throw std::invalid_argument(std::string("RegularizerSpec: ") +
                                  to_string(kind) + " does not take theta");
    }
  }

  static RegularizerSpec nuclear(double lam) {
    return {RegularizerKind::Nuclear, lam};
  }
  static RegularizerSpec nnfn(double lam) {
    return {RegularizerKind::NNFN, lam};
  }
  static RegularizerSpec capped_l1(double lam, double th) {
    return {RegularizerKind::CappedL1, lam, th};
  }
  static RegularizerSpec lsp(double lam, double th) {
    return {RegularizerKind::LSP, lam, th};
  }
  static RegularizerSpec mcp(double lam, double th) {
    return {RegularizerKind::MCP, lam, th};
  }

  RegularizerSpec with_lambda(double lam) const {
    return {kind, lam, theta};
  }
};

}  // namespace nnfn
