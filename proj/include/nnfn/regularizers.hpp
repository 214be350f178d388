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

#include <cmath>
#include <limits>

#include "nnfn/linalg.hpp"
#include "nnfn/types.hpp"

namespace nnfn {

/// Prox outputs below this magnitude are snapped to exact zeros so that
/// recovered rank is well defined.
inline constexpr double kProxZeroSnap = 1e-12;

namespace detail {

inline void snap_zeros(Vector& v) {
  for (Index i = 0; i < v.size(); ++i) {
    if (std::abs(v[i]) < kProxZeroSnap) v[i] = 0.0;
  }
}

/// Per-singular-value penalty r_hat(s) for the separable nonconvex kinds.
/// MCP's branch threshold involves lambda itself (theta * lambda).
inline double rhat(const RegularizerSpec& spec, double s) {
  const double th = spec.theta.value_or(0.0);
  switch (spec.kind) {
    case RegularizerKind::CappedL1:
      return std::min(s, th);
    case RegularizerKind::LSP:
      return std::log(s / th + 1.0);
    case RegularizerKind::MCP: {
      if (spec.lambda == 0.0) return 0.0;  // penalty vanishes with lambda
      const double tl = th * spec.lambda;
      return s <= tl ? s - s * s / (2.0 * tl) : tl / 2.0;
    }
    default:
      throw std::invalid_argument("rhat: kind is not separable");
  }
}

}  // namespace detail

/// Regularizer value r(X) as a function of the singular values, excluding the
/// lambda factor. sigma must be nonnegative.
inline double regularizer_value(const RegularizerSpec& spec,
                                const Vector& sigma) {
  for (Index i = 0; i < sigma.size(); ++i) {
    if (!(sigma[i] >= 0.0)) {
      throw std::invalid_argument("regularizer_value: negative singular value");
    }
  }
  switch (spec.kind) {
    case RegularizerKind::Nuclear:
      return sigma.sum();
    case RegularizerKind::NNFN:
      // l1 >= l2 always; clamp rounding dust so the value stays nonnegative
      return std::max(sigma.lpNorm<1>() - sigma.norm(), 0.0);
    default: {
      double acc = 0.0;
      for (Index i = 0; i < sigma.size(); ++i) {
        acc += detail::rhat(spec, sigma[i]);
      }
      return acc;
    }
  }
}

/// (z - lambda)_+ elementwise on nonnegative input; sign-preserving shrinkage
/// on general input. Preserves non-increasing order.
inline Vector soft_threshold(const Vector& z, double lambda) {
  if (!(lambda >= 0.0)) {
    throw std::invalid_argument("soft_threshold: lambda must be >= 0");
  }
  Vector out(z.size());
  for (Index i = 0; i < z.size(); ++i) {
    const double mag = std::max(std::abs(z[i]) - lambda, 0.0);
    out[i] = z[i] >= 0.0 ? mag : -mag;
  }
  detail::snap_zeros(out);
  return out;
}

/// Proximal operator of lambda * (||x||_1 - ||x||_2), the closed form of
/// Lou & Yan. Two regimes:
///   max|z_i| >  lambda:  scale the soft-thresholded vector v by
///                        (||v|| + lambda) / ||v||;
///   max|z_i| <= lambda:  keep one maximal-magnitude coordinate (first such
///                        index), zero the rest.
/// On a nonnegative non-increasing z (a spectrum) the output stays
/// nonnegative, non-increasing, and exactly sparse.
inline Vector prox_l12(const Vector& z, double lambda) {
  if (!(lambda >= 0.0)) {
    throw std::invalid_argument("prox_l12: lambda must be >= 0");
  }
  if (!z.allFinite()) {
    throw std::invalid_argument("prox_l12: non-finite input");
  }
  if (lambda == 0.0 || z.size() == 0) return z;
  Index imax = 0;
  double amax = 0.0;
  for (Index i = 0; i < z.size(); ++i) {
    const double a = std::abs(z[i]);
    if (a > amax) {
      amax = a;
      imax = i;
    }
  }
  Vector out = Vector::Zero(z.size());
  if (amax > lambda) {
    Vector v = soft_threshold(z, lambda);
    const double nv = v.norm();
    out = ((nv + lambda) / nv) * v;
  } else if (amax > 0.0) {
    out[imax] = z[imax];
  }
  detail::snap_zeros(out);
  return out;
}

/// Prox of the separable scalar penalty: argmin_x 0.5 (x - z)^2 +
/// lambda * rhat(|x|) for z >= 0. Each kind has finitely many closed-form
/// candidates (per-piece stationary points and piece boundaries); the winner
/// is the smallest objective, ties broken toward the smaller x.
inline double prox_scalar(const RegularizerSpec& spec, double z) {
  if (spec.kind == RegularizerKind::Nuclear ||
      spec.kind == RegularizerKind::NNFN) {
    throw std::invalid_argument("prox_scalar: kind is not separable");
  }
  if (!(z >= 0.0) || !std::isfinite(z)) {
    throw std::invalid_argument("prox_scalar: input must be finite and >= 0");
  }
  const double lam = spec.lambda;
  if (lam == 0.0) return z;
  const double th = *spec.theta;

  double candidates[5];
  int n = 0;
  candidates[n++] = 0.0;
  switch (spec.kind) {
    case RegularizerKind::CappedL1:
      // inner piece x <= theta: quadratic + lambda x
      candidates[n++] = std::clamp(z - lam, 0.0, th);
      // outer piece x >= theta: penalty constant
      candidates[n++] = std::max(z, th);
      break;
    case RegularizerKind::LSP: {
      // stationary points solve x^2 + (theta - z) x + (lambda - z theta) = 0
      const double disc = (z + th) * (z + th) - 4.0 * lam;
      if (disc >= 0.0) {
        const double sq = std::sqrt(disc);
        for (double root : {(z - th + sq) / 2.0, (z - th - sq) / 2.0}) {
          if (root > 0.0) candidates[n++] = root;
        }
      }
      break;
    }
    case RegularizerKind::MCP: {
      const double tl = th * lam;
      if (th > 1.0) {
        // inner piece x <= theta lambda
        candidates[n++] = std::clamp(th * (z - lam) / (th - 1.0), 0.0, tl);
      } else {
        candidates[n++] = tl;  // inner objective is concave; try the boundary
      }
      candidates[n++] = std::max(z, tl);  // outer piece, constant penalty
      break;
    }
    default:
      break;
  }

  const auto objective = [&](double x) {
    return 0.5 * (x - z) * (x - z) + lam * detail::rhat(spec, x);
  };
  double best_x = candidates[0];
  double best_f = objective(best_x);
  for (int i = 1; i < n; ++i) {
    const double f = objective(candidates[i]);
    if (f < best_f || (f == best_f && candidates[i] < best_x)) {
      best_f = f;
      best_x = candidates[i];
    }
  }
  return best_x < kProxZeroSnap ? 0.0 : best_x;
}

namespace detail {

/// Shrinkage map applied to a spectrum, shared by prox_spectral and the
/// solvers (which already hold an SVD of the iterate).
inline Vector prox_sigma(const RegularizerSpec& spec, const Vector& sigma) {
  switch (spec.kind) {
    case RegularizerKind::Nuclear:
      return soft_threshold(sigma, spec.lambda);
    case RegularizerKind::NNFN:
      return prox_l12(sigma, spec.lambda);
    default: {
      Vector out(sigma.size());
      for (Index i = 0; i < sigma.size(); ++i) {
        out[i] = prox_scalar(spec, sigma[i]);
      }
      return out;
    }
  }
}

inline Matrix reassemble(const SpectralDecomposition& sd,
                         const Vector& shrunk) {
  // drop exactly-zeroed directions; output rank equals the surviving count
  Index r = 0;
  for (Index i = 0; i < shrunk.size(); ++i) {
    if (shrunk[i] != 0.0) ++r;
  }
  if (r == 0) return Matrix::Zero(sd.U.rows(), sd.V.rows());
  Matrix Ur(sd.U.rows(), r), Vr(sd.V.rows(), r);
  Vector sr(r);
  Index j = 0;
  for (Index i = 0; i < shrunk.size(); ++i) {
    if (shrunk[i] == 0.0) continue;
    Ur.col(j) = sd.U.col(i);
    Vr.col(j) = sd.V.col(i);
    sr[j] = shrunk[i];
    ++j;
  }
  return Ur * sr.asDiagonal() * Vr.transpose();
}

}  // namespace detail

/// Matrix prox of lambda * (||X||_* - ||X||_F): apply the l1-2 vector prox to
/// the spectrum and reassemble with the input's singular vectors.
inline Matrix prox_nnfn(const Matrix& Z, double lambda,
                        std::optional<Index> rank_cap = {}) {
  const SpectralDecomposition sd = thin_svd(Z, rank_cap);
  return detail::reassemble(sd, prox_l12(sd.sigma, lambda));
}

/// Generalized singular value thresholding: shrink the spectrum with the
/// kind's scalar prox map and reassemble.
inline Matrix prox_spectral(const RegularizerSpec& spec, const Matrix& Z,
                            std::optional<Index> rank_cap = {}) {
  const SpectralDecomposition sd = thin_svd(Z, rank_cap);
  return detail::reassemble(sd, detail::prox_sigma(spec, sd.sigma));
}

}  // namespace nnfn
