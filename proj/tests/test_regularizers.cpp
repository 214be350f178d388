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
#include <catch2/catch_amalgamated.hpp>

#include "nnfn/metrics.hpp"
#include "nnfn/oracles.hpp"
#include "nnfn/regularizers.hpp"
#include "nnfn/rng.hpp"

using namespace nnfn;

namespace {

Matrix random_matrix(Index m, Index n, Rng& rng) {
  Matrix M(m, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) M(i, j) = rng.normal();
  }
  return M;
}

Vector random_spectrum(Index n, Rng& rng, double scale = 3.0) {
  Vector s(n);
  for (Index i = 0; i < n; ++i) s[i] = scale * rng.uniform();
  std::sort(s.data(), s.data() + n, std::greater<>());
  return s;
}

const RegularizerSpec kNonconvexKinds[] = {
    RegularizerSpec::nnfn(0.7),
    RegularizerSpec::capped_l1(0.7, 1.2),
    RegularizerSpec::lsp(0.7, 0.9),
    RegularizerSpec::mcp(0.7, 2.5),
};

}  // namespace

TEST_CASE("regularizer_value basics") {
  Vector one(1);
  one << 5.0;
  CHECK(regularizer_value(RegularizerSpec::nnfn(1.0), one) == 0.0);

  Vector two(2);
  two << 3.0, 2.0;
  CHECK(regularizer_value(RegularizerSpec::nuclear(1.0), two) ==
        Catch::Approx(5.0));

  Vector pyth(2);
  pyth << 4.0, 3.0;  // 3-4-5 triple: l1 = 7, l2 = 5
  CHECK(regularizer_value(RegularizerSpec::nnfn(1.0), pyth) ==
        Catch::Approx(2.0));

  Vector neg(1);
  neg << -0.5;
  CHECK_THROWS_AS(regularizer_value(RegularizerSpec::nnfn(1.0), neg),
                  std::invalid_argument);
}

TEST_CASE("nnfn value nonnegative, zero exactly on rank <= 1 spectra") {
  Rng rng(2);
  for (int rep = 0; rep < 200; ++rep) {
    const Index n = 1 + static_cast<Index>(rng.uniform_below(6));
    Vector s = random_spectrum(n, rng);
    for (Index i = 1; i < n; ++i) {
      if (rng.uniform() < 0.4) s[i] = 0.0;  // force low-rank tails sometimes
    }
    std::sort(s.data(), s.data() + n, std::greater<>());
    const double v = regularizer_value(RegularizerSpec::nnfn(1.0), s);
    CHECK(v >= 0.0);
    const Index positive = (s.array() > 0.0).count();
    if (positive <= 1) {
      CHECK(v == 0.0);
    } else {
      CHECK(v > 0.0);
    }
  }
}

TEST_CASE("soft_threshold basics") {
  Vector z(2);
  z << 3.0, 1.0;
  Vector out = soft_threshold(z, 1.0);
  CHECK(out[0] == 2.0);
  CHECK(out[1] == 0.0);

  Vector z2(3);
  z2 << 4.0, 2.0, 0.5;
  CHECK(soft_threshold(z2, 0.0) == z2);

  Vector z3(1);
  z3 << 0.5;
  CHECK(soft_threshold(z3, 1.0)[0] == 0.0);
}

TEST_CASE("prox_l12 fixed points and derived examples") {
  Vector zero3 = Vector::Zero(3);
  CHECK(prox_l12(zero3, 2.0) == zero3);

  // plane case against the dense-grid oracle
  Vector z(2);
  z << 3.0, 1.0;
  const Vector got = prox_l12(z, 1.0);
  const Vector want = oracle::prox_l12_grid2(z, 1.0);
  CHECK(got[0] == Catch::Approx(want[0]).margin(1e-6));
  CHECK(got[1] == Catch::Approx(want[1]).margin(1e-6));
  // frozen values computed by the oracle: keep the big coordinate, drop the
  // small one, no residual shrinkage on the survivor
  CHECK(got[0] == Catch::Approx(3.0).margin(1e-9));
  CHECK(got[1] == 0.0);

  Vector z3(3);
  z3 << 5.0, 3.0, 1.0;
  const Vector got3 = prox_l12(z3, 2.0);
  const Vector want3 = oracle::prox_l12_bruteforce(z3, 2.0);
  for (Index i = 0; i < 3; ++i) {
    CHECK(got3[i] == Catch::Approx(want3[i]).margin(1e-6));
  }
  CHECK(got3[2] == 0.0);  // exact zero tail
  // frozen oracle values: scaled soft threshold by (sqrt(10)+2)/sqrt(10)
  CHECK(got3[0] == Catch::Approx(4.89737).margin(1e-4));
  CHECK(got3[1] == Catch::Approx(1.63246).margin(1e-4));
}

TEST_CASE("prox_l12 agrees with the brute-force minimizer") {
  Rng rng(17);
  int checked = 0;
  for (int rep = 0; rep < 1100; ++rep) {
    const Index n = 1 + static_cast<Index>(rng.uniform_below(5));
    Vector z(n);
    for (Index i = 0; i < n; ++i) {
      z[i] = 4.0 * rng.uniform() - (rep % 3 == 0 ? 2.0 : 0.0);
    }
    const double zmax = z.cwiseAbs().maxCoeff();
    const double lambda = 0.01 + (2.0 * zmax - 0.01) * rng.uniform();
    if (!(lambda > 0.0)) continue;
    const Vector fast = prox_l12(z, lambda);
    const Vector slow = oracle::prox_l12_bruteforce(z, lambda);
    // distinct global minimizers can exist at regime boundaries; accept
    // either by objective, require coordinates match when unique
    const double fo = oracle::l12_objective(fast, z, lambda);
    const double so = oracle::l12_objective(slow, z, lambda);
    CHECK(fo <= so + 1e-9);
    if ((fast - slow).cwiseAbs().maxCoeff() > 1e-6) {
      CHECK(std::abs(fo - so) <= 1e-9);  // tie between minimizers
    }
    ++checked;
  }
  CHECK(checked >= 1000);
}

TEST_CASE("prox_l12 keeps spectra sorted, nonnegative, and sparse") {
  Rng rng(23);
  for (int rep = 0; rep < 300; ++rep) {
    const Index n = 1 + static_cast<Index>(rng.uniform_below(6));
    const Vector s = random_spectrum(n, rng);
    const double lambda = 2.5 * rng.uniform() + 1e-3;
    const Vector out = prox_l12(s, lambda);
    for (Index i = 0; i < n; ++i) {
      CHECK(out[i] >= 0.0);
      if (i + 1 < n) CHECK(out[i] >= out[i + 1] - 1e-12);
      if (out[i] != 0.0) CHECK(std::abs(out[i]) >= kProxZeroSnap);
    }
  }
}

TEST_CASE("prox_scalar basics and derived cases") {
  // identity at lambda = 0
  CHECK(prox_scalar(RegularizerSpec::capped_l1(0.0, 1.0), 3.7) == 3.7);
  CHECK(prox_scalar(RegularizerSpec::mcp(0.0, 2.0), 1.1) == 1.1);

  // capped-l1 plateau: shrinking costs quadratic, saves nothing
  const RegularizerSpec capped = RegularizerSpec::capped_l1(1.0, 1.0);
  CHECK(prox_scalar(capped, 10.0) == Catch::Approx(10.0));
  CHECK(prox_scalar(capped, 10.0) ==
        Catch::Approx(oracle::prox_scalar_bruteforce(capped, 10.0))
            .margin(1e-6));

  // mcp below the threshold region
  const RegularizerSpec mcp = RegularizerSpec::mcp(1.0, 2.0);
  CHECK(prox_scalar(mcp, 0.5) ==
        Catch::Approx(oracle::prox_scalar_bruteforce(mcp, 0.5)).margin(1e-8));
}

TEST_CASE("prox_scalar agrees with the brute-force minimizer") {
  Rng rng(31);
  const double thetas[] = {0.3, 0.9, 1.0, 2.5};
  for (int rep = 0; rep < 1100; ++rep) {
    const double z = 6.0 * rng.uniform();
    const double lambda = 0.01 + 2.0 * rng.uniform();
    const double theta = thetas[rng.uniform_below(4)];
    for (auto kind : {RegularizerKind::CappedL1, RegularizerKind::LSP,
                      RegularizerKind::MCP}) {
      const RegularizerSpec spec(kind, lambda, theta);
      const double fast = prox_scalar(spec, z);
      const double slow = oracle::prox_scalar_bruteforce(spec, z);
      if (std::abs(fast - slow) > 1e-6) {
        // two global minimizers: accept by objective value
        const auto obj = [&](double x) {
          return 0.5 * (x - z) * (x - z) +
                 lambda * oracle::penalty_value(spec, x);
        };
        CHECK(obj(fast) <= obj(slow) + 1e-9);
      } else {
        CHECK(fast == Catch::Approx(slow).margin(1e-6));
      }
    }
  }
}

TEST_CASE("prox_nnfn with lambda 0 returns the input") {
  Rng rng(41);
  const Matrix Z = random_matrix(5, 4, rng);
  CHECK((prox_nnfn(Z, 0.0) - Z).norm() <= 1e-8 * std::max(1.0, Z.norm()));
}

TEST_CASE("prox_nnfn on a diagonal matrix reduces to the vector prox") {
  Matrix Z = Matrix::Zero(2, 2);
  Z.diagonal() << 5.0, 3.0;
  const Matrix out = prox_nnfn(Z, 1.0);
  Vector sig(2);
  sig << 5.0, 3.0;
  const Vector want = oracle::prox_l12_grid2(sig, 1.0);
  CHECK(out(0, 0) == Catch::Approx(want[0]).margin(1e-6));
  CHECK(out(1, 1) == Catch::Approx(want[1]).margin(1e-6));
  CHECK(std::abs(out(0, 1)) <= 1e-9);
  CHECK(std::abs(out(1, 0)) <= 1e-9);
}

TEST_CASE("prox_nnfn output is a local minimum of the prox objective") {
  Rng rng(43);
  for (int rep = 0; rep < 10; ++rep) {
    const Matrix Z = random_matrix(5, 4, rng);
    const double lambda = 0.5;
    const Matrix X = prox_nnfn(Z, lambda);
    CHECK(oracle::nnfn_prox_local_optimality(Z, lambda, X, rng, 200));
  }
}

TEST_CASE("prox_nnfn beyond the spectral-norm bound stays well defined") {
  Rng rng(47);
  const Matrix Z = random_matrix(4, 4, rng);
  const double big = 10.0 * thin_svd(Z).sigma[0];
  const Matrix X = prox_nnfn(Z, big);  // 1-sparse spectrum regime
  CHECK(numerical_rank(X) <= 1);
  CHECK(oracle::nnfn_prox_local_optimality(Z, big, X, rng, 100));
}

TEST_CASE("prox_spectral dispatches by kind") {
  Matrix Z = Matrix::Zero(2, 2);
  Z.diagonal() << 3.0, 1.0;
  const Matrix svt = prox_spectral(RegularizerSpec::nuclear(1.0), Z);
  CHECK(svt(0, 0) == Catch::Approx(2.0));
  CHECK(svt(1, 1) == Catch::Approx(0.0).margin(1e-12));

  Rng rng(53);
  const Matrix R = random_matrix(5, 4, rng);
  CHECK((prox_spectral(RegularizerSpec::nnfn(0.8), R) - prox_nnfn(R, 0.8))
            .norm() <= 1e-12);

  Matrix D = Matrix::Zero(1, 1);
  D(0, 0) = 0.5;
  const RegularizerSpec mcp = RegularizerSpec::mcp(1.0, 2.0);
  CHECK(prox_spectral(mcp, D)(0, 0) ==
        Catch::Approx(prox_scalar(mcp, 0.5)).margin(1e-12));
}

TEST_CASE("nonconvex proxes shrink and do so adaptively") {
  Rng rng(59);
  for (const RegularizerSpec& spec : kNonconvexKinds) {
    for (int rep = 0; rep < 250; ++rep) {
      const Index n = 2 + static_cast<Index>(rng.uniform_below(5));
      const Vector s = random_spectrum(n, rng);
      const Vector out = detail::prox_sigma(spec, s);
      for (Index i = 0; i < n; ++i) {
        CHECK(s[i] >= out[i] - 1e-12);  // shrinkage, all coordinates
        // Adaptivity (larger values penalized less) is a statement about
        // interior stationary points; a coordinate shrunk to exactly zero
        // only satisfies a one-sided condition and its difference s_i - 0
        // can be arbitrarily small. Compare surviving neighbours only.
        if (i + 1 < n && out[i + 1] > 0.0) {
          CHECK(s[i] - out[i] <= s[i + 1] - out[i + 1] + 1e-9);
        }
      }
    }
  }
}

TEST_CASE("nnfn shrinkage is strictly adaptive across distinct values") {
  Rng rng(61);
  for (int rep = 0; rep < 200; ++rep) {
    Vector s = random_spectrum(4, rng, 5.0);
    s.array() += 0.5;  // keep entries distinct and positive
    std::sort(s.data(), s.data() + 4, std::greater<>());
    const double lambda = 0.3 + rng.uniform();
    const Vector out = prox_l12(s, lambda);
    if ((out.array() > 0.0).count() < 2) continue;
    bool strict = false;
    for (Index i = 0; i + 1 < 4; ++i) {
      if (s[i] - out[i] < s[i + 1] - out[i + 1] - 1e-12) strict = true;
    }
    CHECK(strict);
  }
}

TEST_CASE("nuclear prox shrinks uniformly") {
  Rng rng(67);
  for (int rep = 0; rep < 200; ++rep) {
    const Index n = 1 + static_cast<Index>(rng.uniform_below(6));
    const Vector s = random_spectrum(n, rng);
    const double lambda = 1.5 * rng.uniform();
    const Vector out = soft_threshold(s, lambda);
    for (Index i = 0; i < n; ++i) {
      CHECK(s[i] - out[i] ==
            Catch::Approx(std::min(lambda, s[i])).margin(1e-12));
    }
  }
}
