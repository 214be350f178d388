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

#include "nnfn/data.hpp"
#include "nnfn/metrics.hpp"
#include "nnfn/regularizers.hpp"

using namespace nnfn;

namespace {

Matrix random_matrix(Index m, Index n, Rng& rng) {
  Matrix M(m, n);
  for (Index j = 0; j < n; ++j) {
    for (Index i = 0; i < m; ++i) M(i, j) = rng.normal();
  }
  return M;
}

ObservedMatrix mask_of(std::vector<Entry> e, Index m, Index n) {
  return {m, n, std::move(e)};
}

}  // namespace

TEST_CASE("nmse basics") {
  Rng rng(3);
  const Matrix G = random_matrix(4, 4, rng);
  const ObservedMatrix mask =
      mask_of({{0, 0, 0}, {1, 2, 0}, {3, 3, 0}}, 4, 4);
  CHECK(nmse(G, G, mask) == 0.0);
  CHECK(nmse(Matrix::Zero(4, 4), G, mask) == Catch::Approx(1.0));
  CHECK(nmse(2.0 * G, G, mask) == Catch::Approx(1.0));
}

TEST_CASE("nmse is exactly the masked residual-to-signal norm ratio") {
  Rng rng(5);
  const Matrix G = random_matrix(5, 6, rng);
  const Matrix D = random_matrix(5, 6, rng);
  const ObservedMatrix mask =
      mask_of({{0, 1, 0}, {2, 3, 0}, {4, 5, 0}, {1, 1, 0}}, 5, 6);
  double dn = 0.0, gn = 0.0;
  for (const Entry& e : mask.entries()) {
    dn += D(e.row, e.col) * D(e.row, e.col);
    gn += G(e.row, e.col) * G(e.row, e.col);
  }
  CHECK(nmse(G + D, G, mask) == Catch::Approx(std::sqrt(dn / gn)));
}

TEST_CASE("nmse error paths") {
  const Matrix G = Matrix::Zero(3, 3);
  const ObservedMatrix mask = mask_of({{0, 0, 0}}, 3, 3);
  CHECK_THROWS_AS(nmse(G, G, mask), std::invalid_argument);  // zero signal
  CHECK_THROWS_AS(nmse(G, G, mask_of({}, 3, 3)), std::invalid_argument);
}

TEST_CASE("nmse_unobserved agrees with an explicit complement mask") {
  Rng rng(7);
  const Matrix G = random_matrix(6, 5, rng);
  const Matrix X = random_matrix(6, 5, rng);
  const ObservedMatrix obs = mask_of({{0, 0, 0}, {2, 2, 0}, {5, 4, 0}}, 6, 5);
  std::vector<Entry> complement;
  for (Index i = 0; i < 6; ++i) {
    for (Index j = 0; j < 5; ++j) {
      const bool observed = (i == 0 && j == 0) || (i == 2 && j == 2) ||
                            (i == 5 && j == 4);
      if (!observed) complement.push_back({i, j, 0});
    }
  }
  CHECK(nmse_unobserved(X, G, obs) ==
        Catch::Approx(nmse(X, G, mask_of(complement, 6, 5))));
}

TEST_CASE("rmse basics") {
  Matrix X = Matrix::Zero(2, 2);
  const ObservedMatrix hit = mask_of({{0, 0, 0.0}, {1, 1, 0.0}}, 2, 2);
  CHECK(rmse(X, hit) == 0.0);

  const ObservedMatrix one = mask_of({{0, 1, 3.0}}, 2, 2);
  CHECK(rmse(X, one) == Catch::Approx(3.0));

  const ObservedMatrix two = mask_of({{0, 1, 3.0}, {1, 0, 4.0}}, 2, 2);
  CHECK(rmse(X, two) == Catch::Approx(std::sqrt(25.0 / 2.0)));

  CHECK_THROWS_AS(rmse(X, mask_of({}, 2, 2)), std::invalid_argument);
}

TEST_CASE("rmse vanishes only on exact agreement") {
  Rng rng(11);
  const FactorPair fp(random_matrix(5, 2, rng), random_matrix(4, 2, rng));
  std::vector<Entry> test;
  for (Index i = 0; i < 5; ++i) test.push_back({i, i % 4, fp.predict(i, i % 4)});
  const ObservedMatrix exact(5, 4, test);
  CHECK(rmse(fp, exact) == Catch::Approx(0.0).margin(1e-15));
  test[0].value += 0.5;
  CHECK(rmse(fp, ObservedMatrix(5, 4, test)) > 0.0);
}

TEST_CASE("numerical_rank basics") {
  Matrix D = Matrix::Zero(3, 3);
  D.diagonal() << 3.0, 2.0, 0.0;
  CHECK(numerical_rank(D) == 2);
  CHECK(numerical_rank(Matrix::Zero(4, 4)) == 0);

  const SyntheticInstance inst = generate_synthetic(50, 5, 0.1, 1.0, 3);
  CHECK(numerical_rank(inst.ground_truth) == 5);
}

TEST_CASE("numerical_rank of a factor pair matches the dense path") {
  Rng rng(13);
  for (int rep = 0; rep < 15; ++rep) {
    const Index k = 1 + static_cast<Index>(rng.uniform_below(4));
    FactorPair fp(random_matrix(7, k, rng), random_matrix(6, k, rng));
    if (rep % 3 == 0 && k >= 2) fp.W.col(k - 1).setZero();  // degenerate dir
    CHECK(numerical_rank(fp) == numerical_rank(fp.product()));
  }
  const FactorPair zero(Matrix::Zero(3, 2), Matrix::Zero(4, 2));
  CHECK(numerical_rank(zero) == 0);
}

TEST_CASE("the nnfn prox never raises numerical rank") {
  Rng rng(17);
  for (int rep = 0; rep < 15; ++rep) {
    const Matrix Z = random_matrix(5, 4, rng);
    const double lambda = 2.0 * rng.uniform();
    CHECK(numerical_rank(prox_nnfn(Z, lambda)) <= numerical_rank(Z));
  }
}
