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

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "nnfn/rng.hpp"
#include "nnfn/types.hpp"

namespace nnfn {

/// Ground truth plus disjoint train/validation observations, generated by the
/// standard synthetic completion protocol: G = W H^T with i.i.d. standard
/// normal factors, rank exactly k_star, Gaussian noise on the observed
/// entries, and round(multiplier * 2 m k* log m) observed positions sampled
/// uniformly without replacement (natural log; this reproduces the usual
/// quoted sparsity ratios, e.g. 12.43% at m=500, k*=5).
struct SyntheticInstance {
  Matrix ground_truth;
  ObservedMatrix train;
  ObservedMatrix validation;
  Index true_rank = 0;
  double noise_std = 0.0;
  std::uint64_t seed = 0;

  /// All observed entries (train and validation together).
  ObservedMatrix all_observed() const {
    std::vector<Entry> e = train.entries();
    e.insert(e.end(), validation.entries().begin(),
             validation.entries().end());
    return {train.rows(), train.cols(), std::move(e)};
  }
};

namespace detail {

/// Largest-remainder apportionment of n items into fractions; ties go to the
/// earlier bucket.
inline std::vector<Index> largest_remainder_sizes(
    Index n, const std::vector<double>& fractions) {
  std::vector<Index> sizes(fractions.size());
  std::vector<std::pair<double, std::size_t>> rema(fractions.size());
  Index assigned = 0;
  for (std::size_t i = 0; i < fractions.size(); ++i) {
    const double quota = fractions[i] * static_cast<double>(n);
    sizes[i] = static_cast<Index>(std::floor(quota));
    rema[i] = {quota - std::floor(quota), i};
    assigned += sizes[i];
  }
  std::stable_sort(rema.begin(), rema.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (Index left = n - assigned; left > 0; --left) {
    sizes[rema[static_cast<std::size_t>(n - assigned - left)].second] += 1;
  }
  return sizes;
}

/// Floyd's algorithm: k distinct indices from [0, universe), deterministic
/// order given the generator state.
inline std::vector<std::uint64_t> sample_distinct(Rng& rng,
                                                  std::uint64_t universe,
                                                  std::uint64_t k) {
  std::unordered_set<std::uint64_t> chosen;
  std::vector<std::uint64_t> out;
  out.reserve(k);
  for (std::uint64_t j = universe - k; j < universe; ++j) {
    const std::uint64_t t = rng.uniform_below(j + 1);
    if (chosen.insert(t).second) {
      out.push_back(t);
    } else {
      chosen.insert(j);
      out.push_back(j);
    }
  }
  return out;
}

}  // namespace detail

inline SyntheticInstance generate_synthetic(Index m, Index k_star,
                                            double noise_std,
                                            double sparsity_multiplier,
                                            std::uint64_t seed) {
  if (m < 1 || k_star < 1 || k_star > m) {
    throw std::invalid_argument("generate_synthetic: need m >= k_star >= 1");
  }
  if (!(noise_std >= 0.0) || !(sparsity_multiplier > 0.0)) {
    throw std::invalid_argument(
        "generate_synthetic: bad noise_std or sparsity_multiplier");
  }
  const double target = sparsity_multiplier * 2.0 *
                        static_cast<double>(m) * static_cast<double>(k_star) *
                        std::log(static_cast<double>(m));
  const auto nnz = static_cast<std::uint64_t>(std::llround(target));
  const auto universe =
      static_cast<std::uint64_t>(m) * static_cast<std::uint64_t>(m);
  if (nnz > universe) {
    throw std::invalid_argument(
        "generate_synthetic: requested nnz exceeds m^2");
  }

  Rng rng(seed);
  Matrix W(m, k_star), H(m, k_star);
  for (Index j = 0; j < k_star; ++j) {
    for (Index i = 0; i < m; ++i) W(i, j) = rng.normal();
  }
  for (Index j = 0; j < k_star; ++j) {
    for (Index i = 0; i < m; ++i) H(i, j) = rng.normal();
  }
  Matrix G = W * H.transpose();

  std::vector<std::uint64_t> flat = detail::sample_distinct(rng, universe, nnz);
  rng.shuffle(flat);
  std::vector<Entry> sampled(flat.size());
  for (std::size_t i = 0; i < flat.size(); ++i) {
    const auto r = static_cast<Index>(flat[i] / static_cast<std::uint64_t>(m));
    const auto c = static_cast<Index>(flat[i] % static_cast<std::uint64_t>(m));
    sampled[i] = {r, c, G(r, c) + noise_std * rng.normal()};
  }

  const auto sizes =
      detail::largest_remainder_sizes(static_cast<Index>(nnz), {0.5, 0.5});
  std::vector<Entry> train_e(sampled.begin(), sampled.begin() + sizes[0]);
  std::vector<Entry> val_e(sampled.begin() + sizes[0], sampled.end());

  SyntheticInstance out{std::move(G),
                        ObservedMatrix(m, m, std::move(train_e)),
                        ObservedMatrix(m, m, std::move(val_e)),
                        k_star,
                        noise_std,
                        seed};
  return out;
}

/// Parses `row<sep>col<sep>value` triplet lines, sep in {comma, tab, spaces}.
/// A leading non-numeric header line is skipped. Parse problems, out-of-range
/// indices and duplicate positions are reported with their line number.
inline ObservedMatrix load_triplets(const std::string& path, Index rows,
                                    Index cols, bool one_based) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_triplets: cannot open " + path);
  }
  std::vector<Entry> entries;
  std::vector<std::size_t> entry_line;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    for (char& ch : line) {
      if (ch == ',' || ch == '\t' || ch == '\r') ch = ' ';
    }
    std::istringstream ls(line);
    double r, c, v;
    if (!(ls >> r)) {
      if (lineno == 1 || line.find_first_not_of(' ') == std::string::npos) {
        continue;  // header or blank line
      }
      throw std::runtime_error("load_triplets: parse error at line " +
                               std::to_string(lineno) + " of " + path);
    }
    if (!(ls >> c >> v)) {
      throw std::runtime_error("load_triplets: parse error at line " +
                               std::to_string(lineno) + " of " + path);
    }
    Index ri = static_cast<Index>(r) - (one_based ? 1 : 0);
    Index ci = static_cast<Index>(c) - (one_based ? 1 : 0);
    if (ri < 0 || ri >= rows || ci < 0 || ci >= cols) {
      throw std::runtime_error("load_triplets: index out of range at line " +
                               std::to_string(lineno) + " of " + path);
    }
    entries.push_back({ri, ci, v});
    entry_line.push_back(lineno);
  }
  // duplicate detection, reported against the later file line
  std::vector<std::pair<std::uint64_t, std::size_t>> keys(entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) {
    keys[i] = {static_cast<std::uint64_t>(entries[i].row) *
                       static_cast<std::uint64_t>(cols) +
                   static_cast<std::uint64_t>(entries[i].col),
               entry_line[i]};
  }
  std::sort(keys.begin(), keys.end());
  for (std::size_t i = 1; i < keys.size(); ++i) {
    if (keys[i].first == keys[i - 1].first) {
      throw std::runtime_error("load_triplets: duplicate entry at line " +
                               std::to_string(keys[i].second) + " of " + path);
    }
  }
  return {rows, cols, std::move(entries)};
}

/// Disjoint train/validation/test partition with largest-remainder sizes,
/// deterministic in the seed.
inline std::array<ObservedMatrix, 3> split_observations(
    const ObservedMatrix& obs, const std::array<double, 3>& fractions,
    std::uint64_t seed) {
  double sum = 0.0;
  for (double f : fractions) {
    if (f < 0.0) {
      throw std::invalid_argument("split_observations: negative fraction");
    }
    sum += f;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw std::invalid_argument("split_observations: fractions must sum to 1");
  }
  if (obs.nnz() == 0) {
    throw std::invalid_argument("split_observations: empty observation set");
  }
  std::vector<std::size_t> order(obs.entries().size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  rng.shuffle(order);
  const auto sizes = detail::largest_remainder_sizes(
      obs.nnz(), {fractions[0], fractions[1], fractions[2]});
  std::array<std::vector<Entry>, 3> parts;
  std::size_t cursor = 0;
  for (std::size_t p = 0; p < 3; ++p) {
    parts[p].reserve(static_cast<std::size_t>(sizes[p]));
    for (Index i = 0; i < sizes[p]; ++i) {
      parts[p].push_back(obs.entries()[order[cursor++]]);
    }
  }
  return {ObservedMatrix(obs.rows(), obs.cols(), std::move(parts[0])),
          ObservedMatrix(obs.rows(), obs.cols(), std::move(parts[1])),
          ObservedMatrix(obs.rows(), obs.cols(), std::move(parts[2]))};
}

/// Graph Laplacian L = D - A from a symmetric nonnegative affinity matrix;
/// D is the diagonal of row sums. Row sums of L are zero and L is positive
/// semidefinite.
inline Matrix build_laplacian(const Matrix& affinity) {
  if (affinity.rows() != affinity.cols()) {
    throw std::invalid_argument("build_laplacian: affinity must be square");
  }
  if ((affinity - affinity.transpose()).cwiseAbs().maxCoeff() > 1e-10) {
    throw std::invalid_argument("build_laplacian: affinity must be symmetric");
  }
  if (affinity.minCoeff() < 0.0) {
    throw std::invalid_argument("build_laplacian: negative affinity entry");
  }
  Matrix L = -affinity;
  for (Index i = 0; i < affinity.rows(); ++i) {
    L(i, i) += affinity.row(i).sum();
  }
  return L;
}

/// Dense numeric grid, one matrix row per line, comma or whitespace
/// separated. Used for affinity-matrix ingestion.
inline Matrix load_dense_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("load_dense_csv: cannot open " + path);
  }
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    for (char& ch : line) {
      if (ch == ',' || ch == '\t' || ch == '\r') ch = ' ';
    }
    std::istringstream ls(line);
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (row.empty()) continue;
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw std::runtime_error("load_dense_csv: ragged row at line " +
                               std::to_string(lineno) + " of " + path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) {
    throw std::runtime_error("load_dense_csv: no data in " + path);
  }
  Matrix M(static_cast<Index>(rows.size()),
           static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < M.rows(); ++i) {
    for (Index j = 0; j < M.cols(); ++j) {
      M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
  }
  return M;
}

}  // namespace nnfn
