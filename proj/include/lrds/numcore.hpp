/*
 * Copyright 2026 LRDS Contributors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#ifndef LRDS_NUMCORE_HPP
#define LRDS_NUMCORE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <random>
#include <vector>

#include "lrds/errors.hpp"

namespace lrds {

/// Probability vectors are plain Eigen vectors; this checks the simplex
/// invariants (entries in [0,1], sum 1 within tol).
bool is_prob_vector(const Eigen::VectorXd& p, double tol = 1e-9);

/// Softmax of z / tau, computed with max-subtraction. All entries of the
/// result are in [0,1] and sum to 1.
Eigen::VectorXd tempered_softmax(const Eigen::VectorXd& z, double tau);

/// log(softmax(z)) via log-sum-exp with max-subtraction.
Eigen::VectorXd log_softmax(const Eigen::VectorXd& z);

/// Index of the maximum entry; ties break to the lowest index.
Eigen::Index argmax(const Eigen::VectorXd& v);

/// Seeded deterministic random stream. Backed by std::mt19937_64, whose
/// output sequence is fixed by the standard, so identical seeds give
/// bit-identical streams on every platform. The derived samplers
/// (uniform, normal, shuffle) are implemented here rather than with
/// std distributions, which are not portable across standard libraries.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  /// Uniform double in [0, 1), 53 random bits.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  /// Standard normal via Box-Muller; caches the spare draw.
  double normal();

  /// Uniform index in [0, n).
  std::size_t index(std::size_t n);

  /// Fisher-Yates shuffle. Empty and singleton vectors consume no draws.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace lrds

#endif  // LRDS_NUMCORE_HPP
