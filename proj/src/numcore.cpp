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
#include "lrds/numcore.hpp"

#include <cmath>

namespace lrds {

bool is_prob_vector(const Eigen::VectorXd& p, double tol) {
  if (p.size() == 0) return false;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] < 0.0 || p[i] > 1.0) return false;
  }
  return std::abs(p.sum() - 1.0) <= tol;
}

Eigen::VectorXd tempered_softmax(const Eigen::VectorXd& z, double tau) {
  if (!(tau > 0.0)) throw std::invalid_argument("tempered_softmax: tau must be > 0");
  if (z.size() == 0) throw std::invalid_argument("tempered_softmax: empty logits");
  if (!z.allFinite()) throw std::invalid_argument("tempered_softmax: non-finite logits");
  Eigen::VectorXd s = z / tau;
  s.array() -= s.maxCoeff();
  Eigen::VectorXd e = s.array().exp();
  return e / e.sum();
}

Eigen::VectorXd log_softmax(const Eigen::VectorXd& z) {
  if (z.size() == 0) throw std::invalid_argument("log_softmax: empty logits");
  if (!z.allFinite()) throw std::invalid_argument("log_softmax: non-finite logits");
  const double m = z.maxCoeff();
  const double lse = m + std::log((z.array() - m).exp().sum());
  return z.array() - lse;
}

Eigen::Index argmax(const Eigen::VectorXd& v) {
  if (v.size() == 0) throw std::invalid_argument("argmax: empty input");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;  // strict: ties keep the lowest index
  }
  return best;
}

double SeededRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = 0.0;
  do {
    u1 = uniform();
  } while (u1 <= 0.0);
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * M_PI * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

std::size_t SeededRng::index(std::size_t n) {
  if (n == 0) throw std::invalid_argument("SeededRng::index: n must be > 0");
  // Rejection sampling to avoid modulo bias; deterministic given the stream.
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x = 0;
  do {
    x = next_u64();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

}  // namespace lrds
