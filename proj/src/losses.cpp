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
#include "lrds/losses.hpp"

#include <cmath>

namespace lrds {

namespace {
constexpr double kProbFloor = 1e-12;
}

LossKind loss_kind_from_string(const std::string& s) {
  if (s == "ce") return LossKind::ce;
  if (s == "kl_distill") return LossKind::kl_distill;
  if (s == "mse_logits") return LossKind::mse_logits;
  if (s == "mse_probs") return LossKind::mse_probs;
  if (s == "vanilla_kd") return LossKind::vanilla_kd;
  if (s == "lrds") return LossKind::lrds;
  throw std::invalid_argument("unknown loss kind: " + s);
}

std::string to_string(LossKind k) {
  switch (k) {
    case LossKind::ce: return "ce";
    case LossKind::kl_distill: return "kl_distill";
    case LossKind::mse_logits: return "mse_logits";
    case LossKind::mse_probs: return "mse_probs";
    case LossKind::vanilla_kd: return "vanilla_kd";
    case LossKind::lrds: return "lrds";
  }
  return "?";
}

RightPartLoss right_part_loss_from_string(const std::string& s) {
  if (s == "mse_logits") return RightPartLoss::mse_logits;
  if (s == "kl_distill") return RightPartLoss::kl_distill;
  throw std::invalid_argument("unknown right_part_loss: " + s);
}

std::string to_string(RightPartLoss r) {
  return r == RightPartLoss::mse_logits ? "mse_logits" : "kl_distill";
}

void LossSpec::validate() const {
  if (!(tau > 0.0)) throw std::invalid_argument("LossSpec: tau must be > 0");
  if (lambda1 < 0.0 || lambda2 < 0.0)
    throw std::invalid_argument("LossSpec: lambdas must be >= 0");
}

double cross_entropy(const Eigen::VectorXd& p, int y) {
  if (y < 0 || y >= p.size())
    throw std::invalid_argument("cross_entropy: label out of range");
  return -std::log(std::max(p[y], kProbFloor));
}

double kl_distill(const Eigen::VectorXd& z_s, const Eigen::VectorXd& z_t,
                  double tau) {
  if (z_s.size() != z_t.size())
    throw std::invalid_argument("kl_distill: length mismatch");
  if (!(tau > 0.0)) throw std::invalid_argument("kl_distill: tau must be > 0");
  const Eigen::VectorXd log_q_t = log_softmax(z_t / tau);
  const Eigen::VectorXd log_q_s = log_softmax(z_s / tau);
  const Eigen::VectorXd q_t = log_q_t.array().exp();
  double kl = q_t.dot(log_q_t - log_q_s);
  if (kl < 0.0 && kl > -1e-15) kl = 0.0;  // roundoff only
  return tau * tau * kl;
}

double mse_logits(const Eigen::VectorXd& z_s, const Eigen::VectorXd& z_t) {
  if (z_s.size() != z_t.size())
    throw std::invalid_argument("mse_logits: length mismatch");
  return (z_s - z_t).squaredNorm() / static_cast<double>(z_s.size());
}

double mse_probs(const Eigen::VectorXd& z_s, const Eigen::VectorXd& p) {
  if (z_s.size() != p.size())
    throw std::invalid_argument("mse_probs: length mismatch");
  const Eigen::VectorXd s = tempered_softmax(z_s, 1.0);
  return (s - p).squaredNorm() / static_cast<double>(p.size());
}

double vanilla_kd_loss(const Eigen::VectorXd& z_s, const Eigen::VectorXd& z_t,
                       int y, const LossSpec& spec) {
  spec.validate();
  const double ce = cross_entropy(tempered_softmax(z_s, 1.0), y);
  return ce + spec.lambda1 * kl_distill(z_s, z_t, spec.tau);
}

double lrds_loss(const std::vector<RightSample>& right,
                 const std::vector<WrongSample>& wrong, const LossSpec& spec) {
  spec.validate();
  if (right.empty() && wrong.empty())
    throw std::invalid_argument("lrds_loss: both groups empty");
  double total = 0.0;
  if (!right.empty()) {
    double acc = 0.0;
    for (const auto& r : right) {
      const double rpl = spec.right_part_loss == RightPartLoss::mse_logits
                             ? mse_logits(r.z_s, r.z_t)
                             : kl_distill(r.z_s, r.z_t, spec.tau);
      acc += cross_entropy(tempered_softmax(r.z_s, 1.0), r.y) +
             spec.lambda1 * rpl;
    }
    total += acc / static_cast<double>(right.size());
  }
  if (!wrong.empty()) {
    double acc = 0.0;
    for (const auto& w : wrong) acc += mse_probs(w.z_s, w.p);
    total += spec.lambda2 * acc / static_cast<double>(wrong.size());
  }
  return total;
}

Eigen::VectorXd cross_entropy_logit_grad(const Eigen::VectorXd& z_s, int y) {
  if (y < 0 || y >= z_s.size())
    throw std::invalid_argument("cross_entropy_logit_grad: label out of range");
  Eigen::VectorXd g = tempered_softmax(z_s, 1.0);
  g[y] -= 1.0;
  return g;
}

Eigen::VectorXd kl_distill_logit_grad(const Eigen::VectorXd& z_s,
                                      const Eigen::VectorXd& z_t, double tau) {
  if (z_s.size() != z_t.size())
    throw std::invalid_argument("kl_distill_logit_grad: length mismatch");
  // d/dz_s [tau^2 KL(q_t || q_s)] = tau * (q_s - q_t), q = softmax(z/tau).
  return tau * (tempered_softmax(z_s, tau) - tempered_softmax(z_t, tau));
}

Eigen::VectorXd mse_logits_grad(const Eigen::VectorXd& z_s,
                                const Eigen::VectorXd& z_t) {
  if (z_s.size() != z_t.size())
    throw std::invalid_argument("mse_logits_grad: length mismatch");
  return 2.0 / static_cast<double>(z_s.size()) * (z_s - z_t);
}

Eigen::VectorXd mse_probs_logit_grad(const Eigen::VectorXd& z_s,
                                     const Eigen::VectorXd& p) {
  if (z_s.size() != p.size())
    throw std::invalid_argument("mse_probs_logit_grad: length mismatch");
  const Eigen::VectorXd s = tempered_softmax(z_s, 1.0);
  const Eigen::VectorXd r = 2.0 / static_cast<double>(p.size()) * (s - p);
  // Jacobian of softmax applied to r: diag(s) r - s (s . r).
  return s.cwiseProduct(r) - s * s.dot(r);
}

}  // namespace lrds
