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
#ifndef LRDS_LOSSES_HPP
#define LRDS_LOSSES_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "lrds/numcore.hpp"

namespace lrds {

enum class LossKind { ce, kl_distill, mse_logits, mse_probs, vanilla_kd, lrds };
enum class RightPartLoss { mse_logits, kl_distill };

LossKind loss_kind_from_string(const std::string& s);
std::string to_string(LossKind k);
RightPartLoss right_part_loss_from_string(const std::string& s);
std::string to_string(RightPartLoss r);

struct LossSpec {
  LossKind kind = LossKind::lrds;
  double tau = 4.0;
  double lambda1 = 1.0;
  double lambda2 = 1.0;
  RightPartLoss right_part_loss = RightPartLoss::mse_logits;

  void validate() const;
};

/// -log p[y], with p[y] clamped below at 1e-12.
double cross_entropy(const Eigen::VectorXd& p, int y);

/// tau^2 * KL(softmax(z_t/tau) || softmax(z_s/tau)). The teacher
/// distribution is the reference.
double kl_distill(const Eigen::VectorXd& z_s, const Eigen::VectorXd& z_t,
                  double tau);

/// Mean over classes of squared raw-logit differences.
double mse_logits(const Eigen::VectorXd& z_s, const Eigen::VectorXd& z_t);

/// Mean over classes of squared differences between softmax(z_s) and p.
double mse_probs(const Eigen::VectorXd& z_s, const Eigen::VectorXd& p);

/// cross_entropy(softmax(z_s), y) + lambda1 * kl_distill(z_s, z_t, tau).
double vanilla_kd_loss(const Eigen::VectorXd& z_s, const Eigen::VectorXd& z_t,
                       int y, const LossSpec& spec);

struct RightSample {
  Eigen::VectorXd z_s;
  Eigen::VectorXd z_t;
  int y = 0;
};

struct WrongSample {
  Eigen::VectorXd z_s;
  Eigen::VectorXd p;  // revised soft label
};

/// Teacher-supervised composite: mean over right samples of
/// [CE + lambda1 * right_part_loss] plus lambda2 * mean over wrong samples
/// of mse_probs against the revised label. An empty group contributes 0;
/// both groups empty is invalid.
double lrds_loss(const std::vector<RightSample>& right,
                 const std::vector<WrongSample>& wrong, const LossSpec& spec);

// Gradients of the per-sample losses with respect to the student logits.
// Used by the model's batched loss_and_grad.
Eigen::VectorXd cross_entropy_logit_grad(const Eigen::VectorXd& z_s, int y);
Eigen::VectorXd kl_distill_logit_grad(const Eigen::VectorXd& z_s,
                                      const Eigen::VectorXd& z_t, double tau);
Eigen::VectorXd mse_logits_grad(const Eigen::VectorXd& z_s,
                                const Eigen::VectorXd& z_t);
Eigen::VectorXd mse_probs_logit_grad(const Eigen::VectorXd& z_s,
                                     const Eigen::VectorXd& p);

}  // namespace lrds

#endif  // LRDS_LOSSES_HPP
