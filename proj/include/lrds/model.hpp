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
#ifndef LRDS_MODEL_HPP
#define LRDS_MODEL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "lrds/losses.hpp"

namespace lrds {

struct ModelSpec {
  std::vector<int> layer_dims;  // input dim, hidden dims..., class count
  std::string activation = "relu";
  double init_scale = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Feed-forward rectifier network. Hidden layers apply relu (subgradient 0
/// at 0); the last layer is linear and produces logits.
struct MLPModel {
  ModelSpec spec;
  std::vector<Eigen::MatrixXd> weights;  // weights[l]: dims[l+1] x dims[l]
  std::vector<Eigen::VectorXd> biases;   // biases[l]: dims[l+1]

  int input_dim() const { return spec.layer_dims.front(); }
  int class_count() const { return spec.layer_dims.back(); }
  Eigen::Index param_count() const;

  /// Flat parameter layout: per layer, weight rows in order, then bias.
  /// flatten / set_flat round-trip is exact.
  Eigen::VectorXd flatten() const;
  void set_flat(const Eigen::VectorXd& theta);

  /// Content hash over layer dims and parameter bytes.
  std::string checksum() const;
};

MLPModel init(const ModelSpec& spec);

Eigen::VectorXd forward(const MLPModel& model, const Eigen::VectorXd& x);
/// Batched forward; rows are samples, result is n x C logits.
Eigen::MatrixXd forward(const MLPModel& model, const Eigen::MatrixXd& x);

/// One minibatch plus whatever supervision the loss kind needs.
/// teacher_logits (n x C) is required for kl/mse_logits/vanilla_kd and for
/// lrds right-part samples; target_probs (n x C) holds revised labels for
/// lrds wrong-part samples (rows of right-part samples are ignored).
/// wrong[i] != 0 marks a sample as wrong-part under lrds; empty means all
/// samples are right-part.
struct TrainBatch {
  Eigen::MatrixXd x;
  std::vector<int> y;
  Eigen::MatrixXd teacher_logits;
  Eigen::MatrixXd target_probs;
  std::vector<std::uint8_t> wrong;
};

/// Mean per-sample loss over the batch (group-mean semantics for lrds)
/// and its exact gradient with respect to the flat parameter vector.
std::pair<double, Eigen::VectorXd> loss_and_grad(const MLPModel& model,
                                                 const TrainBatch& batch,
                                                 const LossSpec& spec);

/// H * v, where H is the mean Hessian of the loss over the batch.
/// Central difference of exact gradients along the normalized direction.
Eigen::VectorXd hvp(const MLPModel& model, const TrainBatch& batch,
                    const Eigen::VectorXd& v, const LossSpec& spec);

/// Dense symmetrized Hessian via central differences of gradients.
/// Throws CapacityError above max_params.
Eigen::MatrixXd exact_hessian(const MLPModel& model, const TrainBatch& batch,
                              const LossSpec& spec, int max_params = 2000);

/// JSON checkpoint; doubles round-trip bit-exactly.
void save_checkpoint(const MLPModel& model, const std::string& path,
                     const std::string& config_hash = "");
MLPModel load_checkpoint(const std::string& path);

}  // namespace lrds

#endif  // LRDS_MODEL_HPP
