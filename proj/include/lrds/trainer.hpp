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
#ifndef LRDS_TRAINER_HPP
#define LRDS_TRAINER_HPP

#include <Eigen/Dense>
#include <string>
#include <utility>
#include <vector>

#include "lrds/data.hpp"
#include "lrds/influence.hpp"
#include "lrds/model.hpp"
#include "lrds/revision.hpp"

namespace lrds {

struct DistillConfig {
  LossSpec loss;
  EtaMode eta_mode = EtaMode::fixed(0.8);
  double pct = 0.8;
  SplitOrder order = SplitOrder::highest_first;
  int epochs = 120;
  int batch_size = 64;
  double lr0 = 0.05;
  std::vector<int> lr_decay_epochs = {60, 90, 105};
  double lr_decay_factor = 0.1;
  double momentum = 0.9;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double lr = 0.0;
  double loss_total = 0.0;
  double loss_ce_ds = 0.0;
  double loss_ce_right = 0.0;
  double loss_distill_right = 0.0;
  double loss_mse_wrong = 0.0;
  double test_acc = std::numeric_limits<double>::quiet_NaN();
};

struct TrainLog {
  std::vector<EpochRecord> records;
};

struct MomentumState {
  Eigen::VectorXd velocity;
};

/// Classical momentum, no weight decay:
/// v <- momentum * v + grad; params <- params - lr * v.
void sgd_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
              MomentumState& state, double lr, double momentum);

/// lr0 * decay_factor^(number of decay epochs <= epoch).
double lr_schedule(int epoch, const DistillConfig& cfg);

struct BatchPlan {
  std::vector<int> indices;
  std::vector<std::uint8_t> is_teacher;  // per sample in this batch
};

/// One epoch's batches. D^t and D^s are permuted independently; each batch
/// holds ceil(batch_size * |D^t| / N) teacher-supervised samples and the
/// rest label-supervised, while either pool lasts. Every sample appears
/// exactly once.
std::vector<BatchPlan> make_combined_batches(const std::vector<int>& dt,
                                             const std::vector<int>& ds,
                                             int batch_size, SeededRng& rng);

/// Teacher logits, right/wrong flags, and cached revised labels for the
/// teacher-supervised subset. Computed once; the teacher never changes.
struct RevisionCache {
  Eigen::MatrixXd teacher_logits;    // N x C
  std::vector<std::uint8_t> wrong;   // N; set only for D^t samples under lrds
  Eigen::MatrixXd revised;           // N x C; rows set for wrong D^t samples
  std::vector<int> wrong_dt_indices;
  std::vector<RevisedLabel> revised_labels;  // aligned with wrong_dt_indices
};

RevisionCache precompute_revision(const MLPModel& teacher, const Dataset& data,
                                  const SplitPlan& plan, const DistillConfig& cfg);

/// Plain CE training of a fresh model; shares the exact batch/update code
/// path with distill so the pct=0, lambda=0 reduction is bit-identical.
MLPModel train_teacher(const ModelSpec& spec, const Dataset& data,
                       const DistillConfig& cfg, const Dataset* test = nullptr,
                       TrainLog* log = nullptr);

std::pair<MLPModel, TrainLog> distill(const MLPModel& teacher,
                                      const ModelSpec& student_spec,
                                      const Dataset& data, const SplitPlan& plan,
                                      const DistillConfig& cfg,
                                      const Dataset* test = nullptr);

/// Fraction of samples whose argmax logit matches the label.
double evaluate(const MLPModel& model, const Dataset& data);

void write_trainlog_csv(const std::string& path, const TrainLog& log,
                        const std::string& config_hash = "");

}  // namespace lrds

#endif  // LRDS_TRAINER_HPP
