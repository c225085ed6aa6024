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
#include "lrds/trainer.hpp"

#include <cmath>
#include <fstream>

namespace lrds {

void DistillConfig::validate() const {
  loss.validate();
  if (pct < 0.0 || pct > 1.0)
    throw std::invalid_argument("DistillConfig: pct must be in [0,1]");
  if (epochs < 0) throw std::invalid_argument("DistillConfig: epochs must be >= 0");
  if (batch_size < 1) throw std::invalid_argument("DistillConfig: batch_size must be >= 1");
  if (!(lr0 > 0.0)) throw std::invalid_argument("DistillConfig: lr0 must be > 0");
  if (!(lr_decay_factor > 0.0))
    throw std::invalid_argument("DistillConfig: lr_decay_factor must be > 0");
  if (momentum < 0.0 || momentum >= 1.0)
    throw std::invalid_argument("DistillConfig: momentum must be in [0,1)");
  for (std::size_t i = 0; i < lr_decay_epochs.size(); ++i) {
    if (i > 0 && lr_decay_epochs[i] <= lr_decay_epochs[i - 1])
      throw std::invalid_argument("DistillConfig: decay epochs must be strictly increasing");
    if (lr_decay_epochs[i] >= epochs)
      throw std::invalid_argument("DistillConfig: decay epochs must be < epochs");
  }
}

void sgd_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
              MomentumState& state, double lr, double momentum) {
  if (params.size() != grad.size())
    throw std::invalid_argument("sgd_step: length mismatch");
  if (state.velocity.size() == 0)
    state.velocity = Eigen::VectorXd::Zero(params.size());
  if (state.velocity.size() != params.size())
    throw std::invalid_argument("sgd_step: velocity length mismatch");
  state.velocity = momentum * state.velocity + grad;
  params -= lr * state.velocity;
}

double lr_schedule(int epoch, const DistillConfig& cfg) {
  if (epoch < 0) throw std::invalid_argument("lr_schedule: epoch must be >= 0");
  int n_decays = 0;
  for (int e : cfg.lr_decay_epochs)
    if (e <= epoch) ++n_decays;
  return cfg.lr0 * std::pow(cfg.lr_decay_factor, n_decays);
}

std::vector<BatchPlan> make_combined_batches(const std::vector<int>& dt,
                                             const std::vector<int>& ds,
                                             int batch_size, SeededRng& rng) {
  if (batch_size < 1)
    throw std::invalid_argument("make_combined_batches: batch_size must be >= 1");
  if (dt.empty() && ds.empty())
    throw std::invalid_argument("make_combined_batches: both index sets empty");

  std::vector<int> dtp = dt;
  std::vector<int> dsp = ds;
  rng.shuffle(dtp);
  rng.shuffle(dsp);

  const std::size_t n = dtp.size() + dsp.size();
  const std::size_t bs = static_cast<std::size_t>(batch_size);
  // Per-batch teacher quota, proportional to |D^t| / N, rounded up.
  const std::size_t quota = (bs * dtp.size() + n - 1) / n;

  std::vector<BatchPlan> batches;
  std::size_t i = 0, j = 0;
  while (i < dtp.size() || j < dsp.size()) {
    BatchPlan b;
    while (b.indices.size() < bs && i < dtp.size() &&
           (b.indices.size() < quota || j >= dsp.size())) {
      b.indices.push_back(dtp[i++]);
      b.is_teacher.push_back(1);
    }
    while (b.indices.size() < bs && j < dsp.size()) {
      b.indices.push_back(dsp[j++]);
      b.is_teacher.push_back(0);
    }
    batches.push_back(std::move(b));
  }
  return batches;
}

RevisionCache precompute_revision(const MLPModel& teacher, const Dataset& data,
                                  const SplitPlan& plan, const DistillConfig& cfg) {
  RevisionCache cache;
  cache.teacher_logits = forward(teacher, data.features);
  cache.wrong.assign(static_cast<std::size_t>(data.size()), 0);
  cache.revised = Eigen::MatrixXd::Zero(data.size(), data.class_count);
  if (cfg.loss.kind != LossKind::lrds) return cache;
  for (int i : plan.dt_indices) {
    const Eigen::VectorXd p_t =
        tempered_softmax(cache.teacher_logits.row(i).transpose(), 1.0);
    const int y = data.labels[static_cast<std::size_t>(i)];
    if (static_cast<int>(argmax(p_t)) == y) continue;
    cache.wrong[static_cast<std::size_t>(i)] = 1;
    RevisedLabel rev;
    try {
      rev = revise_label(p_t, y, cfg.eta_mode);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("precompute_revision: sample " + std::to_string(i) +
                                  ": " + e.what());
    }
    cache.revised.row(i) = rev.p.transpose();
    cache.wrong_dt_indices.push_back(i);
    cache.revised_labels.push_back(std::move(rev));
  }
  return cache;
}

namespace {

struct PortionLoss {
  double ce_right = 0.0;
  double distill_right = 0.0;
  double mse_wrong = 0.0;
};

/// Loss components on the teacher-supervised portion, for logging only.
PortionLoss portion_components(const MLPModel& student, const TrainBatch& b,
                               const LossSpec& spec) {
  PortionLoss out;
  const Eigen::MatrixXd logits = forward(student, b.x);
  Eigen::Index n_right = 0, n_wrong = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const Eigen::VectorXd z = logits.row(i).transpose();
    const bool is_wrong =
        spec.kind == LossKind::lrds && !b.wrong.empty() && b.wrong[static_cast<std::size_t>(i)];
    if (is_wrong) {
      out.mse_wrong += mse_probs(z, b.target_probs.row(i).transpose());
      ++n_wrong;
    } else {
      const Eigen::VectorXd zt = b.teacher_logits.row(i).transpose();
      out.ce_right += cross_entropy(tempered_softmax(z, 1.0), b.y[static_cast<std::size_t>(i)]);
      if (spec.kind == LossKind::lrds && spec.right_part_loss == RightPartLoss::mse_logits)
        out.distill_right += mse_logits(z, zt);
      else
        out.distill_right += kl_distill(z, zt, spec.tau);
      ++n_right;
    }
  }
  if (n_right > 0) {
    out.ce_right /= static_cast<double>(n_right);
    out.distill_right *= spec.lambda1 / static_cast<double>(n_right);
  }
  if (n_wrong > 0) out.mse_wrong *= spec.lambda2 / static_cast<double>(n_wrong);
  return out;
}

/// The single training loop behind both train_teacher and distill.
/// teacher == nullptr (or an empty D^t) degrades to plain CE training with
/// an unchanged arithmetic path.
std::pair<MLPModel, TrainLog> run_training(const MLPModel* teacher,
                                           const ModelSpec& student_spec,
                                           const Dataset& data,
                                           const SplitPlan& plan,
                                           const DistillConfig& cfg,
                                           const Dataset* test) {
  cfg.validate();
  data.validate();

  const std::size_t n = static_cast<std::size_t>(data.size());
  if (plan.dt_indices.size() + plan.ds_indices.size() != n)
    throw std::invalid_argument("distill: split plan does not cover the dataset");
  if (student_spec.layer_dims.back() != data.class_count)
    throw std::invalid_argument("distill: student class count mismatch");
  if (teacher) {
    if (teacher->class_count() != data.class_count)
      throw std::invalid_argument("distill: teacher/student class-count mismatch");
    if (teacher->input_dim() != static_cast<int>(data.dim()))
      throw std::invalid_argument("distill: teacher input dim mismatch");
  }
  if (!teacher && !plan.dt_indices.empty())
    throw std::invalid_argument("distill: teacher-supervised samples without a teacher");

  RevisionCache cache;
  if (teacher) cache = precompute_revision(*teacher, data, plan, cfg);

  MLPModel student = init(student_spec);
  Eigen::VectorXd params = student.flatten();
  MomentumState state;
  SeededRng rng(cfg.seed);
  TrainLog log;

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = lr_schedule(epoch, cfg);
    const auto batches =
        make_combined_batches(plan.dt_indices, plan.ds_indices, cfg.batch_size, rng);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.lr = lr;
    for (std::size_t step = 0; step < batches.size(); ++step) {
      const BatchPlan& bp = batches[step];
      std::vector<int> dt_local, ds_local;
      for (std::size_t k = 0; k < bp.indices.size(); ++k)
        (bp.is_teacher[k] ? dt_local : ds_local).push_back(bp.indices[k]);

      double batch_loss = 0.0;
      Eigen::VectorXd grad = Eigen::VectorXd::Zero(params.size());

      if (!dt_local.empty()) {
        TrainBatch tb;
        const Eigen::Index m = static_cast<Eigen::Index>(dt_local.size());
        tb.x.resize(m, data.dim());
        tb.teacher_logits.resize(m, data.class_count);
        tb.y.resize(dt_local.size());
        if (cfg.loss.kind == LossKind::lrds) {
          tb.target_probs.resize(m, data.class_count);
          tb.wrong.resize(dt_local.size());
        }
        for (Eigen::Index k = 0; k < m; ++k) {
          const int i = dt_local[static_cast<std::size_t>(k)];
          tb.x.row(k) = data.features.row(i);
          tb.y[static_cast<std::size_t>(k)] = data.labels[static_cast<std::size_t>(i)];
          tb.teacher_logits.row(k) = cache.teacher_logits.row(i);
          if (cfg.loss.kind == LossKind::lrds) {
            tb.wrong[static_cast<std::size_t>(k)] = cache.wrong[static_cast<std::size_t>(i)];
            tb.target_probs.row(k) = cache.revised.row(i);
          }
        }
        const auto [l, g] = loss_and_grad(student, tb, cfg.loss);
        batch_loss += l;
        grad += g;
        const PortionLoss pl = portion_components(student, tb, cfg.loss);
        rec.loss_ce_right += pl.ce_right;
        rec.loss_distill_right += pl.distill_right;
        rec.loss_mse_wrong += pl.mse_wrong;
      }
      if (!ds_local.empty()) {
        TrainBatch sb;
        const Eigen::Index m = static_cast<Eigen::Index>(ds_local.size());
        sb.x.resize(m, data.dim());
        sb.y.resize(ds_local.size());
        for (Eigen::Index k = 0; k < m; ++k) {
          const int i = ds_local[static_cast<std::size_t>(k)];
          sb.x.row(k) = data.features.row(i);
          sb.y[static_cast<std::size_t>(k)] = data.labels[static_cast<std::size_t>(i)];
        }
        LossSpec ce;
        ce.kind = LossKind::ce;
        const auto [l, g] = loss_and_grad(student, sb, ce);
        batch_loss += l;
        grad += g;
        rec.loss_ce_ds += l;
      }

      if (!std::isfinite(batch_loss) || !grad.allFinite())
        throw NumericalError("training diverged at epoch " + std::to_string(epoch) +
                             ", step " + std::to_string(step));

      sgd_step(params, grad, state, lr, cfg.momentum);
      student.set_flat(params);
      rec.loss_total += batch_loss;
    }

    const double n_batches = static_cast<double>(batches.size());
    rec.loss_total /= n_batches;
    rec.loss_ce_ds /= n_batches;
    rec.loss_ce_right /= n_batches;
    rec.loss_distill_right /= n_batches;
    rec.loss_mse_wrong /= n_batches;
    if (test) rec.test_acc = evaluate(student, *test);
    log.records.push_back(rec);
  }
  return {std::move(student), std::move(log)};
}

}  // namespace

MLPModel train_teacher(const ModelSpec& spec, const Dataset& data,
                       const DistillConfig& cfg, const Dataset* test,
                       TrainLog* log) {
  SplitPlan plan;
  plan.pct = 0.0;
  plan.ds_indices.resize(static_cast<std::size_t>(data.size()));
  for (Eigen::Index i = 0; i < data.size(); ++i)
    plan.ds_indices[static_cast<std::size_t>(i)] = static_cast<int>(i);
  auto [model, train_log] = run_training(nullptr, spec, data, plan, cfg, test);
  if (log) *log = std::move(train_log);
  return model;
}

std::pair<MLPModel, TrainLog> distill(const MLPModel& teacher,
                                      const ModelSpec& student_spec,
                                      const Dataset& data, const SplitPlan& plan,
                                      const DistillConfig& cfg,
                                      const Dataset* test) {
  return run_training(&teacher, student_spec, data, plan, cfg, test);
}

double evaluate(const MLPModel& model, const Dataset& data) {
  if (data.size() == 0) throw std::invalid_argument("evaluate: empty dataset");
  if (static_cast<int>(data.dim()) != model.input_dim())
    throw std::invalid_argument("evaluate: feature dim mismatch");
  const Eigen::MatrixXd logits = forward(model, data.features);
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    if (static_cast<int>(argmax(logits.row(i).transpose())) ==
        data.labels[static_cast<std::size_t>(i)])
      ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(logits.rows());
}

void write_trainlog_csv(const std::string& path, const TrainLog& log,
                        const std::string& config_hash) {
  std::ofstream out(path);
  if (!out) throw ParseError("write_trainlog_csv: cannot open " + path);
  out.precision(17);
  if (!config_hash.empty()) out << "# config " << config_hash << "\n";
  out << "epoch,lr,loss_total,loss_ce_ds,loss_ce_right,loss_distill_right,"
         "loss_mse_wrong,test_acc\n";
  for (const auto& r : log.records) {
    out << r.epoch << "," << r.lr << "," << r.loss_total << "," << r.loss_ce_ds
        << "," << r.loss_ce_right << "," << r.loss_distill_right << ","
        << r.loss_mse_wrong << "," << r.test_acc << "\n";
  }
}

}  // namespace lrds
