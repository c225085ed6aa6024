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
#include "lrds/model.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "lrds/data.hpp"
#include "lrds/numcore.hpp"

namespace lrds {

void ModelSpec::validate() const {
  if (layer_dims.size() < 2)
    throw std::invalid_argument("ModelSpec: need at least 2 layer dims");
  for (int d : layer_dims) {
    if (d < 1) throw std::invalid_argument("ModelSpec: layer dims must be positive");
  }
  if (activation != "relu")
    throw std::invalid_argument("ModelSpec: unsupported activation " + activation);
  if (init_scale < 0.0)
    throw std::invalid_argument("ModelSpec: init_scale must be >= 0");
}

Eigen::Index MLPModel::param_count() const {
  Eigen::Index n = 0;
  for (std::size_t l = 0; l < weights.size(); ++l)
    n += weights[l].size() + biases[l].size();
  return n;
}

Eigen::VectorXd MLPModel::flatten() const {
  Eigen::VectorXd theta(param_count());
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    const auto& w = weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) theta[k++] = w(r, c);
    for (Eigen::Index r = 0; r < biases[l].size(); ++r) theta[k++] = biases[l][r];
  }
  return theta;
}

void MLPModel::set_flat(const Eigen::VectorXd& theta) {
  if (theta.size() != param_count())
    throw std::invalid_argument("set_flat: length mismatch");
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    auto& w = weights[l];
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = theta[k++];
    for (Eigen::Index r = 0; r < biases[l].size(); ++r) biases[l][r] = theta[k++];
  }
}

std::string MLPModel::checksum() const {
  std::string buf;
  for (int d : spec.layer_dims) {
    std::uint64_t v = static_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
  const Eigen::VectorXd theta = flatten();
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    std::uint64_t bits;
    std::memcpy(&bits, &theta[i], sizeof bits);
    for (int b = 0; b < 8; ++b) buf.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
  }
  return to_hex(fnv1a64(buf.data(), buf.size()));
}

MLPModel init(const ModelSpec& spec) {
  spec.validate();
  MLPModel m;
  m.spec = spec;
  SeededRng rng(spec.seed);
  for (std::size_t l = 0; l + 1 < spec.layer_dims.size(); ++l) {
    const int fan_in = spec.layer_dims[l];
    const int fan_out = spec.layer_dims[l + 1];
    Eigen::MatrixXd w(fan_out, fan_in);
    const double scale = spec.init_scale / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index r = 0; r < w.rows(); ++r)
      for (Eigen::Index c = 0; c < w.cols(); ++c) w(r, c) = scale * rng.normal();
    m.weights.push_back(std::move(w));
    m.biases.emplace_back(Eigen::VectorXd::Zero(fan_out));
  }
  return m;
}

namespace {

struct ForwardCache {
  std::vector<Eigen::MatrixXd> acts;  // acts[0] = input, acts[l] post-relu
  std::vector<Eigen::MatrixXd> pre;   // pre[l] = pre-activation of layer l
};

Eigen::MatrixXd forward_cached(const MLPModel& model, const Eigen::MatrixXd& x,
                               ForwardCache* cache) {
  if (x.cols() != model.input_dim())
    throw std::invalid_argument("forward: input dim mismatch");
  Eigen::MatrixXd a = x;
  if (cache) cache->acts.push_back(a);
  const std::size_t n_layers = model.weights.size();
  for (std::size_t l = 0; l < n_layers; ++l) {
    Eigen::MatrixXd z = a * model.weights[l].transpose();
    z.rowwise() += model.biases[l].transpose();
    if (l + 1 < n_layers) {
      if (cache) cache->pre.push_back(z);
      a = z.cwiseMax(0.0);
      if (cache) cache->acts.push_back(a);
    } else {
      a = std::move(z);
    }
  }
  return a;
}

/// Backprop dL/dlogits (n x C) through the cached forward pass; returns the
/// flat parameter gradient in the flatten() layout.
Eigen::VectorXd backward(const MLPModel& model, const ForwardCache& cache,
                         const Eigen::MatrixXd& dlogits) {
  const std::size_t n_layers = model.weights.size();
  std::vector<Eigen::MatrixXd> grad_w(n_layers);
  std::vector<Eigen::VectorXd> grad_b(n_layers);
  Eigen::MatrixXd delta = dlogits;
  for (std::size_t l = n_layers; l-- > 0;) {
    grad_w[l] = delta.transpose() * cache.acts[l];
    grad_b[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      delta = delta * model.weights[l];
      delta = delta.cwiseProduct(
          (cache.pre[l - 1].array() > 0.0).cast<double>().matrix());
    }
  }
  Eigen::VectorXd g(model.param_count());
  Eigen::Index k = 0;
  for (std::size_t l = 0; l < n_layers; ++l) {
    for (Eigen::Index r = 0; r < grad_w[l].rows(); ++r)
      for (Eigen::Index c = 0; c < grad_w[l].cols(); ++c) g[k++] = grad_w[l](r, c);
    for (Eigen::Index r = 0; r < grad_b[l].size(); ++r) g[k++] = grad_b[l][r];
  }
  return g;
}

void check_batch(const MLPModel& model, const TrainBatch& batch,
                 const LossSpec& spec) {
  const Eigen::Index n = batch.x.rows();
  if (n == 0) throw std::invalid_argument("loss_and_grad: empty batch");
  if (batch.x.cols() != model.input_dim())
    throw std::invalid_argument("loss_and_grad: feature dim mismatch");
  const bool needs_labels =
      spec.kind == LossKind::ce || spec.kind == LossKind::vanilla_kd ||
      spec.kind == LossKind::lrds;
  if (needs_labels && static_cast<Eigen::Index>(batch.y.size()) != n)
    throw std::invalid_argument("loss_and_grad: label count mismatch");
  const bool needs_teacher =
      spec.kind == LossKind::kl_distill || spec.kind == LossKind::mse_logits ||
      spec.kind == LossKind::vanilla_kd || spec.kind == LossKind::lrds;
  if (needs_teacher &&
      (batch.teacher_logits.rows() != n ||
       batch.teacher_logits.cols() != model.class_count())) {
    // lrds with every sample marked wrong needs no teacher logits.
    bool all_wrong = spec.kind == LossKind::lrds &&
                     static_cast<Eigen::Index>(batch.wrong.size()) == n;
    if (all_wrong) {
      for (auto w : batch.wrong) all_wrong = all_wrong && w;
    }
    if (!all_wrong)
      throw std::invalid_argument("loss_and_grad: teacher logits shape mismatch");
  }
  if (!batch.wrong.empty() && static_cast<Eigen::Index>(batch.wrong.size()) != n)
    throw std::invalid_argument("loss_and_grad: wrong-flag count mismatch");
}

}  // namespace

Eigen::VectorXd forward(const MLPModel& model, const Eigen::VectorXd& x) {
  if (x.size() != model.input_dim())
    throw std::invalid_argument("forward: input dim mismatch");
  Eigen::MatrixXd z = forward_cached(model, x.transpose(), nullptr);
  return z.row(0).transpose();
}

Eigen::MatrixXd forward(const MLPModel& model, const Eigen::MatrixXd& x) {
  return forward_cached(model, x, nullptr);
}

std::pair<double, Eigen::VectorXd> loss_and_grad(const MLPModel& model,
                                                 const TrainBatch& batch,
                                                 const LossSpec& spec) {
  spec.validate();
  check_batch(model, batch, spec);
  const Eigen::Index n = batch.x.rows();

  ForwardCache cache;
  const Eigen::MatrixXd logits = forward_cached(model, batch.x, &cache);

  // Per-sample weights: uniform 1/n, except lrds where right/wrong groups
  // carry their own means and lambda2 scales the wrong group.
  Eigen::Index n_right = n;
  Eigen::Index n_wrong = 0;
  if (spec.kind == LossKind::lrds && !batch.wrong.empty()) {
    n_wrong = 0;
    for (auto w : batch.wrong) n_wrong += w ? 1 : 0;
    n_right = n - n_wrong;
  }

  double loss = 0.0;
  Eigen::MatrixXd dlogits(n, model.class_count());
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd z = logits.row(i).transpose();
    double li = 0.0;
    Eigen::VectorXd gi;
    double wi = 1.0 / static_cast<double>(n);
    switch (spec.kind) {
      case LossKind::ce:
        li = cross_entropy(tempered_softmax(z, 1.0), batch.y[i]);
        gi = cross_entropy_logit_grad(z, batch.y[i]);
        break;
      case LossKind::kl_distill:
        li = kl_distill(z, batch.teacher_logits.row(i).transpose(), spec.tau);
        gi = kl_distill_logit_grad(z, batch.teacher_logits.row(i).transpose(), spec.tau);
        break;
      case LossKind::mse_logits:
        li = mse_logits(z, batch.teacher_logits.row(i).transpose());
        gi = mse_logits_grad(z, batch.teacher_logits.row(i).transpose());
        break;
      case LossKind::mse_probs:
        li = mse_probs(z, batch.target_probs.row(i).transpose());
        gi = mse_probs_logit_grad(z, batch.target_probs.row(i).transpose());
        break;
      case LossKind::vanilla_kd: {
        const Eigen::VectorXd zt = batch.teacher_logits.row(i).transpose();
        li = vanilla_kd_loss(z, zt, batch.y[i], spec);
        gi = cross_entropy_logit_grad(z, batch.y[i]) +
             spec.lambda1 * kl_distill_logit_grad(z, zt, spec.tau);
        break;
      }
      case LossKind::lrds: {
        const bool is_wrong = !batch.wrong.empty() && batch.wrong[i];
        if (is_wrong) {
          const Eigen::VectorXd p = batch.target_probs.row(i).transpose();
          li = mse_probs(z, p);
          gi = mse_probs_logit_grad(z, p);
          wi = spec.lambda2 / static_cast<double>(n_wrong);
        } else {
          const Eigen::VectorXd zt = batch.teacher_logits.row(i).transpose();
          li = cross_entropy(tempered_softmax(z, 1.0), batch.y[i]);
          gi = cross_entropy_logit_grad(z, batch.y[i]);
          if (spec.right_part_loss == RightPartLoss::mse_logits) {
            li += spec.lambda1 * mse_logits(z, zt);
            gi += spec.lambda1 * mse_logits_grad(z, zt);
          } else {
            li += spec.lambda1 * kl_distill(z, zt, spec.tau);
            gi += spec.lambda1 * kl_distill_logit_grad(z, zt, spec.tau);
          }
          wi = 1.0 / static_cast<double>(n_right);
        }
        break;
      }
    }
    loss += wi * li;
    dlogits.row(i) = (wi * gi).transpose();
  }

  return {loss, backward(model, cache, dlogits)};
}

Eigen::VectorXd hvp(const MLPModel& model, const TrainBatch& batch,
                    const Eigen::VectorXd& v, const LossSpec& spec) {
  if (v.size() != model.param_count())
    throw std::invalid_argument("hvp: dimension mismatch");
  const double vnorm = v.norm();
  if (vnorm == 0.0) return Eigen::VectorXd::Zero(v.size());

  const Eigen::VectorXd dir = v / vnorm;
  const double h = 1e-4 * (1.0 + dir.lpNorm<Eigen::Infinity>());
  const Eigen::VectorXd theta = model.flatten();

  MLPModel probe = model;
  probe.set_flat(theta + h * dir);
  const Eigen::VectorXd g_plus = loss_and_grad(probe, batch, spec).second;
  probe.set_flat(theta - h * dir);
  const Eigen::VectorXd g_minus = loss_and_grad(probe, batch, spec).second;

  return vnorm / (2.0 * h) * (g_plus - g_minus);
}

Eigen::MatrixXd exact_hessian(const MLPModel& model, const TrainBatch& batch,
                              const LossSpec& spec, int max_params) {
  const Eigen::Index p = model.param_count();
  if (p > max_params)
    throw CapacityError("exact_hessian: " + std::to_string(p) +
                        " parameters exceed threshold " + std::to_string(max_params));
  const double h = 1e-4;
  const Eigen::VectorXd theta = model.flatten();
  Eigen::MatrixXd hess(p, p);
  MLPModel probe = model;
  Eigen::VectorXd theta_probe = theta;
  for (Eigen::Index j = 0; j < p; ++j) {
    theta_probe[j] = theta[j] + h;
    probe.set_flat(theta_probe);
    const Eigen::VectorXd g_plus = loss_and_grad(probe, batch, spec).second;
    theta_probe[j] = theta[j] - h;
    probe.set_flat(theta_probe);
    const Eigen::VectorXd g_minus = loss_and_grad(probe, batch, spec).second;
    theta_probe[j] = theta[j];
    hess.col(j) = (g_plus - g_minus) / (2.0 * h);
  }
  return 0.5 * (hess + hess.transpose());
}

void save_checkpoint(const MLPModel& model, const std::string& path,
                     const std::string& config_hash) {
  nlohmann::json j;
  j["format_version"] = 1;
  j["layer_dims"] = model.spec.layer_dims;
  j["activation"] = model.spec.activation;
  j["init_scale"] = model.spec.init_scale;
  j["seed"] = model.spec.seed;
  const Eigen::VectorXd theta = model.flatten();
  j["flat_params"] = std::vector<double>(theta.data(), theta.data() + theta.size());
  if (!config_hash.empty()) j["config_hash"] = config_hash;
  std::ofstream out(path);
  if (!out) throw ParseError("save_checkpoint: cannot open " + path);
  out << j.dump(2) << "\n";
}

MLPModel load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_checkpoint: cannot open " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError("load_checkpoint: " + std::string(e.what()));
  }
  if (j.value("format_version", 0) != 1)
    throw ParseError("load_checkpoint: unsupported format_version");
  ModelSpec spec;
  spec.layer_dims = j.at("layer_dims").get<std::vector<int>>();
  spec.activation = j.value("activation", "relu");
  spec.init_scale = j.value("init_scale", 1.0);
  spec.seed = j.value("seed", std::uint64_t{0});
  spec.validate();
  MLPModel m;
  m.spec = spec;
  for (std::size_t l = 0; l + 1 < spec.layer_dims.size(); ++l) {
    m.weights.emplace_back(
        Eigen::MatrixXd::Zero(spec.layer_dims[l + 1], spec.layer_dims[l]));
    m.biases.emplace_back(Eigen::VectorXd::Zero(spec.layer_dims[l + 1]));
  }
  const auto params = j.at("flat_params").get<std::vector<double>>();
  if (static_cast<Eigen::Index>(params.size()) != m.param_count())
    throw ParseError("load_checkpoint: flat_params length mismatch");
  m.set_flat(Eigen::Map<const Eigen::VectorXd>(params.data(),
                                               static_cast<Eigen::Index>(params.size())));
  return m;
}

}  // namespace lrds
