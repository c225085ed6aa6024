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
// End-to-end acceptance suite. Each numbered check prints exactly one
// PASS/FAIL line with its measured runtime; the binary exits nonzero if
// any check fails. Tolerances are pinned in the checks themselves.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "lrds/harness.hpp"

using namespace lrds;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

void run_check(int id, const std::string& name, double time_limit_s,
               const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome out;
  try {
    out = body();
  } catch (const std::exception& e) {
    out.pass = false;
    out.detail = std::string("exception: ") + e.what();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > time_limit_s) {
    out.pass = false;
    out.detail += (out.detail.empty() ? "" : "; ") + std::string("exceeded ") +
                  std::to_string(time_limit_s) + "s budget";
  }
  if (!out.pass) ++g_failures;
  std::printf("[%s] %d. %s (%.2fs): %s\n", out.pass ? "PASS" : "FAIL", id,
              name.c_str(), secs, out.detail.c_str());
  std::fflush(stdout);
}

Eigen::VectorXd random_simplex(SeededRng& rng, int n) {
  Eigen::VectorXd p(n);
  for (int i = 0; i < n; ++i) p[i] = rng.uniform() + 1e-6;
  return p / p.sum();
}

std::vector<double> ranks_with_ties(const std::vector<double>& v) {
  const std::size_t n = v.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(n);
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = 0.5 * (static_cast<double>(i) + static_cast<double>(j)) + 1.0;
    for (std::size_t k = i; k <= j; ++k) r[idx[k]] = avg;
    i = j + 1;
  }
  return r;
}

double spearman(const std::vector<double>& a, const std::vector<double>& b) {
  const std::vector<double> ra = ranks_with_ties(a), rb = ranks_with_ties(b);
  const double n = static_cast<double>(a.size());
  double ma = 0, mb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ma += ra[i];
    mb += rb[i];
  }
  ma /= n;
  mb /= n;
  double num = 0, da = 0, db = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (ra[i] - ma) * (rb[i] - mb);
    da += (ra[i] - ma) * (ra[i] - ma);
    db += (rb[i] - mb) * (rb[i] - mb);
  }
  return num / std::sqrt(da * db);
}

TrainBatch batch_from_dataset(const Dataset& d) {
  TrainBatch b;
  b.x = d.features;
  b.y = d.labels;
  return b;
}

// Damped Newton on mean CE + 0.5 * damping * ||theta||^2.
MLPModel newton_train(MLPModel model, const Dataset& data, double damping,
                      double grad_tol) {
  LossSpec ce;
  ce.kind = LossKind::ce;
  const TrainBatch full = batch_from_dataset(data);
  for (int iter = 0; iter < 200; ++iter) {
    Eigen::VectorXd theta = model.flatten();
    Eigen::VectorXd grad = loss_and_grad(model, full, ce).second + damping * theta;
    if (grad.norm() < grad_tol) break;
    Eigen::MatrixXd h = exact_hessian(model, full, ce);
    h.diagonal().array() += damping;
    theta -= h.ldlt().solve(grad);
    model.set_flat(theta);
  }
  return model;
}

double final_grad_norm(const MLPModel& model, const Dataset& data, double damping) {
  LossSpec ce;
  ce.kind = LossKind::ce;
  const TrainBatch full = batch_from_dataset(data);
  return (loss_and_grad(model, full, ce).second + damping * model.flatten()).norm();
}

// ---------------------------------------------------------------------------

Outcome check_revision_golden() {
  Eigen::VectorXd p_t(4);
  p_t << 0.1, 0.1, 0.5, 0.3;
  const RevisedLabel r = revise_label(p_t, 3, EtaMode::fixed(0.9));
  Eigen::VectorXd expected(4);
  expected << 0.075, 0.075, 0.375, 0.475;
  const double beta_err = std::abs(r.beta - 0.75);
  const double p_err = (r.p - expected).lpNorm<Eigen::Infinity>();
  Outcome out;
  out.pass = beta_err < 1e-9 && p_err < 1e-9;
  out.detail = "beta err " + std::to_string(beta_err) + ", p err " + std::to_string(p_err);
  return out;
}

Outcome check_argmax_correction() {
  SeededRng rng(2024);
  int bad_argmax = 0, bad_sum = 0, bad_order = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int c = 3 + static_cast<int>(rng.index(8));
    const Eigen::VectorXd p = random_simplex(rng, c);
    const int pred = static_cast<int>(argmax(p));
    int target = static_cast<int>(rng.index(static_cast<std::size_t>(c)));
    if (target == pred) target = (target + 1) % c;  // force a wrong teacher
    const double eta = 0.01 + 0.98 * rng.uniform();
    const RevisedLabel r = revise_label(p, target, EtaMode::fixed(eta));
    if (argmax(r.p) != target) ++bad_argmax;
    if (std::abs(r.p.sum() - 1.0) > 1e-9) ++bad_sum;
    for (int i = 0; i < c && bad_order == 0; ++i)
      for (int j = 0; j < c; ++j)
        if (i != target && j != target && p[i] < p[j] && !(r.p[i] < r.p[j])) {
          ++bad_order;
          break;
        }
  }
  Outcome out;
  out.pass = bad_argmax == 0 && bad_sum == 0 && bad_order == 0;
  out.detail = "10000 trials: " + std::to_string(bad_argmax) + " argmax misses, " +
               std::to_string(bad_sum) + " simplex violations, " +
               std::to_string(bad_order) + " order violations";
  return out;
}

Outcome check_gradient_fidelity() {
  SeededRng rng(77);
  double worst = 0.0;
  const std::vector<LossKind> kinds = {LossKind::ce, LossKind::vanilla_kd,
                                       LossKind::mse_logits, LossKind::kl_distill,
                                       LossKind::mse_probs, LossKind::lrds};
  for (int m = 0; m < 20; ++m) {
    ModelSpec spec;
    const int depth = 2 + static_cast<int>(rng.index(3));
    for (int l = 0; l <= depth; ++l)
      spec.layer_dims.push_back(2 + static_cast<int>(rng.index(4)));
    spec.seed = 1000 + static_cast<std::uint64_t>(m);
    spec.init_scale = 0.8;
    MLPModel model = init(spec);
    if (model.param_count() > 300) return {false, "model exceeds 300 params"};
    // Jitter every parameter (biases start at zero) so no pre-activation
    // sits exactly on the relu kink, where the one-sided subgradient and a
    // central difference legitimately disagree.
    {
      Eigen::VectorXd theta = model.flatten();
      for (Eigen::Index i = 0; i < theta.size(); ++i) theta[i] += 0.05 * rng.normal();
      model.set_flat(theta);
    }

    const int n = 4 + static_cast<int>(rng.index(5));
    const int c = model.class_count();
    TrainBatch b;
    b.x.resize(n, model.input_dim());
    b.y.resize(static_cast<std::size_t>(n));
    b.teacher_logits.resize(n, c);
    b.target_probs.resize(n, c);
    b.wrong.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < model.input_dim(); ++j) b.x(i, j) = rng.normal();
      b.y[static_cast<std::size_t>(i)] = static_cast<int>(rng.index(static_cast<std::size_t>(c)));
      for (int j = 0; j < c; ++j) b.teacher_logits(i, j) = rng.normal();
      b.target_probs.row(i) = random_simplex(rng, c).transpose();
      b.wrong[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(rng.index(2));
    }
    if (std::count(b.wrong.begin(), b.wrong.end(), std::uint8_t(0)) == 0) b.wrong[0] = 0;

    LossSpec spec_l;
    spec_l.kind = kinds[static_cast<std::size_t>(m) % kinds.size()];
    spec_l.tau = 2.0;
    spec_l.lambda1 = 0.7;
    spec_l.lambda2 = 1.3;

    const Eigen::VectorXd g = loss_and_grad(model, b, spec_l).second;
    const Eigen::VectorXd theta = model.flatten();
    const double h = 1e-5;
    MLPModel probe = model;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      Eigen::VectorXd tp = theta, tm = theta;
      tp[k] += h;
      tm[k] -= h;
      probe.set_flat(tp);
      const double fp = loss_and_grad(probe, b, spec_l).first;
      probe.set_flat(tm);
      const double fm = loss_and_grad(probe, b, spec_l).first;
      const double fd = (fp - fm) / (2 * h);
      worst = std::max(worst, std::abs(g[k] - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  Outcome out;
  out.pass = worst < 1e-4;
  std::ostringstream os;
  os << "20 models, max relative gradient error " << worst;
  out.detail = os.str();
  return out;
}

Outcome check_hessian_machinery() {
  // Part 1: hvp against the dense Hessian on small rectifier networks.
  double worst_hvp = 0.0;
  SeededRng rng(88);
  for (int m = 0; m < 4; ++m) {
    ModelSpec spec;
    spec.layer_dims = {2, 5, 4, 3};  // 54 parameters
    spec.seed = 300 + static_cast<std::uint64_t>(m);
    spec.init_scale = 0.8;
    const MLPModel model = init(spec);
    if (model.param_count() > 200) return {false, "model exceeds 200 params"};
    BlobSpec bs;
    bs.class_count = 3;
    bs.samples_per_class = 8;
    bs.spread = 0.6;
    bs.seed = 400 + static_cast<std::uint64_t>(m);
    const Dataset data = gen_blobs(bs);
    const TrainBatch b = batch_from_dataset(data);
    LossSpec ce;
    ce.kind = LossKind::ce;
    const Eigen::MatrixXd h = exact_hessian(model, b, ce);
    for (int t = 0; t < 5; ++t) {
      Eigen::VectorXd v(h.rows());
      for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
      worst_hvp = std::max(
          worst_hvp, (hvp(model, b, v, ce) - h * v).lpNorm<Eigen::Infinity>());
    }
  }

  // Part 2: exact vs CG inverse Hessian-vector solves on a convex model
  // (no hidden layer, so CE is convex in the parameters).
  ModelSpec lspec;
  lspec.layer_dims = {2, 3};
  lspec.seed = 5;
  lspec.init_scale = 0.5;
  const MLPModel logistic = init(lspec);
  BlobSpec bs;
  bs.class_count = 3;
  bs.samples_per_class = 20;
  bs.spread = 0.7;
  bs.seed = 6;
  const Dataset data = gen_blobs(bs);

  InfluenceConfig exact_cfg;
  InfluenceConfig cg_cfg;
  cg_cfg.solver = Solver::conjugate_gradient;
  cg_cfg.cg_tol = 1e-7;
  cg_cfg.cg_max_iters = 500;
  double worst_ihvp = 0.0;
  for (int t = 0; t < 5; ++t) {
    Eigen::VectorXd v(logistic.param_count());
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = rng.normal();
    const Eigen::VectorXd ue = inverse_hvp(logistic, data, v, exact_cfg);
    const Eigen::VectorXd uc = inverse_hvp(logistic, data, v, cg_cfg);
    worst_ihvp = std::max(worst_ihvp, (ue - uc).lpNorm<Eigen::Infinity>());
  }

  Outcome out;
  out.pass = worst_hvp < 1e-5 && worst_ihvp < 1e-4;
  std::ostringstream os;
  os << "hvp max abs diff " << worst_hvp << ", exact-vs-cg max diff " << worst_ihvp;
  out.detail = os.str();
  return out;
}

Outcome check_influence_oracle() {
  // 3-class, 2-feature, 40-sample logistic regression with a few flipped
  // labels; trained by damped Newton to a tight stationary point.
  const double damping = 1e-3;
  Dataset data;
  data.class_count = 3;
  data.features.resize(40, 2);
  data.labels.resize(40);
  SeededRng rng(555);
  const double cx[3] = {2.0, -1.0, -1.0};
  const double cy[3] = {0.0, 1.7, -1.7};
  for (int i = 0; i < 40; ++i) {
    const int c = i % 3;
    data.features(i, 0) = cx[c] + 0.9 * rng.normal();
    data.features(i, 1) = cy[c] + 0.9 * rng.normal();
    data.labels[static_cast<std::size_t>(i)] = c;
  }
  for (int i : {5, 13, 26, 34})  // mislabels make high-influence samples
    data.labels[static_cast<std::size_t>(i)] =
        (data.labels[static_cast<std::size_t>(i)] + 1) % 3;

  ModelSpec spec;
  spec.layer_dims = {2, 3};
  spec.seed = 7;
  spec.init_scale = 0.1;
  const MLPModel trained = newton_train(init(spec), data, damping, 1e-9);
  const double gnorm = final_grad_norm(trained, data, damping);
  if (gnorm >= 1e-8) return {false, "training stalled at grad norm " + std::to_string(gnorm)};

  InfluenceConfig cfg;
  cfg.damping = damping;
  cfg.scalarization = Scalarization::self_influence;
  const InfluenceReport report = score_dataset(trained, data, cfg);

  // Exact leave-one-out retraining: delta of the removed sample's CE loss.
  std::vector<double> loo_deltas;
  LossSpec ce;
  ce.kind = LossKind::ce;
  for (int i = 0; i < 40; ++i) {
    Dataset rest;
    rest.class_count = 3;
    rest.features.resize(39, 2);
    rest.labels.reserve(39);
    Eigen::Index r = 0;
    for (int j = 0; j < 40; ++j) {
      if (j == i) continue;
      rest.features.row(r++) = data.features.row(j);
      rest.labels.push_back(data.labels[static_cast<std::size_t>(j)]);
    }
    const MLPModel retrained = newton_train(trained, rest, damping, 1e-9);

    TrainBatch one;
    one.x = data.features.row(i);
    one.y = {data.labels[static_cast<std::size_t>(i)]};
    const double before = loss_and_grad(trained, one, ce).first;
    const double after = loss_and_grad(retrained, one, ce).first;
    loo_deltas.push_back(after - before);
  }

  const double rho = spearman(report.scores, loo_deltas);
  Outcome out;
  out.pass = rho >= 0.8;
  std::ostringstream os;
  os << "Spearman(self_influence, LOO delta) = " << rho << " (grad norm " << gnorm << ")";
  out.detail = os.str();
  return out;
}

Outcome check_closed_form_influence() {
  // Mean estimation: loss 0.5 (theta - x)^2, data {1,2,3}, theta* = 2, H = 1.
  InfluenceConfig cfg;
  cfg.damping = 0.0;
  const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(1, 1);
  const double theta_star = 2.0;
  const double expected[3] = {-1.0, 0.0, 1.0};
  double worst = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double x = 1.0 + k;
    Eigen::VectorXd g(1);
    g << theta_star - x;
    const Eigen::VectorXd u = param_influence(h, g, cfg);
    worst = std::max(worst, std::abs(u[0] - expected[k]));
  }
  Outcome out;
  out.pass = worst < 1e-8;
  std::ostringstream os;
  os << "max deviation from [-1, 0, +1]: " << worst;
  out.detail = os.str();
  return out;
}

Outcome check_reductions() {
  BlobSpec bs;
  bs.class_count = 3;
  bs.samples_per_class = 40;
  bs.spread = 0.4;
  bs.seed = 31;
  const Dataset train = gen_blobs(bs);

  ModelSpec tspec;
  tspec.layer_dims = {2, 16, 3};
  tspec.seed = 32;
  DistillConfig tcfg;
  tcfg.epochs = 40;
  tcfg.batch_size = 32;
  tcfg.lr0 = 0.1;
  tcfg.lr_decay_epochs = {30};
  tcfg.seed = 33;
  const MLPModel teacher = train_teacher(tspec, train, tcfg);
  if (evaluate(teacher, train) != 1.0)
    return {false, "teacher is not train-perfect; cannot exercise the pct=1 reduction"};

  ModelSpec sspec;
  sspec.layer_dims = {2, 6, 3};
  sspec.seed = 34;

  // (a) pct = 0 and lambda1 = lambda2 = 0 must be bit-identical to CE training.
  DistillConfig zero_cfg = tcfg;
  zero_cfg.loss.kind = LossKind::lrds;
  zero_cfg.loss.lambda1 = 0.0;
  zero_cfg.loss.lambda2 = 0.0;
  zero_cfg.pct = 0.0;
  InfluenceReport dummy;
  dummy.scores.assign(static_cast<std::size_t>(train.size()), 0.0);
  const SplitPlan empty_plan = rank_and_split(dummy, 0.0, SplitOrder::highest_first, 0);
  const auto [reduced, rlog] = distill(teacher, sspec, train, empty_plan, zero_cfg);
  const MLPModel ce_student = train_teacher(sspec, train, zero_cfg);
  const bool bit_identical = reduced.flatten() == ce_student.flatten();

  // (b) pct = 1 with a train-perfect teacher and kl right-part loss equals
  // the plain distillation objective batch by batch.
  LossSpec lr_spec;
  lr_spec.kind = LossKind::lrds;
  lr_spec.right_part_loss = RightPartLoss::kl_distill;
  LossSpec kd_spec;
  kd_spec.kind = LossKind::vanilla_kd;

  SeededRng rng(35);
  double worst_loss_diff = 0.0, worst_grad_diff = 0.0;
  for (int t = 0; t < 50; ++t) {
    ModelSpec ms = sspec;
    ms.seed = 100 + static_cast<std::uint64_t>(t);
    const MLPModel state = init(ms);
    const int n = 16;
    TrainBatch b;
    b.x.resize(n, 2);
    b.y.resize(n);
    for (int i = 0; i < n; ++i) {
      const int src = static_cast<int>(rng.index(static_cast<std::size_t>(train.size())));
      b.x.row(i) = train.features.row(src);
      b.y[static_cast<std::size_t>(i)] = train.labels[static_cast<std::size_t>(src)];
    }
    b.teacher_logits = forward(teacher, b.x);
    // All samples are right-part: the teacher is train-perfect.
    b.wrong.assign(static_cast<std::size_t>(n), 0);
    b.target_probs = Eigen::MatrixXd::Zero(n, 3);
    const auto [l1, g1] = loss_and_grad(state, b, lr_spec);
    const auto [l2, g2] = loss_and_grad(state, b, kd_spec);
    worst_loss_diff = std::max(worst_loss_diff, std::abs(l1 - l2));
    worst_grad_diff = std::max(worst_grad_diff, (g1 - g2).lpNorm<Eigen::Infinity>());
  }

  Outcome out;
  out.pass = bit_identical && worst_loss_diff <= 1e-12 && worst_grad_diff <= 1e-12;
  std::ostringstream os;
  os << "(a) bit-identical: " << (bit_identical ? "yes" : "NO")
     << "; (b) max batch loss diff " << worst_loss_diff << ", max grad diff "
     << worst_grad_diff;
  out.detail = os.str();
  return out;
}

Outcome check_desk_scale() {
  const fs::path art = fs::path("acceptance_artifacts");
  fs::create_directories(art);

  struct Variant {
    std::string name;
    double pct;
    LossKind kind;
  };
  const std::vector<Variant> variants = {
      {"ce_only", 0.0, LossKind::ce},
      {"vanilla_kd", 1.0, LossKind::vanilla_kd},
      {"lr_only", 1.0, LossKind::lrds},
      {"ds_only", 0.8, LossKind::vanilla_kd},
      {"lr_ds", 0.8, LossKind::lrds},
  };
  std::vector<std::vector<double>> accs(variants.size());

  std::ofstream table((art / "comparison.csv").string());
  table.precision(10);
  table << "variant,seed,test_acc\n";

  for (int s = 1; s <= 5; ++s) {
    BlobSpec bs;
    bs.class_count = 3;
    bs.samples_per_class = 200;
    bs.spread = 1.0;
    bs.label_noise_rate = 0.05;
    bs.seed = static_cast<std::uint64_t>(10 + s);
    const Dataset train = gen_blobs(bs);
    BlobSpec ts = bs;
    ts.samples_per_class = 100;
    ts.label_noise_rate = 0.0;
    ts.seed = static_cast<std::uint64_t>(200 + s);
    const Dataset test = gen_blobs(ts);

    ModelSpec tspec;
    tspec.layer_dims = {2, 64, 64, 3};
    tspec.seed = static_cast<std::uint64_t>(s);
    DistillConfig tcfg;  // desk defaults: 120 epochs, decays {60,90,105}
    tcfg.seed = static_cast<std::uint64_t>(s);
    const MLPModel teacher = train_teacher(tspec, train, tcfg);

    InfluenceConfig icfg;
    icfg.exact_threshold = 5000;  // the [2,64,64,3] teacher has 4547 params
    const InfluenceReport report = score_dataset(teacher, train, icfg);

    ModelSpec sspec;
    sspec.layer_dims = {2, 8, 3};
    sspec.seed = static_cast<std::uint64_t>(1000 + s);

    for (std::size_t v = 0; v < variants.size(); ++v) {
      DistillConfig cfg;
      cfg.seed = static_cast<std::uint64_t>(s);
      cfg.pct = variants[v].pct;
      cfg.loss.kind = variants[v].kind;
      double acc = 0.0;
      if (variants[v].kind == LossKind::ce) {
        const MLPModel student = train_teacher(sspec, train, cfg);
        acc = evaluate(student, test);
      } else {
        const SplitPlan plan = rank_and_split(report, cfg.pct, cfg.order, cfg.seed);
        const auto [student, log] = distill(teacher, sspec, train, plan, cfg);
        acc = evaluate(student, test);
      }
      accs[v].push_back(acc);
      table << variants[v].name << "," << s << "," << acc << "\n";
    }
  }

  std::vector<double> means(variants.size());
  for (std::size_t v = 0; v < variants.size(); ++v) {
    means[v] = std::accumulate(accs[v].begin(), accs[v].end(), 0.0) / 5.0;
    table << variants[v].name << ",mean," << means[v] << "\n";
  }

  const double ce = means[0], kd = means[1], lrds_acc = means[4];
  Outcome out;
  out.pass = lrds_acc >= ce && lrds_acc >= kd - 0.005;
  std::ostringstream os;
  os.precision(4);
  os << "mean test acc: ce " << ce << ", kd " << kd << ", lr_only " << means[2]
     << ", ds_only " << means[3] << ", lr+ds " << lrds_acc
     << " (table: acceptance_artifacts/comparison.csv)";
  out.detail = os.str();
  return out;
}

Outcome check_split_grid() {
  const fs::path dir = fs::temp_directory_path() / "lrds_acceptance_grid";
  fs::remove_all(dir);
  fs::create_directories(dir);

  json cfg;
  cfg["out_dir"] = (dir / "runs").string();
  cfg["dataset"] = {{"source", "blobs"},       {"class_count", 3},
                    {"samples_per_class", 34}, {"test_samples_per_class", 10},
                    {"spread", 0.6},           {"label_noise_rate", 0.1},
                    {"seed", 3}};
  cfg["teacher"] = {{"kind", "mlp"}, {"layer_dims", {2, 8, 3}}, {"seed", 1}};
  cfg["student"] = {{"layer_dims", {2, 4, 3}}, {"seed", 2}};
  cfg["teacher_train"] = {{"epochs", 8}, {"batch_size", 16}, {"lr0", 0.1},
                          {"lr_decay_epochs", {6}}, {"seed", 1}};
  cfg["distill"] = {{"epochs", 8},
                    {"batch_size", 16},
                    {"lr0", 0.02},
                    {"lr_decay_epochs", {6}},
                    {"seed", 1},
                    {"loss", {{"kind", "lrds"}}}};
  const fs::path cfg_path = dir / "config.json";
  std::ofstream(cfg_path.string()) << cfg.dump(2);

  json ab;
  ab["parameter"] = "pct";
  ab["values"] = {0.2, 0.5, 0.8};
  ab["parameter2"] = "order";
  ab["values2"] = {"highest_first", "lowest_first", "random"};
  ab["seeds"] = {1};
  const fs::path ab_path = dir / "ablation.json";
  std::ofstream(ab_path.string()) << ab.dump(2);

  if (run_ablate(cfg_path.string(), ab_path.string(), (dir / "runs").string()) != 0)
    return {false, "ablation run failed"};

  // N = 102 training samples; verify round-half-up counts in each plan.
  const int n = 102;
  const std::vector<std::pair<std::string, double>> pcts = {
      {"0p2", 0.2}, {"0p5", 0.5}, {"0p8", 0.8}};
  const std::vector<std::string> orders = {"highest_first", "lowest_first", "random"};
  int cells = 0;
  for (const auto& [tag, pct] : pcts) {
    for (const std::string& order : orders) {
      const fs::path plan_path = dir / "runs" / "seed1" /
                                 ("pct=" + tag + "_order=" + order) / "split_plan.json";
      if (!fs::exists(plan_path))
        return {false, "missing split plan " + plan_path.string()};
      const SplitPlan plan = read_split_plan(plan_path.string());
      const int expected = static_cast<int>(std::floor(pct * n + 0.5));
      if (static_cast<int>(plan.dt_indices.size()) != expected)
        return {false, plan_path.string() + ": |D^t| " +
                           std::to_string(plan.dt_indices.size()) + " != " +
                           std::to_string(expected)};
      if (static_cast<int>(plan.dt_indices.size() + plan.ds_indices.size()) != n)
        return {false, plan_path.string() + ": plan does not cover the dataset"};
      ++cells;
    }
  }
  Outcome out;
  out.pass = cells == 9;
  out.detail = "9-cell pct x order grid with round-half-up |D^t| in every plan";
  return out;
}

}  // namespace

int main() {
  run_check(1, "label revision golden example", 5, check_revision_golden);
  run_check(2, "argmax correction property", 5, check_argmax_correction);
  run_check(3, "gradient fidelity", 30, check_gradient_fidelity);
  run_check(4, "Hessian machinery", 30, check_hessian_machinery);
  run_check(5, "influence vs leave-one-out oracle", 120, check_influence_oracle);
  run_check(6, "closed-form influence", 5, check_closed_form_influence);
  run_check(7, "reduction equivalences", 60, check_reductions);
  run_check(8, "desk-scale end-to-end comparison", 600, check_desk_scale);
  run_check(9, "split-grid ablation mechanism", 900, check_split_grid);

  if (g_failures == 0) {
    std::printf("acceptance: all 9 checks passed\n");
    return 0;
  }
  std::printf("acceptance: %d check(s) failed\n", g_failures);
  return 1;
}
