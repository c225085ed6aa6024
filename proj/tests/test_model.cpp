#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "lrds/model.hpp"

using namespace lrds;
namespace fs = std::filesystem;

namespace {

// A small batch on a fixed seed; labels are arbitrary but in range.
TrainBatch make_batch(const MLPModel& model, int n, std::uint64_t seed,
                      bool with_teacher = false, bool with_probs = false) {
  SeededRng rng(seed);
  const int d = model.input_dim();
  const int c = model.class_count();
  TrainBatch batch;
  batch.x.resize(n, d);
  batch.y.resize(n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < d; ++j) batch.x(i, j) = rng.normal();
    batch.y[i] = static_cast<int>(rng.index(static_cast<std::size_t>(c)));
  }
  if (with_teacher) {
    batch.teacher_logits.resize(n, c);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < c; ++j) batch.teacher_logits(i, j) = rng.normal();
  }
  if (with_probs) {
    batch.target_probs.resize(n, c);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < c; ++j) batch.target_probs(i, j) = rng.uniform() + 0.05;
      batch.target_probs.row(i) /= batch.target_probs.row(i).sum();
    }
  }
  return batch;
}

double fd_directional(const MLPModel& model, const TrainBatch& batch,
                      const LossSpec& spec, const Eigen::VectorXd& dir, double h) {
  MLPModel m = model;
  const Eigen::VectorXd theta = model.flatten();
  m.set_flat(theta + h * dir);
  const double fp = loss_and_grad(m, batch, spec).first;
  m.set_flat(theta - h * dir);
  const double fm = loss_and_grad(m, batch, spec).first;
  return (fp - fm) / (2 * h);
}

}  // namespace

TEST_CASE("init: deterministic, correct shapes, zero biases") {
  ModelSpec spec;
  spec.layer_dims = {3, 5, 4};
  spec.seed = 21;
  const MLPModel a = init(spec);
  const MLPModel b = init(spec);
  REQUIRE(a.weights.size() == 2);
  CHECK(a.weights[0].rows() == 5);
  CHECK(a.weights[0].cols() == 3);
  CHECK(a.weights[1].rows() == 4);
  CHECK(a.weights[1].cols() == 5);
  CHECK(a.biases[0].isZero(0.0));
  CHECK(a.biases[1].isZero(0.0));
  CHECK(a.flatten() == b.flatten());
  CHECK(a.param_count() == 5 * 3 + 5 + 4 * 5 + 4);

  ModelSpec other = spec;
  other.seed = 22;
  CHECK(init(other).flatten() != a.flatten());

  ModelSpec bad;
  bad.layer_dims = {3};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.layer_dims = {3, 0, 2};
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad.layer_dims = {3, 4, 2};
  bad.activation = "tanh";
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("forward: identity single layer passes input through") {
  ModelSpec spec;
  spec.layer_dims = {2, 2};
  MLPModel m = init(spec);
  m.weights[0] = Eigen::Matrix2d::Identity();
  m.biases[0].setZero();
  Eigen::VectorXd x(2);
  x << 3.0, 4.0;
  const Eigen::VectorXd z = forward(m, x);
  CHECK(z[0] == 3.0);
  CHECK(z[1] == 4.0);
}

TEST_CASE("forward: relu clips negative hidden pre-activations") {
  ModelSpec spec;
  spec.layer_dims = {1, 2, 1};
  MLPModel m = init(spec);
  // Hidden units compute x and -x; output sums them, so f(x) = relu(x) + relu(-x) = |x|.
  m.weights[0] << 1.0, -1.0;
  m.biases[0].setZero();
  m.weights[1] << 1.0, 1.0;
  m.biases[1].setZero();
  Eigen::VectorXd x(1);
  for (double v : {-2.5, -1.0, 0.0, 0.75, 3.0}) {
    x[0] = v;
    CHECK(forward(m, x)[0] == doctest::Approx(std::abs(v)).epsilon(1e-15));
  }
}

TEST_CASE("forward: batched rows match per-sample forwards exactly") {
  ModelSpec spec;
  spec.layer_dims = {4, 6, 3};
  spec.seed = 33;
  const MLPModel m = init(spec);
  SeededRng rng(5);
  Eigen::MatrixXd x(9, 4);
  for (int i = 0; i < 9; ++i)
    for (int j = 0; j < 4; ++j) x(i, j) = 2.0 * rng.normal();
  const Eigen::MatrixXd z = forward(m, x);
  REQUIRE(z.rows() == 9);
  REQUIRE(z.cols() == 3);
  for (int i = 0; i < 9; ++i) {
    const Eigen::VectorXd zi = forward(m, Eigen::VectorXd(x.row(i).transpose()));
    CHECK((z.row(i).transpose() - zi).lpNorm<Eigen::Infinity>() == 0.0);
  }
}

TEST_CASE("flatten / set_flat: exact round-trip and layout stability") {
  ModelSpec spec;
  spec.layer_dims = {3, 4, 2};
  spec.seed = 1;
  MLPModel m = init(spec);
  const Eigen::VectorXd theta = m.flatten();
  REQUIRE(theta.size() == m.param_count());

  MLPModel copy = init(spec);
  copy.set_flat(theta);
  CHECK(copy.flatten() == theta);
  CHECK(copy.checksum() == m.checksum());

  Eigen::VectorXd bumped = theta;
  bumped[0] += 1.0;
  m.set_flat(bumped);
  CHECK(m.weights[0](0, 0) == theta[0] + 1.0);
  CHECK(m.checksum() != copy.checksum());

  CHECK_THROWS_AS(m.set_flat(Eigen::VectorXd::Zero(theta.size() + 1)),
                  std::invalid_argument);
}

TEST_CASE("loss_and_grad: gradient matches finite differences across loss kinds") {
  ModelSpec mspec;
  mspec.layer_dims = {2, 4, 3};
  mspec.seed = 77;
  mspec.init_scale = 0.9;
  const MLPModel m = init(mspec);
  const TrainBatch batch = make_batch(m, 8, 101, true, true);

  std::vector<LossSpec> specs;
  {
    LossSpec s;
    s.kind = LossKind::ce;
    specs.push_back(s);
    s.kind = LossKind::vanilla_kd;
    s.lambda1 = 0.6;
    specs.push_back(s);
    s.kind = LossKind::mse_logits;
    specs.push_back(s);
    s.kind = LossKind::kl_distill;
    s.tau = 2.0;
    specs.push_back(s);
    s.kind = LossKind::mse_probs;
    specs.push_back(s);
  }

  SeededRng rng(55);
  for (const LossSpec& spec : specs) {
    const Eigen::VectorXd g = loss_and_grad(m, batch, spec).second;
    REQUIRE(g.size() == m.param_count());
    for (int trial = 0; trial < 5; ++trial) {
      Eigen::VectorXd dir(g.size());
      for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = rng.normal();
      dir.normalize();
      const double fd = fd_directional(m, batch, spec, dir, 1e-6);
      CHECK(g.dot(dir) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
    }
  }
}

TEST_CASE("loss_and_grad: lrds group means and gradient") {
  ModelSpec mspec;
  mspec.layer_dims = {2, 5, 3};
  mspec.seed = 13;
  const MLPModel m = init(mspec);
  TrainBatch batch = make_batch(m, 6, 202, true, true);
  batch.wrong = {0, 1, 0, 0, 1, 1};

  LossSpec spec;
  spec.kind = LossKind::lrds;
  spec.lambda1 = 0.8;
  spec.lambda2 = 1.7;

  // Cross-check the value against the reference per-sample formula.
  const Eigen::MatrixXd z = forward(m, batch.x);
  std::vector<RightSample> right;
  std::vector<WrongSample> wrongs;
  for (int i = 0; i < 6; ++i) {
    if (batch.wrong[static_cast<std::size_t>(i)])
      wrongs.push_back({z.row(i).transpose(), batch.target_probs.row(i).transpose()});
    else
      right.push_back({z.row(i).transpose(), batch.teacher_logits.row(i).transpose(),
                       batch.y[static_cast<std::size_t>(i)]});
  }
  const auto [value, grad] = loss_and_grad(m, batch, spec);
  CHECK(value == doctest::Approx(lrds_loss(right, wrongs, spec)).epsilon(1e-13));

  SeededRng rng(66);
  for (int trial = 0; trial < 6; ++trial) {
    Eigen::VectorXd dir(grad.size());
    for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = rng.normal();
    dir.normalize();
    const double fd = fd_directional(m, batch, spec, dir, 1e-6);
    CHECK(grad.dot(dir) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("hvp: linearity, symmetry, agreement with the dense Hessian") {
  ModelSpec mspec;
  mspec.layer_dims = {2, 4, 3};  // 31 parameters
  mspec.seed = 3;
  mspec.init_scale = 0.8;
  const MLPModel m = init(mspec);
  const TrainBatch batch = make_batch(m, 10, 303);
  LossSpec spec;
  spec.kind = LossKind::ce;

  const Eigen::MatrixXd h = exact_hessian(m, batch, spec);
  REQUIRE(h.rows() == m.param_count());
  CHECK((h - h.transpose()).lpNorm<Eigen::Infinity>() == 0.0);

  SeededRng rng(14);
  for (int trial = 0; trial < 8; ++trial) {
    Eigen::VectorXd v(h.rows()), w(h.rows());
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      v[i] = rng.normal();
      w[i] = rng.normal();
    }
    const Eigen::VectorXd hv = hvp(m, batch, v, spec);
    CHECK((hv - h * v).lpNorm<Eigen::Infinity>() < 1e-5);
    // Bilinear-form symmetry: w'Hv == v'Hw.
    const Eigen::VectorXd hw = hvp(m, batch, w, spec);
    CHECK(w.dot(hv) == doctest::Approx(v.dot(hw)).epsilon(1e-6).scale(1.0));
    // Homogeneity in the direction.
    const Eigen::VectorXd h2v = hvp(m, batch, 2.0 * v, spec);
    CHECK((h2v - 2.0 * hv).lpNorm<Eigen::Infinity>() < 1e-6);
  }

  CHECK(hvp(m, batch, Eigen::VectorXd::Zero(h.rows()), spec).isZero(0.0));
  CHECK_THROWS_AS(exact_hessian(m, batch, spec, 10), CapacityError);
}

TEST_CASE("exact_hessian: PSD for softmax regression") {
  // No hidden layer: cross-entropy is convex in the parameters, so the
  // Hessian must be positive semidefinite.
  ModelSpec mspec;
  mspec.layer_dims = {3, 4};
  mspec.seed = 9;
  const MLPModel m = init(mspec);
  const TrainBatch batch = make_batch(m, 20, 404);
  LossSpec spec;
  spec.kind = LossKind::ce;
  const Eigen::MatrixXd h = exact_hessian(m, batch, spec);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h);
  CHECK(es.eigenvalues().minCoeff() > -1e-8);
}

TEST_CASE("checkpoint: bit-exact round-trip") {
  ModelSpec mspec;
  mspec.layer_dims = {4, 7, 5};
  mspec.seed = 111;
  MLPModel m = init(mspec);
  m.weights[0](0, 0) = 1.0 / 3.0;  // not exactly representable in decimal
  m.biases[1][2] = -0.1;

  const fs::path dir = fs::temp_directory_path() / "lrds_model_test";
  fs::create_directories(dir);
  const std::string path = (dir / "model.json").string();
  save_checkpoint(m, path, "deadbeef00000000");
  const MLPModel r = load_checkpoint(path);
  CHECK(r.spec.layer_dims == m.spec.layer_dims);
  CHECK(r.flatten() == m.flatten());
  CHECK(r.checksum() == m.checksum());

  CHECK_THROWS_AS(load_checkpoint((dir / "missing.json").string()), ParseError);
}
