#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "cyclesync/adam.hpp"
#include "cyclesync/errors.hpp"
#include "cyclesync/nn.hpp"
#include "cyclesync/rng.hpp"
#include "cyclesync/sync.hpp"
#include "cyclesync/synth.hpp"
#include "cyclesync/train.hpp"
#include "oracles.hpp"

using cyclesync::AdamConfig;
using cyclesync::AdamState;
using cyclesync::LstmModel;
using cyclesync::LstmState;
using cyclesync::Matrix;
using cyclesync::ModelInput;
using cyclesync::ModelSizes;
using cyclesync::TrainConfig;
using cyclesync::Vector;

namespace {

ModelSizes sizes(int h1, int h2, int dense) {
  ModelSizes s;
  s.hidden1 = h1;
  s.hidden2 = h2;
  s.dense = dense;
  return s;
}

Matrix random_features(std::mt19937_64& rng, int rows) {
  Matrix m(rows, 3);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < 3; ++c) m(r, c) = cyclesync::uniform(rng, -1.0, 1.0);
  }
  return m;
}

LstmModel zero_model(const ModelSizes& s) {
  LstmModel m = cyclesync::make_model(s, 0);
  m.unflatten(Vector::Zero(m.parameter_count()));
  return m;
}

std::vector<ModelInput> random_inputs(std::mt19937_64& rng, int count, int rows) {
  std::vector<ModelInput> inputs;
  for (int i = 0; i < count; ++i) {
    ModelInput in;
    in.cycle_id = i + 1;
    in.features = random_features(rng, rows);
    in.capacity_ah = cyclesync::uniform(rng, 1.0, 2.0);
    inputs.push_back(std::move(in));
  }
  return inputs;
}

}  // namespace

TEST_CASE("zero parameters and zero state give a zero cell update") {
  const LstmModel m = zero_model(sizes(4, 4, 3));
  LstmState prev;
  prev.h = Vector::Zero(4);
  prev.c = Vector::Zero(4);
  const LstmState next =
      cyclesync::lstm_cell_forward(m.layer1, Vector::Zero(3), prev);
  CHECK(next.h.norm() == 0.0);
  CHECK(next.c.norm() == 0.0);
}

TEST_CASE("saturated gates either carry or replace the cell state") {
  LstmModel m = zero_model(sizes(2, 2, 2));
  LstmState prev;
  prev.h = Vector::Zero(2);
  prev.c = Vector::Constant(2, 0.8);
  Vector x = Vector::Constant(3, 0.7);

  SUBCASE("open forget gate, closed input gate: memory carried") {
    m.layer1.b_f.setConstant(30.0);
    m.layer1.b_i.setConstant(-30.0);
    const LstmState next = cyclesync::lstm_cell_forward(m.layer1, x, prev);
    CHECK(next.c(0) == doctest::Approx(0.8).epsilon(1e-10));
    CHECK(next.c(1) == doctest::Approx(0.8).epsilon(1e-10));
  }
  SUBCASE("closed forget gate, open input gate: memory replaced") {
    m.layer1.b_f.setConstant(-30.0);
    m.layer1.b_i.setConstant(30.0);
    m.layer1.W_c.setConstant(1.0);
    const LstmState next = cyclesync::lstm_cell_forward(m.layer1, x, prev);
    const double want = std::tanh(3 * 0.7);
    CHECK(next.c(0) == doctest::Approx(want).epsilon(1e-10));
    CHECK(next.c(1) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("cell output matches the scalar transcription of the equations") {
  const LstmModel m = cyclesync::make_model(sizes(4, 4, 3), 7);
  std::mt19937_64 rng(71);
  LstmState prev;
  prev.h = Vector::Zero(4);
  prev.c = Vector::Zero(4);
  std::vector<double> h(4), c(4);
  Vector x(3);
  for (int i = 0; i < 4; ++i) {
    prev.h(i) = cyclesync::uniform(rng, -1.0, 1.0);
    prev.c(i) = cyclesync::uniform(rng, -1.0, 1.0);
    h[static_cast<std::size_t>(i)] = prev.h(i);
    c[static_cast<std::size_t>(i)] = prev.c(i);
  }
  for (int i = 0; i < 3; ++i) x(i) = cyclesync::uniform(rng, -1.0, 1.0);

  const LstmState next = cyclesync::lstm_cell_forward(m.layer1, x, prev);
  std::vector<double> xs = {x(0), x(1), x(2)};
  oracle::lstm_cell_scalar(m.layer1, xs, h, c);
  for (int i = 0; i < 4; ++i) {
    CHECK(next.h(i) == doctest::Approx(h[static_cast<std::size_t>(i)]).epsilon(1e-13));
    CHECK(next.c(i) == doctest::Approx(c[static_cast<std::size_t>(i)]).epsilon(1e-13));
    CHECK(next.h(i) > -1.0);
    CHECK(next.h(i) < 1.0);
  }
}

// The literals below were frozen from a run that the scalar transcription in
// oracles.hpp agreed with to 1e-13; they pin the seeded init and the cell
// arithmetic across toolchains.
TEST_CASE("seeded 3-to-4 cell reproduces the frozen golden state") {
  const LstmModel m = cyclesync::make_model(sizes(4, 5, 3), 7);
  Vector x(3);
  x << 0.2, -0.4, 0.9;
  LstmState prev;
  prev.h = Vector(4);
  prev.c = Vector(4);
  prev.h << 0.1, -0.2, 0.3, 0.05;
  prev.c << -0.5, 0.25, 0.0, 1.0;
  const LstmState next = cyclesync::lstm_cell_forward(m.layer1, x, prev);

  const double want_h[4] = {-0.20078988542056814, -0.065724000418288075,
                            0.034945951099843622, 0.18208750147173777};
  const double want_c[4] = {-0.55269596811068478, -0.17580258071259858,
                            0.068351333397662029, 0.32627868096842888};
  for (int i = 0; i < 4; ++i) {
    CHECK(next.h(i) == doctest::Approx(want_h[i]).epsilon(1e-12));
    CHECK(next.c(i) == doctest::Approx(want_c[i]).epsilon(1e-12));
  }
}

TEST_CASE("seeded tiny model reproduces the frozen golden prediction") {
  const LstmModel m = cyclesync::make_model(sizes(4, 5, 3), 7);
  Matrix f(5, 3);
  f << 0.0, 1.0, 0.0,  //
      0.25, 0.9, 0.1,  //
      0.5, 1.1, 0.35,  //
      0.75, 1.0, 0.6,  //
      1.0, 0.95, 1.0;
  CHECK(cyclesync::forward(m, f) ==
        doctest::Approx(0.03828008198076574).epsilon(1e-12));
}

TEST_CASE("an all-zero model predicts zero") {
  const LstmModel m = zero_model(sizes(3, 4, 3));
  std::mt19937_64 rng(5);
  CHECK(cyclesync::forward(m, random_features(rng, 6)) == 0.0);
}

TEST_CASE("forward is pure") {
  const LstmModel m = cyclesync::make_model(sizes(4, 5, 3), 11);
  std::mt19937_64 rng(9);
  const Matrix f = random_features(rng, 8);
  CHECK(cyclesync::forward(m, f) == cyclesync::forward(m, f));
}

TEST_CASE("full forward agrees with the scalar transcription") {
  std::mt19937_64 rng(13);
  for (std::uint64_t seed : {11ULL, 12ULL, 13ULL}) {
    const LstmModel m = cyclesync::make_model(sizes(4, 5, 3), seed);
    const Matrix f = random_features(rng, 9);
    CHECK(cyclesync::forward(m, f) ==
          doctest::Approx(oracle::forward_scalar(m, f)).epsilon(1e-12));
  }
}

TEST_CASE("forward rejects mis-shaped input") {
  const LstmModel m = cyclesync::make_model(sizes(3, 3, 2), 1);
  Matrix wrong(4, 2);
  wrong.setZero();
  CHECK_THROWS_AS(cyclesync::forward(m, wrong), cyclesync::Error);
  Matrix empty(0, 3);
  CHECK_THROWS_AS(cyclesync::forward(m, empty), cyclesync::Error);
}

TEST_CASE("rmse handles the documented cases") {
  const std::vector<double> a = {2.0, 2.0};
  const std::vector<double> b = {1.0, 3.0};
  CHECK(cyclesync::loss_rmse(a, b) == 1.0);
  CHECK(cyclesync::loss_rmse(b, b) == 0.0);

  const std::vector<double> shifted = {1.5, 3.5};
  CHECK(cyclesync::loss_rmse(shifted, b) == doctest::Approx(0.5).epsilon(1e-15));

  const std::vector<double> shorter = {1.0};
  CHECK_THROWS_AS(cyclesync::loss_rmse(a, shorter), cyclesync::Error);
  const std::vector<double> none;
  CHECK_THROWS_AS(cyclesync::loss_rmse(none, none), cyclesync::Error);
}

TEST_CASE("a zero-error batch produces zero gradients everywhere") {
  const LstmModel m = cyclesync::make_model(sizes(3, 4, 3), 3);
  std::mt19937_64 rng(17);
  std::vector<Matrix> feats = {random_features(rng, 5), random_features(rng, 5)};
  std::vector<double> targets;
  for (const Matrix& f : feats) targets.push_back(cyclesync::forward(m, f));
  const cyclesync::ModelGrads g = cyclesync::backward(m, feats, targets);
  CHECK(g.flatten().norm() == 0.0);
  CHECK(g.head.b(0) == 0.0);
}

TEST_CASE("analytic gradients match central finite differences") {
  std::mt19937_64 rng(19);
  for (std::uint64_t seed : {101ULL, 102ULL, 103ULL}) {
    LstmModel m = cyclesync::make_model(sizes(3, 4, 3), seed);
    std::vector<Matrix> feats;
    std::vector<double> targets;
    for (int i = 0; i < 4; ++i) {
      feats.push_back(random_features(rng, 5));
      targets.push_back(cyclesync::uniform(rng, 0.5, 1.5));
    }
    const Vector analytic = cyclesync::backward(m, feats, targets).flatten();

    const Vector theta = m.flatten();
    const double step = 1e-5;
    for (Eigen::Index k = 0; k < theta.size(); ++k) {
      Vector plus = theta, minus = theta;
      plus[k] += step;
      minus[k] -= step;
      std::vector<double> pp, pm;
      m.unflatten(plus);
      for (const Matrix& f : feats) pp.push_back(cyclesync::forward(m, f));
      m.unflatten(minus);
      for (const Matrix& f : feats) pm.push_back(cyclesync::forward(m, f));
      m.unflatten(theta);
      const double numeric = (cyclesync::loss_rmse(pp, targets) -
                              cyclesync::loss_rmse(pm, targets)) /
                             (2.0 * step);
      const double denom = std::max({std::fabs(analytic[k]),
                                     std::fabs(numeric), 1e-6});
      CHECK(std::fabs(analytic[k] - numeric) / denom <= 1e-4);
    }
  }
}

TEST_CASE("gradient clipping caps the global norm") {
  Vector g(4);
  g << 3.0, 4.0, 0.0, 0.0;  // norm 5
  Vector big = 10.0 * g;    // norm 50
  const double pre = cyclesync::clip_gradients(big, 5.0);
  CHECK(pre == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(big.norm() == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(big(0) == doctest::Approx(3.0).epsilon(1e-12));

  Vector small = g;
  cyclesync::clip_gradients(small, 5.0);
  CHECK((small.array() == g.array()).all());  // at the cap, untouched

  Vector any = 10.0 * g;
  cyclesync::clip_gradients(any, 0.0);  // disabled
  CHECK(any.norm() == doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("first Adam step moves by lr * g / (|g| + eps)") {
  AdamConfig cfg;
  Vector params = Vector::Zero(3);
  Vector g(3);
  g << 0.5, -2.0, 1e-12;
  AdamState st(3, cfg);
  cyclesync::adam_step(params, g, st);
  CHECK(st.step == 1);
  for (int i = 0; i < 3; ++i) {
    const double want = -cfg.learning_rate * g(i) / (std::fabs(g(i)) + cfg.epsilon);
    CHECK(params(i) == doctest::Approx(want).epsilon(1e-12));
  }
}

TEST_CASE("zero gradient from a fresh state leaves parameters in place") {
  Vector params(2);
  params << 1.0, -2.0;
  const Vector before = params;
  AdamState st(2, AdamConfig{});
  cyclesync::adam_step(params, Vector::Zero(2), st);
  CHECK((params.array() == before.array()).all());

  // After a real step the moments decay under a zero gradient.
  Vector g(2);
  g << 1.0, 1.0;
  cyclesync::adam_step(params, g, st);
  const Vector m_after = st.m;
  cyclesync::adam_step(params, Vector::Zero(2), st);
  CHECK(st.m(0) == doctest::Approx(0.9 * m_after(0)).epsilon(1e-12));
}

TEST_CASE("constant gradients drive updates of one learning rate per step") {
  AdamConfig cfg;
  Vector params = Vector::Zero(1);
  Vector g(1);
  g << 0.7;
  AdamState st(1, cfg);
  for (int t = 0; t < 200; ++t) cyclesync::adam_step(params, g, st);
  // Every update is lr * g / (|g| + eps), i.e. one learning rate toward -g.
  CHECK(params(0) ==
        doctest::Approx(-200.0 * cfg.learning_rate).epsilon(1e-6));
}

TEST_CASE("optimizer state must match the parameter shape") {
  Vector params = Vector::Zero(3);
  AdamState st(2, AdamConfig{});
  CHECK_THROWS_AS(cyclesync::adam_step(params, Vector::Zero(3), st),
                  cyclesync::Error);
}

TEST_CASE("training is deterministic and lr 0 is a no-op") {
  std::mt19937_64 rng(23);
  const std::vector<ModelInput> inputs = random_inputs(rng, 6, 7);

  TrainConfig cfg;
  cfg.epochs = 4;
  cfg.seed = 5;
  LstmModel m1 = cyclesync::make_model(sizes(3, 3, 2), 5);
  LstmModel m2 = cyclesync::make_model(sizes(3, 3, 2), 5);
  const auto r1 = cyclesync::train(m1, inputs, cfg);
  const auto r2 = cyclesync::train(m2, inputs, cfg);
  REQUIRE(r1.loss_history.size() == 4);
  CHECK(r1.loss_history == r2.loss_history);
  CHECK((m1.flatten().array() == m2.flatten().array()).all());
  CHECK(r1.best_epoch == r2.best_epoch);

  LstmModel frozen = cyclesync::make_model(sizes(3, 3, 2), 5);
  const Vector before = frozen.flatten();
  TrainConfig zero_lr = cfg;
  zero_lr.epochs = 1;
  zero_lr.learning_rate = 0.0;
  cyclesync::train(frozen, inputs, zero_lr);
  CHECK((frozen.flatten().array() == before.array()).all());
}

TEST_CASE("best-epoch parameters are restored and tracked") {
  std::mt19937_64 rng(29);
  const std::vector<ModelInput> inputs = random_inputs(rng, 8, 6);
  TrainConfig cfg;
  cfg.epochs = 6;
  LstmModel m = cyclesync::make_model(sizes(3, 3, 2), 1);
  const auto result = cyclesync::train(m, inputs, cfg);
  REQUIRE(result.best_epoch >= 0);
  REQUIRE(result.best_epoch < 6);
  CHECK(result.best_rmse ==
        result.loss_history[static_cast<std::size_t>(result.best_epoch)]);
  for (double h : result.loss_history) CHECK(result.best_rmse <= h);

  // The restored parameters actually reproduce the best RMSE.
  std::vector<double> preds, truths;
  for (const ModelInput& in : inputs) {
    preds.push_back(cyclesync::predict(m, in));
    truths.push_back(in.capacity_ah);
  }
  CHECK(cyclesync::loss_rmse(preds, truths) ==
        doctest::Approx(result.best_rmse).epsilon(1e-12));
}

TEST_CASE("training on synchronized synthetic cycles reduces the error") {
  cyclesync::SynthConfig synth;
  synth.cycles = 60;
  synth.base_length = 50;
  synth.fade_rate = 0.01;
  const cyclesync::BatteryDataset ds = cyclesync::generate_synthetic(synth, 42);
  const auto synced = cyclesync::synchronize_dataset(ds, 1, cyclesync::SyncConfig{});
  std::vector<ModelInput> inputs;
  for (const auto& sc : synced) inputs.push_back(cyclesync::to_model_input(sc));

  TrainConfig cfg;
  cfg.epochs = 100;
  LstmModel m = cyclesync::make_model(sizes(8, 8, 8), 42);
  const auto result = cyclesync::train(m, inputs, cfg);
  REQUIRE(result.loss_history.size() == 100);
  CHECK(result.loss_history.back() < result.loss_history.front());
  CHECK(result.best_rmse < result.loss_history.front());
}

TEST_CASE("training rejects ragged rows and mixed provenance") {
  std::mt19937_64 rng(31);
  std::vector<ModelInput> inputs = random_inputs(rng, 3, 6);
  inputs[1].features = random_features(rng, 7);
  LstmModel m = cyclesync::make_model(sizes(3, 3, 2), 1);
  TrainConfig cfg;
  cfg.epochs = 1;
  CHECK_THROWS_AS(cyclesync::train(m, inputs, cfg), cyclesync::Error);

  std::vector<ModelInput> mixed = random_inputs(rng, 3, 6);
  mixed[2].provenance = cyclesync::Provenance::truncated_raw;
  CHECK_THROWS_AS(cyclesync::train(m, mixed, cfg), cyclesync::Error);
}

TEST_CASE("a diverging forward pass names the epoch and cycle") {
  std::mt19937_64 rng(37);
  std::vector<ModelInput> inputs = random_inputs(rng, 2, 4);
  LstmModel m = cyclesync::make_model(sizes(3, 3, 2), 1);
  m.unflatten(Vector::Constant(m.parameter_count(), 1e200));
  TrainConfig cfg;
  cfg.epochs = 1;
  try {
    cyclesync::train(m, inputs, cfg);
    FAIL("expected divergence");
  } catch (const cyclesync::Error& e) {
    CHECK(e.code() == cyclesync::errc::non_finite_activation);
    CHECK(std::string(e.what()).find("epoch 0") != std::string::npos);
    CHECK(std::string(e.what()).find("cycle") != std::string::npos);
  }
}
