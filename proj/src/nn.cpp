#include "cyclesync/nn.hpp"

#include <cmath>
#include <string>

#include "cyclesync/errors.hpp"
#include "cyclesync/rng.hpp"

namespace cyclesync {

namespace {

inline Vector sigmoid(const Vector& v) {
  return 1.0 / (1.0 + (-v.array()).exp());
}

void check_layer_input(const LstmLayerParams& params, const Vector& x,
                       const LstmState& prev) {
  if (x.size() != params.input_size()) {
    fail(errc::shape_mismatch,
         "cell input has size " + std::to_string(x.size()) + ", expected " +
             std::to_string(params.input_size()));
  }
  if (prev.h.size() != params.hidden_size() ||
      prev.c.size() != params.hidden_size()) {
    fail(errc::shape_mismatch,
         "cell state has size " + std::to_string(prev.h.size()) + "/" +
             std::to_string(prev.c.size()) + ", expected " +
             std::to_string(params.hidden_size()));
  }
}

LstmLayerParams make_layer(int input, int hidden, std::mt19937_64& rng) {
  auto glorot = [&rng](int rows, int cols) {
    Matrix m(rows, cols);
    const double bound = std::sqrt(6.0 / (rows + cols));
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      m.data()[k] = uniform(rng, -bound, bound);
    }
    return m;
  };
  LstmLayerParams layer;
  layer.W_f = glorot(hidden, input);
  layer.U_f = glorot(hidden, hidden);
  layer.b_f = Vector::Ones(hidden);  // open forget gate at start of training
  layer.W_i = glorot(hidden, input);
  layer.U_i = glorot(hidden, hidden);
  layer.b_i = Vector::Zero(hidden);
  layer.W_c = glorot(hidden, input);
  layer.U_c = glorot(hidden, hidden);
  layer.b_c = Vector::Zero(hidden);
  layer.W_o = glorot(hidden, input);
  layer.U_o = glorot(hidden, hidden);
  layer.b_o = Vector::Zero(hidden);
  return layer;
}

LstmLayerParams zero_layer(int input, int hidden) {
  LstmLayerParams layer;
  layer.W_f = layer.W_i = layer.W_c = layer.W_o = Matrix::Zero(hidden, input);
  layer.U_f = layer.U_i = layer.U_c = layer.U_o = Matrix::Zero(hidden, hidden);
  layer.b_f = layer.b_i = layer.b_c = layer.b_o = Vector::Zero(hidden);
  return layer;
}

// One layer's slice of the backward pass. external_dh, when non-null, is
// indexed per step; tail_dh applies at the last step only.
void backward_layer(const LstmLayerParams& params, const LayerCache& cache,
                    const std::vector<Vector>* external_dh,
                    const Vector* tail_dh, LstmLayerParams& grads,
                    std::vector<Vector>* dx_out) {
  const std::size_t steps = cache.x.size();
  const int hidden = params.hidden_size();
  Vector dh_next = Vector::Zero(hidden);
  Vector dc_next = Vector::Zero(hidden);
  if (dx_out != nullptr) dx_out->assign(steps, Vector());

  for (std::size_t t = steps; t-- > 0;) {
    Vector dh = dh_next;
    if (external_dh != nullptr) dh += (*external_dh)[t];
    if (tail_dh != nullptr && t == steps - 1) dh += *tail_dh;

    const Vector& f = cache.f[t];
    const Vector& i = cache.i[t];
    const Vector& g = cache.g[t];
    const Vector& o = cache.o[t];
    const Vector& tanh_c = cache.tanh_c[t];

    const Vector da_o =
        (dh.array() * tanh_c.array() * o.array() * (1.0 - o.array())).matrix();
    const Vector dc =
        (dh.array() * o.array() * (1.0 - tanh_c.array().square())).matrix() +
        dc_next;
    const Vector da_f =
        (dc.array() * cache.c_prev[t].array() * f.array() * (1.0 - f.array()))
            .matrix();
    const Vector da_i =
        (dc.array() * g.array() * i.array() * (1.0 - i.array())).matrix();
    const Vector da_g =
        (dc.array() * i.array() * (1.0 - g.array().square())).matrix();

    const Vector& x = cache.x[t];
    const Vector& h_prev = cache.h_prev[t];
    grads.W_f.noalias() += da_f * x.transpose();
    grads.U_f.noalias() += da_f * h_prev.transpose();
    grads.b_f += da_f;
    grads.W_i.noalias() += da_i * x.transpose();
    grads.U_i.noalias() += da_i * h_prev.transpose();
    grads.b_i += da_i;
    grads.W_c.noalias() += da_g * x.transpose();
    grads.U_c.noalias() += da_g * h_prev.transpose();
    grads.b_c += da_g;
    grads.W_o.noalias() += da_o * x.transpose();
    grads.U_o.noalias() += da_o * h_prev.transpose();
    grads.b_o += da_o;

    if (dx_out != nullptr) {
      (*dx_out)[t] = params.W_f.transpose() * da_f +
                     params.W_i.transpose() * da_i +
                     params.W_c.transpose() * da_g +
                     params.W_o.transpose() * da_o;
    }
    dh_next = params.U_f.transpose() * da_f + params.U_i.transpose() * da_i +
              params.U_c.transpose() * da_g + params.U_o.transpose() * da_o;
    dc_next = (dc.array() * f.array()).matrix();
  }
}

LstmState cell_step(const LstmLayerParams& params, const Vector& x,
                    const LstmState& prev, LayerCache* cache) {
  const Vector f = sigmoid(params.W_f * x + params.U_f * prev.h + params.b_f);
  const Vector i = sigmoid(params.W_i * x + params.U_i * prev.h + params.b_i);
  const Vector g =
      (params.W_c * x + params.U_c * prev.h + params.b_c).array().tanh();
  const Vector o = sigmoid(params.W_o * x + params.U_o * prev.h + params.b_o);
  LstmState next;
  next.c = (f.array() * prev.c.array() + i.array() * g.array()).matrix();
  const Vector tanh_c = next.c.array().tanh().matrix();
  next.h = (o.array() * tanh_c.array()).matrix();
  if (cache != nullptr) {
    cache->x.push_back(x);
    cache->h_prev.push_back(prev.h);
    cache->c_prev.push_back(prev.c);
    cache->f.push_back(f);
    cache->i.push_back(i);
    cache->g.push_back(g);
    cache->o.push_back(o);
    cache->c.push_back(next.c);
    cache->tanh_c.push_back(tanh_c);
  }
  return next;
}

double run_forward(const LstmModel& model, const Matrix& features,
                   ForwardCache* cache) {
  if (features.cols() != model.layer1.input_size()) {
    fail(errc::shape_mismatch,
         "feature matrix has " + std::to_string(features.cols()) +
             " columns, model expects " +
             std::to_string(model.layer1.input_size()));
  }
  if (features.rows() < 1) {
    fail(errc::shape_mismatch, "feature matrix has no rows");
  }

  LstmState s1{Vector::Zero(model.layer1.hidden_size()),
               Vector::Zero(model.layer1.hidden_size())};
  LstmState s2{Vector::Zero(model.layer2.hidden_size()),
               Vector::Zero(model.layer2.hidden_size())};
  for (Eigen::Index t = 0; t < features.rows(); ++t) {
    const Vector x = features.row(t).transpose();
    s1 = cell_step(model.layer1, x, s1, cache != nullptr ? &cache->l1 : nullptr);
    s2 = cell_step(model.layer2, s1.h, s2,
                   cache != nullptr ? &cache->l2 : nullptr);
  }

  const Vector z = model.dense.W * s2.h + model.dense.b;
  const Vector a = z.cwiseMax(0.0);
  const double y = (model.head.W * a)(0) + model.head.b(0);
  if (!std::isfinite(y)) {
    fail(errc::non_finite_activation, "network output is not finite");
  }
  if (cache != nullptr) {
    cache->dense_pre = z;
    cache->dense_act = a;
    cache->prediction = y;
  }
  return y;
}

}  // namespace

ModelSizes LstmModel::sizes() const {
  ModelSizes s;
  s.input = layer1.input_size();
  s.hidden1 = layer1.hidden_size();
  s.hidden2 = layer2.hidden_size();
  s.dense = static_cast<int>(dense.W.rows());
  return s;
}

Eigen::Index LstmModel::parameter_count() const {
  Eigen::Index n = 0;
  for_each_tensor(*this, [&n](const auto& tensor) { n += tensor.size(); });
  return n;
}

namespace {

template <typename ModelLike>
Vector flatten_tensors(const ModelLike& m, Eigen::Index count) {
  Vector theta(count);
  Eigen::Index at = 0;
  for_each_tensor(m, [&](const auto& tensor) {
    for (Eigen::Index k = 0; k < tensor.size(); ++k) {
      theta(at++) = tensor.data()[k];
    }
  });
  return theta;
}

}  // namespace

Vector LstmModel::flatten() const {
  return flatten_tensors(*this, parameter_count());
}

Vector ModelGrads::flatten() const {
  Eigen::Index n = 0;
  for_each_tensor(*this, [&n](const auto& tensor) { n += tensor.size(); });
  return flatten_tensors(*this, n);
}

void LstmModel::unflatten(const Vector& theta) {
  if (theta.size() != parameter_count()) {
    fail(errc::shape_mismatch,
         "flat parameter vector has size " + std::to_string(theta.size()) +
             ", model holds " + std::to_string(parameter_count()));
  }
  Eigen::Index at = 0;
  for_each_tensor(*this, [&](auto& tensor) {
    for (Eigen::Index k = 0; k < tensor.size(); ++k) {
      tensor.data()[k] = theta(at++);
    }
  });
}

LstmModel make_model(const ModelSizes& sizes, std::uint64_t seed) {
  if (sizes.input < 1 || sizes.hidden1 < 1 || sizes.hidden2 < 1 ||
      sizes.dense < 1) {
    fail(errc::invalid_config, "model sizes must all be >= 1");
  }
  std::mt19937_64 rng(seed);
  auto glorot = [&rng](int rows, int cols) {
    Matrix m(rows, cols);
    const double bound = std::sqrt(6.0 / (rows + cols));
    for (Eigen::Index k = 0; k < m.size(); ++k) {
      m.data()[k] = uniform(rng, -bound, bound);
    }
    return m;
  };

  LstmModel model;
  model.layer1 = make_layer(sizes.input, sizes.hidden1, rng);
  model.layer2 = make_layer(sizes.hidden1, sizes.hidden2, rng);
  model.dense.W = glorot(sizes.dense, sizes.hidden2);
  model.dense.b = Vector::Zero(sizes.dense);
  model.head.W = glorot(1, sizes.dense);
  model.head.b = Vector::Zero(1);
  return model;
}

ModelGrads zeros_like(const LstmModel& model) {
  const ModelSizes s = model.sizes();
  ModelGrads g;
  g.layer1 = zero_layer(s.input, s.hidden1);
  g.layer2 = zero_layer(s.hidden1, s.hidden2);
  g.dense.W = Matrix::Zero(s.dense, s.hidden2);
  g.dense.b = Vector::Zero(s.dense);
  g.head.W = Matrix::Zero(1, s.dense);
  g.head.b = Vector::Zero(1);
  return g;
}

LstmState lstm_cell_forward(const LstmLayerParams& params, const Vector& x,
                            const LstmState& prev) {
  check_layer_input(params, x, prev);
  return cell_step(params, x, prev, nullptr);
}

double forward(const LstmModel& model, const Matrix& features) {
  return run_forward(model, features, nullptr);
}

double forward_cached(const LstmModel& model, const Matrix& features,
                      ForwardCache& cache) {
  cache = ForwardCache{};
  return run_forward(model, features, &cache);
}

double loss_rmse(std::span<const double> predictions,
                 std::span<const double> targets) {
  if (predictions.empty()) {
    fail(errc::empty_input, "no predictions to score");
  }
  if (predictions.size() != targets.size()) {
    fail(errc::length_mismatch,
         std::to_string(predictions.size()) + " predictions vs " +
             std::to_string(targets.size()) + " targets");
  }
  double sum_sq = 0.0;
  for (std::size_t k = 0; k < predictions.size(); ++k) {
    const double e = predictions[k] - targets[k];
    sum_sq += e * e;
  }
  return std::sqrt(sum_sq / static_cast<double>(predictions.size()));
}

void backward_from_output(const LstmModel& model, const ForwardCache& cache,
                          double output_grad, ModelGrads& grads) {
  // Head: y = W a + b.
  grads.head.b(0) += output_grad;
  grads.head.W.row(0) += output_grad * cache.dense_act.transpose();
  Vector da = model.head.W.transpose() * output_grad;

  // Dense ReLU. Its input is the final hidden state of layer 2.
  const Vector h2_last =
      (cache.l2.o.back().array() * cache.l2.tanh_c.back().array()).matrix();
  const Vector dz =
      (da.array() * (cache.dense_pre.array() > 0.0).cast<double>()).matrix();
  grads.dense.b += dz;
  grads.dense.W.noalias() += dz * h2_last.transpose();
  Vector dh2 = model.dense.W.transpose() * dz;

  std::vector<Vector> dx2;
  backward_layer(model.layer2, cache.l2, nullptr, &dh2, grads.layer2, &dx2);
  backward_layer(model.layer1, cache.l1, &dx2, nullptr, grads.layer1, nullptr);
}

ModelGrads backward(const LstmModel& model, std::span<const Matrix> features,
                    std::span<const double> targets) {
  if (features.size() != targets.size()) {
    fail(errc::length_mismatch,
         std::to_string(features.size()) + " inputs vs " +
             std::to_string(targets.size()) + " targets");
  }
  if (features.empty()) {
    fail(errc::empty_input, "empty batch");
  }

  std::vector<double> preds(features.size());
  for (std::size_t k = 0; k < features.size(); ++k) {
    preds[k] = forward(model, features[k]);
  }
  const double rmse = loss_rmse(preds, targets);

  ModelGrads grads = zeros_like(model);
  if (rmse == 0.0) return grads;  // flat at the optimum by convention

  const double d = static_cast<double>(features.size());
  for (std::size_t k = 0; k < features.size(); ++k) {
    ForwardCache cache;
    forward_cached(model, features[k], cache);
    const double dLdy = (preds[k] - targets[k]) / (d * rmse);
    backward_from_output(model, cache, dLdy, grads);
  }
  return grads;
}

double clip_gradients(Vector& flat_grads, double max_norm) {
  const double norm = flat_grads.norm();
  if (max_norm > 0.0 && norm > max_norm) {
    flat_grads *= max_norm / norm;
  }
  return norm;
}

}  // namespace cyclesync
