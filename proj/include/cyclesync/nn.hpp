#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <span>
#include <vector>

namespace cyclesync {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Gate parameters of one LSTM layer: W_* act on the step input, U_* on the
// previous hidden state, b_* are biases. All four gates share shapes.
struct LstmLayerParams {
  Matrix W_f, W_i, W_c, W_o;  // hidden x input
  Matrix U_f, U_i, U_c, U_o;  // hidden x hidden
  Vector b_f, b_i, b_c, b_o;  // hidden

  int input_size() const { return static_cast<int>(W_f.cols()); }
  int hidden_size() const { return static_cast<int>(W_f.rows()); }
};

struct LstmState {
  Vector h;  // hidden output
  Vector c;  // cell state
};

struct DenseParams {
  Matrix W;
  Vector b;
};

struct ModelSizes {
  int input = 3;
  int hidden1 = 200;
  int hidden2 = 300;
  int dense = 100;
};

// Two stacked LSTM layers, a ReLU dense layer, and a scalar linear head.
struct LstmModel {
  LstmLayerParams layer1;
  LstmLayerParams layer2;
  DenseParams dense;  // dense x hidden2, ReLU
  DenseParams head;   // 1 x dense, linear

  ModelSizes sizes() const;
  Eigen::Index parameter_count() const;
  Vector flatten() const;
  void unflatten(const Vector& theta);
};

// Parameter-shaped gradient container.
struct ModelGrads {
  LstmLayerParams layer1;
  LstmLayerParams layer2;
  DenseParams dense;
  DenseParams head;

  Vector flatten() const;
};

// Visit every tensor of a model-shaped struct in the fixed flattening
// order (layer1 gates f,i,c,o as W,U,b; layer2 likewise; dense; head).
template <typename ModelLike, typename Fn>
void for_each_tensor(ModelLike&& m, Fn&& fn) {
  auto layer = [&fn](auto&& l) {
    fn(l.W_f); fn(l.U_f); fn(l.b_f);
    fn(l.W_i); fn(l.U_i); fn(l.b_i);
    fn(l.W_c); fn(l.U_c); fn(l.b_c);
    fn(l.W_o); fn(l.U_o); fn(l.b_o);
  };
  layer(m.layer1);
  layer(m.layer2);
  fn(m.dense.W);
  fn(m.dense.b);
  fn(m.head.W);
  fn(m.head.b);
}

// Glorot-uniform weights, zero biases except the forget gate's at +1.
LstmModel make_model(const ModelSizes& sizes, std::uint64_t seed);

ModelGrads zeros_like(const LstmModel& model);

// One step of the gate equations: f,i = sigmoid gates, candidate = tanh,
// c_t = f*c + i*candidate, h_t = o * tanh(c_t).
LstmState lstm_cell_forward(const LstmLayerParams& params, const Vector& x,
                            const LstmState& prev);

// Run both layers over all rows of `features` (one row per time step,
// zero initial states), then dense+ReLU and the linear head on the final
// hidden state. Throws NonFiniteActivation if the output diverged.
double forward(const LstmModel& model, const Matrix& features);

double loss_rmse(std::span<const double> predictions,
                 std::span<const double> targets);

// Per-step activation record kept by the cached forward pass.
struct LayerCache {
  std::vector<Vector> x, h_prev, c_prev;
  std::vector<Vector> f, i, g, o, c, tanh_c;
};

struct ForwardCache {
  LayerCache l1, l2;
  Vector dense_pre;  // z = W h + b
  Vector dense_act;  // relu(z)
  double prediction = 0.0;
};

double forward_cached(const LstmModel& model, const Matrix& features,
                      ForwardCache& cache);

// Backpropagate d(loss)/d(prediction) through head, dense and both LSTM
// layers, accumulating into `grads`.
void backward_from_output(const LstmModel& model, const ForwardCache& cache,
                          double output_grad, ModelGrads& grads);

// Gradient of the root-mean-squared error over a batch of (features,
// target) pairs. Zero error yields zero gradients.
ModelGrads backward(const LstmModel& model, std::span<const Matrix> features,
                    std::span<const double> targets);

// Scale the gradient so its global L2 norm is at most max_norm
// (max_norm <= 0 disables). Returns the pre-clip norm.
double clip_gradients(Vector& flat_grads, double max_norm);

}  // namespace cyclesync
