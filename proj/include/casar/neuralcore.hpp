#pragma once

// Dense MLP with rectifier hidden layers, forward/backward passes, focal and
// cross-entropy losses, Adam and a step-decay learning-rate schedule.
// Batches are row-major in the sense of one sample per matrix row.

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace casar {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
// Row-major so x * W^T streams the weights contiguously.
using WeightMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class Activation : std::uint8_t {
  rectifier = 0,
  sigmoid = 1,
  identity = 2,
};

struct DenseLayer {
  WeightMatrix weights;  // out x in
  Vector bias;     // out
  Activation activation = Activation::rectifier;

  Eigen::Index in_dim() const { return weights.cols(); }
  Eigen::Index out_dim() const { return weights.rows(); }
};

struct MlpModel {
  std::vector<DenseLayer> layers;

  std::vector<Eigen::Index> layer_dims() const;
  Eigen::Index input_dim() const;
  Eigen::Index output_dim() const;
  std::size_t parameter_count() const;
  // Throws ShapeError when layers do not chain, NumericError on non-finite values.
  void validate() const;

  friend bool operator==(const MlpModel& a, const MlpModel& b);
};

// Glorot-uniform weights in +-sqrt(6 / (in + out)), zero biases. Hidden layers
// use the rectifier, the last layer `output`.
MlpModel init_model(std::span<const Eigen::Index> layer_dims, std::uint64_t seed,
                    Activation output = Activation::sigmoid);
MlpModel zero_model(std::span<const Eigen::Index> layer_dims,
                    Activation output = Activation::sigmoid);

struct ForwardCache {
  std::vector<Matrix> inputs;          // layer inputs, inputs[0] is the batch
  std::vector<Matrix> pre_activation;  // per layer
  std::vector<Matrix> activations;     // per layer outputs
};

struct ForwardResult {
  Matrix output;
  ForwardCache cache;
};

ForwardResult forward(const MlpModel& model, const Matrix& batch);
// Same outputs without keeping the cache.
Matrix predict(const MlpModel& model, const Matrix& batch);

struct Gradients {
  std::vector<WeightMatrix> weights;
  std::vector<Vector> bias;
};

// Reverse pass from dLoss/dOutput; rectifier derivative at 0 is 0.
Gradients backward(const MlpModel& model, const ForwardCache& cache, const Matrix& grad_output);
// Same, writing into `out` and reusing its storage across calls.
void backward(const MlpModel& model, const ForwardCache& cache, const Matrix& grad_output,
              Gradients& out);

struct FocalParams {
  double alpha = 0.5;
  double gamma = 4.0;

  void validate() const;
};

struct LossResult {
  double loss = 0.0;
  Matrix grad;  // same shape as the prediction
};

inline constexpr double kProbabilityClamp = 1e-7;

// Mean over every element of the batch of
//   -[a q (1-p)^g log p + (1-a)(1-q) p^g log(1-p)], p clamped to [1e-7, 1-1e-7].
LossResult focal_loss(const Matrix& pred, const Matrix& target, const FocalParams& params);

// Mean over the batch of -log p[label]; gradient -1/p[label] / batch at the label.
LossResult action_loss(const Matrix& pred, std::span<const int> labels);

// Softmax cross-entropy on logits; gradient is w.r.t. the logits.
LossResult softmax_action_loss(const Matrix& logits, std::span<const int> labels);
Matrix softmax_rows(const Matrix& logits);

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::int64_t step = 0;
  std::vector<WeightMatrix> m_weights, v_weights;
  std::vector<Vector> m_bias, v_bias;
};

AdamState make_adam_state(const MlpModel& model);
void adam_step(MlpModel& model, const Gradients& grads, AdamState& state, double lr);

struct LrSchedule {
  double base_lr = 1e-4;
  double decay_factor = 0.7;
  int period_epochs = 20;
  int total_epochs = 100;

  void validate() const;
};

// base_lr * decay_factor^floor(epoch / period_epochs)
double lr_at(const LrSchedule& schedule, int epoch);

}  // namespace casar
