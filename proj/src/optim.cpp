#include <cmath>
#include <string>

#include "casar/error.hpp"
#include "casar/neuralcore.hpp"

namespace casar {

AdamState make_adam_state(const MlpModel& model) {
  AdamState s;
  for (const DenseLayer& l : model.layers) {
    s.m_weights.push_back(WeightMatrix::Zero(l.weights.rows(), l.weights.cols()));
    s.v_weights.push_back(WeightMatrix::Zero(l.weights.rows(), l.weights.cols()));
    s.m_bias.push_back(Vector::Zero(l.bias.size()));
    s.v_bias.push_back(Vector::Zero(l.bias.size()));
  }
  return s;
}

namespace {

// One fused pass over the parameter, its gradient and both moments.
void update(double* w, const double* g, double* m, double* v, Eigen::Index size,
            const AdamState& s, double lr, double corr1, double corr2) {
  const double b1 = s.beta1, b2 = s.beta2, eps = s.epsilon;
  for (Eigen::Index i = 0; i < size; ++i) {
    m[i] = b1 * m[i] + (1.0 - b1) * g[i];
    v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
    w[i] -= lr * (m[i] / corr1) / (std::sqrt(v[i] / corr2) + eps);
  }
}

}  // namespace

void adam_step(MlpModel& model, const Gradients& grads, AdamState& state, double lr) {
  const std::size_t n = model.layers.size();
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ValidationError("learning rate must be > 0");
  if (grads.weights.size() != n || grads.bias.size() != n || state.m_weights.size() != n ||
      state.v_weights.size() != n || state.m_bias.size() != n || state.v_bias.size() != n) {
    throw ShapeError("gradients / optimizer state do not match the model depth");
  }
  for (std::size_t k = 0; k < n; ++k) {
    const DenseLayer& l = model.layers[k];
    if (grads.weights[k].rows() != l.weights.rows() ||
        grads.weights[k].cols() != l.weights.cols() || grads.bias[k].size() != l.bias.size() ||
        state.m_weights[k].rows() != l.weights.rows() ||
        state.m_weights[k].cols() != l.weights.cols()) {
      throw ShapeError("gradient shape mismatch at layer " + std::to_string(k));
    }
  }
  ++state.step;
  const double corr1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double corr2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < n; ++k) {
    DenseLayer& l = model.layers[k];
    update(l.weights.data(), grads.weights[k].data(), state.m_weights[k].data(),
           state.v_weights[k].data(), l.weights.size(), state, lr, corr1, corr2);
    update(l.bias.data(), grads.bias[k].data(), state.m_bias[k].data(), state.v_bias[k].data(),
           l.bias.size(), state, lr, corr1, corr2);
  }
}

void LrSchedule::validate() const {
  if (!(base_lr > 0.0) || !std::isfinite(base_lr)) throw ValidationError("base_lr must be > 0");
  if (!(decay_factor > 0.0 && decay_factor <= 1.0)) {
    throw ValidationError("decay_factor must be in (0, 1]");
  }
  if (period_epochs < 1) throw ValidationError("period_epochs must be >= 1");
  if (total_epochs < 1) throw ValidationError("total_epochs must be >= 1");
}

double lr_at(const LrSchedule& schedule, int epoch) {
  schedule.validate();
  if (epoch < 0 || epoch >= schedule.total_epochs) {
    throw ValidationError("epoch " + std::to_string(epoch) + " outside [0, " +
                          std::to_string(schedule.total_epochs) + ")");
  }
  const int steps = epoch / schedule.period_epochs;
  return schedule.base_lr * std::pow(schedule.decay_factor, steps);
}

}  // namespace casar
