#include <random>
#include <string>

#include "casar/error.hpp"
#include "casar/neuralcore.hpp"

namespace casar {

std::vector<Eigen::Index> MlpModel::layer_dims() const {
  std::vector<Eigen::Index> dims;
  if (layers.empty()) return dims;
  dims.push_back(layers.front().in_dim());
  for (const DenseLayer& l : layers) dims.push_back(l.out_dim());
  return dims;
}

Eigen::Index MlpModel::input_dim() const {
  return layers.empty() ? 0 : layers.front().in_dim();
}

Eigen::Index MlpModel::output_dim() const {
  return layers.empty() ? 0 : layers.back().out_dim();
}

std::size_t MlpModel::parameter_count() const {
  std::size_t n = 0;
  for (const DenseLayer& l : layers) {
    n += static_cast<std::size_t>(l.weights.size() + l.bias.size());
  }
  return n;
}

void MlpModel::validate() const {
  if (layers.empty()) throw ShapeError("model has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const DenseLayer& l = layers[i];
    if (l.bias.size() != l.out_dim()) {
      throw ShapeError("layer " + std::to_string(i) + " bias length does not match");
    }
    if (i > 0 && l.in_dim() != layers[i - 1].out_dim()) {
      throw ShapeError("layer " + std::to_string(i) + " input width " +
                       std::to_string(l.in_dim()) + " does not chain with " +
                       std::to_string(layers[i - 1].out_dim()));
    }
    if (!l.weights.allFinite() || !l.bias.allFinite()) {
      throw NumericError("layer " + std::to_string(i) + " has non-finite parameters");
    }
  }
}

bool operator==(const MlpModel& a, const MlpModel& b) {
  if (a.layers.size() != b.layers.size()) return false;
  for (std::size_t i = 0; i < a.layers.size(); ++i) {
    const DenseLayer& x = a.layers[i];
    const DenseLayer& y = b.layers[i];
    if (x.activation != y.activation || x.weights.rows() != y.weights.rows() ||
        x.weights.cols() != y.weights.cols() || x.weights != y.weights || x.bias != y.bias) {
      return false;
    }
  }
  return true;
}

namespace {

void check_dims(std::span<const Eigen::Index> dims) {
  if (dims.size() < 2) throw ValidationError("layer_dims needs at least input and output");
  for (Eigen::Index d : dims) {
    if (d <= 0) throw ValidationError("layer_dims entries must be positive");
  }
}

}  // namespace

MlpModel zero_model(std::span<const Eigen::Index> dims, Activation output) {
  check_dims(dims);
  MlpModel model;
  for (std::size_t i = 0; i + 1 < dims.size(); ++i) {
    DenseLayer l;
    l.weights = Matrix::Zero(dims[i + 1], dims[i]);
    l.bias = Vector::Zero(dims[i + 1]);
    l.activation = i + 2 == dims.size() ? output : Activation::rectifier;
    model.layers.push_back(std::move(l));
  }
  return model;
}

MlpModel init_model(std::span<const Eigen::Index> dims, std::uint64_t seed,
                    Activation output) {
  MlpModel model = zero_model(dims, output);
  std::mt19937_64 rng(seed);
  for (DenseLayer& l : model.layers) {
    const double bound = std::sqrt(6.0 / static_cast<double>(l.in_dim() + l.out_dim()));
    std::uniform_real_distribution<double> dist(-bound, bound);
    // Row-major draw order, independent of Eigen's storage order.
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weights.cols(); ++c) l.weights(r, c) = dist(rng);
    }
  }
  return model;
}

namespace {

void activate(Matrix& z, Activation a) {
  switch (a) {
    case Activation::rectifier:
      z = z.cwiseMax(0.0);
      break;
    case Activation::sigmoid:
      z = z.unaryExpr([](double v) { return 1.0 / (1.0 + std::exp(-v)); });
      break;
    case Activation::identity:
      break;
  }
}

void check_input(const MlpModel& model, const Matrix& batch) {
  if (model.layers.empty()) throw ShapeError("model has no layers");
  if (batch.cols() != model.input_dim()) {
    throw ShapeError("input width " + std::to_string(batch.cols()) +
                     " does not match model input " + std::to_string(model.input_dim()));
  }
}

void check_output(const Matrix& out) {
  if (!out.allFinite()) {
    throw NumericError("forward pass produced non-finite outputs (exploding parameters?)");
  }
}

}  // namespace

ForwardResult forward(const MlpModel& model, const Matrix& batch) {
  check_input(model, batch);
  ForwardResult result;
  ForwardCache& cache = result.cache;
  Matrix x = batch;
  for (const DenseLayer& l : model.layers) {
    Matrix z = x * l.weights.transpose();
    z.rowwise() += l.bias.transpose();
    cache.inputs.push_back(std::move(x));
    cache.pre_activation.push_back(z);
    activate(z, l.activation);
    cache.activations.push_back(z);
    x = std::move(z);
  }
  check_output(x);
  result.output = std::move(x);
  return result;
}

Matrix predict(const MlpModel& model, const Matrix& batch) {
  check_input(model, batch);
  Matrix x = batch;
  for (const DenseLayer& l : model.layers) {
    Matrix z = x * l.weights.transpose();
    z.rowwise() += l.bias.transpose();
    activate(z, l.activation);
    x = std::move(z);
  }
  check_output(x);
  return x;
}

Gradients backward(const MlpModel& model, const ForwardCache& cache,
                   const Matrix& grad_output) {
  Gradients g;
  backward(model, cache, grad_output, g);
  return g;
}

void backward(const MlpModel& model, const ForwardCache& cache, const Matrix& grad_output,
              Gradients& g) {
  const std::size_t n = model.layers.size();
  if (cache.inputs.size() != n || cache.activations.size() != n ||
      cache.pre_activation.size() != n) {
    throw ShapeError("forward cache does not match the model depth");
  }
  if (grad_output.rows() != cache.activations.back().rows() ||
      grad_output.cols() != cache.activations.back().cols()) {
    throw ShapeError("output gradient shape does not match the forward pass");
  }
  g.weights.resize(n);
  g.bias.resize(n);
  Matrix delta = grad_output;  // dL/d(layer output)
  for (std::size_t k = n; k-- > 0;) {
    const DenseLayer& l = model.layers[k];
    if (cache.inputs[k].cols() != l.in_dim() ||
        cache.pre_activation[k].cols() != l.out_dim()) {
      throw ShapeError("forward cache does not match layer " + std::to_string(k));
    }
    switch (l.activation) {
      case Activation::rectifier:
        delta = delta.cwiseProduct(
            (cache.pre_activation[k].array() > 0.0).cast<double>().matrix());
        break;
      case Activation::sigmoid: {
        const auto& s = cache.activations[k].array();
        delta = (delta.array() * s * (1.0 - s)).matrix();
        break;
      }
      case Activation::identity:
        break;
    }
    g.weights[k].resize(l.out_dim(), l.in_dim());
    g.weights[k].noalias() = delta.transpose() * cache.inputs[k];
    g.bias[k] = delta.colwise().sum().transpose();
    if (k > 0) delta = delta * l.weights;
  }
}

}  // namespace casar
