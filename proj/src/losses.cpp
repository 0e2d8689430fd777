#include <algorithm>
#include <cmath>
#include <string>

#include "casar/error.hpp"
#include "casar/neuralcore.hpp"

namespace casar {

void FocalParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ValidationError("focal alpha must be in (0, 1)");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw ValidationError("focal gamma must be >= 0");
  }
}

namespace {

double clamp_prob(double p) {
  return std::clamp(p, kProbabilityClamp, 1.0 - kProbabilityClamp);
}

// x^e for x > 0 with the convention x^0 == 1 and 0 * x^(e-1) == 0 when e == 0.
double power(double x, double e) { return e == 0.0 ? 1.0 : std::pow(x, e); }

void check_labels(const Matrix& pred, std::span<const int> labels) {
  if (static_cast<Eigen::Index>(labels.size()) != pred.rows()) {
    throw ShapeError("label count " + std::to_string(labels.size()) +
                     " does not match batch size " + std::to_string(pred.rows()));
  }
  if (pred.rows() == 0) throw ShapeError("empty batch");
  for (int y : labels) {
    if (y < 0 || y >= pred.cols()) {
      throw ValidationError("action label " + std::to_string(y) + " outside [0, " +
                            std::to_string(pred.cols()) + ")");
    }
  }
}

}  // namespace

LossResult focal_loss(const Matrix& pred, const Matrix& target, const FocalParams& params) {
  params.validate();
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw ShapeError("focal loss prediction and target shapes differ");
  }
  if (pred.size() == 0) throw ShapeError("focal loss on an empty batch");
  const double a = params.alpha;
  const double g = params.gamma;
  const double scale = 1.0 / static_cast<double>(pred.size());
  LossResult r;
  r.grad.resize(pred.rows(), pred.cols());
  double total = 0.0;
  for (Eigen::Index j = 0; j < pred.cols(); ++j) {
    for (Eigen::Index i = 0; i < pred.rows(); ++i) {
      const double p = clamp_prob(pred(i, j));
      const double q = target(i, j);
      const double lp = std::log(p);
      const double lq = std::log(1.0 - p);
      const double pos = a * q * power(1.0 - p, g) * lp;
      const double neg = (1.0 - a) * (1.0 - q) * power(p, g) * lq;
      total -= pos + neg;
      const double dpos =
          a * q * ((g == 0.0 ? 0.0 : -g * power(1.0 - p, g - 1.0) * lp) + power(1.0 - p, g) / p);
      const double dneg = (1.0 - a) * (1.0 - q) *
                          ((g == 0.0 ? 0.0 : g * power(p, g - 1.0) * lq) - power(p, g) / (1.0 - p));
      r.grad(i, j) = -(dpos + dneg) * scale;
    }
  }
  r.loss = total * scale;
  return r;
}

LossResult action_loss(const Matrix& pred, std::span<const int> labels) {
  check_labels(pred, labels);
  const double scale = 1.0 / static_cast<double>(pred.rows());
  LossResult r;
  r.grad = Matrix::Zero(pred.rows(), pred.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    const double p = clamp_prob(pred(i, y));
    total -= std::log(p);
    r.grad(i, y) = -scale / p;
  }
  r.loss = total * scale;
  return r;
}

Matrix softmax_rows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double m = logits.row(i).maxCoeff();
    const Eigen::RowVectorXd e = (logits.row(i).array() - m).exp().matrix();
    out.row(i) = e / e.sum();
  }
  return out;
}

LossResult softmax_action_loss(const Matrix& logits, std::span<const int> labels) {
  check_labels(logits, labels);
  const double scale = 1.0 / static_cast<double>(logits.rows());
  const Matrix probs = softmax_rows(logits);
  LossResult r;
  r.grad = probs * scale;
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    total -= std::log(clamp_prob(probs(i, y)));
    r.grad(i, y) -= scale;
  }
  r.loss = total * scale;
  return r;
}

}  // namespace casar
