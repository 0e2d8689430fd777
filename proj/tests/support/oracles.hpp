#pragma once

// Independent reference implementations used only by the tests.

#include <cmath>
#include <limits>
#include <random>
#include <span>
#include <vector>

#include "casar/datamodel.hpp"
#include "casar/geometry.hpp"
#include "casar/neuralcore.hpp"

namespace oracle {

inline double brute_nearest(std::span<const casar::Point3> points, const casar::Point3& q) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    const double dx = p.x - q.x, dy = p.y - q.y, dz = p.z - q.z;
    best = std::min(best, dx * dx + dy * dy + dz * dz);
  }
  return std::sqrt(best);
}

inline casar::ContactMap brute_contact_map(std::span<const casar::Point3> vertices,
                                           std::span<const casar::Point3> joints,
                                           const casar::ContactThresholds& t) {
  casar::ContactMap m;
  for (const auto& j : joints) {
    const double d = brute_nearest(vertices, j);
    m.contact.push_back(d < t.eta_c ? 1 : 0);
    m.distant.push_back(d > t.eta_d ? 1 : 0);
  }
  return m;
}

// Row-by-row, element-by-element evaluation with explicit loops.
inline std::vector<double> naive_forward(const casar::MlpModel& model, std::vector<double> x) {
  for (const auto& layer : model.layers) {
    std::vector<double> y(static_cast<std::size_t>(layer.weights.rows()));
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r) {
      double s = layer.bias(r);
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c) {
        s += layer.weights(r, c) * x[static_cast<std::size_t>(c)];
      }
      switch (layer.activation) {
        case casar::Activation::rectifier: s = s > 0.0 ? s : 0.0; break;
        case casar::Activation::sigmoid: s = 1.0 / (1.0 + std::exp(-s)); break;
        case casar::Activation::identity: break;
      }
      y[static_cast<std::size_t>(r)] = s;
    }
    x = std::move(y);
  }
  return x;
}

// Inverse of encode_frame: [left | right | 21 pose points | one-hot].
inline casar::FrameSample decode_frame(std::span<const double> v,
                                       const casar::DatasetConfig& config) {
  casar::FrameSample f;
  std::size_t k = 0;
  auto take = [&] {
    casar::Point3 p{v[k], v[k + 1], v[k + 2]};
    k += 3;
    return p;
  };
  const auto j = static_cast<std::size_t>(config.joints_per_hand);
  if (config.hands == 2) {
    for (std::size_t i = 0; i < j; ++i) f.hand.left.push_back(take());
  }
  for (std::size_t i = 0; i < j; ++i) f.hand.right.push_back(take());
  for (auto& p : f.object.pose_points) p = take();
  int label = -1;
  for (int c = 0; c < config.object_class_count; ++c) {
    if (v[k + static_cast<std::size_t>(c)] == 1.0) label = c;
  }
  f.object.label = label;
  return f;
}

inline casar::Point3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  for (;;) {
    casar::Point3 p{n(rng), n(rng), n(rng)};
    const double len = casar::norm(p);
    if (len > 1e-6) return (1.0 / len) * p;
  }
}

inline casar::RigidTransform random_rigid(std::mt19937_64& rng, double max_shift = 1.0) {
  std::uniform_real_distribution<double> angle(-3.14159, 3.14159);
  std::uniform_real_distribution<double> shift(-max_shift, max_shift);
  return casar::RigidTransform::axis_angle(random_unit(rng), angle(rng),
                                           {shift(rng), shift(rng), shift(rng)});
}

inline std::vector<casar::Point3> random_points(std::mt19937_64& rng, std::size_t n,
                                                double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<casar::Point3> out(n);
  for (auto& p : out) p = {u(rng), u(rng), u(rng)};
  return out;
}

// Central differences of `loss` w.r.t. every weight and bias of `model`.
template <typename Loss>
casar::Gradients finite_difference(casar::MlpModel model, Loss&& loss, double step = 1e-5) {
  casar::Gradients g;
  for (auto& layer : model.layers) {
    casar::WeightMatrix gw(layer.weights.rows(), layer.weights.cols());
    for (Eigen::Index r = 0; r < gw.rows(); ++r) {
      for (Eigen::Index c = 0; c < gw.cols(); ++c) {
        const double w = layer.weights(r, c);
        layer.weights(r, c) = w + step;
        const double up = loss(model);
        layer.weights(r, c) = w - step;
        const double down = loss(model);
        layer.weights(r, c) = w;
        gw(r, c) = (up - down) / (2 * step);
      }
    }
    casar::Vector gb(layer.bias.size());
    for (Eigen::Index r = 0; r < gb.size(); ++r) {
      const double b = layer.bias(r);
      layer.bias(r) = b + step;
      const double up = loss(model);
      layer.bias(r) = b - step;
      const double down = loss(model);
      layer.bias(r) = b;
      gb(r) = (up - down) / (2 * step);
    }
    g.weights.push_back(std::move(gw));
    g.bias.push_back(std::move(gb));
  }
  return g;
}

// Largest |a - n| / max(|a|, |n|, floor) over all parameters.
inline double max_relative_error(const casar::Gradients& analytic,
                                 const casar::Gradients& numeric, double floor = 1e-8) {
  double worst = 0.0;
  auto rel = [&](double a, double n) {
    const double scale = std::max({std::abs(a), std::abs(n), floor});
    return std::abs(a - n) / scale;
  };
  for (std::size_t k = 0; k < analytic.weights.size(); ++k) {
    for (Eigen::Index i = 0; i < analytic.weights[k].size(); ++i) {
      worst = std::max(worst, rel(analytic.weights[k].data()[i], numeric.weights[k].data()[i]));
    }
    for (Eigen::Index i = 0; i < analytic.bias[k].size(); ++i) {
      worst = std::max(worst, rel(analytic.bias[k](i), numeric.bias[k](i)));
    }
  }
  return worst;
}

}  // namespace oracle
