#include "casar/pipeline.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "casar/error.hpp"

namespace casar {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Fisher-Yates with plain modulo so the order only depends on the engine.
void shuffle_indices(std::vector<Eigen::Index>& idx, std::mt19937_64& rng) {
  for (std::size_t i = idx.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(idx[i - 1], idx[j]);
  }
}

Matrix gather_rows(const RowMatrix& data, std::span<const Eigen::Index> rows) {
  Matrix out(static_cast<Eigen::Index>(rows.size()), data.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = data.row(rows[r]);
  }
  return out;
}

void check_finite_loss(double loss, const char* which, int epoch) {
  if (!std::isfinite(loss)) {
    throw NumericError(std::string(which) + " training diverged at epoch " +
                       std::to_string(epoch));
  }
}

// Runs the shared minibatch loop; `step` returns the batch loss and applies
// one optimizer update.
template <typename Step>
TrainingHistory run_epochs(Eigen::Index samples, int batch_size, const LrSchedule& schedule,
                           std::uint64_t seed, const char* which, Step&& step) {
  TrainingHistory history;
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(samples));
  for (Eigen::Index i = 0; i < samples; ++i) order[static_cast<std::size_t>(i)] = i;
  const auto bs = static_cast<std::size_t>(batch_size);
  for (int epoch = 0; epoch < schedule.total_epochs; ++epoch) {
    shuffle_indices(order, rng);
    const double lr = lr_at(schedule, epoch);
    double weighted = 0.0;
    for (std::size_t start = 0; start < order.size(); start += bs) {
      const std::size_t n = std::min(bs, order.size() - start);
      const std::span<const Eigen::Index> rows(order.data() + start, n);
      weighted += step(rows, lr) * static_cast<double>(n);
    }
    const double loss = weighted / static_cast<double>(samples);
    check_finite_loss(loss, which, epoch);
    history.epoch_loss.push_back(loss);
  }
  return history;
}

}  // namespace

ActionClip prepare_clip(const ActionClip& clip, const DatasetConfig& config) {
  return config.center_per_clip ? center_clip(clip) : clip;
}

std::vector<ContactRecord> derive_contact_records(std::span<const ActionClip> clips,
                                                  const MeshLibrary& meshes,
                                                  const DatasetConfig& config) {
  config.validate();
  std::vector<ContactRecord> out;
  for (const ActionClip& clip : clips) {
    if (!clip.mesh_id) {
      throw ValidationError("clip '" + clip.clip_id + "' has no mesh_id to derive contacts from");
    }
    const auto it = meshes.find(*clip.mesh_id);
    if (it == meshes.end()) {
      throw IoError("mesh '" + *clip.mesh_id + "' referenced by clip '" + clip.clip_id +
                    "' was not found");
    }
    const ObjectMesh& mesh = it->second;
    mesh.validate();
    for (std::size_t f = 0; f < clip.frames.size(); ++f) {
      const FrameSample& frame = clip.frames[f];
      const VertexIndex index(transform_points(frame.object.world_from_canonical, mesh.vertices));
      out.push_back({clip.clip_id, f,
                     label_contact_map(frame.hand.joints(), index, config.thresholds,
                                       config.joint_count())});
    }
  }
  return out;
}

std::vector<ContactSample> derive_contact_dataset(std::span<const ActionClip> clips,
                                                  const MeshLibrary& meshes,
                                                  const DatasetConfig& config) {
  const auto records = derive_contact_records(clips, meshes, config);
  std::vector<ContactSample> out;
  out.reserve(records.size());
  std::size_t r = 0;
  for (const ActionClip& clip : clips) {
    const ActionClip prepared = prepare_clip(clip, config);
    for (const FrameSample& frame : prepared.frames) out.push_back({frame, records[r++].map});
  }
  return out;
}

ContactTraining train_contact_module(std::span<const ContactSample> samples,
                                     const DatasetConfig& dataset,
                                     const ContactModuleConfig& config) {
  dataset.validate();
  config.validate();
  if (samples.empty()) throw ValidationError("contact training needs at least one sample");
  const auto n = static_cast<Eigen::Index>(samples.size());
  const auto in_dim = static_cast<Eigen::Index>(dataset.frame_dim());
  const auto out_dim = static_cast<Eigen::Index>(dataset.contact_dim());
  RowMatrix x(n, in_dim);
  RowMatrix y(n, out_dim);
  for (Eigen::Index i = 0; i < n; ++i) {
    const ContactSample& s = samples[static_cast<std::size_t>(i)];
    const auto v = encode_frame(s.frame, dataset);
    const auto t = s.target.as_target();
    if (static_cast<Eigen::Index>(t.size()) != out_dim) {
      throw ShapeError("contact sample " + std::to_string(i) + " target width " +
                       std::to_string(t.size()) + " does not match " + std::to_string(out_dim));
    }
    x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), in_dim);
    y.row(i) = Eigen::Map<const Eigen::RowVectorXd>(t.data(), out_dim);
  }

  const std::vector<Eigen::Index> dims = {in_dim, config.hidden_width, config.hidden_width,
                                          out_dim};
  ContactTraining result;
  result.module.model = init_model(dims, config.seed, Activation::sigmoid);
  AdamState adam = make_adam_state(result.module.model);
  MlpModel& model = result.module.model;
  Gradients grads;

  result.history = run_epochs(
      n, config.batch_size, config.schedule(), config.seed, "contact",
      [&](std::span<const Eigen::Index> rows, double lr) {
        const Matrix xb = gather_rows(x, rows);
        const Matrix yb = gather_rows(y, rows);
        const ForwardResult fwd = forward(model, xb);
        const LossResult loss = focal_loss(fwd.output, yb, config.focal);
        backward(model, fwd.cache, loss.grad, grads);
        adam_step(model, grads, adam, lr);
        return loss.loss;
      });
  result.module.frozen = true;
  return result;
}

Matrix predict_contact_batch(const TrainedContactModule& module, const Matrix& frames) {
  return predict(module.model, frames);
}

std::vector<double> predict_contact(const TrainedContactModule& module,
                                    std::span<const double> frame_vector) {
  const Matrix row =
      Eigen::Map<const Eigen::RowVectorXd>(frame_vector.data(),
                                           static_cast<Eigen::Index>(frame_vector.size()));
  const Matrix out = predict_contact_batch(module, row);
  return {out.data(), out.data() + out.size()};
}

std::vector<double> action_input(const TrainedContactModule& contact, const ActionClip& clip,
                                 const DatasetConfig& config,
                                 const AugmentationSpec& augmentation) {
  const ActionClip resampled = resample_frames(prepare_clip(clip, config), config.frames_per_clip);
  if (!augmentation.use_contact) return encode_clip(resampled, config);

  const auto frames = static_cast<Eigen::Index>(resampled.frames.size());
  const auto width = static_cast<Eigen::Index>(config.frame_dim());
  Matrix batch(frames, width);
  for (Eigen::Index f = 0; f < frames; ++f) {
    const auto v = encode_frame(resampled.frames[static_cast<std::size_t>(f)], config);
    batch.row(f) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), width);
  }
  const Matrix probs = predict_contact_batch(contact, batch);
  const auto half = static_cast<Eigen::Index>(config.joint_count());
  if (probs.cols() != 2 * half) {
    throw ShapeError("contact module output width " + std::to_string(probs.cols()) +
                     " does not match " + std::to_string(2 * half));
  }
  std::vector<std::vector<double>> per_frame(static_cast<std::size_t>(frames));
  for (Eigen::Index f = 0; f < frames; ++f) {
    auto& v = per_frame[static_cast<std::size_t>(f)];
    v.resize(static_cast<std::size_t>(2 * half));
    for (Eigen::Index k = 0; k < 2 * half; ++k) {
      double p = probs(f, k);
      if (augmentation.binarize) p = p >= 0.5 ? 1.0 : 0.0;
      if ((k < half && augmentation.mask_contact) || (k >= half && augmentation.mask_distant)) {
        p = 0.0;
      }
      v[static_cast<std::size_t>(k)] = p;
    }
  }
  return encode_clip(resampled, config, per_frame);
}

ActionTraining train_action_module(std::span<const ActionClip> clips,
                                   const TrainedContactModule& contact,
                                   const DatasetConfig& dataset,
                                   const ActionModuleConfig& config) {
  dataset.validate();
  config.validate();
  if (config.lambda > 0.0) {
    throw ValidationError(
        "joint training (lambda > 0) is not supported; train the contact module first and "
        "freeze it (lambda = 0)");
  }
  if (config.augmentation.use_contact && !contact.frozen) {
    throw ValidationError("the contact module must be trained and frozen before action training");
  }
  if (clips.empty()) throw ValidationError("action training needs at least one clip");
  const auto n = static_cast<Eigen::Index>(clips.size());
  const auto width = static_cast<Eigen::Index>(dataset.clip_dim(config.augmentation.use_contact));
  const auto classes = static_cast<Eigen::Index>(dataset.action_class_count);
  RowMatrix x(n, width);
  std::vector<int> labels(clips.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    const ActionClip& clip = clips[static_cast<std::size_t>(i)];
    validate_clip(clip, dataset);
    const auto v = action_input(contact, clip, dataset, config.augmentation);
    if (static_cast<Eigen::Index>(v.size()) != width) {
      throw ShapeError("augmented input width " + std::to_string(v.size()) +
                       " does not match " + std::to_string(width));
    }
    x.row(i) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), width);
    labels[static_cast<std::size_t>(i)] = clip.action_label;
  }

  const std::vector<Eigen::Index> dims = {width, config.hidden_width, config.hidden_width,
                                          classes};
  const Activation out_act =
      config.head == ActionHead::softmax_ce ? Activation::identity : Activation::sigmoid;
  ActionTraining result;
  result.module.head = config.head;
  result.module.augmentation = config.augmentation;
  result.module.model = init_model(dims, config.seed, out_act);
  AdamState adam = make_adam_state(result.module.model);
  MlpModel& model = result.module.model;
  Gradients grads;

  result.history = run_epochs(
      n, config.batch_size, config.schedule(), config.seed, "action",
      [&](std::span<const Eigen::Index> rows, double lr) {
        const Matrix xb = gather_rows(x, rows);
        std::vector<int> yb(rows.size());
        for (std::size_t r = 0; r < rows.size(); ++r) {
          yb[r] = labels[static_cast<std::size_t>(rows[r])];
        }
        const ForwardResult fwd = forward(model, xb);
        const LossResult loss = config.head == ActionHead::softmax_ce
                                    ? softmax_action_loss(fwd.output, yb)
                                    : action_loss(fwd.output, yb);
        backward(model, fwd.cache, loss.grad, grads);
        adam_step(model, grads, adam, lr);
        return loss.loss;
      });
  return result;
}

void check_module_dims(const TrainedContactModule& contact, const TrainedActionModule& action,
                       const DatasetConfig& config) {
  const bool augmented = action.augmentation.use_contact;
  if (augmented) {
    const auto d = static_cast<Eigen::Index>(config.frame_dim());
    const auto c = static_cast<Eigen::Index>(config.contact_dim());
    if (contact.model.input_dim() != d || contact.model.output_dim() != c) {
      throw ShapeError("contact module widths " + std::to_string(contact.model.input_dim()) +
                       " -> " + std::to_string(contact.model.output_dim()) + " found, expected " +
                       std::to_string(d) + " -> " + std::to_string(c));
    }
  }
  const auto w = static_cast<Eigen::Index>(config.clip_dim(augmented));
  const auto classes = static_cast<Eigen::Index>(config.action_class_count);
  if (action.model.input_dim() != w || action.model.output_dim() != classes) {
    throw ShapeError("action module widths " + std::to_string(action.model.input_dim()) +
                     " -> " + std::to_string(action.model.output_dim()) + " found, expected " +
                     std::to_string(w) + " -> " + std::to_string(classes));
  }
}

int argmax_lowest(std::span<const double> values) {
  if (values.empty()) throw ShapeError("argmax of an empty vector");
  int best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return best;
}

ActionPrediction predict_action(const TrainedContactModule& contact,
                                const TrainedActionModule& action, const ActionClip& clip,
                                const DatasetConfig& config) {
  check_module_dims(contact, action, config);
  const auto v = action_input(contact, clip, config, action.augmentation);
  const Matrix row = Eigen::Map<const Eigen::RowVectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
  Matrix out = predict(action.model, row);
  if (action.head == ActionHead::softmax_ce) out = softmax_rows(out);
  ActionPrediction p;
  p.probabilities.assign(out.data(), out.data() + out.size());
  p.predicted_class = argmax_lowest(p.probabilities);
  return p;
}

}  // namespace casar
