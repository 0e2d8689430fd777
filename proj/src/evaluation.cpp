#include "casar/evaluation.hpp"

#include <map>
#include <string>

#include "casar/error.hpp"

namespace casar {

double action_accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.empty()) throw ValidationError("accuracy of an empty prediction set");
  if (predictions.size() != labels.size()) {
    throw ShapeError("prediction and label counts differ");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) hits += predictions[i] == labels[i];
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

ConfusionMatrix::ConfusionMatrix(int classes) : classes_(classes) {
  if (classes < 1) throw ValidationError("confusion matrix needs at least one class");
  counts_.assign(static_cast<std::size_t>(classes) * static_cast<std::size_t>(classes), 0);
}

std::int64_t ConfusionMatrix::at(int truth, int predicted) const {
  return counts_[static_cast<std::size_t>(truth * classes_ + predicted)];
}

void ConfusionMatrix::add(int truth, int predicted) {
  if (truth < 0 || truth >= classes_ || predicted < 0 || predicted >= classes_) {
    throw ValidationError("class index outside [0, " + std::to_string(classes_) + ")");
  }
  ++counts_[static_cast<std::size_t>(truth * classes_ + predicted)];
}

std::int64_t ConfusionMatrix::total() const {
  std::int64_t t = 0;
  for (auto c : counts_) t += c;
  return t;
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t t = 0;
  for (int i = 0; i < classes_; ++i) t += at(i, i);
  return t;
}

std::int64_t ConfusionMatrix::row_sum(int truth) const {
  std::int64_t t = 0;
  for (int j = 0; j < classes_; ++j) t += at(truth, j);
  return t;
}

ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> labels,
                                 int classes) {
  if (predictions.size() != labels.size()) {
    throw ShapeError("prediction and label counts differ");
  }
  ConfusionMatrix m(classes);
  for (std::size_t i = 0; i < predictions.size(); ++i) m.add(labels[i], predictions[i]);
  return m;
}

ContactAccuracyTable contact_accuracy_by_object(std::span<const std::vector<double>> probs,
                                                std::span<const ContactMap> targets,
                                                std::span<const int> object_labels,
                                                double threshold) {
  if (probs.size() != targets.size() || probs.size() != object_labels.size()) {
    throw ShapeError("contact accuracy inputs are not aligned (" + std::to_string(probs.size()) +
                     ", " + std::to_string(targets.size()) + ", " +
                     std::to_string(object_labels.size()) + ")");
  }
  struct Tally {
    std::size_t frames = 0, bits = 0, contact_hits = 0, distant_hits = 0;
  };
  std::map<int, Tally> per_object;
  Tally pooled;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    const ContactMap& t = targets[i];
    const std::size_t joints = t.contact.size();
    if (t.distant.size() != joints || probs[i].size() != 2 * joints) {
      throw ShapeError("frame " + std::to_string(i) + " prediction width " +
                       std::to_string(probs[i].size()) + " does not match target width " +
                       std::to_string(2 * joints));
    }
    std::size_t c_hits = 0, d_hits = 0;
    for (std::size_t k = 0; k < joints; ++k) {
      const std::uint8_t pc = probs[i][k] >= threshold ? 1 : 0;
      const std::uint8_t pd = probs[i][joints + k] >= threshold ? 1 : 0;
      c_hits += pc == t.contact[k];
      d_hits += pd == t.distant[k];
    }
    for (Tally* tally : {&per_object[object_labels[i]], &pooled}) {
      tally->frames += 1;
      tally->bits += joints;
      tally->contact_hits += c_hits;
      tally->distant_hits += d_hits;
    }
  }
  auto row = [](int label, const Tally& t) {
    ContactAccuracyRow r;
    r.object_label = label;
    r.frames = t.frames;
    if (t.bits > 0) {
      r.contact_accuracy = static_cast<double>(t.contact_hits) / static_cast<double>(t.bits);
      r.distant_accuracy = static_cast<double>(t.distant_hits) / static_cast<double>(t.bits);
    }
    return r;
  };
  ContactAccuracyTable table;
  for (const auto& [label, tally] : per_object) table.rows.push_back(row(label, tally));
  // With a fixed joint count per frame the pooled ratio is the frame-weighted mean.
  table.average = row(-1, pooled);
  return table;
}

ContactAccuracyTable evaluate_contact(const TrainedContactModule& contact,
                                      std::span<const ContactSample> samples,
                                      const DatasetConfig& config) {
  const auto width = static_cast<Eigen::Index>(config.frame_dim());
  Matrix batch(static_cast<Eigen::Index>(samples.size()), width);
  std::vector<ContactMap> targets;
  std::vector<int> objects;
  targets.reserve(samples.size());
  objects.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const auto v = encode_frame(samples[i].frame, config);
    batch.row(static_cast<Eigen::Index>(i)) = Eigen::Map<const Eigen::RowVectorXd>(v.data(), width);
    targets.push_back(samples[i].target);
    objects.push_back(samples[i].frame.object.label);
  }
  std::vector<std::vector<double>> probs;
  if (!samples.empty()) {
    const Matrix out = predict_contact_batch(contact, batch);
    probs.resize(samples.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const Eigen::RowVectorXd r = out.row(static_cast<Eigen::Index>(i));
      probs[i].assign(r.data(), r.data() + r.size());
    }
  }
  return contact_accuracy_by_object(probs, targets, objects);
}

EvalReport evaluate(const TrainedContactModule& contact, const TrainedActionModule& action,
                    std::span<const ActionClip> clips, std::span<const ContactSample> samples,
                    const DatasetConfig& config) {
  if (clips.empty()) throw ValidationError("evaluation needs at least one clip");
  check_module_dims(contact, action, config);
  EvalReport report;
  for (const ActionClip& clip : clips) {
    validate_clip(clip, config);
    report.predictions.push_back(predict_action(contact, action, clip, config).predicted_class);
    report.labels.push_back(clip.action_label);
  }
  report.top1_accuracy = action_accuracy(report.predictions, report.labels);
  report.confusion = confusion_matrix(report.predictions, report.labels,
                                      config.action_class_count);
  if (!samples.empty()) {
    report.has_contact_table = true;
    report.contact_table = evaluate_contact(contact, samples, config);
  }
  return report;
}

AblationReport run_ablation(std::span<const ActionClip> train_clips,
                            std::span<const ContactSample> train_samples,
                            std::span<const ActionClip> test_clips,
                            std::span<const ContactSample> test_samples,
                            const RunConfig& config) {
  config.validate();
  if (test_clips.empty()) throw ValidationError("ablation needs held-out clips");
  AblationReport report;
  report.contact = train_contact_module(train_samples, config.dataset, config.contact).module;
  if (!test_samples.empty()) {
    report.contact_table = evaluate_contact(report.contact, test_samples, config.dataset);
  }

  struct Variant {
    const char* name;
    bool contact;
    bool distant;
  };
  static constexpr Variant kVariants[] = {
      {"baseline", false, false},
      {"contact_only", true, false},
      {"distant_only", false, true},
      {"contact_distant", true, true},
  };
  for (const Variant& v : kVariants) {
    ActionModuleConfig action = config.action;
    action.augmentation.use_contact = true;
    action.augmentation.mask_contact = !v.contact;
    action.augmentation.mask_distant = !v.distant;
    const TrainedActionModule g =
        train_action_module(train_clips, report.contact, config.dataset, action).module;

    auto accuracy = [&](std::span<const ActionClip> clips) {
      std::vector<int> preds, labels;
      for (const ActionClip& c : clips) {
        preds.push_back(predict_action(report.contact, g, c, config.dataset).predicted_class);
        labels.push_back(c.action_label);
      }
      return action_accuracy(preds, labels);
    };
    report.rows.push_back({v.name, v.contact, v.distant, accuracy(train_clips),
                           accuracy(test_clips)});
  }
  return report;
}

}  // namespace casar
