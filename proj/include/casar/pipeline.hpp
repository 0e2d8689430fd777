#pragma once

// Two-stage training: the contact network f is trained on per-frame contact
// maps, frozen, and its predictions augment the clip encoding fed to the
// action network g.

#include <span>
#include <vector>

#include "casar/config.hpp"
#include "casar/dataset_io.hpp"
#include "casar/neuralcore.hpp"

namespace casar {

struct TrainedContactModule {
  MlpModel model;  // [D, h, h, 2*H*J]
  bool frozen = false;
};

struct TrainedActionModule {
  MlpModel model;  // [N_f * (D + 2*H*J), h, h, C] or [N_f * D, h, h, C]
  ActionHead head = ActionHead::sigmoid_ce;
  AugmentationSpec augmentation{};
};

struct TrainingHistory {
  std::vector<double> epoch_loss;
};

struct ContactTraining {
  TrainedContactModule module;
  TrainingHistory history;
};

struct ActionTraining {
  TrainedActionModule module;
  TrainingHistory history;
};

struct ActionPrediction {
  int predicted_class = 0;
  std::vector<double> probabilities;
};

// Applies the config's per-clip preprocessing (centering when enabled).
ActionClip prepare_clip(const ActionClip& clip, const DatasetConfig& config);

// One record per raw frame: mesh posed by the frame's transform, then labelled.
std::vector<ContactRecord> derive_contact_records(std::span<const ActionClip> clips,
                                                  const MeshLibrary& meshes,
                                                  const DatasetConfig& config);
std::vector<ContactSample> derive_contact_dataset(std::span<const ActionClip> clips,
                                                  const MeshLibrary& meshes,
                                                  const DatasetConfig& config);

ContactTraining train_contact_module(std::span<const ContactSample> samples,
                                     const DatasetConfig& dataset,
                                     const ContactModuleConfig& config);

// [contact probabilities (H*J) | distant probabilities (H*J)].
std::vector<double> predict_contact(const TrainedContactModule& module,
                                    std::span<const double> frame_vector);
Matrix predict_contact_batch(const TrainedContactModule& module, const Matrix& frames);

// Action-network input for one clip: resample, per-frame contact prediction,
// augmentation masks, flatten.
std::vector<double> action_input(const TrainedContactModule& contact, const ActionClip& clip,
                                 const DatasetConfig& config,
                                 const AugmentationSpec& augmentation);

ActionTraining train_action_module(std::span<const ActionClip> clips,
                                   const TrainedContactModule& contact,
                                   const DatasetConfig& dataset,
                                   const ActionModuleConfig& config);

// Throws ShapeError naming expected and found widths when the two modules do
// not fit `config`.
void check_module_dims(const TrainedContactModule& contact, const TrainedActionModule& action,
                       const DatasetConfig& config);

// Argmax over g's output, ties toward the lowest class index.
ActionPrediction predict_action(const TrainedContactModule& contact,
                                const TrainedActionModule& action, const ActionClip& clip,
                                const DatasetConfig& config);

int argmax_lowest(std::span<const double> values);

}  // namespace casar
