#pragma once

// Dataset and training configuration, with JSON round-tripping. Defaults are
// the H2O setup: eta_c 2 cm, eta_d 20 cm, 32 frames, widths
// 256 / 5000, 100 / 600 epochs, lr 1e-4 / 1e-5 decayed x0.7 every 20 / 200
// epochs, focal alpha 0.5 and gamma 4.

#include <cstdint>
#include <string>

#include "casar/datamodel.hpp"
#include "casar/neuralcore.hpp"
#include "json.hpp"

namespace casar {

enum class ActionHead {
  sigmoid_ce,  // sigmoid outputs, -log p[label]
  softmax_ce,  // identity outputs, softmax cross-entropy
};

std::string to_string(ActionHead head);
ActionHead action_head_from_string(const std::string& name);

struct ContactModuleConfig {
  int hidden_width = 256;
  int epochs = 100;
  double lr = 1e-4;
  double lr_decay = 0.7;
  int lr_period = 20;
  FocalParams focal{};
  int batch_size = 64;
  std::uint64_t seed = 0;

  void validate() const;
  LrSchedule schedule() const { return {lr, lr_decay, lr_period, epochs}; }
};

// Which parts of the contact augmentation the action network sees.
struct AugmentationSpec {
  bool use_contact = true;    // false: plain N_f * D input
  bool binarize = false;      // threshold probabilities at 0.5
  bool mask_contact = false;  // zero the contact half
  bool mask_distant = false;  // zero the distant half

  friend bool operator==(const AugmentationSpec&, const AugmentationSpec&) = default;
};

struct ActionModuleConfig {
  int hidden_width = 5000;
  int epochs = 600;
  double lr = 1e-5;
  double lr_decay = 0.7;
  int lr_period = 200;
  int batch_size = 16;
  std::uint64_t seed = 0;
  // Weight of the action term in the joint objective. Only the staged regime
  // (0: train f, freeze, then train g) is implemented.
  double lambda = 0.0;
  ActionHead head = ActionHead::sigmoid_ce;
  AugmentationSpec augmentation{};

  void validate() const;
  LrSchedule schedule() const { return {lr, lr_decay, lr_period, epochs}; }
};

struct RunConfig {
  DatasetConfig dataset{};
  ContactModuleConfig contact{};
  ActionModuleConfig action{};

  void validate() const;
};

nlohmann::ordered_json to_json(const DatasetConfig& config);
nlohmann::ordered_json to_json(const ContactModuleConfig& config);
nlohmann::ordered_json to_json(const ActionModuleConfig& config);
nlohmann::ordered_json to_json(const AugmentationSpec& spec);
nlohmann::ordered_json to_json(const RunConfig& config);

// Keys present in `j` override the corresponding fields of `base`; unknown
// keys are rejected. run_config_from_json validates the merged result.
DatasetConfig dataset_config_from_json(const nlohmann::json& j, DatasetConfig base = {});
AugmentationSpec augmentation_from_json(const nlohmann::json& j, AugmentationSpec base = {});
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});
RunConfig load_run_config(const std::string& path, RunConfig base = {});

}  // namespace casar
