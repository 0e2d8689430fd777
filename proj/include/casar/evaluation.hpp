#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "casar/pipeline.hpp"
#include "json.hpp"

namespace casar {

double action_accuracy(std::span<const int> predictions, std::span<const int> labels);

class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int classes);

  int classes() const { return classes_; }
  // Row = ground truth, column = prediction.
  std::int64_t at(int truth, int predicted) const;
  void add(int truth, int predicted);
  std::int64_t total() const;
  std::int64_t trace() const;
  std::int64_t row_sum(int truth) const;

  friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

 private:
  int classes_;
  std::vector<std::int64_t> counts_;
};

ConfusionMatrix confusion_matrix(std::span<const int> predictions, std::span<const int> labels,
                                 int classes);

struct ContactAccuracyRow {
  int object_label = -1;  // -1 for the frame-weighted average row
  double contact_accuracy = 0.0;
  double distant_accuracy = 0.0;
  std::size_t frames = 0;
};

struct ContactAccuracyTable {
  std::vector<ContactAccuracyRow> rows;  // ascending object label
  ContactAccuracyRow average;
};

inline constexpr double kBinarizeThreshold = 0.5;

// Element-wise bit accuracy per object; probability >= threshold counts as 1.
ContactAccuracyTable contact_accuracy_by_object(std::span<const std::vector<double>> probs,
                                                std::span<const ContactMap> targets,
                                                std::span<const int> object_labels,
                                                double threshold = kBinarizeThreshold);

struct EvalReport {
  double top1_accuracy = 0.0;
  std::vector<int> predictions;
  std::vector<int> labels;
  ConfusionMatrix confusion{2};
  bool has_contact_table = false;
  ContactAccuracyTable contact_table;
};

// Action metrics over `clips`; the contact table is filled when `samples` is
// non-empty.
EvalReport evaluate(const TrainedContactModule& contact, const TrainedActionModule& action,
                    std::span<const ActionClip> clips, std::span<const ContactSample> samples,
                    const DatasetConfig& config);

ContactAccuracyTable evaluate_contact(const TrainedContactModule& contact,
                                      std::span<const ContactSample> samples,
                                      const DatasetConfig& config);

// metrics.json, confusion.csv, per_object.csv
void write_eval_report(const std::filesystem::path& dir, const EvalReport& report,
                       const nlohmann::ordered_json& provenance);

struct AblationRow {
  std::string variant;
  bool contact_points = false;
  bool distant_points = false;
  double train_accuracy = 0.0;
  double test_accuracy = 0.0;
};

struct AblationReport {
  TrainedContactModule contact;
  ContactAccuracyTable contact_table;  // on the test samples, when given
  std::vector<AblationRow> rows;
};

// Trains f once, then g four times with identical seeds: no contact map
// (both halves zero-masked), contact only, distant only, contact + distant.
AblationReport run_ablation(std::span<const ActionClip> train_clips,
                            std::span<const ContactSample> train_samples,
                            std::span<const ActionClip> test_clips,
                            std::span<const ContactSample> test_samples,
                            const RunConfig& config);

// ablation.csv and ablation.json
void write_ablation_report(const std::filesystem::path& dir, const AblationReport& report,
                           const nlohmann::ordered_json& provenance);

}  // namespace casar
