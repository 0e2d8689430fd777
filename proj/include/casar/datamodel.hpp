#pragma once

// Per-frame and per-clip encodings of hand joints, object pose and object
// label, plus frame-count normalization.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "casar/geometry.hpp"

namespace casar {

inline constexpr std::size_t kObjectPoseDim = 3 * kBoxPoints;  // 63

struct DatasetConfig {
  int hands = 2;
  int joints_per_hand = 21;
  int object_class_count = 8;
  int action_class_count = 36;
  int frames_per_clip = 32;
  ContactThresholds thresholds{};
  // Translate each clip so its mean object centre sits at the origin.
  bool center_per_clip = false;

  void validate() const;

  std::size_t joint_count() const {
    return static_cast<std::size_t>(hands) * static_cast<std::size_t>(joints_per_hand);
  }
  // Width of one encoded frame: 3*H*J + 63 + K.
  std::size_t frame_dim() const {
    return 3 * joint_count() + kObjectPoseDim +
           static_cast<std::size_t>(object_class_count);
  }
  // Width of one contact-map vector [contact | distant].
  std::size_t contact_dim() const { return 2 * joint_count(); }
  std::size_t clip_dim(bool with_contact) const {
    return static_cast<std::size_t>(frames_per_clip) *
           (frame_dim() + (with_contact ? contact_dim() : 0));
  }
};

// Hand joints for one frame. `left` is empty for single-hand datasets.
struct HandPose {
  std::vector<Point3> left;
  std::vector<Point3> right;

  // Left joints then right joints.
  std::vector<Point3> joints() const;

  friend bool operator==(const HandPose&, const HandPose&) = default;
};

struct ObjectAnnotation {
  int label = 0;
  std::array<Point3, kBoxPoints> pose_points{};
  RigidTransform world_from_canonical{};

  std::span<const Point3, kBoxCorners> corners() const {
    return std::span<const Point3, kBoxCorners>(pose_points.data() + 1, kBoxCorners);
  }

  friend bool operator==(const ObjectAnnotation&, const ObjectAnnotation&) = default;
};

struct FrameSample {
  HandPose hand;
  ObjectAnnotation object;

  friend bool operator==(const FrameSample&, const FrameSample&) = default;
};

struct ActionClip {
  std::string clip_id;
  int action_label = 0;
  std::optional<std::string> mesh_id;
  std::vector<FrameSample> frames;

  int object_label() const { return frames.empty() ? -1 : frames.front().object.label; }

  friend bool operator==(const ActionClip&, const ActionClip&) = default;
};

struct ContactSample {
  FrameSample frame;
  ContactMap target;
};

// Throws ValidationError when the clip is inconsistent with `config`
// (joint counts, labels, finiteness, constant object label, non-empty).
void validate_clip(const ActionClip& clip, const DatasetConfig& config);

std::vector<double> one_hot(int index, int size);

std::vector<double> encode_frame(const FrameSample& frame, const DatasetConfig& config);

// Source frame index for output slot j: floor(j * L / N_f).
std::vector<std::size_t> resample_indices(std::size_t length, std::size_t frames);
ActionClip resample_frames(const ActionClip& clip, int frames);

// Flattened clip. Without contact probabilities the width is N_f * D; with
// them every frame is followed by its [contact | distant] vector.
std::vector<double> encode_clip(const ActionClip& clip, const DatasetConfig& config);
std::vector<double> encode_clip(const ActionClip& clip, const DatasetConfig& config,
                                std::span<const std::vector<double>> contact_probs);

// Shifts hands, pose points and object transform by minus the clip's mean
// object centre. Labels derived from geometry are unchanged.
ActionClip center_clip(const ActionClip& clip);

}  // namespace casar
