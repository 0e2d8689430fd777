#include "casar/datamodel.hpp"

#include <string>

#include "casar/error.hpp"

namespace casar {

void DatasetConfig::validate() const {
  if (hands != 1 && hands != 2) {
    throw ValidationError("hands must be 1 or 2, got " + std::to_string(hands));
  }
  if (joints_per_hand < 1) throw ValidationError("joints_per_hand must be >= 1");
  if (object_class_count < 1) throw ValidationError("object_class_count must be >= 1");
  if (action_class_count < 2) throw ValidationError("action_class_count must be >= 2");
  if (frames_per_clip < 1) throw ValidationError("frames_per_clip must be >= 1");
  thresholds.validate();
}

std::vector<Point3> HandPose::joints() const {
  std::vector<Point3> out;
  out.reserve(left.size() + right.size());
  out.insert(out.end(), left.begin(), left.end());
  out.insert(out.end(), right.begin(), right.end());
  return out;
}

void validate_clip(const ActionClip& clip, const DatasetConfig& config) {
  const std::string where = "clip '" + clip.clip_id + "'";
  if (clip.frames.empty()) throw ValidationError(where + " has no frames");
  if (clip.action_label < 0 || clip.action_label >= config.action_class_count) {
    throw ValidationError(where + " action_label " + std::to_string(clip.action_label) +
                          " outside [0, " + std::to_string(config.action_class_count) + ")");
  }
  const int label = clip.frames.front().object.label;
  if (label < 0 || label >= config.object_class_count) {
    throw ValidationError(where + " object_label " + std::to_string(label) +
                          " outside [0, " + std::to_string(config.object_class_count) + ")");
  }
  const auto per_hand = static_cast<std::size_t>(config.joints_per_hand);
  for (std::size_t f = 0; f < clip.frames.size(); ++f) {
    const FrameSample& frame = clip.frames[f];
    const std::string at = where + " frame " + std::to_string(f);
    if (frame.object.label != label) {
      throw ValidationError(at + " changes the object label within the clip");
    }
    const std::size_t want_left = config.hands == 2 ? per_hand : 0;
    if (frame.hand.left.size() != want_left || frame.hand.right.size() != per_hand) {
      throw ShapeError(at + " hand joint counts (" + std::to_string(frame.hand.left.size()) +
                       ", " + std::to_string(frame.hand.right.size()) + ") do not match (" +
                       std::to_string(want_left) + ", " + std::to_string(per_hand) + ")");
    }
    for (const Point3& p : frame.hand.left) {
      if (!p.is_finite()) throw ValidationError(at + " has a non-finite joint");
    }
    for (const Point3& p : frame.hand.right) {
      if (!p.is_finite()) throw ValidationError(at + " has a non-finite joint");
    }
    for (const Point3& p : frame.object.pose_points) {
      if (!p.is_finite()) throw ValidationError(at + " has a non-finite object point");
    }
  }
}

std::vector<double> one_hot(int index, int size) {
  if (size < 1 || index < 0 || index >= size) {
    throw ValidationError("one-hot index " + std::to_string(index) + " outside [0, " +
                          std::to_string(size) + ")");
  }
  std::vector<double> out(static_cast<std::size_t>(size), 0.0);
  out[static_cast<std::size_t>(index)] = 1.0;
  return out;
}

namespace {

void append_frame(std::vector<double>& out, const FrameSample& frame,
                  const DatasetConfig& config) {
  const auto per_hand = static_cast<std::size_t>(config.joints_per_hand);
  const std::size_t want_left = config.hands == 2 ? per_hand : 0;
  if (frame.hand.left.size() != want_left || frame.hand.right.size() != per_hand) {
    throw ShapeError("frame hand joint counts do not match the dataset config");
  }
  auto put = [&out](const Point3& p) {
    out.push_back(p.x);
    out.push_back(p.y);
    out.push_back(p.z);
  };
  for (const Point3& p : frame.hand.left) put(p);
  for (const Point3& p : frame.hand.right) put(p);
  for (const Point3& p : frame.object.pose_points) put(p);
  const auto code = one_hot(frame.object.label, config.object_class_count);
  out.insert(out.end(), code.begin(), code.end());
}

}  // namespace

std::vector<double> encode_frame(const FrameSample& frame, const DatasetConfig& config) {
  std::vector<double> out;
  out.reserve(config.frame_dim());
  append_frame(out, frame, config);
  return out;
}

std::vector<std::size_t> resample_indices(std::size_t length, std::size_t frames) {
  if (length == 0) throw ValidationError("cannot resample a clip with zero frames");
  if (frames == 0) throw ValidationError("target frame count must be >= 1");
  std::vector<std::size_t> idx(frames);
  for (std::size_t j = 0; j < frames; ++j) idx[j] = j * length / frames;
  return idx;
}

ActionClip resample_frames(const ActionClip& clip, int frames) {
  if (frames < 1) throw ValidationError("target frame count must be >= 1");
  const auto idx = resample_indices(clip.frames.size(), static_cast<std::size_t>(frames));
  ActionClip out;
  out.clip_id = clip.clip_id;
  out.action_label = clip.action_label;
  out.mesh_id = clip.mesh_id;
  out.frames.reserve(idx.size());
  for (std::size_t i : idx) out.frames.push_back(clip.frames[i]);
  return out;
}

std::vector<double> encode_clip(const ActionClip& clip, const DatasetConfig& config) {
  if (clip.frames.size() != static_cast<std::size_t>(config.frames_per_clip)) {
    throw ShapeError("clip '" + clip.clip_id + "' has " + std::to_string(clip.frames.size()) +
                     " frames; resample to " + std::to_string(config.frames_per_clip) +
                     " before encoding");
  }
  std::vector<double> out;
  out.reserve(config.clip_dim(false));
  for (const FrameSample& frame : clip.frames) append_frame(out, frame, config);
  return out;
}

std::vector<double> encode_clip(const ActionClip& clip, const DatasetConfig& config,
                                std::span<const std::vector<double>> contact_probs) {
  if (clip.frames.size() != static_cast<std::size_t>(config.frames_per_clip)) {
    throw ShapeError("clip '" + clip.clip_id + "' has " + std::to_string(clip.frames.size()) +
                     " frames; resample to " + std::to_string(config.frames_per_clip) +
                     " before encoding");
  }
  if (contact_probs.size() != clip.frames.size()) {
    throw ShapeError("expected one contact vector per frame (" +
                     std::to_string(clip.frames.size()) + "), got " +
                     std::to_string(contact_probs.size()));
  }
  std::vector<double> out;
  out.reserve(config.clip_dim(true));
  for (std::size_t f = 0; f < clip.frames.size(); ++f) {
    append_frame(out, clip.frames[f], config);
    if (contact_probs[f].size() != config.contact_dim()) {
      throw ShapeError("contact vector width " + std::to_string(contact_probs[f].size()) +
                       " does not match " + std::to_string(config.contact_dim()));
    }
    out.insert(out.end(), contact_probs[f].begin(), contact_probs[f].end());
  }
  return out;
}

ActionClip center_clip(const ActionClip& clip) {
  if (clip.frames.empty()) return clip;
  Point3 mean{};
  for (const FrameSample& f : clip.frames) mean = mean + f.object.pose_points[0];
  mean = (1.0 / static_cast<double>(clip.frames.size())) * mean;
  const Point3 shift = -1.0 * mean;
  const RigidTransform move = RigidTransform::translation(shift);

  ActionClip out = clip;
  for (FrameSample& f : out.frames) {
    for (Point3& p : f.hand.left) p = p + shift;
    for (Point3& p : f.hand.right) p = p + shift;
    for (Point3& p : f.object.pose_points) p = p + shift;
    f.object.world_from_canonical = move.compose(f.object.world_from_canonical);
  }
  return out;
}

}  // namespace casar
