#pragma once

// Deterministic synthetic hand-object interaction clips.
//
// Every action class is a contact configuration: which fingertips of which
// hand touch the object, whether the other hand rests near the object or far
// away, and whether the clip goes approach-then-touch or touch-then-retreat.
// The contact-map sequence identifies the class exactly; the raw coordinates
// add random object placement, per-frame rigid jitter and joint noise.

#include <cstdint>
#include <vector>

#include "casar/dataset_io.hpp"

namespace casar {

struct SynthSpec {
  int class_count = 6;
  int clips_per_class = 100;
  int test_clips_per_class = 0;
  int min_frames = 16;
  int max_frames = 64;
  double noise_sigma = 0.002;  // meters, per joint coordinate
  std::uint64_t seed = 7;

  void validate() const;
};

struct SynthDataset {
  DatasetConfig config;
  MeshLibrary meshes;
  std::vector<ActionClip> train_clips;
  std::vector<ContactRecord> train_contacts;
  std::vector<ActionClip> test_clips;
  std::vector<ContactRecord> test_contacts;
};

int synth_max_classes();
int synth_object_count();

// Dataset config matching the generator's output (two 21-joint hands).
DatasetConfig synth_dataset_config(int class_count);

// Procedural object meshes; independent of the seed.
MeshLibrary synth_meshes();

SynthDataset synth_generate(const SynthSpec& spec);

}  // namespace casar
