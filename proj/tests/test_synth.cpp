#include <map>

#include "casar/dataset_io.hpp"
#include "casar/error.hpp"
#include "casar/pipeline.hpp"
#include "casar/synth.hpp"
#include "doctest.h"
#include "support/oracles.hpp"

using namespace casar;

TEST_CASE("class-balanced counts") {
  SynthSpec spec;
  spec.class_count = 6;
  spec.clips_per_class = 100;
  spec.test_clips_per_class = 2;
  spec.min_frames = 4;
  spec.max_frames = 8;
  const SynthDataset d = synth_generate(spec);
  CHECK(d.train_clips.size() == 600);
  CHECK(d.test_clips.size() == 12);
  std::map<int, int> per_class;
  std::size_t frames = 0;
  for (const auto& c : d.train_clips) {
    ++per_class[c.action_label];
    frames += c.frames.size();
    CHECK(c.frames.size() >= 4);
    CHECK(c.frames.size() <= 8);
    CHECK_NOTHROW(validate_clip(c, d.config));
  }
  CHECK(per_class.size() == 6);
  for (const auto& [label, n] : per_class) CHECK(n == 100);
  CHECK(d.train_contacts.size() == frames);
}

TEST_CASE("same seed, same bytes; different seed, different data") {
  SynthSpec spec;
  spec.clips_per_class = 3;
  spec.test_clips_per_class = 1;
  const SynthDataset a = synth_generate(spec);
  const SynthDataset b = synth_generate(spec);
  CHECK(a.train_clips == b.train_clips);
  CHECK(a.train_contacts == b.train_contacts);
  CHECK(a.test_clips == b.test_clips);
  std::string ja, jb;
  for (const auto& c : a.train_clips) ja += clip_to_json_line(c);
  for (const auto& c : b.train_clips) jb += clip_to_json_line(c);
  CHECK(ja == jb);

  spec.seed = 8;
  CHECK(synth_generate(spec).train_clips != a.train_clips);
}

TEST_CASE("emitted targets equal labels recomputed by brute force") {
  for (double noise : {0.0, 0.002}) {
    SynthSpec spec;
    spec.class_count = synth_max_classes();
    spec.clips_per_class = 1;
    spec.noise_sigma = noise;
    spec.min_frames = 6;
    spec.max_frames = 10;
    const SynthDataset d = synth_generate(spec);
    const auto derived = derive_contact_records(d.train_clips, d.meshes, d.config);
    CHECK(derived == d.train_contacts);

    std::size_t r = 0;
    for (const auto& clip : d.train_clips) {
      const auto& mesh = d.meshes.at(*clip.mesh_id);
      for (const auto& f : clip.frames) {
        const auto world = transform_points(f.object.world_from_canonical, mesh.vertices);
        CHECK(oracle::brute_contact_map(world, f.hand.joints(), d.config.thresholds) ==
              d.train_contacts[r++].map);
      }
    }
  }
}

TEST_CASE("every class shows its contact pattern") {
  SynthSpec spec;
  spec.class_count = synth_max_classes();
  spec.clips_per_class = 2;
  const SynthDataset d = synth_generate(spec);
  std::size_t r = 0;
  for (const auto& clip : d.train_clips) {
    bool any_contact = false, contact_first = false, contact_last = false;
    for (std::size_t f = 0; f < clip.frames.size(); ++f, ++r) {
      const auto& m = d.train_contacts[r].map;
      bool touching = false;
      for (auto b : m.contact) touching = touching || b;
      any_contact = any_contact || touching;
      if (f == 0) contact_first = touching;
      if (f + 1 == clip.frames.size()) contact_last = touching;
    }
    CHECK(any_contact);
    // Even classes approach then touch, odd classes touch then retreat.
    if (clip.action_label % 2 == 0) {
      CHECK(!contact_first);
      CHECK(contact_last);
    } else {
      CHECK(contact_first);
      CHECK(!contact_last);
    }
  }
}

TEST_CASE("spec validation") {
  SynthSpec s;
  s.class_count = 1;
  CHECK_THROWS_AS(synth_generate(s), ValidationError);
  s.class_count = synth_max_classes() + 1;
  CHECK_THROWS_AS(synth_generate(s), ValidationError);
  s = {};
  s.min_frames = 10;
  s.max_frames = 5;
  CHECK_THROWS_AS(synth_generate(s), ValidationError);
  s = {};
  s.noise_sigma = -1;
  CHECK_THROWS_AS(synth_generate(s), ValidationError);
}
