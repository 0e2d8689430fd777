#include "casar/checkpoint.hpp"
#include "casar/error.hpp"
#include "casar/evaluation.hpp"
#include "casar/pipeline.hpp"
#include "casar/synth.hpp"
#include "doctest.h"

using namespace casar;

namespace {

SynthDataset small_synth(int classes, int per_class, std::uint64_t seed = 7) {
  SynthSpec spec;
  spec.class_count = classes;
  spec.clips_per_class = per_class;
  spec.min_frames = 12;
  spec.max_frames = 40;
  spec.seed = seed;
  return synth_generate(spec);
}

std::vector<ContactSample> samples_of(const SynthDataset& d) {
  return derive_contact_dataset(d.train_clips, d.meshes, d.config);
}

ContactModuleConfig quick_contact() {
  ContactModuleConfig c;
  c.hidden_width = 16;
  c.epochs = 3;
  c.lr = 1e-3;
  return c;
}

ActionModuleConfig quick_action() {
  ActionModuleConfig c;
  c.hidden_width = 8;
  c.epochs = 3;
  c.lr = 1e-3;
  c.head = ActionHead::softmax_ce;
  return c;
}

}  // namespace

TEST_CASE("deriving contact samples") {
  const SynthDataset d = small_synth(2, 1);
  ActionClip clip = d.train_clips[0];
  clip.frames.resize(2);
  const std::vector<ActionClip> one{clip};
  CHECK(derive_contact_dataset(one, d.meshes, d.config).size() == 2);

  // Move both hands 1 m away from the object.
  for (auto& f : clip.frames) {
    for (auto* hand : {&f.hand.left, &f.hand.right}) {
      for (auto& p : *hand) p = p + Point3{1.0, 0, 0};
    }
  }
  const auto far = derive_contact_dataset(std::vector<ActionClip>{clip}, d.meshes, d.config);
  for (const auto& s : far) {
    for (auto b : s.target.contact) CHECK(b == 0);
    for (auto b : s.target.distant) CHECK(b == 1);
  }

  clip.mesh_id = "teapot";
  try {
    derive_contact_dataset(std::vector<ActionClip>{clip}, d.meshes, d.config);
    FAIL("expected a missing-mesh error");
  } catch (const IoError& e) {
    CHECK(std::string(e.what()).find("teapot") != std::string::npos);
    CHECK(std::string(e.what()).find(clip.clip_id) != std::string::npos);
  }
}

TEST_CASE("contact training: history, determinism, freezing") {
  const SynthDataset d = small_synth(2, 2);
  const auto samples = samples_of(d);

  ContactModuleConfig once = quick_contact();
  once.epochs = 1;
  const auto single = std::vector<ContactSample>{samples[0]};
  CHECK(train_contact_module(single, d.config, once).history.epoch_loss.size() == 1);

  const ContactTraining a = train_contact_module(samples, d.config, quick_contact());
  const ContactTraining b = train_contact_module(samples, d.config, quick_contact());
  CHECK(a.module.frozen);
  CHECK(a.module.model == b.module.model);
  CHECK(a.history.epoch_loss == b.history.epoch_loss);
  CHECK(a.module.model.layer_dims() == std::vector<Eigen::Index>{static_cast<Eigen::Index>(d.config.frame_dim()), 16, 16, 84});

  ContactModuleConfig other = quick_contact();
  other.seed = 1;
  CHECK(!(train_contact_module(samples, d.config, other).module.model == a.module.model));

  CHECK_THROWS_AS(train_contact_module(std::vector<ContactSample>{}, d.config, quick_contact()),
                  ValidationError);
}

TEST_CASE("contact training converges on 500 synthetic frames with the default config") {
  const SynthDataset d = small_synth(6, 4);
  auto samples = samples_of(d);
  REQUIRE(samples.size() >= 500);
  samples.resize(500);
  const ContactTraining t = train_contact_module(samples, d.config, ContactModuleConfig{});
  CHECK(t.history.epoch_loss.size() == 100);
  CHECK(t.history.epoch_loss.back() < 0.01);
  const ContactAccuracyTable table = evaluate_contact(t.module, samples, d.config);
  const double element = 0.5 * (table.average.contact_accuracy + table.average.distant_accuracy);
  CHECK(element >= 0.95);
}

TEST_CASE("contact prediction") {
  TrainedContactModule zero{zero_model(std::vector<Eigen::Index>{197, 4, 4, 84}), true};
  const std::vector<double> frame(197, 0.3);
  const auto p = predict_contact(zero, frame);
  CHECK(p.size() == 84);
  for (double v : p) CHECK(v == 0.5);

  TrainedContactModule m{init_model(std::vector<Eigen::Index>{197, 6, 6, 84}, 2), true};
  const auto q = predict_contact(m, frame);
  const Matrix direct = forward(m.model, Eigen::Map<const Eigen::RowVectorXd>(frame.data(), 197)).output;
  for (int k = 0; k < 84; ++k) CHECK(q[k] == direct(0, k));

  CHECK_THROWS_AS(predict_contact(m, std::vector<double>(196)), ShapeError);
}

TEST_CASE("action training contracts") {
  const SynthDataset d = small_synth(2, 3);
  const auto samples = samples_of(d);
  const TrainedContactModule f = train_contact_module(samples, d.config, quick_contact()).module;
  const std::string before = serialize_checkpoint(f.model);
  const MlpModel exact = f.model;

  const ActionTraining g = train_action_module(d.train_clips, f, d.config, quick_action());
  CHECK(serialize_checkpoint(f.model) == before);
  CHECK(f.model == exact);
  const auto dim = static_cast<Eigen::Index>(d.config.frame_dim());
  CHECK(g.module.model.input_dim() == 32 * (dim + 84));
  CHECK(g.history.epoch_loss.size() == 3);

  const ActionTraining again = train_action_module(d.train_clips, f, d.config, quick_action());
  CHECK(again.module.model == g.module.model);

  ActionModuleConfig plain = quick_action();
  plain.augmentation.use_contact = false;
  const ActionTraining p = train_action_module(d.train_clips, TrainedContactModule{}, d.config, plain);
  CHECK(p.module.model.input_dim() == 32 * dim);

  ActionModuleConfig joint = quick_action();
  joint.lambda = 0.5;
  CHECK_THROWS_AS(train_action_module(d.train_clips, f, d.config, joint), ValidationError);

  TrainedContactModule unfrozen = f;
  unfrozen.frozen = false;
  CHECK_THROWS_AS(train_action_module(d.train_clips, unfrozen, d.config, quick_action()),
                  ValidationError);

  auto bad = d.train_clips;
  bad[0].action_label = 2;
  CHECK_THROWS_AS(train_action_module(bad, f, d.config, quick_action()), ValidationError);
}

TEST_CASE("action prediction") {
  const SynthDataset d = small_synth(3, 1);
  const DatasetConfig& c = d.config;
  const auto width = static_cast<Eigen::Index>(c.clip_dim(true));
  TrainedContactModule f{init_model(std::vector<Eigen::Index>{static_cast<Eigen::Index>(c.frame_dim()), 4, 4, 84}, 1), true};
  TrainedActionModule g;
  g.model = zero_model(std::vector<Eigen::Index>{width, 5, 3});
  const ActionPrediction p = predict_action(f, g, d.train_clips[1], c);
  CHECK(p.predicted_class == 0);
  CHECK(p.probabilities == std::vector<double>{0.5, 0.5, 0.5});

  g.model = init_model(std::vector<Eigen::Index>{width, 5, 3}, 4);
  const ActionPrediction a = predict_action(f, g, d.train_clips[2], c);
  const ActionPrediction b = predict_action(f, g, d.train_clips[2], c);
  CHECK(a.probabilities == b.probabilities);
  CHECK(a.predicted_class == b.predicted_class);

  TrainedActionModule wrong = g;
  wrong.model = zero_model(std::vector<Eigen::Index>{width - 1, 5, 3});
  try {
    predict_action(f, wrong, d.train_clips[0], c);
    FAIL("expected a shape error");
  } catch (const ShapeError& e) {
    const std::string msg = e.what();
    CHECK(msg.find(std::to_string(width - 1)) != std::string::npos);
    CHECK(msg.find(std::to_string(width)) != std::string::npos);
  }

  CHECK(argmax_lowest(std::vector<double>{0.2, 0.7, 0.7}) == 1);
}

TEST_CASE("600-clip synthetic set reaches 99% training accuracy") {
  const SynthDataset d = small_synth(6, 100);
  const auto samples = samples_of(d);
  ContactModuleConfig fc;
  fc.hidden_width = 64;
  fc.epochs = 20;
  fc.lr = 1e-3;
  fc.lr_period = 10;
  const TrainedContactModule f = train_contact_module(samples, d.config, fc).module;
  ActionModuleConfig gc;
  gc.hidden_width = 256;
  gc.epochs = 20;
  gc.lr = 1e-4;
  gc.lr_period = 10;
  gc.batch_size = 32;
  gc.head = ActionHead::softmax_ce;
  const TrainedActionModule g = train_action_module(d.train_clips, f, d.config, gc).module;
  std::vector<int> preds, labels;
  for (const auto& clip : d.train_clips) {
    preds.push_back(predict_action(f, g, clip, d.config).predicted_class);
    labels.push_back(clip.action_label);
  }
  CHECK(action_accuracy(preds, labels) >= 0.99);
  CHECK(predict_action(f, g, d.train_clips[0], d.config).predicted_class ==
        d.train_clips[0].action_label);
}
