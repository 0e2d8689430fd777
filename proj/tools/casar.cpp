// casar: command-line front end for contact-map derivation, two-stage
// training, evaluation, ablation and the synthetic dataset generator.
//
// Exit codes: 0 success, 2 validation / config, 3 I/O, 4 numeric failure.

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <functional>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "casar/checkpoint.hpp"
#include "casar/config.hpp"
#include "casar/dataset_io.hpp"
#include "casar/error.hpp"
#include "casar/evaluation.hpp"
#include "casar/pipeline.hpp"
#include "casar/synth.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using nlohmann::ordered_json;

namespace {

using namespace casar;

constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::io: return kExitIo;
    case ErrorKind::numeric: return kExitNumeric;
    default: return kExitValidation;
  }
}

void report_error(std::string_view kind, const std::string& message) {
  ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  std::cerr << j.dump() << "\n";
}

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Records what a command did; written next to its outputs.
class RunManifest {
 public:
  RunManifest(std::string command, int argc, char** argv)
      : command_(std::move(command)), started_(utc_now()),
        clock_(std::chrono::steady_clock::now()) {
    for (int i = 0; i < argc; ++i) args_.push_back(argv[i]);
  }

  ordered_json config = ordered_json::object();
  ordered_json seeds = ordered_json::object();
  ordered_json inputs = ordered_json::object();
  std::vector<std::string> outputs;

  void write(const fs::path& path) const {
    ordered_json j;
    j["tool"] = "casar";
    j["version"] = CASAR_VERSION;
    j["command"] = command_;
    j["args"] = args_;
    j["config"] = config;
    j["seeds"] = seeds;
    j["inputs"] = inputs;
    j["outputs"] = outputs;
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - clock_).count();
    j["timings"] = {{"started_utc", started_}, {"finished_utc", utc_now()},
                    {"wall_seconds", secs}};
    write_text_atomic(path, j.dump(2) + "\n");
  }

 private:
  std::string command_;
  std::vector<std::string> args_;
  std::string started_;
  std::chrono::steady_clock::time_point clock_;
};

fs::path manifest_for_file(const fs::path& out) {
  fs::path p = out;
  p += ".manifest.json";
  return p;
}

// Flag overrides applied on top of defaults and an optional config file.
class Overrides {
 public:
  template <typename T>
  void option(CLI::App* app, const std::string& name, T default_value, const std::string& help,
              std::function<void(RunConfig&, const T&)> set) {
    auto value = std::make_shared<T>(default_value);
    CLI::Option* opt = app->add_option(name, *value, help)->capture_default_str();
    entries_.push_back({opt, [value, set](RunConfig& c) { set(c, *value); }});
  }

  void flag(CLI::App* app, const std::string& name, const std::string& help,
            std::function<void(RunConfig&)> set) {
    CLI::Option* opt = app->add_flag(name, help);
    entries_.push_back({opt, std::move(set)});
  }

  void apply(RunConfig& c) const {
    for (const auto& e : entries_) {
      if (e.opt->count() > 0) e.set(c);
    }
  }

 private:
  struct Entry {
    CLI::Option* opt;
    std::function<void(RunConfig&)> set;
  };
  std::vector<Entry> entries_;
};

void add_dataset_flags(CLI::App* app, Overrides& ov) {
  const RunConfig d;
  ov.option<std::string>(app, "--preset", "h2o",
                         "Threshold preset: h2o (eta_d 0.20) or fpha (eta_d 0.10)",
                         [](RunConfig& c, const std::string& p) {
                           if (p == "h2o") {
                             c.dataset.thresholds = {0.02, 0.20};
                           } else if (p == "fpha") {
                             c.dataset.thresholds = {0.02, 0.10};
                           } else {
                             throw ValidationError("unknown preset '" + p + "' (h2o | fpha)");
                           }
                         });
  ov.option<double>(app, "--eta-c", d.dataset.thresholds.eta_c, "Contact threshold (m)",
                    [](RunConfig& c, const double& v) { c.dataset.thresholds.eta_c = v; });
  ov.option<double>(app, "--eta-d", d.dataset.thresholds.eta_d, "Distant threshold (m)",
                    [](RunConfig& c, const double& v) { c.dataset.thresholds.eta_d = v; });
  ov.option<int>(app, "--hands", d.dataset.hands, "Hands per frame (1 or 2)",
                 [](RunConfig& c, const int& v) { c.dataset.hands = v; });
  ov.option<int>(app, "--joints", d.dataset.joints_per_hand, "Joints per hand",
                 [](RunConfig& c, const int& v) { c.dataset.joints_per_hand = v; });
  ov.option<int>(app, "--objects", d.dataset.object_class_count, "Object class count K",
                 [](RunConfig& c, const int& v) { c.dataset.object_class_count = v; });
  ov.option<int>(app, "--actions", d.dataset.action_class_count, "Action class count C",
                 [](RunConfig& c, const int& v) { c.dataset.action_class_count = v; });
  ov.option<int>(app, "--frames", d.dataset.frames_per_clip, "Frames per clip N_f",
                 [](RunConfig& c, const int& v) { c.dataset.frames_per_clip = v; });
  ov.flag(app, "--center-per-clip", "Center every clip on its mean object position",
          [](RunConfig& c) { c.dataset.center_per_clip = true; });
}

void add_seed_flag(CLI::App* app, Overrides& ov) {
  ov.option<std::uint64_t>(app, "--seed", 0, "Seed for initialization and shuffling",
                           [](RunConfig& c, const std::uint64_t& v) {
                             c.contact.seed = v;
                             c.action.seed = v;
                           });
}

void add_contact_flags(CLI::App* app, Overrides& ov) {
  const ContactModuleConfig d;
  ov.option<int>(app, "--contact-hidden", d.hidden_width, "Contact network hidden width",
                 [](RunConfig& c, const int& v) { c.contact.hidden_width = v; });
  ov.option<int>(app, "--contact-epochs", d.epochs, "Contact network epochs",
                 [](RunConfig& c, const int& v) { c.contact.epochs = v; });
  ov.option<double>(app, "--contact-lr", d.lr, "Contact network initial learning rate",
                    [](RunConfig& c, const double& v) { c.contact.lr = v; });
  ov.option<double>(app, "--contact-lr-decay", d.lr_decay, "Contact lr decay factor",
                    [](RunConfig& c, const double& v) { c.contact.lr_decay = v; });
  ov.option<int>(app, "--contact-lr-period", d.lr_period, "Contact lr decay period (epochs)",
                 [](RunConfig& c, const int& v) { c.contact.lr_period = v; });
  ov.option<int>(app, "--contact-batch", d.batch_size, "Contact minibatch size (frames)",
                 [](RunConfig& c, const int& v) { c.contact.batch_size = v; });
  ov.option<double>(app, "--alpha", d.focal.alpha, "Focal loss alpha",
                    [](RunConfig& c, const double& v) { c.contact.focal.alpha = v; });
  ov.option<double>(app, "--gamma", d.focal.gamma, "Focal loss gamma",
                    [](RunConfig& c, const double& v) { c.contact.focal.gamma = v; });
}

void add_action_flags(CLI::App* app, Overrides& ov) {
  const ActionModuleConfig d;
  ov.option<int>(app, "--action-hidden", d.hidden_width, "Action network hidden width",
                 [](RunConfig& c, const int& v) { c.action.hidden_width = v; });
  ov.option<int>(app, "--action-epochs", d.epochs, "Action network epochs",
                 [](RunConfig& c, const int& v) { c.action.epochs = v; });
  ov.option<double>(app, "--action-lr", d.lr, "Action network initial learning rate",
                    [](RunConfig& c, const double& v) { c.action.lr = v; });
  ov.option<double>(app, "--action-lr-decay", d.lr_decay, "Action lr decay factor",
                    [](RunConfig& c, const double& v) { c.action.lr_decay = v; });
  ov.option<int>(app, "--action-lr-period", d.lr_period, "Action lr decay period (epochs)",
                 [](RunConfig& c, const int& v) { c.action.lr_period = v; });
  ov.option<int>(app, "--action-batch", d.batch_size, "Action minibatch size (clips)",
                 [](RunConfig& c, const int& v) { c.action.batch_size = v; });
  ov.option<std::string>(app, "--action-head", to_string(d.head),
                         "Output head: sigmoid_ce or softmax_ce",
                         [](RunConfig& c, const std::string& v) {
                           c.action.head = action_head_from_string(v);
                         });
  ov.option<double>(app, "--lambda", d.lambda, "Joint objective weight (only 0 is supported)",
                    [](RunConfig& c, const double& v) { c.action.lambda = v; });
  ov.flag(app, "--no-contact", "Train on plain skeleton input without contact augmentation",
          [](RunConfig& c) { c.action.augmentation.use_contact = false; });
  ov.flag(app, "--binarize-contact", "Threshold contact probabilities at 0.5",
          [](RunConfig& c) { c.action.augmentation.binarize = true; });
}

RunConfig resolve_config(const std::string& config_path, const Overrides& ov) {
  RunConfig c;
  if (!config_path.empty()) c = load_run_config(config_path, c);
  ov.apply(c);
  c.validate();
  return c;
}

// "x/clips.jsonl" -> "x/contacts.jsonl", "x/test_clips.jsonl" -> "x/test_contacts.jsonl".
fs::path sibling_contacts(const fs::path& clips) {
  std::string name = clips.filename().string();
  const auto pos = name.rfind("clips");
  if (pos == std::string::npos) return {};
  name.replace(pos, 5, "contacts");
  return clips.parent_path() / name;
}

std::vector<ContactSample> resolve_contact_samples(const std::vector<ActionClip>& clips,
                                                   const fs::path& clips_path,
                                                   const std::string& contacts_flag,
                                                   const std::string& meshes_flag,
                                                   const DatasetConfig& config, bool required,
                                                   RunManifest& manifest) {
  fs::path contacts = contacts_flag;
  if (contacts.empty()) {
    const fs::path guess = sibling_contacts(clips_path);
    if (!guess.empty() && fs::exists(guess)) contacts = guess;
  }
  std::vector<ActionClip> prepared;
  for (const ActionClip& c : clips) prepared.push_back(prepare_clip(c, config));
  if (!contacts.empty()) {
    manifest.inputs["contacts"] = contacts.string();
    return load_contact_targets(contacts, prepared, config);
  }
  if (!meshes_flag.empty()) {
    manifest.inputs["meshes"] = meshes_flag;
    return derive_contact_dataset(clips, load_meshes(meshes_flag), config);
  }
  if (required) {
    throw ValidationError("no contact targets: pass --contacts or --meshes");
  }
  return {};
}

ordered_json checkpoint_meta(const std::string& kind, const DatasetConfig& dataset,
                             const ordered_json& training, const TrainingHistory& history) {
  ordered_json j;
  j["kind"] = kind;
  j["dataset"] = to_json(dataset);
  j["training"] = training;
  j["epochs_run"] = history.epoch_loss.size();
  j["final_loss"] = history.epoch_loss.empty() ? 0.0 : history.epoch_loss.back();
  return j;
}

TrainedContactModule load_contact_module(const fs::path& path) {
  TrainedContactModule m;
  m.model = load_checkpoint(path);
  m.frozen = true;
  return m;
}

struct LoadedAction {
  TrainedActionModule module;
  DatasetConfig dataset;
};

LoadedAction load_action_module(const fs::path& path) {
  LoadedAction out;
  out.module.model = load_checkpoint(path);
  const json meta = load_checkpoint_meta(path);
  try {
    out.dataset = dataset_config_from_json(meta.at("dataset"));
    const json& training = meta.at("training");
    out.module.head = action_head_from_string(training.at("action_head").get<std::string>());
    out.module.augmentation = augmentation_from_json(training);
  } catch (const json::exception& e) {
    throw ParseError(checkpoint_meta_path(path).string() + ": " + e.what());
  }
  out.dataset.validate();
  return out;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  SynthSpec spec;
};

int run_synth(const SynthArgs& a, RunManifest& manifest) {
  const SynthDataset data = synth_generate(a.spec);
  const fs::path out = a.out;
  fs::create_directories(out);
  write_clips(out / "clips.jsonl", data.train_clips);
  write_contact_records(out / "contacts.jsonl", data.train_contacts);
  manifest.outputs = {"clips.jsonl", "contacts.jsonl"};
  if (a.spec.test_clips_per_class > 0) {
    write_clips(out / "test_clips.jsonl", data.test_clips);
    write_contact_records(out / "test_contacts.jsonl", data.test_contacts);
    manifest.outputs.push_back("test_clips.jsonl");
    manifest.outputs.push_back("test_contacts.jsonl");
  }
  write_meshes(out / "meshes", data.meshes);
  RunConfig config;
  config.dataset = data.config;
  write_text_atomic(out / "config.json", to_json(config).dump(2) + "\n");
  manifest.outputs.push_back("meshes/");
  manifest.outputs.push_back("config.json");
  manifest.seeds["synth"] = a.spec.seed;
  manifest.config = {{"classes", a.spec.class_count},
                     {"clips_per_class", a.spec.clips_per_class},
                     {"test_clips_per_class", a.spec.test_clips_per_class},
                     {"min_frames", a.spec.min_frames},
                     {"max_frames", a.spec.max_frames},
                     {"noise_sigma", a.spec.noise_sigma}};
  manifest.write(out / "manifest.json");
  return 0;
}

struct CommonArgs {
  std::string data, test, contacts, test_contacts, meshes, config, out, report;
  std::string contact_ckpt, action_ckpt, clip;
};

int run_derive(const CommonArgs& a, const RunConfig& config, RunManifest& manifest) {
  const auto clips = load_clips(a.data, config.dataset);
  const auto meshes = load_meshes(a.meshes);
  const auto records = derive_contact_records(clips, meshes, config.dataset);
  write_contact_records(a.out, records);
  manifest.config = to_json(config.dataset);
  manifest.inputs = {{"clips", a.data}, {"meshes", a.meshes}};
  manifest.outputs = {a.out};
  manifest.write(manifest_for_file(a.out));
  return 0;
}

int run_train_contact(const CommonArgs& a, const RunConfig& config, RunManifest& manifest) {
  const auto clips = load_clips(a.data, config.dataset);
  manifest.inputs["clips"] = a.data;
  const auto samples =
      resolve_contact_samples(clips, a.data, a.contacts, a.meshes, config.dataset, true, manifest);
  const ContactTraining trained = train_contact_module(samples, config.dataset, config.contact);
  save_checkpoint(trained.module.model, a.out);
  save_checkpoint_meta(a.out, checkpoint_meta("contact", config.dataset, to_json(config.contact),
                                              trained.history));
  manifest.config = to_json(config);
  manifest.seeds["contact"] = config.contact.seed;
  manifest.outputs = {a.out, checkpoint_meta_path(a.out).string()};
  manifest.write(manifest_for_file(a.out));
  return 0;
}

int run_train_action(const CommonArgs& a, const RunConfig& config, RunManifest& manifest) {
  const auto clips = load_clips(a.data, config.dataset);
  TrainedContactModule contact;
  if (config.action.augmentation.use_contact) {
    contact = load_contact_module(a.contact_ckpt);
    const auto d = static_cast<Eigen::Index>(config.dataset.frame_dim());
    const auto c = static_cast<Eigen::Index>(config.dataset.contact_dim());
    if (contact.model.input_dim() != d || contact.model.output_dim() != c) {
      throw ShapeError("contact checkpoint widths " + std::to_string(contact.model.input_dim()) +
                       " -> " + std::to_string(contact.model.output_dim()) +
                       " found, expected " + std::to_string(d) + " -> " + std::to_string(c));
    }
    manifest.inputs["contact_ckpt"] = a.contact_ckpt;
  }
  const ActionTraining trained = train_action_module(clips, contact, config.dataset, config.action);
  save_checkpoint(trained.module.model, a.out);
  save_checkpoint_meta(a.out, checkpoint_meta("action", config.dataset, to_json(config.action),
                                              trained.history));
  manifest.inputs["clips"] = a.data;
  manifest.config = to_json(config);
  manifest.seeds["action"] = config.action.seed;
  manifest.outputs = {a.out, checkpoint_meta_path(a.out).string()};
  manifest.write(manifest_for_file(a.out));
  return 0;
}

int run_eval(const CommonArgs& a, RunManifest& manifest) {
  const LoadedAction action = load_action_module(a.action_ckpt);
  const TrainedContactModule contact = load_contact_module(a.contact_ckpt);
  check_module_dims(contact, action.module, action.dataset);
  const auto clips = load_clips(a.data, action.dataset);
  manifest.inputs = {{"clips", a.data},
                     {"contact_ckpt", a.contact_ckpt},
                     {"action_ckpt", a.action_ckpt}};
  const auto samples =
      resolve_contact_samples(clips, a.data, a.contacts, a.meshes, action.dataset, false, manifest);
  const EvalReport report = evaluate(contact, action.module, clips, samples, action.dataset);
  ordered_json provenance;
  provenance["clips"] = fs::path(a.data).filename().string();
  provenance["contact_ckpt"] = fs::path(a.contact_ckpt).filename().string();
  provenance["action_ckpt"] = fs::path(a.action_ckpt).filename().string();
  provenance["dataset"] = to_json(action.dataset);
  provenance["action_head"] = to_string(action.module.head);
  provenance["augmentation"] = to_json(action.module.augmentation);
  write_eval_report(a.report, report, provenance);
  manifest.config = to_json(action.dataset);
  manifest.outputs = {"metrics.json", "confusion.csv", "per_object.csv"};
  manifest.write(fs::path(a.report) / "manifest.json");
  return 0;
}

int run_predict(const CommonArgs& a) {
  const LoadedAction action = load_action_module(a.action_ckpt);
  const TrainedContactModule contact = load_contact_module(a.contact_ckpt);
  check_module_dims(contact, action.module, action.dataset);
  const auto clips = load_clips(a.clip, action.dataset);
  for (const ActionClip& clip : clips) {
    const ActionPrediction p = predict_action(contact, action.module, clip, action.dataset);
    ordered_json j;
    j["clip_id"] = clip.clip_id;
    j["predicted_class"] = p.predicted_class;
    j["probabilities"] = p.probabilities;
    std::cout << j.dump() << "\n";
  }
  return 0;
}

int run_ablation_cmd(const CommonArgs& a, const RunConfig& config, RunManifest& manifest) {
  const auto train = load_clips(a.data, config.dataset);
  const auto test = load_clips(a.test, config.dataset);
  manifest.inputs = {{"clips", a.data}, {"test", a.test}};
  const auto train_samples =
      resolve_contact_samples(train, a.data, a.contacts, a.meshes, config.dataset, true, manifest);
  const auto test_samples = resolve_contact_samples(test, a.test, a.test_contacts, a.meshes,
                                                    config.dataset, false, manifest);
  const AblationReport report = run_ablation(train, train_samples, test, test_samples, config);
  ordered_json provenance;
  provenance["config"] = to_json(config);
  provenance["train_clips"] = train.size();
  provenance["test_clips"] = test.size();
  write_ablation_report(a.report, report, provenance);
  manifest.config = to_json(config);
  manifest.seeds = {{"contact", config.contact.seed}, {"action", config.action.seed}};
  manifest.outputs = {"ablation.csv", "ablation.json"};
  manifest.write(fs::path(a.report) / "manifest.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("CASAR_THREADS")) {
    Eigen::setNbThreads(std::max(1, std::atoi(threads)));
  }

  CLI::App app{"Contact-aware skeletal action recognition"};
  app.require_subcommand(1);
  app.set_version_flag("--version", CASAR_VERSION);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.spec.seed, "Generator seed")->capture_default_str();
  synth_cmd->add_option("--classes", synth.spec.class_count, "Action classes")
      ->capture_default_str();
  synth_cmd->add_option("--clips-per-class", synth.spec.clips_per_class, "Training clips per class")
      ->capture_default_str();
  synth_cmd->add_option("--test-clips-per-class", synth.spec.test_clips_per_class,
                        "Held-out clips per class")
      ->capture_default_str();
  synth_cmd->add_option("--noise", synth.spec.noise_sigma, "Joint noise sigma (m)")
      ->capture_default_str();
  synth_cmd->add_option("--min-frames", synth.spec.min_frames, "Shortest raw clip")
      ->capture_default_str();
  synth_cmd->add_option("--max-frames", synth.spec.max_frames, "Longest raw clip")
      ->capture_default_str();

  CommonArgs common;
  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", common.config, "JSON config (flags override its keys)");
  };

  Overrides derive_ov;
  auto* derive_cmd = app.add_subcommand("derive-contact", "Label contact maps from meshes");
  derive_cmd->add_option("--clips", common.data, "Clips (JSON Lines)")->required();
  derive_cmd->add_option("--meshes", common.meshes, "Mesh directory")->required();
  derive_cmd->add_option("--out", common.out, "Output contacts (JSON Lines)")->required();
  add_config(derive_cmd);
  add_dataset_flags(derive_cmd, derive_ov);

  Overrides contact_ov;
  auto* tc_cmd = app.add_subcommand("train-contact", "Train the contact network");
  tc_cmd->add_option("--data", common.data, "Training clips (JSON Lines)")->required();
  tc_cmd->add_option("--contacts", common.contacts,
                     "Contact targets (default: sibling contacts file)");
  tc_cmd->add_option("--meshes", common.meshes, "Derive targets from meshes instead");
  tc_cmd->add_option("--out", common.out, "Output checkpoint")->required();
  add_config(tc_cmd);
  add_dataset_flags(tc_cmd, contact_ov);
  add_contact_flags(tc_cmd, contact_ov);
  add_seed_flag(tc_cmd, contact_ov);

  Overrides action_ov;
  auto* ta_cmd = app.add_subcommand("train-action", "Train the action network on a frozen contact network");
  ta_cmd->add_option("--data", common.data, "Training clips (JSON Lines)")->required();
  ta_cmd->add_option("--contact-ckpt", common.contact_ckpt, "Contact checkpoint");
  ta_cmd->add_option("--out", common.out, "Output checkpoint")->required();
  add_config(ta_cmd);
  add_dataset_flags(ta_cmd, action_ov);
  add_action_flags(ta_cmd, action_ov);
  add_seed_flag(ta_cmd, action_ov);

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate both networks and write reports");
  eval_cmd->add_option("--data", common.data, "Evaluation clips (JSON Lines)")->required();
  eval_cmd->add_option("--contacts", common.contacts,
                       "Contact targets (default: sibling contacts file)");
  eval_cmd->add_option("--meshes", common.meshes, "Derive contact targets from meshes");
  eval_cmd->add_option("--contact-ckpt", common.contact_ckpt, "Contact checkpoint")->required();
  eval_cmd->add_option("--action-ckpt", common.action_ckpt, "Action checkpoint")->required();
  eval_cmd->add_option("--report", common.report, "Report directory")->required();

  auto* predict_cmd = app.add_subcommand("predict", "Predict the action of each clip in a file");
  predict_cmd->add_option("--clip", common.clip, "Clip(s) (JSON Lines)")->required();
  predict_cmd->add_option("--contact-ckpt", common.contact_ckpt, "Contact checkpoint")->required();
  predict_cmd->add_option("--action-ckpt", common.action_ckpt, "Action checkpoint")->required();

  Overrides ablation_ov;
  auto* abl_cmd = app.add_subcommand("ablation", "Contact-map ablation (4 variants)");
  abl_cmd->add_option("--data", common.data, "Training clips (JSON Lines)")->required();
  abl_cmd->add_option("--test", common.test, "Held-out clips (JSON Lines)")->required();
  abl_cmd->add_option("--contacts", common.contacts, "Training contact targets");
  abl_cmd->add_option("--test-contacts", common.test_contacts, "Held-out contact targets");
  abl_cmd->add_option("--meshes", common.meshes, "Derive contact targets from meshes");
  abl_cmd->add_option("--report", common.report, "Report directory")->required();
  add_config(abl_cmd);
  add_dataset_flags(abl_cmd, ablation_ov);
  add_contact_flags(abl_cmd, ablation_ov);
  add_action_flags(abl_cmd, ablation_ov);
  add_seed_flag(abl_cmd, ablation_ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    report_error("usage", e.what());
    return kExitValidation;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  RunManifest manifest(command, argc, argv);
  try {
    if (command == "synth") return run_synth(synth, manifest);
    if (command == "derive-contact") {
      return run_derive(common, resolve_config(common.config, derive_ov), manifest);
    }
    if (command == "train-contact") {
      return run_train_contact(common, resolve_config(common.config, contact_ov), manifest);
    }
    if (command == "train-action") {
      return run_train_action(common, resolve_config(common.config, action_ov), manifest);
    }
    if (command == "eval") return run_eval(common, manifest);
    if (command == "predict") return run_predict(common);
    if (command == "ablation") {
      return run_ablation_cmd(common, resolve_config(common.config, ablation_ov), manifest);
    }
  } catch (const Error& e) {
    report_error(to_string(e.kind()), e.what());
    return exit_code(e.kind());
  } catch (const fs::filesystem_error& e) {
    report_error("io", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    report_error("internal", e.what());
    return 1;
  }
  return 0;
}
