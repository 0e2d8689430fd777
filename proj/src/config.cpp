#include "casar/config.hpp"

#include <set>

#include "casar/dataset_io.hpp"
#include "casar/error.hpp"

namespace casar {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::string to_string(ActionHead head) {
  return head == ActionHead::softmax_ce ? "softmax_ce" : "sigmoid_ce";
}

ActionHead action_head_from_string(const std::string& name) {
  if (name == "sigmoid_ce") return ActionHead::sigmoid_ce;
  if (name == "softmax_ce") return ActionHead::softmax_ce;
  throw ValidationError("unknown action_head '" + name + "' (sigmoid_ce | softmax_ce)");
}

void ContactModuleConfig::validate() const {
  if (hidden_width < 1) throw ValidationError("contact hidden_width must be >= 1");
  if (batch_size < 1) throw ValidationError("contact batch_size must be >= 1");
  focal.validate();
  schedule().validate();
}

void ActionModuleConfig::validate() const {
  if (hidden_width < 1) throw ValidationError("action hidden_width must be >= 1");
  if (batch_size < 1) throw ValidationError("action batch_size must be >= 1");
  if (!(lambda >= 0.0)) throw ValidationError("lambda must be >= 0");
  schedule().validate();
}

void RunConfig::validate() const {
  dataset.validate();
  contact.validate();
  action.validate();
}

ordered_json to_json(const DatasetConfig& c) {
  ordered_json j;
  j["hands"] = c.hands;
  j["joints_per_hand"] = c.joints_per_hand;
  j["object_class_count"] = c.object_class_count;
  j["action_class_count"] = c.action_class_count;
  j["frames_per_clip"] = c.frames_per_clip;
  j["eta_c"] = c.thresholds.eta_c;
  j["eta_d"] = c.thresholds.eta_d;
  j["center_per_clip"] = c.center_per_clip;
  return j;
}

ordered_json to_json(const ContactModuleConfig& c) {
  ordered_json j;
  j["hidden_width"] = c.hidden_width;
  j["epochs"] = c.epochs;
  j["lr"] = c.lr;
  j["lr_decay"] = c.lr_decay;
  j["lr_period"] = c.lr_period;
  j["alpha"] = c.focal.alpha;
  j["gamma"] = c.focal.gamma;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  return j;
}

ordered_json to_json(const AugmentationSpec& a) {
  ordered_json j;
  j["use_contact"] = a.use_contact;
  j["binarize_contact"] = a.binarize;
  j["mask_contact"] = a.mask_contact;
  j["mask_distant"] = a.mask_distant;
  return j;
}

ordered_json to_json(const ActionModuleConfig& c) {
  ordered_json j;
  j["hidden_width"] = c.hidden_width;
  j["epochs"] = c.epochs;
  j["lr"] = c.lr;
  j["lr_decay"] = c.lr_decay;
  j["lr_period"] = c.lr_period;
  j["batch_size"] = c.batch_size;
  j["seed"] = c.seed;
  j["lambda"] = c.lambda;
  j["action_head"] = to_string(c.head);
  const ordered_json aug = to_json(c.augmentation);
  for (const auto& [k, v] : aug.items()) j[k] = v;
  return j;
}

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["dataset"] = to_json(c.dataset);
  j["contact"] = to_json(c.contact);
  j["action"] = to_json(c.action);
  return j;
}

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const char* section) {
  if (!j.is_object()) throw ValidationError(std::string(section) + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      throw ValidationError("unknown config key '" + std::string(section) + "." + it.key() +
                            "'");
    }
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError(std::string("config key '") + key + "' has the wrong type");
  }
}

}  // namespace

DatasetConfig dataset_config_from_json(const json& j, DatasetConfig c) {
  reject_unknown(j,
                 {"hands", "joints_per_hand", "object_class_count", "action_class_count",
                  "frames_per_clip", "eta_c", "eta_d", "center_per_clip"},
                 "dataset");
  read(j, "hands", c.hands);
  read(j, "joints_per_hand", c.joints_per_hand);
  read(j, "object_class_count", c.object_class_count);
  read(j, "action_class_count", c.action_class_count);
  read(j, "frames_per_clip", c.frames_per_clip);
  read(j, "eta_c", c.thresholds.eta_c);
  read(j, "eta_d", c.thresholds.eta_d);
  read(j, "center_per_clip", c.center_per_clip);
  return c;
}

AugmentationSpec augmentation_from_json(const json& j, AugmentationSpec a) {
  read(j, "use_contact", a.use_contact);
  read(j, "binarize_contact", a.binarize);
  read(j, "mask_contact", a.mask_contact);
  read(j, "mask_distant", a.mask_distant);
  return a;
}

RunConfig run_config_from_json(const json& j, RunConfig c) {
  reject_unknown(j, {"dataset", "contact", "action"}, "config");
  if (j.contains("dataset")) c.dataset = dataset_config_from_json(j.at("dataset"), c.dataset);
  if (j.contains("contact")) {
    const json& s = j.at("contact");
    reject_unknown(s,
                   {"hidden_width", "epochs", "lr", "lr_decay", "lr_period", "alpha", "gamma",
                    "batch_size", "seed"},
                   "contact");
    read(s, "hidden_width", c.contact.hidden_width);
    read(s, "epochs", c.contact.epochs);
    read(s, "lr", c.contact.lr);
    read(s, "lr_decay", c.contact.lr_decay);
    read(s, "lr_period", c.contact.lr_period);
    read(s, "alpha", c.contact.focal.alpha);
    read(s, "gamma", c.contact.focal.gamma);
    read(s, "batch_size", c.contact.batch_size);
    read(s, "seed", c.contact.seed);
  }
  if (j.contains("action")) {
    const json& s = j.at("action");
    reject_unknown(s,
                   {"hidden_width", "epochs", "lr", "lr_decay", "lr_period", "batch_size",
                    "seed", "lambda", "action_head", "use_contact", "binarize_contact",
                    "mask_contact", "mask_distant"},
                   "action");
    read(s, "hidden_width", c.action.hidden_width);
    read(s, "epochs", c.action.epochs);
    read(s, "lr", c.action.lr);
    read(s, "lr_decay", c.action.lr_decay);
    read(s, "lr_period", c.action.lr_period);
    read(s, "batch_size", c.action.batch_size);
    read(s, "seed", c.action.seed);
    read(s, "lambda", c.action.lambda);
    if (s.contains("action_head")) {
      std::string head;
      read(s, "action_head", head);
      c.action.head = action_head_from_string(head);
    }
    c.action.augmentation = augmentation_from_json(s, c.action.augmentation);
  }
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path, RunConfig base) {
  const std::string text = read_text(path);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ParseError(path + ": " + e.what());
  }
  return run_config_from_json(j, base);
}

}  // namespace casar
