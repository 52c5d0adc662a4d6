#include "mvsoft/config.hpp"

#include <set>
#include <stdexcept>

#include <json.hpp>

#include "mvsoft/error.hpp"
#include "mvsoft/presets.hpp"
#include "mvsoft/textio.hpp"

namespace mvsoft {

namespace {

using nlohmann::json;

// Pulls typed fields out of one JSON object and rejects anything it did not
// recognise, reporting dotted field paths.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ConfigError(path_ + ": expected an object");
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    used_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;  // keep the default
    try {
      it->get_to(out);
    } catch (const json::exception& e) {
      throw ConfigError(path_ + "." + key + ": " + e.what());
    }
  }

  bool has(const char* key) {
    used_.insert(key);
    return j_.find(key) != j_.end();
  }

  const json& sub(const char* key) {
    used_.insert(key);
    return j_.at(key);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (used_.find(it.key()) == used_.end()) {
        throw ConfigError(path_ + "." + it.key() + ": unknown key");
      }
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void read_dataset(const json& j, SyntheticSpec& spec) {
  Section s(j, "dataset");
  s.get("num_classes", spec.num_classes);
  s.get("samples_per_class", spec.samples_per_class);
  s.get("input_dim", spec.input_dim);
  s.get("seed", spec.seed);
  s.get("concentration", spec.concentration);
  s.get("train_fraction", spec.train_fraction);
  s.finish();
}

void read_train(const json& j, TrainConfig& cfg) {
  Section s(j, "train");
  s.get("epochs", cfg.epochs);
  s.get("batch_size", cfg.batch_size);
  s.get("lr", cfg.lr);
  s.get("lr_decay_epochs", cfg.lr_decay_epochs);
  s.get("lr_decay_factor", cfg.lr_decay_factor);
  s.get("momentum", cfg.momentum);
  s.get("weight_decay", cfg.weight_decay);
  s.get("seed", cfg.seed);
  s.get("hidden_dim", cfg.hidden_dim);
  s.get("embed_dim", cfg.embed_dim);
  s.finish();
}

}  // namespace

void validate(const ExperimentSpec& spec) {
  validate(spec.dataset);
  validate(spec.train);
  if (spec.eval_far_levels.empty()) {
    throw ConfigError("eval_far_levels: must not be empty");
  }
  for (double f : spec.eval_far_levels) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw ConfigError("eval_far_levels: levels must lie in (0,1]");
    }
  }
  if (spec.output_dir.empty()) {
    throw ConfigError("output_dir: must not be empty");
  }
  std::set<std::string> seen;
  for (const std::string& m : spec.methods) {
    if (!find_method(m)) {
      std::string msg = "methods: unknown method '" + m + "'; known:";
      for (const std::string& n : method_names()) msg += " " + n;
      throw ConfigError(msg);
    }
    if (!seen.insert(m).second) {
      throw ConfigError("methods: duplicate method '" + m + "'");
    }
  }
}

ExperimentSpec parse_experiment(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config parse error: ") + e.what());
  }
  ExperimentSpec spec;
  Section root(j, "config");
  root.get("name", spec.name);
  if (root.has("dataset")) read_dataset(root.sub("dataset"), spec.dataset);
  if (root.has("train")) read_train(root.sub("train"), spec.train);
  root.get("eval_far_levels", spec.eval_far_levels);
  root.get("output_dir", spec.output_dir);
  root.get("methods", spec.methods);
  root.finish();
  try {
    validate(spec);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  return spec;
}

ExperimentSpec load_experiment(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const std::runtime_error& e) {
    throw ConfigError(e.what());
  }
  return parse_experiment(text);
}

std::string serialize_experiment(const ExperimentSpec& spec) {
  json j;
  j["name"] = spec.name;
  j["dataset"] = {{"num_classes", spec.dataset.num_classes},
                  {"samples_per_class", spec.dataset.samples_per_class},
                  {"input_dim", spec.dataset.input_dim},
                  {"seed", spec.dataset.seed},
                  {"concentration", spec.dataset.concentration},
                  {"train_fraction", spec.dataset.train_fraction}};
  j["train"] = {{"epochs", spec.train.epochs},
                {"batch_size", spec.train.batch_size},
                {"lr", spec.train.lr},
                {"lr_decay_epochs", spec.train.lr_decay_epochs},
                {"lr_decay_factor", spec.train.lr_decay_factor},
                {"momentum", spec.train.momentum},
                {"weight_decay", spec.train.weight_decay},
                {"seed", spec.train.seed},
                {"hidden_dim", spec.train.hidden_dim},
                {"embed_dim", spec.train.embed_dim}};
  j["eval_far_levels"] = spec.eval_far_levels;
  j["output_dir"] = spec.output_dir;
  j["methods"] = spec.methods;
  return j.dump(2) + "\n";
}

}  // namespace mvsoft
