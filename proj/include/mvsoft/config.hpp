#ifndef MVSOFT_CONFIG_HPP_
#define MVSOFT_CONFIG_HPP_

#include <string>
#include <vector>

#include "mvsoft/trainer.hpp"

namespace mvsoft {

struct ExperimentSpec {
  std::string name = "experiment";
  SyntheticSpec dataset;
  TrainConfig train;  // train.loss is ignored; each method supplies its own
  std::vector<double> eval_far_levels{1e-2, 1e-3};
  std::string output_dir = "out";
  std::vector<std::string> methods;  // preset names; empty = full grid
};

void validate(const ExperimentSpec& spec);

// Parse a JSON experiment description. Unknown keys, type mismatches and
// malformed syntax all raise ConfigError with a field path or line/column
// diagnostic.
ExperimentSpec parse_experiment(const std::string& text);

ExperimentSpec load_experiment(const std::string& path);

// Canonical serialisation; parse(serialize(spec)) reproduces spec exactly.
std::string serialize_experiment(const ExperimentSpec& spec);

}  // namespace mvsoft

#endif  // MVSOFT_CONFIG_HPP_
