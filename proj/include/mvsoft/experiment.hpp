#ifndef MVSOFT_EXPERIMENT_HPP_
#define MVSOFT_EXPERIMENT_HPP_

#include <string>
#include <vector>

#include "mvsoft/config.hpp"
#include "mvsoft/eval.hpp"
#include "mvsoft/trainer.hpp"

namespace mvsoft {

struct MethodResult {
  std::string method;
  std::vector<EpochRecord> log;
  EvalReport report;
};

struct ExperimentResult {
  std::vector<MethodResult> methods;
  std::string comparison;  // rendered comparison table
};

// Train + evaluate every method in the grid (the full roster when
// spec.methods is empty). Writes train_log.txt, roc.txt, summary.txt and
// embeddings.txt into <output_dir>/<method>/ plus a cross-method
// comparison.txt, all in round-trip decimal so reruns are byte-identical
// (wall_ms in train_log.txt is the one timing-dependent field).
ExperimentResult run_experiment(const ExperimentSpec& spec);

// One train+eval per t value for a re-weighting method; returns the rendered
// table and writes it to <output_dir>/sweep.txt.
std::string sweep_t(const ExperimentSpec& spec, const std::string& method,
                    const std::vector<double>& t_values);

// Artifact renderers (shared with the CLI and tests).
std::string render_train_log(const std::vector<EpochRecord>& log);
std::string render_roc(const EvalReport& report);
std::string render_summary(const std::string& method, double final_mean_loss,
                           const EvalReport& report);
std::string render_comparison(const std::vector<MethodResult>& methods);
std::string render_embeddings(const Mat& embeddings,
                              const std::vector<int>& labels);

}  // namespace mvsoft

#endif  // MVSOFT_EXPERIMENT_HPP_
