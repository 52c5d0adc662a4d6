#include "mvsoft/experiment.hpp"

#include <algorithm>
#include <filesystem>
#include <stdexcept>

#include "mvsoft/error.hpp"
#include "mvsoft/presets.hpp"
#include "mvsoft/textio.hpp"

namespace mvsoft {

namespace {

namespace fs = std::filesystem;

std::string pad_left(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

std::string pad_right(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : s + std::string(w - s.size(), ' ');
}

void write_method_artifacts(const std::string& dir, const MethodResult& mr,
                            const Mat& embeddings,
                            const std::vector<int>& labels) {
  fs::create_directories(dir);
  write_text_file(dir + "/train_log.txt", render_train_log(mr.log));
  write_text_file(dir + "/roc.txt", render_roc(mr.report));
  write_text_file(dir + "/summary.txt",
                  render_summary(mr.method, mr.log.back().mean_loss, mr.report));
  write_text_file(dir + "/embeddings.txt",
                  render_embeddings(embeddings, labels));
}

}  // namespace

std::string render_train_log(const std::vector<EpochRecord>& log) {
  std::string out;
  for (const EpochRecord& r : log) {
    out += "epoch=" + fmt(r.epoch) + " lr=" + fmt(r.lr) +
           " mean_loss=" + fmt(r.mean_loss) +
           " median_misclass_count=" + fmt(r.median_misclass_count) +
           " wall_ms=" + fmt(r.wall_ms) + "\n";
  }
  return out;
}

std::string render_roc(const EvalReport& report) {
  std::string out = "# far tpr threshold\n";
  for (const RocPoint& p : report.roc_points) {
    out += fmt(p.far) + " " + fmt(p.tpr) + " " + fmt(p.threshold) + "\n";
  }
  return out;
}

std::string render_summary(const std::string& method, double final_mean_loss,
                           const EvalReport& report) {
  std::string out;
  out += "method=" + method + "\n";
  out += "final_mean_loss=" + fmt(final_mean_loss) + "\n";
  for (const auto& [far, tpr] : report.tpr_at_far) {
    out += "tpr_at_far[" + fmt(far) + "]=" + fmt(tpr) + "\n";
  }
  out += "cmc_rank1=" + fmt(report.cmc_rank1) + "\n";
  out += "pair_accuracy=" + fmt(report.pair_accuracy) + "\n";
  out += "mean_intra_cos=" + fmt(report.mean_intra_cos) + "\n";
  out += "mean_inter_cos=" + fmt(report.mean_inter_cos) + "\n";
  return out;
}

std::string render_comparison(const std::vector<MethodResult>& methods) {
  if (methods.empty()) return "";
  std::vector<std::string> header{"method", "final_mean_loss"};
  for (const auto& [far, tpr] : methods.front().report.tpr_at_far) {
    header.push_back("tpr_at_far[" + fmt(far) + "]");
  }
  header.insert(header.end(), {"cmc_rank1", "pair_accuracy", "mean_intra_cos",
                               "mean_inter_cos"});
  std::vector<std::vector<std::string>> rows;
  for (const MethodResult& m : methods) {
    std::vector<std::string> row{m.method, fmt(m.log.back().mean_loss)};
    for (const auto& [far, tpr] : m.report.tpr_at_far) row.push_back(fmt(tpr));
    row.push_back(fmt(m.report.cmc_rank1));
    row.push_back(fmt(m.report.pair_accuracy));
    row.push_back(fmt(m.report.mean_intra_cos));
    row.push_back(fmt(m.report.mean_inter_cos));
    rows.push_back(std::move(row));
  }
  std::vector<std::size_t> widths(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    widths[c] = header[c].size();
    for (const auto& row : rows) widths[c] = std::max(widths[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c) out += "  ";
      out += c == 0 ? pad_right(cells[c], widths[c])
                    : pad_left(cells[c], widths[c]);
    }
    out += "\n";
    return out;
  };
  std::string out = line(header);
  for (const auto& row : rows) out += line(row);
  return out;
}

std::string render_embeddings(const Mat& embeddings,
                              const std::vector<int>& labels) {
  if (labels.size() != embeddings.rows) {
    throw DimensionMismatch("render_embeddings: label count mismatch");
  }
  std::string out;
  for (std::size_t i = 0; i < embeddings.rows; ++i) {
    out += fmt(labels[i]);
    for (std::size_t c = 0; c < embeddings.cols; ++c) {
      out += " " + fmt(embeddings(i, c));
    }
    out += "\n";
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  validate(spec);
  std::vector<std::string> names = spec.methods;
  if (names.empty()) names = method_names();
  SyntheticData data = generate_synthetic(spec.dataset);
  fs::create_directories(spec.output_dir);

  ExperimentResult result;
  for (const std::string& name : names) {
    const MethodPreset* preset = find_method(name);
    if (!preset) throw ConfigError("unknown method '" + name + "'");
    TrainConfig tc = spec.train;
    tc.loss = preset->loss;
    TrainResult tr = train(tc, data.train);
    Mat emb = backbone_forward(tr.backbone, data.test.inputs);
    MethodResult mr;
    mr.method = name;
    mr.log = std::move(tr.log);
    mr.report = evaluate(emb, data.test.labels, spec.eval_far_levels);
    write_method_artifacts(spec.output_dir + "/" + name, mr, emb,
                           data.test.labels);
    result.methods.push_back(std::move(mr));
  }
  result.comparison = render_comparison(result.methods);
  write_text_file(spec.output_dir + "/comparison.txt", result.comparison);
  return result;
}

std::string sweep_t(const ExperimentSpec& spec, const std::string& method,
                    const std::vector<double>& t_values) {
  validate(spec);
  if (t_values.empty()) throw EmptySweep("sweep_t: empty t list");
  const MethodPreset* preset = find_method(method);
  if (!preset) throw ConfigError("unknown method '" + method + "'");
  if (preset->loss.mv_mode == MvMode::off) {
    throw ConfigError("sweep_t: '" + method + "' has no re-weighting mode");
  }
  SyntheticData data = generate_synthetic(spec.dataset);

  std::string out;
  for (double t : t_values) {
    TrainConfig tc = spec.train;
    tc.loss = preset->loss;
    tc.loss.t = t;
    TrainResult tr = train(tc, data.train);
    Mat emb = backbone_forward(tr.backbone, data.test.inputs);
    EvalReport report = evaluate(emb, data.test.labels, spec.eval_far_levels);
    out += "t=" + fmt(t) + " final_mean_loss=" + fmt(tr.log.back().mean_loss);
    for (const auto& [far, tpr] : report.tpr_at_far) {
      out += " tpr_at_far[" + fmt(far) + "]=" + fmt(tpr);
    }
    out += " cmc_rank1=" + fmt(report.cmc_rank1) +
           " pair_accuracy=" + fmt(report.pair_accuracy) + "\n";
  }
  fs::create_directories(spec.output_dir);
  write_text_file(spec.output_dir + "/sweep.txt", out);
  return out;
}

}  // namespace mvsoft
