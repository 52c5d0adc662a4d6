#include <cstdint>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mvsoft/config.hpp"
#include "mvsoft/error.hpp"
#include "mvsoft/eval.hpp"
#include "mvsoft/experiment.hpp"
#include "mvsoft/textio.hpp"

namespace {

using mvsoft::ConfigError;
using mvsoft::Mat;
using mvsoft::PairSet;

// One embedding per line: "<label> <v1> ... <vd>".
Mat load_embeddings(const std::string& path, std::vector<int>& labels) {
  std::istringstream in(mvsoft::read_text_file(path));
  std::vector<std::vector<double>> rows;
  labels.clear();
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int label;
    if (!(ls >> label)) {
      throw ConfigError(path + " line " + mvsoft::fmt(static_cast<int>(lineno)) +
                        ": expected an integer label");
    }
    std::vector<double> row;
    double v;
    while (ls >> v) row.push_back(v);
    if (row.empty()) {
      throw ConfigError(path + " line " + mvsoft::fmt(static_cast<int>(lineno)) +
                        ": no embedding values");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw ConfigError(path + " line " + mvsoft::fmt(static_cast<int>(lineno)) +
                        ": inconsistent embedding dimension");
    }
    labels.push_back(label);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ConfigError(path + ": no embeddings");
  Mat m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) m(i, c) = rows[i][c];
  }
  return m;
}

// One pair per line: "<row_a> <row_b> <same 0|1>", indices into the
// embeddings file.
PairSet load_pairs(const std::string& path, const Mat& embeddings) {
  std::istringstream in(mvsoft::read_text_file(path));
  std::vector<std::size_t> ia, ib;
  std::vector<bool> same;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    long long a, b;
    int flag;
    if (!(ls >> a >> b >> flag) || (flag != 0 && flag != 1)) {
      throw ConfigError(path + " line " + mvsoft::fmt(static_cast<int>(lineno)) +
                        ": expected '<row_a> <row_b> <0|1>'");
    }
    if (a < 0 || b < 0 || static_cast<std::size_t>(a) >= embeddings.rows ||
        static_cast<std::size_t>(b) >= embeddings.rows) {
      throw ConfigError(path + " line " + mvsoft::fmt(static_cast<int>(lineno)) +
                        ": row index out of range");
    }
    ia.push_back(static_cast<std::size_t>(a));
    ib.push_back(static_cast<std::size_t>(b));
    same.push_back(flag == 1);
  }
  if (ia.empty()) throw ConfigError(path + ": no pairs");
  PairSet ps;
  ps.a = Mat(ia.size(), embeddings.cols);
  ps.b = Mat(ia.size(), embeddings.cols);
  ps.same = same;
  for (std::size_t r = 0; r < ia.size(); ++r) {
    for (std::size_t c = 0; c < embeddings.cols; ++c) {
      ps.a(r, c) = embeddings(ia[r], c);
      ps.b(r, c) = embeddings(ib[r], c);
    }
  }
  return ps;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normalised-softmax loss family: margins, mining and "
               "mis-classified-vector re-weighting at desk scale"};
  app.require_subcommand(1);

  std::string train_config, train_method, train_out;
  std::uint64_t train_seed = 0;
  auto* train_cmd =
      app.add_subcommand("train", "Train and evaluate methods from a config");
  train_cmd->add_option("--config", train_config, "Experiment config (JSON)")
      ->required();
  train_cmd->add_option("--method", train_method,
                        "Run a single method preset instead of the grid");
  auto* seed_opt =
      train_cmd->add_option("--seed", train_seed, "Override the training seed");
  train_cmd->add_option("--out", train_out, "Override the output directory");

  std::string sweep_config, sweep_method;
  std::vector<double> sweep_ts;
  auto* sweep_cmd = app.add_subcommand(
      "sweep-t", "Train one re-weighting method across several t values");
  sweep_cmd->add_option("--config", sweep_config, "Experiment config (JSON)")
      ->required();
  sweep_cmd->add_option("--method", sweep_method, "Method preset to sweep")
      ->required();
  sweep_cmd->add_option("--t", sweep_ts, "Comma-separated t values")
      ->required()
      ->delimiter(',');

  std::string eval_embeddings, eval_pairs;
  std::vector<double> eval_fars{1e-2, 1e-3};
  auto* eval_cmd = app.add_subcommand(
      "eval", "Verification metrics for stored embeddings and pairs");
  eval_cmd->add_option("--embeddings", eval_embeddings,
                       "Embeddings file: '<label> <v1> ... <vd>' per line")
      ->required();
  eval_cmd->add_option("--pairs", eval_pairs,
                       "Pairs file: '<row_a> <row_b> <0|1>' per line")
      ->required();
  eval_cmd->add_option("--far", eval_fars, "Comma-separated FAR levels")
      ->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*train_cmd) {
      mvsoft::ExperimentSpec spec = mvsoft::load_experiment(train_config);
      if (!train_method.empty()) spec.methods = {train_method};
      if (seed_opt->count() > 0) spec.train.seed = train_seed;
      if (!train_out.empty()) spec.output_dir = train_out;
      mvsoft::validate(spec);
      mvsoft::ExperimentResult res = mvsoft::run_experiment(spec);
      std::cout << res.comparison;
    } else if (*sweep_cmd) {
      mvsoft::ExperimentSpec spec = mvsoft::load_experiment(sweep_config);
      std::cout << mvsoft::sweep_t(spec, sweep_method, sweep_ts);
    } else if (*eval_cmd) {
      std::vector<int> labels;
      Mat emb = load_embeddings(eval_embeddings, labels);
      PairSet pairs = load_pairs(eval_pairs, emb);
      std::vector<double> scores = mvsoft::verification_scores(pairs);
      for (const auto& [far, tpr] :
           mvsoft::tpr_at_far(scores, pairs.same, eval_fars)) {
        std::cout << "tpr_at_far[" << mvsoft::fmt(far)
                  << "]=" << mvsoft::fmt(tpr) << "\n";
      }
      Mat gallery, probes;
      std::vector<int> glab, plab;
      mvsoft::split_gallery_probe(emb, labels, gallery, glab, probes, plab);
      if (probes.rows > 0) {
        std::cout << "cmc_rank1="
                  << mvsoft::fmt(mvsoft::cmc_rank1(probes, plab, gallery, glab))
                  << "\n";
      }
      std::cout << "pair_accuracy="
                << mvsoft::fmt(mvsoft::pair_accuracy(scores, pairs.same))
                << "\n";
      std::cout << "mean_intra_cos="
                << mvsoft::fmt(mvsoft::mean_intra_cos(scores, pairs.same))
                << "\n";
      std::cout << "mean_inter_cos="
                << mvsoft::fmt(mvsoft::mean_inter_cos(scores, pairs.same))
                << "\n";
    }
  } catch (const mvsoft::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
