#ifndef MVSOFT_EVAL_HPP_
#define MVSOFT_EVAL_HPP_

#include <utility>
#include <vector>

#include "mvsoft/matrix.hpp"

namespace mvsoft {

// Verification pairs, row i of `a` paired with row i of `b`.
struct PairSet {
  Mat a;
  Mat b;
  std::vector<bool> same;  // true when the two sides share an identity
};

void validate(const PairSet& pairs);

struct RocPoint {
  double far = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct EvalReport {
  std::vector<RocPoint> roc_points;
  std::vector<std::pair<double, double>> tpr_at_far;  // (far level, tpr)
  double cmc_rank1 = 0.0;
  double pair_accuracy = 0.0;
  double mean_intra_cos = 0.0;
  double mean_inter_cos = 0.0;
};

// Cosine similarity of the normalised embeddings, one score per pair.
std::vector<double> verification_scores(const PairSet& pairs);

// For each FAR level: threshold = the smallest observed score v with
// (#negatives >= v) <= far * #negatives; TPR = fraction of positives >= v.
// When no observed score qualifies (mass ties at the top), TPR is 0.
std::vector<std::pair<double, double>> tpr_at_far(
    const std::vector<double>& scores, const std::vector<bool>& same,
    const std::vector<double>& far_levels);

// One point per distinct score threshold (accept when score >= threshold),
// plus the (0,0,+inf) and (1,1,-inf) endpoints, ordered by increasing FAR.
std::vector<RocPoint> roc_points(const std::vector<double>& scores,
                                 const std::vector<bool>& same);

// Fraction of probes whose highest-cosine gallery row shares the probe's
// label; cosine ties resolve to the lower gallery index.
double cmc_rank1(const Mat& probe_embeddings, const std::vector<int>& probe_labels,
                 const Mat& gallery_embeddings,
                 const std::vector<int>& gallery_labels);

// Accuracy of the accept-if-score>=threshold rule at the best threshold
// (candidates: every distinct score, plus reject-everything).
double pair_accuracy(const std::vector<double>& scores,
                     const std::vector<bool>& same);

// Mean score over positive pairs / negative pairs.
double mean_intra_cos(const std::vector<double>& scores,
                      const std::vector<bool>& same);
double mean_inter_cos(const std::vector<double>& scores,
                      const std::vector<bool>& same);

// All unordered pairs (i < j) over the given embeddings.
PairSet build_all_pairs(const Mat& embeddings, const std::vector<int>& labels);

// Deterministic identification split: the first row of each class becomes the
// gallery entry, everything else a probe.
void split_gallery_probe(const Mat& embeddings, const std::vector<int>& labels,
                         Mat& gallery, std::vector<int>& gallery_labels,
                         Mat& probes, std::vector<int>& probe_labels);

// Score-based metrics + identification in one report.
EvalReport evaluate(const Mat& embeddings, const std::vector<int>& labels,
                    const std::vector<double>& far_levels);

}  // namespace mvsoft

#endif  // MVSOFT_EVAL_HPP_
