#include "mvsoft/eval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "mvsoft/error.hpp"
#include "mvsoft/geometry.hpp"

namespace mvsoft {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void count_pos_neg(const std::vector<bool>& same, std::size_t& n_pos,
                   std::size_t& n_neg) {
  n_pos = 0;
  n_neg = 0;
  for (bool s : same) (s ? n_pos : n_neg) += 1;
}

}  // namespace

void validate(const PairSet& pairs) {
  if (pairs.a.rows == 0) throw std::invalid_argument("PairSet: empty");
  if (pairs.b.rows != pairs.a.rows || pairs.same.size() != pairs.a.rows ||
      pairs.a.cols != pairs.b.cols) {
    throw DimensionMismatch("PairSet: side shapes disagree");
  }
  if (!all_finite(pairs.a) || !all_finite(pairs.b)) {
    throw NonFiniteInput("PairSet: non-finite embedding");
  }
}

std::vector<double> verification_scores(const PairSet& pairs) {
  validate(pairs);
  const std::size_t n = pairs.a.rows;
  const std::size_t d = pairs.a.cols;
  std::vector<double> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double na = norm2(pairs.a.row(i), d);
    const double nb = norm2(pairs.b.row(i), d);
    if (na < kNormEpsilon || nb < kNormEpsilon) {
      throw DegenerateNorm("verification_scores: near-zero embedding");
    }
    double c = dot(pairs.a.row(i), pairs.b.row(i), d) / (na * nb);
    scores[i] = std::clamp(c, -1.0, 1.0);
  }
  return scores;
}

std::vector<std::pair<double, double>> tpr_at_far(
    const std::vector<double>& scores, const std::vector<bool>& same,
    const std::vector<double>& far_levels) {
  if (scores.size() != same.size()) {
    throw DimensionMismatch("tpr_at_far: score/label count mismatch");
  }
  if (far_levels.empty()) {
    throw std::invalid_argument("tpr_at_far: no FAR levels requested");
  }
  double min_far = kInf;
  for (double f : far_levels) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw std::invalid_argument("tpr_at_far: FAR level outside (0,1]");
    }
    min_far = std::min(min_far, f);
  }
  std::size_t n_pos = 0, n_neg = 0;
  count_pos_neg(same, n_pos, n_neg);
  if (n_pos == 0) throw std::invalid_argument("tpr_at_far: no positive pairs");
  if (static_cast<double>(n_neg) < 1.0 / min_far) {
    throw InsufficientNegatives(
        "tpr_at_far: too few negatives for the requested FAR");
  }

  std::vector<double> pos, neg;
  pos.reserve(n_pos);
  neg.reserve(n_neg);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    (same[i] ? pos : neg).push_back(scores[i]);
  }
  std::sort(pos.begin(), pos.end());
  std::sort(neg.begin(), neg.end());
  std::vector<double> all(scores);
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());

  auto count_ge = [](const std::vector<double>& v, double t) {
    return static_cast<double>(
        v.end() - std::lower_bound(v.begin(), v.end(), t));
  };

  std::vector<std::pair<double, double>> out;
  out.reserve(far_levels.size());
  for (double f : far_levels) {
    const double budget = f * static_cast<double>(n_neg);
    double tpr = 0.0;
    for (double v : all) {  // ascending: first hit is the smallest threshold
      if (count_ge(neg, v) <= budget) {
        tpr = count_ge(pos, v) / static_cast<double>(n_pos);
        break;
      }
    }
    out.emplace_back(f, tpr);
  }
  return out;
}

std::vector<RocPoint> roc_points(const std::vector<double>& scores,
                                 const std::vector<bool>& same) {
  if (scores.size() != same.size()) {
    throw DimensionMismatch("roc_points: score/label count mismatch");
  }
  std::size_t n_pos = 0, n_neg = 0;
  count_pos_neg(same, n_pos, n_neg);
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("roc_points: need both pair kinds");
  }
  // Walk thresholds from high to low; counts only grow.
  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return scores[i] > scores[j];
  });
  std::vector<RocPoint> out;
  out.push_back({0.0, 0.0, kInf});
  std::size_t tp = 0, fp = 0;
  for (std::size_t r = 0; r < order.size();) {
    const double v = scores[order[r]];
    while (r < order.size() && scores[order[r]] == v) {
      (same[order[r]] ? tp : fp) += 1;
      ++r;
    }
    out.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                   static_cast<double>(tp) / static_cast<double>(n_pos), v});
  }
  out.push_back({1.0, 1.0, -kInf});
  return out;
}

double cmc_rank1(const Mat& probe_embeddings,
                 const std::vector<int>& probe_labels,
                 const Mat& gallery_embeddings,
                 const std::vector<int>& gallery_labels) {
  const std::size_t np = probe_embeddings.rows;
  const std::size_t ng = gallery_embeddings.rows;
  if (np == 0 || ng == 0) {
    throw std::invalid_argument("cmc_rank1: empty probe or gallery");
  }
  if (probe_labels.size() != np || gallery_labels.size() != ng ||
      probe_embeddings.cols != gallery_embeddings.cols) {
    throw DimensionMismatch("cmc_rank1: shape mismatch");
  }
  std::set<int> gal_ids(gallery_labels.begin(), gallery_labels.end());
  for (int y : probe_labels) {
    if (gal_ids.find(y) == gal_ids.end()) {
      throw MissingGalleryIdentity("cmc_rank1: probe identity not in gallery");
    }
  }
  auto [phat, pn] = normalize_rows(probe_embeddings);
  auto [ghat, gn] = normalize_rows(gallery_embeddings);
  const std::size_t d = phat.cols;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < np; ++i) {
    std::size_t best = 0;
    double best_cos = dot(phat.row(i), ghat.row(0), d);
    for (std::size_t j = 1; j < ng; ++j) {
      double c = dot(phat.row(i), ghat.row(j), d);
      if (c > best_cos) {  // strict: ties keep the lower index
        best_cos = c;
        best = j;
      }
    }
    hits += gallery_labels[best] == probe_labels[i];
  }
  return static_cast<double>(hits) / static_cast<double>(np);
}

double pair_accuracy(const std::vector<double>& scores,
                     const std::vector<bool>& same) {
  if (scores.size() != same.size() || scores.empty()) {
    throw std::invalid_argument("pair_accuracy: bad inputs");
  }
  std::size_t n_pos = 0, n_neg = 0;
  count_pos_neg(same, n_pos, n_neg);
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return scores[i] > scores[j];
  });
  // Threshold above every score: accept nothing, every negative is correct.
  std::size_t best_correct = n_neg;
  std::size_t tp = 0, fp = 0;
  for (std::size_t r = 0; r < n;) {
    const double v = scores[order[r]];
    while (r < n && scores[order[r]] == v) {
      (same[order[r]] ? tp : fp) += 1;
      ++r;
    }
    best_correct = std::max(best_correct, tp + (n_neg - fp));
  }
  return static_cast<double>(best_correct) / static_cast<double>(n);
}

double mean_intra_cos(const std::vector<double>& scores,
                      const std::vector<bool>& same) {
  double sum = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (same[i]) {
      sum += scores[i];
      ++cnt;
    }
  }
  if (cnt == 0) throw std::invalid_argument("mean_intra_cos: no positive pairs");
  return sum / static_cast<double>(cnt);
}

double mean_inter_cos(const std::vector<double>& scores,
                      const std::vector<bool>& same) {
  double sum = 0.0;
  std::size_t cnt = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!same[i]) {
      sum += scores[i];
      ++cnt;
    }
  }
  if (cnt == 0) throw std::invalid_argument("mean_inter_cos: no negative pairs");
  return sum / static_cast<double>(cnt);
}

PairSet build_all_pairs(const Mat& embeddings, const std::vector<int>& labels) {
  const std::size_t n = embeddings.rows;
  const std::size_t d = embeddings.cols;
  if (labels.size() != n) {
    throw DimensionMismatch("build_all_pairs: label count mismatch");
  }
  if (n < 2) throw std::invalid_argument("build_all_pairs: need >= 2 rows");
  const std::size_t m = n * (n - 1) / 2;
  PairSet ps;
  ps.a = Mat(m, d);
  ps.b = Mat(m, d);
  ps.same.resize(m);
  std::size_t r = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++r) {
      for (std::size_t c = 0; c < d; ++c) {
        ps.a(r, c) = embeddings(i, c);
        ps.b(r, c) = embeddings(j, c);
      }
      ps.same[r] = labels[i] == labels[j];
    }
  }
  return ps;
}

void split_gallery_probe(const Mat& embeddings, const std::vector<int>& labels,
                         Mat& gallery, std::vector<int>& gallery_labels,
                         Mat& probes, std::vector<int>& probe_labels) {
  const std::size_t n = embeddings.rows;
  const std::size_t d = embeddings.cols;
  if (labels.size() != n) {
    throw DimensionMismatch("split_gallery_probe: label count mismatch");
  }
  std::set<int> seen;
  std::vector<std::size_t> gal_rows, probe_rows;
  for (std::size_t i = 0; i < n; ++i) {
    if (seen.insert(labels[i]).second) {
      gal_rows.push_back(i);
    } else {
      probe_rows.push_back(i);
    }
  }
  auto take = [&](const std::vector<std::size_t>& rows, Mat& out,
                  std::vector<int>& out_labels) {
    out = Mat(rows.size(), d);
    out_labels.resize(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (std::size_t c = 0; c < d; ++c) out(r, c) = embeddings(rows[r], c);
      out_labels[r] = labels[rows[r]];
    }
  };
  take(gal_rows, gallery, gallery_labels);
  take(probe_rows, probes, probe_labels);
}

EvalReport evaluate(const Mat& embeddings, const std::vector<int>& labels,
                    const std::vector<double>& far_levels) {
  PairSet pairs = build_all_pairs(embeddings, labels);
  std::vector<double> scores = verification_scores(pairs);
  EvalReport report;
  report.roc_points = roc_points(scores, pairs.same);
  report.tpr_at_far = tpr_at_far(scores, pairs.same, far_levels);
  report.pair_accuracy = pair_accuracy(scores, pairs.same);
  report.mean_intra_cos = mean_intra_cos(scores, pairs.same);
  report.mean_inter_cos = mean_inter_cos(scores, pairs.same);
  Mat gallery, probes;
  std::vector<int> glab, plab;
  split_gallery_probe(embeddings, labels, gallery, glab, probes, plab);
  if (probes.rows == 0) {
    report.cmc_rank1 = 1.0;  // nothing to rank
  } else {
    report.cmc_rank1 = cmc_rank1(probes, plab, gallery, glab);
  }
  return report;
}

}  // namespace mvsoft
