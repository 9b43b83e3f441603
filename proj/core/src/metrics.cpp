#include "msig/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "msig/errors.hpp"

namespace msig {

namespace {

struct Counts {
  std::size_t genuine = 0;
  std::size_t forged = 0;
};

Counts check_scores(std::span<const ScoredSample> scores) {
  Counts c;
  for (const ScoredSample& s : scores) {
    if (!std::isfinite(s.score)) throw NonFiniteInput("non-finite score");
    if (s.label == ClassLabel::Genuine) {
      ++c.genuine;
    } else if (s.label == ClassLabel::Forged) {
      ++c.forged;
    } else {
      throw SingleClassScores("scores must be labeled GENUINE or FORGED");
    }
  }
  if (c.genuine == 0 || c.forged == 0) {
    throw SingleClassScores("need at least one score of each class");
  }
  return c;
}

}  // namespace

double compute_auc(std::span<const ScoredSample> scores) {
  const Counts c = check_scores(scores);
  const std::size_t n = scores.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return scores[i].score < scores[j].score;
  });

  // Sum of tie-averaged 1-based ranks over the genuine samples.
  double genuine_rank_sum = 0.0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && scores[order[j]].score == scores[order[i]].score) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + 1 + j);  // (i+1 + j)/2
    for (std::size_t t = i; t < j; ++t) {
      if (scores[order[t]].label == ClassLabel::Genuine) {
        genuine_rank_sum += avg_rank;
      }
    }
    i = j;
  }

  const double ng = static_cast<double>(c.genuine);
  const double nf = static_cast<double>(c.forged);
  const double u = genuine_rank_sum - ng * (ng + 1.0) / 2.0;
  return u / (ng * nf);
}

double compute_eer(std::span<const ScoredSample> scores) {
  const Counts c = check_scores(scores);

  std::vector<double> thresholds;
  thresholds.reserve(scores.size());
  for (const ScoredSample& s : scores) thresholds.push_back(s.score);
  std::sort(thresholds.begin(), thresholds.end());
  thresholds.erase(std::unique(thresholds.begin(), thresholds.end()),
                   thresholds.end());

  const double ng = static_cast<double>(c.genuine);
  const double nf = static_cast<double>(c.forged);
  auto rates_at = [&](double t) {
    std::size_t accepted_forged = 0, rejected_genuine = 0;
    for (const ScoredSample& s : scores) {
      if (s.label == ClassLabel::Forged && s.score >= t) ++accepted_forged;
      if (s.label == ClassLabel::Genuine && s.score < t) ++rejected_genuine;
    }
    return std::pair<double, double>{static_cast<double>(accepted_forged) / nf,
                                     static_cast<double>(rejected_genuine) / ng};
  };

  // FAR - FRR is non-increasing in t: it starts at +1 for t = min score and
  // reaches -1 past the max score, so a sign change always exists.
  double prev_far = 1.0, prev_frr = 0.0, prev_diff = 1.0;
  bool have_prev = false;
  for (double t : thresholds) {
    const auto [far, frr] = rates_at(t);
    const double diff = far - frr;
    if (diff == 0.0) return 0.5 * (far + frr);
    if (diff < 0.0) {
      if (!have_prev) return 0.5 * (far + frr);  // unreachable: diff(min)=1
      const double alpha = prev_diff / (prev_diff - diff);
      const double at_prev = 0.5 * (prev_far + prev_frr);
      const double at_curr = 0.5 * (far + frr);
      return at_prev + alpha * (at_curr - at_prev);
    }
    prev_far = far;
    prev_frr = frr;
    prev_diff = diff;
    have_prev = true;
  }

  // Crossing lies between the max score and the "reject everything" point
  // (FAR 0, FRR 1).
  const double alpha = prev_diff / (prev_diff + 1.0);
  const double at_prev = 0.5 * (prev_far + prev_frr);
  return at_prev + alpha * (0.5 - at_prev);
}

}  // namespace msig
