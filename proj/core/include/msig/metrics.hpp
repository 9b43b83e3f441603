#pragma once

#include <span>

#include "msig/types.hpp"

namespace msig {

struct ScoredSample {
  double score = 0.0;
  ClassLabel label = ClassLabel::Unknown;  // Genuine or Forged
};

/// Mann-Whitney AUC: fraction of (genuine, forged) pairs where the genuine
/// sample scores strictly higher, ties counted 0.5. Computed via tie-averaged
/// ranks, which equals exhaustive pair counting exactly.
double compute_auc(std::span<const ScoredSample> scores);

/// Equal error rate. Sweeps all distinct score thresholds with
/// FAR(t) = P(forged score >= t) and FRR(t) = P(genuine score < t), returning
/// (FAR+FRR)/2 at the crossing and interpolating linearly between the two
/// adjacent thresholds that bracket FAR = FRR.
double compute_eer(std::span<const ScoredSample> scores);

}  // namespace msig
