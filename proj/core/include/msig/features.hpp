#pragma once

#include <string>
#include <vector>

#include "msig/rng.hpp"
#include "msig/types.hpp"

namespace msig {

/// Enrolled genuine signatures of one user, already preprocessed.
struct ReferenceSet {
  std::string user_id;
  std::vector<CompressedSignature> references;
};

/// Per-channel minimal DTW dissimilarity of a questioned signature against a
/// reference set, in canonical dimension order.
struct FeatureVector {
  std::vector<double> values;
  ClassLabel label = ClassLabel::Unknown;
  std::string user_id;
};

/// DTW distance between the d-th coefficient vectors of the two signatures.
double dissimilarity(const CompressedSignature& questioned,
                     const CompressedSignature& reference, Dimension d);

/// Component d = min over references of dissimilarity(questioned, ref, d);
/// label and user_id are copied from the questioned signature.
FeatureVector extract_features(const CompressedSignature& questioned,
                               const ReferenceSet& refs);

/// Draws k of n indices without replacement (selected in draw order);
/// the remainder keeps the original order.
struct IndexPartition {
  std::vector<std::size_t> selected;
  std::vector<std::size_t> remainder;
};
IndexPartition sample_partition(std::size_t n, std::size_t k, Rng& rng);

struct ReferenceSplit {
  ReferenceSet references;
  std::vector<CompressedSignature> remainder;
};

/// Seeded random reference selection. Callers key the stream per user, e.g.
/// keyed_rng(seed, {hash_key(user_id)}), so partitions do not depend on
/// corpus iteration order.
ReferenceSplit select_references(const std::vector<CompressedSignature>& genuine,
                                 std::size_t n_refs, Rng& rng);

}  // namespace msig
