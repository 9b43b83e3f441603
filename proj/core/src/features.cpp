#include "msig/features.hpp"

#include <algorithm>
#include <limits>

#include "msig/dtw.hpp"
#include "msig/errors.hpp"

namespace msig {

double dissimilarity(const CompressedSignature& questioned,
                     const CompressedSignature& reference, Dimension d) {
  const auto& q = questioned.vectors[static_cast<std::size_t>(d)].coefficients;
  const auto& r = reference.vectors[static_cast<std::size_t>(d)].coefficients;
  if (q.size() != r.size()) {
    throw DimensionMismatch("coefficient widths differ between signatures");
  }
  return dtw_distance(q, r);
}

FeatureVector extract_features(const CompressedSignature& questioned,
                               const ReferenceSet& refs) {
  if (refs.references.empty()) {
    throw EmptyReferenceSet("reference set must contain at least one signature");
  }
  FeatureVector fv;
  fv.label = questioned.label;
  fv.user_id = questioned.user_id;
  fv.values.resize(kNumDimensions);
  for (std::size_t d = 0; d < kNumDimensions; ++d) {
    double best = std::numeric_limits<double>::infinity();
    for (const CompressedSignature& ref : refs.references) {
      best = std::min(best,
                      dissimilarity(questioned, ref, static_cast<Dimension>(d)));
    }
    fv.values[d] = best;
  }
  return fv;
}

IndexPartition sample_partition(std::size_t n, std::size_t k, Rng& rng) {
  if (k == 0) throw InvalidParams("selection size must be positive");
  if (k > n) {
    throw NotEnoughGenuineSamples("requested more samples than available");
  }
  std::vector<std::size_t> pool(n);
  for (std::size_t i = 0; i < n; ++i) pool[i] = i;
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(pool[i], pool[j]);
  }

  IndexPartition part;
  part.selected.assign(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k));
  std::vector<bool> taken(n, false);
  for (std::size_t idx : part.selected) taken[idx] = true;
  for (std::size_t i = 0; i < n; ++i) {
    if (!taken[i]) part.remainder.push_back(i);
  }
  return part;
}

ReferenceSplit select_references(const std::vector<CompressedSignature>& genuine,
                                 std::size_t n_refs, Rng& rng) {
  const IndexPartition part = sample_partition(genuine.size(), n_refs, rng);
  ReferenceSplit split;
  if (!genuine.empty()) split.references.user_id = genuine.front().user_id;
  for (std::size_t idx : part.selected) {
    split.references.references.push_back(genuine[idx]);
  }
  for (std::size_t idx : part.remainder) {
    split.remainder.push_back(genuine[idx]);
  }
  return split;
}

}  // namespace msig
