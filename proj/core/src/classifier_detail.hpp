#pragma once

#include "msig/classifiers.hpp"

namespace msig::detail {

/// Throws unless both classes are present and all widths match the mask.
void check_training_set(const TrainingSet& ts);

TrainingMetadata make_metadata(const TrainingSet& ts, std::uint64_t seed);

}  // namespace msig::detail
