#include "msig/types.hpp"

#include <cmath>

#include "msig/errors.hpp"

namespace msig {

namespace {

constexpr std::array<std::string_view, kNumDimensions> kDimensionNames = {
    "acc_x", "acc_y", "acc_z", "gacc_x", "gacc_y",
    "gacc_z", "gvel_x", "gvel_y", "gvel_z"};

}  // namespace

std::string_view dimension_name(Dimension d) {
  return kDimensionNames[static_cast<std::size_t>(d)];
}

std::optional<Dimension> dimension_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kNumDimensions; ++i) {
    if (kDimensionNames[i] == name) return static_cast<Dimension>(i);
  }
  return std::nullopt;
}

std::string_view label_name(ClassLabel label) {
  switch (label) {
    case ClassLabel::Genuine: return "GENUINE";
    case ClassLabel::Forged: return "FORGED";
    case ClassLabel::Unknown: return "UNKNOWN";
  }
  return "UNKNOWN";
}

void validate(const SignatureRecording& recording) {
  if (recording.sample_rate_hz <= 0.0) {
    throw InvalidParams("sample_rate_hz must be positive");
  }
  const std::size_t n = recording.signals[0].samples.size();
  if (n == 0) throw EmptyRecording("recording has no samples");
  for (std::size_t d = 0; d < kNumDimensions; ++d) {
    const MotionSignal& signal = recording.signals[d];
    if (signal.dimension_id != static_cast<Dimension>(d)) {
      throw DimensionMismatch("signal stored under wrong dimension slot");
    }
    if (signal.samples.size() != n) {
      throw DimensionMismatch("channels of a recording must share one length");
    }
    for (double v : signal.samples) {
      if (!std::isfinite(v)) {
        throw NonFiniteInput(std::string("non-finite sample in channel ") +
                             std::string(dimension_name(signal.dimension_id)));
      }
    }
  }
}

}  // namespace msig
