#include "msig/signal.hpp"

#include <cmath>
#include <numbers>

#include "msig/errors.hpp"

namespace msig {

namespace {

constexpr double kDegenerateSigma = 1e-12;

void require_finite(const MotionSignal& signal) {
  for (double v : signal.samples) {
    if (!std::isfinite(v)) {
      throw NonFiniteInput(std::string("non-finite value in channel ") +
                           std::string(dimension_name(signal.dimension_id)));
    }
  }
}

}  // namespace

MotionSignal normalize(const MotionSignal& signal) {
  const std::size_t n = signal.samples.size();
  if (n == 0) throw EmptySequence("cannot normalize an empty signal");
  require_finite(signal);

  double mean = 0.0;
  for (double v : signal.samples) mean += v;
  mean /= static_cast<double>(n);

  double var = 0.0;
  for (double v : signal.samples) {
    const double d = v - mean;
    var += d * d;
  }
  const double sigma = std::sqrt(var / static_cast<double>(n));

  MotionSignal out;
  out.dimension_id = signal.dimension_id;
  out.samples.resize(n);
  if (sigma < kDegenerateSigma) {
    // Constant channel: no shape information, map to zeros.
    return out;
  }
  for (std::size_t i = 0; i < n; ++i) {
    out.samples[i] = (signal.samples[i] - mean) / sigma;
  }
  return out;
}

CoefficientVector dct_compress(const MotionSignal& signal, std::size_t k) {
  if (k == 0) throw InvalidParams("dct_compress requires k >= 1");
  const std::size_t n = signal.samples.size();
  if (n == 0) throw EmptySequence("cannot transform an empty signal");
  require_finite(signal);

  CoefficientVector out;
  out.dimension_id = signal.dimension_id;
  out.coefficients.assign(k, 0.0);

  // Direct orthonormal DCT-II; N is a few hundred at most, so O(N*k) is fine.
  const double w0 = std::sqrt(1.0 / static_cast<double>(n));
  const double wj = std::sqrt(2.0 / static_cast<double>(n));
  const std::size_t m = std::min(k, n);
  for (std::size_t j = 0; j < m; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double angle = std::numbers::pi *
                           (2.0 * static_cast<double>(i) + 1.0) *
                           static_cast<double>(j) /
                           (2.0 * static_cast<double>(n));
      acc += signal.samples[i] * std::cos(angle);
    }
    out.coefficients[j] = (j == 0 ? w0 : wj) * acc;
  }
  return out;
}

CompressedSignature preprocess(const SignatureRecording& recording,
                               std::size_t k) {
  validate(recording);
  CompressedSignature out;
  out.user_id = recording.user_id;
  out.label = recording.label;
  out.forger_id = recording.forger_id;
  for (std::size_t d = 0; d < kNumDimensions; ++d) {
    out.vectors[d] = dct_compress(normalize(recording.signals[d]), k);
  }
  return out;
}

}  // namespace msig
