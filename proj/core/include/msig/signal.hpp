#pragma once

#include "msig/types.hpp"

namespace msig {

/// Z-scores a channel: subtracts the mean and divides by the population
/// standard deviation. A near-constant channel (sigma < 1e-12) maps to all
/// zeros instead of erroring.
MotionSignal normalize(const MotionSignal& signal);

/// First k coefficients of the orthonormal DCT-II of the signal. Signals
/// shorter than k are zero-padded so the output width is always k.
CoefficientVector dct_compress(const MotionSignal& signal,
                               std::size_t k = kDefaultDctCoefficients);

/// Normalizes and DCT-compresses each of the nine channels independently;
/// metadata is carried through unchanged.
CompressedSignature preprocess(const SignatureRecording& recording,
                               std::size_t k = kDefaultDctCoefficients);

}  // namespace msig
