#pragma once

#include <cstdint>

#include "msig/corpus.hpp"

namespace msig {

/// Knobs for the synthetic signing-motion generator. Each user gets a latent
/// per-channel waveform; genuine samples replay it under mild time warping and
/// noise, skilled forgeries replay it under stronger warping, more noise, and
/// a forger-specific style waveform. Setting the forger levels equal to the
/// genuine ones (and style_bias to 0) produces the indistinguishable null
/// configuration used to probe for pipeline leakage.
struct GeneratorParams {
  std::size_t n_users = 66;
  std::size_t n_genuine = 15;
  std::size_t n_forgers_per_user = 5;
  std::size_t n_forgeries_per_forger = 3;
  double min_duration_s = 1.5;
  double max_duration_s = 4.0;
  double sample_rate_hz = kDefaultSampleRateHz;
  // The forger's tell is mostly the per-channel style waveform; the extra
  // tremor and warping are kept mild so that no single global cue dominates
  // and combining channels genuinely adds information.
  double genuine_noise = 0.08;  // additive tremor sigma on genuine samples
  double forger_noise = 0.12;   // must be >= genuine_noise
  double genuine_warp = 0.02;   // time-warp jitter magnitude
  double forger_warp = 0.03;    // must be >= genuine_warp
  double style_bias = 0.5;      // amplitude of the per-forger style waveform
  std::uint64_t seed = 0;
};

/// Deterministic synthetic corpus: n_users users with n_genuine genuine
/// recordings each, forged by the n_forgers_per_user users that follow them
/// in a seeded random ordering (cyclically), n_forgeries_per_forger each.
SignatureCorpus generate_corpus(const GeneratorParams& params);

}  // namespace msig
