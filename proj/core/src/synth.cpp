#include "msig/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <vector>

#include "msig/errors.hpp"
#include "msig/rng.hpp"

namespace msig {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
// Component frequencies stay below ~2.2 Hz so the first 20 DCT coefficients
// capture the waveform even for the longest (4 s) signatures.
constexpr double kMinFreqHz = 0.3;
constexpr double kMaxFreqHz = 2.2;
constexpr double kStyleMinFreqHz = 0.2;
constexpr double kStyleMaxFreqHz = 0.6;
// Z channels carry attenuated motion (the template and tremor both scale
// down, being hand movement) while the device noise floor — dominated by
// gravity-compensation residue on the vertical axis — stays at full scale.
// The forger's style habits (slant, stroke curvature) live almost entirely
// in the writing plane, so the style waveform attenuates even harder on Z.
// Together these make Z the least informative axis.
constexpr double kZAttenuation = 0.4;
constexpr double kZStyleAttenuation = 0.15;
constexpr double kZNoiseFloor = 0.15;
// Per-recording effects shared by all nine channels (duration jitter, the
// time-warp realization) correlate the channels' distance features; keeping
// them small lets multi-channel models aggregate genuinely independent cues.
constexpr double kDurationJitter = 0.02;

struct Component {
  double freq = 0.0;
  double phase = 0.0;
  double amp = 0.0;
};

struct Waveform {
  std::array<std::vector<Component>, kNumDimensions> channels;

  double value(std::size_t dim, double t) const {
    double v = 0.0;
    for (const Component& c : channels[dim]) {
      v += c.amp * std::sin(kTwoPi * c.freq * t + c.phase);
    }
    return v;
  }
};

bool is_z_channel(std::size_t dim) { return dim % 3 == 2; }

Waveform make_template(std::uint64_t seed, const std::string& user_id) {
  Rng rng = keyed_rng(seed, {hash_key("template"), hash_key(user_id)});
  Waveform wf;
  for (std::size_t d = 0; d < kNumDimensions; ++d) {
    const std::size_t n_components = 4 + static_cast<std::size_t>(rng.below(5));
    wf.channels[d].reserve(n_components);
    for (std::size_t c = 0; c < n_components; ++c) {
      Component comp;
      comp.freq = rng.uniform(kMinFreqHz, kMaxFreqHz);
      comp.phase = rng.uniform(0.0, kTwoPi);
      comp.amp = rng.uniform(0.5, 1.5);
      if (is_z_channel(d)) comp.amp *= kZAttenuation;
      wf.channels[d].push_back(comp);
    }
  }
  return wf;
}

Waveform make_style(std::uint64_t seed, const std::string& forger_id) {
  Rng rng = keyed_rng(seed, {hash_key("style"), hash_key(forger_id)});
  Waveform wf;
  for (std::size_t d = 0; d < kNumDimensions; ++d) {
    for (std::size_t c = 0; c < 2; ++c) {
      Component comp;
      comp.freq = rng.uniform(kStyleMinFreqHz, kStyleMaxFreqHz);
      comp.phase = rng.uniform(0.0, kTwoPi);
      comp.amp = rng.uniform(0.5, 1.5);
      if (is_z_channel(d)) comp.amp *= kZStyleAttenuation;
      wf.channels[d].push_back(comp);
    }
  }
  return wf;
}

double base_duration(std::uint64_t seed, const std::string& user_id,
                     const GeneratorParams& p) {
  Rng rng = keyed_rng(seed, {hash_key("duration"), hash_key(user_id)});
  return rng.uniform(p.min_duration_s, p.max_duration_s);
}

/// Monotone warp of [0,1]: normalized cumulative sum of positive increments.
/// magnitude 0 yields the identity grid.
std::vector<double> warp_grid(std::size_t n, double magnitude, Rng& rng) {
  std::vector<double> w(n, 0.0);
  double total = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    total += std::exp(magnitude * rng.normal());
    w[i] = total;
  }
  if (total > 0.0) {
    for (double& x : w) x /= total;
  }
  return w;
}

SignatureRecording sample_recording(const Waveform& tpl, const Waveform* style,
                                    double style_amp, double warp_mag,
                                    double noise_sigma, double duration,
                                    const GeneratorParams& p, Rng& rng) {
  const double jittered =
      std::clamp(duration * (1.0 + kDurationJitter * rng.normal()),
                 p.min_duration_s, p.max_duration_s);
  const std::size_t n = std::max<std::size_t>(
      2, static_cast<std::size_t>(std::llround(jittered * p.sample_rate_hz)));

  const std::vector<double> grid = warp_grid(n, warp_mag, rng);

  SignatureRecording rec;
  rec.sample_rate_hz = p.sample_rate_hz;
  for (std::size_t d = 0; d < kNumDimensions; ++d) {
    MotionSignal& sig = rec.signals[d];
    sig.dimension_id = static_cast<Dimension>(d);
    sig.samples.resize(n);
    // noise_sigma models hand tremor, which attenuates on Z with the rest of
    // the motion; the class-independent device floor does not.
    double sigma = noise_sigma;
    if (is_z_channel(d)) {
      sigma = std::hypot(noise_sigma * kZAttenuation, kZNoiseFloor);
    }
    for (std::size_t i = 0; i < n; ++i) {
      const double t = grid[i] * jittered;
      double v = tpl.value(d, t);
      if (style != nullptr) v += style_amp * style->value(d, t);
      v += sigma * rng.normal();
      sig.samples[i] = v;
    }
  }
  return rec;
}

std::string user_name(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "u%03zu", index + 1);
  return buf;
}

void check_params(const GeneratorParams& p) {
  if (p.n_users < 2) throw InvalidParams("n_users must be >= 2");
  if (p.n_genuine == 0) throw InvalidParams("n_genuine must be >= 1");
  if (p.n_forgers_per_user == 0) throw InvalidParams("n_forgers_per_user must be >= 1");
  if (p.n_forgers_per_user >= p.n_users) {
    throw InvalidParams("n_forgers_per_user must be smaller than n_users");
  }
  if (p.n_forgeries_per_forger == 0) {
    throw InvalidParams("n_forgeries_per_forger must be >= 1");
  }
  if (!(p.min_duration_s > 0.0) || !(p.max_duration_s >= p.min_duration_s)) {
    throw InvalidParams("duration range must be positive and ordered");
  }
  if (!(p.sample_rate_hz > 0.0)) throw InvalidParams("sample_rate_hz must be positive");
  if (p.genuine_noise < 0.0 || p.forger_noise < p.genuine_noise) {
    throw InvalidParams("noise levels must satisfy 0 <= genuine <= forger");
  }
  if (p.genuine_warp < 0.0 || p.forger_warp < p.genuine_warp) {
    throw InvalidParams("warp levels must satisfy 0 <= genuine <= forger");
  }
  if (p.style_bias < 0.0) throw InvalidParams("style_bias must be >= 0");
}

}  // namespace

SignatureCorpus generate_corpus(const GeneratorParams& params) {
  check_params(params);
  const std::size_t n = params.n_users;

  std::vector<std::string> ids(n);
  for (std::size_t i = 0; i < n; ++i) ids[i] = user_name(i);

  // Seeded forger ring: each user forges the next n_forgers_per_user users
  // in a shuffled ordering, so everyone forges and is forged equally often.
  std::vector<std::size_t> ring(n);
  std::iota(ring.begin(), ring.end(), std::size_t{0});
  Rng order_rng = keyed_rng(params.seed, {hash_key("forger-order")});
  order_rng.shuffle(ring);
  std::vector<std::size_t> position(n);
  for (std::size_t p = 0; p < n; ++p) position[ring[p]] = p;

  std::vector<Waveform> templates(n);
  std::vector<Waveform> styles(n);
  std::vector<double> durations(n);
  for (std::size_t i = 0; i < n; ++i) {
    templates[i] = make_template(params.seed, ids[i]);
    styles[i] = make_style(params.seed, ids[i]);
    durations[i] = base_duration(params.seed, ids[i], params);
  }

  SignatureCorpus corpus;
  corpus.users.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    UserRecord& user = corpus.users[i];
    user.user_id = ids[i];

    user.genuine.reserve(params.n_genuine);
    for (std::size_t j = 0; j < params.n_genuine; ++j) {
      Rng rng = keyed_rng(params.seed, {hash_key("genuine"), hash_key(ids[i]), j});
      SignatureRecording rec =
          sample_recording(templates[i], nullptr, 0.0, params.genuine_warp,
                           params.genuine_noise, durations[i], params, rng);
      rec.user_id = ids[i];
      rec.label = ClassLabel::Genuine;
      user.genuine.push_back(std::move(rec));
    }

    user.skilled_forgeries.reserve(params.n_forgers_per_user *
                                   params.n_forgeries_per_forger);
    const std::size_t pos = position[i];
    for (std::size_t f = 1; f <= params.n_forgers_per_user; ++f) {
      // The forger is the user f places BEFORE this one in the ring (so each
      // user forges the next n_forgers_per_user users).
      const std::size_t forger = ring[(pos + n - f) % n];
      for (std::size_t c = 0; c < params.n_forgeries_per_forger; ++c) {
        Rng rng = keyed_rng(params.seed, {hash_key("forgery"), hash_key(ids[i]),
                                          hash_key(ids[forger]), c});
        SignatureRecording rec = sample_recording(
            templates[i], &styles[forger], params.style_bias, params.forger_warp,
            params.forger_noise, durations[i], params, rng);
        rec.user_id = ids[i];
        rec.label = ClassLabel::Forged;
        rec.forger_id = ids[forger];
        user.skilled_forgeries.push_back(std::move(rec));
      }
    }
  }
  return corpus;
}

}  // namespace msig
