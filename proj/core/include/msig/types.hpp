#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace msig {

/// The nine motion channels of a recording, in canonical order:
/// accelerometer X/Y/Z, gyroscope acceleration X/Y/Z, gyroscope velocity X/Y/Z.
enum class Dimension : std::uint8_t {
  AccelX = 0,
  AccelY,
  AccelZ,
  GyroAccelX,
  GyroAccelY,
  GyroAccelZ,
  GyroVelX,
  GyroVelY,
  GyroVelZ,
};

inline constexpr std::size_t kNumDimensions = 9;
inline constexpr std::size_t kDefaultDctCoefficients = 20;
inline constexpr double kDefaultSampleRateHz = 62.0;

std::string_view dimension_name(Dimension d);
std::optional<Dimension> dimension_from_name(std::string_view name);

enum class ClassLabel : std::uint8_t { Genuine, Forged, Unknown };

std::string_view label_name(ClassLabel label);

/// One sensor channel of a signing event.
struct MotionSignal {
  std::vector<double> samples;
  Dimension dimension_id = Dimension::AccelX;
};

/// Raw 9-channel time series for one signing event. All channels share the
/// same length; `forger_id` is non-empty exactly when `label` is Forged.
struct SignatureRecording {
  std::array<MotionSignal, kNumDimensions> signals{};  // indexed by Dimension
  double sample_rate_hz = kDefaultSampleRateHz;
  std::string user_id;
  ClassLabel label = ClassLabel::Unknown;
  std::string forger_id;

  std::size_t length() const { return signals[0].samples.size(); }
};

/// Throws if the recording breaks a structural invariant (9 equal-length
/// non-empty channels, finite values, positive sample rate).
void validate(const SignatureRecording& recording);

/// The leading DCT coefficients of one normalized channel.
struct CoefficientVector {
  std::vector<double> coefficients;
  Dimension dimension_id = Dimension::AccelX;
};

/// Normalized, DCT-truncated representation of a recording: one coefficient
/// vector per channel, metadata carried through from the recording.
struct CompressedSignature {
  std::array<CoefficientVector, kNumDimensions> vectors{};
  std::string user_id;
  ClassLabel label = ClassLabel::Unknown;
  std::string forger_id;
};

}  // namespace msig
