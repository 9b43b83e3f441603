#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "msig/corpus.hpp"

namespace msig {

/// Parses the 10-column CSV recording format (header
/// `t,acc_x,acc_y,acc_z,gacc_x,gacc_y,gacc_z,gvel_x,gvel_y,gvel_z`).
/// The sample rate is inferred from the median timestamp delta; a deviation
/// of more than 10% from the expected 62 Hz appends a warning. Identity
/// metadata is not part of the format and is left unset.
SignatureRecording read_recording(std::istream& source,
                                  std::vector<std::string>* warnings = nullptr);
SignatureRecording read_recording(const std::filesystem::path& path,
                                  std::vector<std::string>* warnings = nullptr);

/// Writes the recording in the same CSV format, timestamps i / sample_rate_hz,
/// all values with 17 significant digits (lossless double round trip).
void write_recording(const SignatureRecording& recording, std::ostream& sink);
void write_recording(const SignatureRecording& recording,
                     const std::filesystem::path& path);

inline constexpr std::uint32_t kManifestFormatVersion = 1;

/// Lays the corpus out as one directory per user plus a `manifest.json`
/// listing every recording with its identity metadata.
void write_corpus(const SignatureCorpus& corpus, const std::filesystem::path& dir);

/// Loads a corpus from a manifest path or a directory containing
/// `manifest.json`. File and shape problems are aggregated into one error
/// naming every offending path rather than stopping at the first.
SignatureCorpus read_corpus(const std::filesystem::path& manifest_or_dir,
                            std::vector<std::string>* warnings = nullptr);

}  // namespace msig
