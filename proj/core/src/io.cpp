#include "msig/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "msig/errors.hpp"

namespace msig {

namespace {

constexpr const char* kCsvHeader =
    "t,acc_x,acc_y,acc_z,gacc_x,gacc_y,gacc_z,gvel_x,gvel_y,gvel_z";
constexpr double kRateWarnFraction = 0.10;

std::string_view strip_cr(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  return line;
}

double parse_field(std::string_view field, std::size_t line_no) {
  double value = 0.0;
  const char* first = field.data();
  const char* last = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw RaggedRow("line " + std::to_string(line_no) + ": unparsable number '" +
                    std::string(field) + "'");
  }
  return value;
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

SignatureRecording read_recording(std::istream& source,
                                  std::vector<std::string>* warnings) {
  std::string line;
  if (!std::getline(source, line)) throw MalformedHeader("empty input, no header");
  if (strip_cr(line) != kCsvHeader) {
    throw MalformedHeader("expected header '" + std::string(kCsvHeader) + "'");
  }

  SignatureRecording rec;
  for (std::size_t d = 0; d < kNumDimensions; ++d) {
    rec.signals[d].dimension_id = static_cast<Dimension>(d);
  }

  std::vector<double> timestamps;
  std::size_t line_no = 1;
  while (std::getline(source, line)) {
    ++line_no;
    const std::string_view row = strip_cr(line);
    if (row.empty()) continue;

    std::array<double, 10> fields{};
    std::size_t n_fields = 0;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = row.find(',', start);
      const std::string_view field =
          row.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                            : comma - start);
      if (n_fields >= fields.size()) {
        throw RaggedRow("line " + std::to_string(line_no) + ": expected 10 fields");
      }
      fields[n_fields++] = parse_field(field, line_no);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (n_fields != fields.size()) {
      throw RaggedRow("line " + std::to_string(line_no) + ": expected 10 fields, got " +
                      std::to_string(n_fields));
    }

    if (!timestamps.empty() && fields[0] <= timestamps.back()) {
      throw NonMonotonicTimestamps("line " + std::to_string(line_no) +
                                   ": timestamp " + format_value(fields[0]) +
                                   " does not increase past " +
                                   format_value(timestamps.back()));
    }
    timestamps.push_back(fields[0]);
    for (std::size_t d = 0; d < kNumDimensions; ++d) {
      rec.signals[d].samples.push_back(fields[d + 1]);
    }
  }
  if (timestamps.empty()) throw EmptyRecording("no data rows");

  if (timestamps.size() >= 2) {
    std::vector<double> deltas(timestamps.size() - 1);
    for (std::size_t i = 0; i + 1 < timestamps.size(); ++i) {
      deltas[i] = timestamps[i + 1] - timestamps[i];
    }
    std::sort(deltas.begin(), deltas.end());
    const std::size_t mid = deltas.size() / 2;
    const double median_dt = deltas.size() % 2 == 1
                                 ? deltas[mid]
                                 : 0.5 * (deltas[mid - 1] + deltas[mid]);
    rec.sample_rate_hz = 1.0 / median_dt;
    if (warnings != nullptr &&
        std::abs(rec.sample_rate_hz - kDefaultSampleRateHz) >
            kRateWarnFraction * kDefaultSampleRateHz) {
      char buf[128];
      std::snprintf(buf, sizeof(buf),
                    "inferred sample rate %.3f Hz deviates more than 10%% from "
                    "the expected %.0f Hz",
                    rec.sample_rate_hz, kDefaultSampleRateHz);
      warnings->push_back(buf);
    }
  } else {
    rec.sample_rate_hz = kDefaultSampleRateHz;  // single row: nothing to infer
  }
  return rec;
}

SignatureRecording read_recording(const std::filesystem::path& path,
                                  std::vector<std::string>* warnings) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open recording file: " + path.string());
  return read_recording(in, warnings);
}

void write_recording(const SignatureRecording& recording, std::ostream& sink) {
  validate(recording);
  sink << kCsvHeader << '\n';
  const std::size_t n = recording.length();
  for (std::size_t i = 0; i < n; ++i) {
    sink << format_value(static_cast<double>(i) / recording.sample_rate_hz);
    for (std::size_t d = 0; d < kNumDimensions; ++d) {
      sink << ',' << format_value(recording.signals[d].samples[i]);
    }
    sink << '\n';
  }
  if (!sink) throw Error("failed writing recording stream");
}

void write_recording(const SignatureRecording& recording,
                     const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open recording file for writing: " + path.string());
  write_recording(recording, out);
  out.flush();
  if (!out) throw Error("failed writing recording file: " + path.string());
}

void write_corpus(const SignatureCorpus& corpus, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  nlohmann::ordered_json manifest;
  manifest["format_version"] = kManifestFormatVersion;
  manifest["users"] = nlohmann::ordered_json::array();

  for (const UserRecord& user : corpus.users) {
    std::filesystem::create_directories(dir / user.user_id);
    nlohmann::ordered_json entry;
    entry["user_id"] = user.user_id;
    entry["genuine"] = nlohmann::ordered_json::array();
    entry["forgeries"] = nlohmann::ordered_json::array();

    char name[32];
    for (std::size_t i = 0; i < user.genuine.size(); ++i) {
      std::snprintf(name, sizeof(name), "g%03zu.csv", i);
      const std::filesystem::path rel = std::filesystem::path(user.user_id) / name;
      write_recording(user.genuine[i], dir / rel);
      entry["genuine"].push_back(rel.generic_string());
    }
    for (std::size_t i = 0; i < user.skilled_forgeries.size(); ++i) {
      std::snprintf(name, sizeof(name), "f%03zu.csv", i);
      const std::filesystem::path rel = std::filesystem::path(user.user_id) / name;
      write_recording(user.skilled_forgeries[i], dir / rel);
      nlohmann::ordered_json fentry;
      fentry["path"] = rel.generic_string();
      fentry["forger_id"] = user.skilled_forgeries[i].forger_id;
      entry["forgeries"].push_back(std::move(fentry));
    }
    manifest["users"].push_back(std::move(entry));
  }

  const std::filesystem::path manifest_path = dir / "manifest.json";
  std::ofstream out(manifest_path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write manifest: " + manifest_path.string());
  out << manifest.dump(2) << '\n';
  out.flush();
  if (!out) throw Error("failed writing manifest: " + manifest_path.string());
}

SignatureCorpus read_corpus(const std::filesystem::path& manifest_or_dir,
                            std::vector<std::string>* warnings) {
  std::filesystem::path manifest_path = manifest_or_dir;
  if (std::filesystem::is_directory(manifest_path)) {
    manifest_path /= "manifest.json";
  }
  if (!std::filesystem::exists(manifest_path)) {
    throw ManifestNotFound("no manifest at " + manifest_path.string());
  }

  nlohmann::json manifest;
  {
    std::ifstream in(manifest_path, std::ios::binary);
    if (!in) throw ManifestNotFound("cannot open " + manifest_path.string());
    try {
      in >> manifest;
    } catch (const nlohmann::json::exception& e) {
      throw CorpusLoadError("manifest parse error in " + manifest_path.string() +
                            ": " + e.what());
    }
  }
  if (!manifest.contains("format_version") ||
      !manifest["format_version"].is_number_unsigned() ||
      manifest["format_version"].get<std::uint32_t>() != kManifestFormatVersion) {
    throw VersionMismatch("manifest format_version must be " +
                          std::to_string(kManifestFormatVersion));
  }

  const std::filesystem::path base = manifest_path.parent_path();
  SignatureCorpus corpus;
  std::vector<std::string> errors;

  auto load_one = [&](const std::string& rel, const std::string& user_id,
                      ClassLabel label, const std::string& forger_id,
                      std::vector<SignatureRecording>& into) {
    const std::filesystem::path path = base / rel;
    if (!std::filesystem::exists(path)) {
      errors.push_back("missing recording file: " + path.string());
      return;
    }
    try {
      SignatureRecording rec = read_recording(path, warnings);
      rec.user_id = user_id;
      rec.label = label;
      rec.forger_id = forger_id;
      into.push_back(std::move(rec));
    } catch (const Error& e) {
      errors.push_back(path.string() + ": " + e.what());
    }
  };

  try {
    for (const auto& entry : manifest.at("users")) {
      UserRecord user;
      user.user_id = entry.at("user_id").get<std::string>();
      for (const auto& rel : entry.at("genuine")) {
        load_one(rel.get<std::string>(), user.user_id, ClassLabel::Genuine, "",
                 user.genuine);
      }
      for (const auto& fentry : entry.at("forgeries")) {
        load_one(fentry.at("path").get<std::string>(), user.user_id,
                 ClassLabel::Forged, fentry.at("forger_id").get<std::string>(),
                 user.skilled_forgeries);
      }
      corpus.users.push_back(std::move(user));
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorpusLoadError("manifest structure error in " + manifest_path.string() +
                          ": " + e.what());
  }

  for (const std::string& violation : corpus_violations(corpus)) {
    errors.push_back("shape violation: " + violation);
  }
  if (!errors.empty()) {
    std::string joined = std::to_string(errors.size()) + " corpus error(s): ";
    for (std::size_t i = 0; i < errors.size(); ++i) {
      if (i > 0) joined += "; ";
      joined += errors[i];
    }
    throw CorpusLoadError(joined);
  }
  return corpus;
}

}  // namespace msig
