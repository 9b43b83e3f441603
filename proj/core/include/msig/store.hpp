#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "msig/features.hpp"

namespace msig {

inline constexpr std::uint32_t kStoreFormatVersion = 1;

/// Persistent map from user id to that user's preprocessed reference set.
/// Updates are atomic: the whole store is written to a temporary file, synced,
/// and renamed over the old one while holding an advisory file lock, so a
/// crash mid-update leaves the previous state intact and readers always see
/// a complete snapshot.
class ReferenceStore {
 public:
  /// Opens (and loads) the store at `path`; a missing file is an empty store.
  explicit ReferenceStore(std::filesystem::path path);

  /// Preprocesses the recordings and stores them as the user's references.
  /// Re-enrolling an existing user requires `overwrite`.
  void enroll(const std::string& user_id,
              const std::vector<SignatureRecording>& recordings,
              bool overwrite = false, std::size_t k = kDefaultDctCoefficients);

  /// Stores already-preprocessed references (with a caller-provided content
  /// hash for idempotence checks at the service layer).
  void enroll_compressed(const std::string& user_id,
                         std::vector<CompressedSignature> references,
                         std::uint64_t content_hash, bool overwrite = false);

  ReferenceSet get_references(const std::string& user_id) const;
  bool has_user(const std::string& user_id) const;
  std::vector<std::string> user_ids() const;
  std::int64_t enrolled_at(const std::string& user_id) const;  // unix seconds
  std::uint64_t content_hash(const std::string& user_id) const;
  std::size_t size() const { return entries_.size(); }
  const std::filesystem::path& path() const { return path_; }

  /// Re-reads the backing file, discarding in-memory state.
  void reload();

  /// Clock used for enrollment timestamps; injectable for tests.
  void set_clock(std::function<std::int64_t()> clock);

 private:
  struct Entry {
    std::vector<CompressedSignature> references;
    std::int64_t enrolled_at_unix = 0;
    std::uint64_t content_hash = 0;
  };

  void save() const;

  std::filesystem::path path_;
  std::map<std::string, Entry> entries_;
  std::function<std::int64_t()> clock_;
};

/// Order-sensitive hash of the raw recording payloads; the service uses it to
/// make repeated identical enrollments idempotent.
std::uint64_t recordings_content_hash(const std::vector<SignatureRecording>& recordings);

}  // namespace msig
