#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "msig/corpus.hpp"
#include "msig/rng.hpp"
#include "msig/synth.hpp"
#include "msig/types.hpp"

namespace testutil {

/// Unique scratch directory, removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl =
        (std::filesystem::temp_directory_path() / "msig-test-XXXXXX").string();
    if (::mkdtemp(tmpl.data()) == nullptr) {
      throw std::runtime_error("mkdtemp failed");
    }
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const {
    return path_ / name;
  }

 private:
  std::filesystem::path path_;
};

inline msig::SignatureRecording random_recording(std::uint64_t seed,
                                                 std::size_t length = 40,
                                                 const std::string& user = "",
                                                 msig::ClassLabel label =
                                                     msig::ClassLabel::Unknown) {
  msig::Rng rng(seed);
  msig::SignatureRecording rec;
  rec.user_id = user;
  rec.label = label;
  for (std::size_t d = 0; d < msig::kNumDimensions; ++d) {
    rec.signals[d].dimension_id = static_cast<msig::Dimension>(d);
    rec.signals[d].samples.resize(length);
    for (double& v : rec.signals[d].samples) v = rng.uniform(-2.0, 2.0);
  }
  return rec;
}

/// Small corpus with the real generator, sized for fast unit tests.
inline msig::SignatureCorpus small_corpus(std::size_t n_users = 6,
                                          std::uint64_t seed = 11,
                                          std::size_t n_genuine = 15) {
  msig::GeneratorParams params;
  params.n_users = n_users;
  params.n_genuine = n_genuine;
  params.n_forgers_per_user = std::min<std::size_t>(3, n_users - 1);
  params.n_forgeries_per_forger = 2;
  params.min_duration_s = 0.8;
  params.max_duration_s = 1.4;
  params.seed = seed;
  return msig::generate_corpus(params);
}

}  // namespace testutil
