#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>

#include "msig/classifiers.hpp"
#include "msig/store.hpp"

namespace msig {

struct ServiceConfig {
  double threshold = 0.5;          // decision is GENUINE iff score >= threshold
  std::int64_t replay_window_s = 120;
  std::size_t n_coefficients = kDefaultDctCoefficients;
};

struct EnrollRequest {
  std::string user_id;
  std::vector<SignatureRecording> recordings;
  bool overwrite = false;
};

struct EnrollResponse {
  std::string user_id;
  std::size_t n_references = 0;
  bool already_enrolled = false;  // identical repeat, kept as-is
};

struct VerifyRequest {
  std::string user_id;
  SignatureRecording recording;
  std::int64_t signed_at_unix = 0;
  std::string nonce;
};

struct VerifyResponse {
  ClassLabel decision = ClassLabel::Forged;
  double score = 0.0;
  std::uint32_t model_version = 0;
};

/// Verification endpoint logic: enrollment delegates to the reference store
/// (idempotent per content hash), verification runs the preprocess →
/// min-DTW features → classifier pipeline against the stored references.
/// Requests are rejected as replays when the signing time falls outside the
/// window around the service clock or the nonce was already seen.
class VerificationService {
 public:
  VerificationService(VerificationModel model, ReferenceStore& store,
                      ServiceConfig config = {},
                      std::function<std::int64_t()> clock = nullptr);

  EnrollResponse handle_enroll(const EnrollRequest& request);
  VerifyResponse handle_verify(const VerifyRequest& request);

  const ServiceConfig& config() const { return config_; }
  const VerificationModel& model() const { return model_; }
  std::size_t enrolled_users() const;

  /// Nonces outside the replay window; exposed to make eviction observable.
  std::size_t live_nonces() const;

 private:
  VerificationModel model_;
  ReferenceStore& store_;
  ServiceConfig config_;
  std::function<std::int64_t()> clock_;

  mutable std::shared_mutex store_mutex_;   // enroll writes, verify reads
  mutable std::mutex nonce_mutex_;
  std::map<std::string, std::int64_t> nonce_seen_at_;
};

}  // namespace msig
