#include "msig/service.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>

#include "msig/errors.hpp"
#include "msig/signal.hpp"

namespace msig {

namespace {

std::int64_t wall_clock_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

/// Projects a full-width feature vector onto the model's channel mask.
FeatureVector apply_mask(const FeatureVector& fv,
                         const std::vector<std::uint8_t>& mask) {
  FeatureVector out;
  out.label = fv.label;
  out.user_id = fv.user_id;
  out.values.reserve(mask.size());
  for (std::uint8_t i : mask) {
    if (i >= fv.values.size()) {
      throw FeatureWidthMismatch("model mask indexes channel " + std::to_string(i) +
                                 " outside the feature vector");
    }
    out.values.push_back(fv.values[i]);
  }
  return out;
}

}  // namespace

VerificationService::VerificationService(VerificationModel model,
                                         ReferenceStore& store,
                                         ServiceConfig config,
                                         std::function<std::int64_t()> clock)
    : model_(std::move(model)),
      store_(store),
      config_(config),
      clock_(clock ? std::move(clock) : wall_clock_seconds) {
  if (!(config_.threshold >= 0.0 && config_.threshold <= 1.0)) {
    throw InvalidParams("threshold must be in [0, 1]");
  }
  if (config_.replay_window_s <= 0) {
    throw InvalidParams("replay window must be positive");
  }
  if (config_.n_coefficients == 0) {
    throw InvalidParams("n_coefficients must be >= 1");
  }
}

EnrollResponse VerificationService::handle_enroll(const EnrollRequest& request) {
  if (request.user_id.empty()) throw MalformedRecording("user_id must be non-empty");
  if (request.recordings.empty()) {
    throw EmptyEnrollment("enrollment needs at least one recording");
  }
  for (const SignatureRecording& rec : request.recordings) {
    try {
      validate(rec);
    } catch (const Error& e) {
      throw MalformedRecording(std::string("invalid recording: ") + e.what());
    }
  }

  const std::unique_lock<std::shared_mutex> lock(store_mutex_);
  const std::uint64_t hash = recordings_content_hash(request.recordings);
  if (store_.has_user(request.user_id)) {
    if (!request.overwrite && store_.content_hash(request.user_id) == hash) {
      // Identical repeat: acknowledge without touching state.
      return {request.user_id,
              store_.get_references(request.user_id).references.size(), true};
    }
    if (!request.overwrite) {
      throw UserAlreadyEnrolled(request.user_id +
                                " is already enrolled with different references");
    }
  }
  store_.enroll(request.user_id, request.recordings, request.overwrite,
                config_.n_coefficients);
  return {request.user_id, request.recordings.size(), false};
}

VerifyResponse VerificationService::handle_verify(const VerifyRequest& request) {
  if (request.user_id.empty()) throw MalformedRecording("user_id must be non-empty");
  if (request.nonce.empty()) throw MalformedRecording("nonce must be non-empty");

  const std::int64_t now = clock_();
  if (std::llabs(now - request.signed_at_unix) > config_.replay_window_s) {
    throw ReplayRejected("signing time is outside the " +
                         std::to_string(config_.replay_window_s) + " s window");
  }
  {
    const std::lock_guard<std::mutex> lock(nonce_mutex_);
    // Evict nonces old enough that the window rule alone would reject them.
    for (auto it = nonce_seen_at_.begin(); it != nonce_seen_at_.end();) {
      if (now - it->second > 2 * config_.replay_window_s) {
        it = nonce_seen_at_.erase(it);
      } else {
        ++it;
      }
    }
    const auto [it, inserted] = nonce_seen_at_.emplace(request.nonce, now);
    if (!inserted) throw ReplayRejected("nonce already seen");
  }

  ReferenceSet refs;
  {
    const std::shared_lock<std::shared_mutex> lock(store_mutex_);
    refs = store_.get_references(request.user_id);  // UnknownUser propagates
  }

  FeatureVector features;
  try {
    validate(request.recording);
    const CompressedSignature compressed =
        preprocess(request.recording, config_.n_coefficients);
    features = extract_features(compressed, refs);
  } catch (const Error& e) {
    throw MalformedRecording(std::string("cannot score recording: ") + e.what());
  }

  const FeatureVector masked = apply_mask(features, model_.feature_mask);
  const double score = predict_score(model_, masked).probability_genuine;
  VerifyResponse response;
  response.score = score;
  response.decision = score >= config_.threshold ? ClassLabel::Genuine : ClassLabel::Forged;
  response.model_version = kModelFormatVersion;
  return response;
}

std::size_t VerificationService::enrolled_users() const {
  const std::shared_lock<std::shared_mutex> lock(store_mutex_);
  return store_.size();
}

std::size_t VerificationService::live_nonces() const {
  const std::lock_guard<std::mutex> lock(nonce_mutex_);
  return nonce_seen_at_.size();
}

}  // namespace msig
