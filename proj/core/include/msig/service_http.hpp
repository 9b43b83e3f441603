#pragma once

#include <memory>
#include <string>

#include "msig/service.hpp"

namespace msig {

/// JSON encoding of one recording for the wire API: either
/// {"sample_rate_hz": ..., "channels": {"acc_x": [...], ...}} or
/// {"csv": "<recording CSV text>"} on input; output uses the channels form.
std::string recording_to_json_string(const SignatureRecording& recording);
SignatureRecording recording_from_json_string(const std::string& body);

/// HTTP front end for a VerificationService:
///   POST /enroll  {"user_id", "overwrite"?, "recordings": [recording...]}
///   POST /verify  {"user_id", "signed_at", "nonce", "recording"}
///   GET  /health
/// Domain errors map to 400 (malformed), 404 (unknown user), 409 (already
/// enrolled / replay); everything else is 500.
class ServiceServer {
 public:
  explicit ServiceServer(VerificationService& service);
  ~ServiceServer();
  ServiceServer(const ServiceServer&) = delete;
  ServiceServer& operator=(const ServiceServer&) = delete;

  /// Binds to host:port (port 0 picks a free port); returns the bound port
  /// or -1 on failure.
  int bind(const std::string& host, int port);

  /// Serves until stop() is called from another thread. Call bind() first.
  bool serve_forever();

  void stop();
  bool is_running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace msig
