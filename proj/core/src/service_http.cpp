#include "msig/service_http.hpp"

#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "msig/errors.hpp"
#include "msig/io.hpp"

namespace msig {

namespace {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

SignatureRecording recording_from_json(const json& j) {
  if (!j.is_object()) throw MalformedRecording("recording must be a JSON object");
  if (j.contains("csv")) {
    std::istringstream csv(j.at("csv").get<std::string>());
    return read_recording(csv);
  }
  if (!j.contains("channels") || !j.at("channels").is_object()) {
    throw MalformedRecording("recording needs a 'channels' object or a 'csv' string");
  }
  SignatureRecording rec;
  if (j.contains("sample_rate_hz")) {
    if (!j.at("sample_rate_hz").is_number()) {
      throw MalformedRecording("sample_rate_hz must be a number");
    }
    rec.sample_rate_hz = j.at("sample_rate_hz").get<double>();
  }
  const json& channels = j.at("channels");
  for (std::size_t d = 0; d < kNumDimensions; ++d) {
    const std::string name(dimension_name(static_cast<Dimension>(d)));
    if (!channels.contains(name) || !channels.at(name).is_array()) {
      throw MalformedRecording("missing channel array '" + name + "'");
    }
    MotionSignal& sig = rec.signals[d];
    sig.dimension_id = static_cast<Dimension>(d);
    for (const json& v : channels.at(name)) {
      if (!v.is_number()) {
        throw MalformedRecording("channel '" + name + "' holds a non-numeric value");
      }
      sig.samples.push_back(v.get<double>());
    }
  }
  return rec;
}

json error_body(const std::string& type, const std::string& message) {
  return json{{"error", message}, {"type", type}};
}

struct HttpError {
  int status;
  json body;
};

HttpError to_http_error(const Error& e) {
  const std::string what = e.what();
  if (dynamic_cast<const UnknownUser*>(&e) != nullptr) {
    return {404, error_body("unknown_user", what)};
  }
  if (dynamic_cast<const UserAlreadyEnrolled*>(&e) != nullptr) {
    return {409, error_body("already_enrolled", what)};
  }
  if (dynamic_cast<const ReplayRejected*>(&e) != nullptr) {
    return {409, error_body("replay_rejected", what)};
  }
  if (dynamic_cast<const MalformedRecording*>(&e) != nullptr ||
      dynamic_cast<const EmptyEnrollment*>(&e) != nullptr ||
      dynamic_cast<const MalformedHeader*>(&e) != nullptr ||
      dynamic_cast<const RaggedRow*>(&e) != nullptr ||
      dynamic_cast<const NonMonotonicTimestamps*>(&e) != nullptr ||
      dynamic_cast<const EmptyRecording*>(&e) != nullptr ||
      dynamic_cast<const NonFiniteInput*>(&e) != nullptr ||
      dynamic_cast<const InvalidParams*>(&e) != nullptr) {
    return {400, error_body("malformed_request", what)};
  }
  return {500, error_body("internal", what)};
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

}  // namespace

std::string recording_to_json_string(const SignatureRecording& recording) {
  ordered_json j;
  j["sample_rate_hz"] = recording.sample_rate_hz;
  j["channels"] = ordered_json::object();
  for (std::size_t d = 0; d < kNumDimensions; ++d) {
    j["channels"][std::string(dimension_name(static_cast<Dimension>(d)))] =
        recording.signals[d].samples;
  }
  return j.dump();
}

SignatureRecording recording_from_json_string(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::exception& e) {
    throw MalformedRecording(std::string("recording JSON parse error: ") + e.what());
  }
  return recording_from_json(j);
}

struct ServiceServer::Impl {
  VerificationService& service;
  httplib::Server server;

  explicit Impl(VerificationService& svc) : service(svc) {
    server.Post("/enroll", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&]() -> json {
        const json body = json::parse(req.body);
        EnrollRequest er;
        er.user_id = body.at("user_id").get<std::string>();
        er.overwrite = body.value("overwrite", false);
        if (!body.contains("recordings") || !body.at("recordings").is_array()) {
          throw MalformedRecording("'recordings' must be an array");
        }
        for (const json& r : body.at("recordings")) {
          er.recordings.push_back(recording_from_json(r));
        }
        const EnrollResponse out = service.handle_enroll(er);
        res.status = out.already_enrolled ? 200 : 201;
        return json{{"user_id", out.user_id},
                    {"n_references", out.n_references},
                    {"already_enrolled", out.already_enrolled}};
      });
    });

    server.Post("/verify", [this](const httplib::Request& req, httplib::Response& res) {
      handle(res, [&]() -> json {
        const json body = json::parse(req.body);
        VerifyRequest vr;
        vr.user_id = body.at("user_id").get<std::string>();
        vr.signed_at_unix = body.at("signed_at").get<std::int64_t>();
        vr.nonce = body.at("nonce").get<std::string>();
        vr.recording = recording_from_json(body.at("recording"));
        const VerifyResponse out = service.handle_verify(vr);
        res.status = 200;
        return json{{"decision", std::string(label_name(out.decision))},
                    {"score", out.score},
                    {"model_version", out.model_version}};
      });
    });

    server.Get("/health", [this](const httplib::Request&, httplib::Response& res) {
      handle(res, [&]() -> json {
        res.status = 200;
        return json{{"status", "ok"},
                    {"enrolled_users", service.enrolled_users()},
                    {"model", std::string(model_kind_name(service.model().kind))}};
      });
    });
  }

  template <typename Fn>
  void handle(httplib::Response& res, Fn&& fn) {
    try {
      const json body = fn();
      res.set_content(body.dump(), "application/json");
    } catch (const json::exception& e) {
      reply(res, 400, error_body("bad_request", std::string("JSON error: ") + e.what()));
    } catch (const Error& e) {
      const HttpError he = to_http_error(e);
      reply(res, he.status, he.body);
    } catch (const std::exception& e) {
      reply(res, 500, error_body("internal", e.what()));
    }
  }
};

ServiceServer::ServiceServer(VerificationService& service)
    : impl_(std::make_unique<Impl>(service)) {}

ServiceServer::~ServiceServer() {
  if (impl_->server.is_running()) impl_->server.stop();
}

int ServiceServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  if (!impl_->server.bind_to_port(host, port)) return -1;
  return port;
}

bool ServiceServer::serve_forever() { return impl_->server.listen_after_bind(); }

void ServiceServer::stop() { impl_->server.stop(); }

bool ServiceServer::is_running() const { return impl_->server.is_running(); }

}  // namespace msig
