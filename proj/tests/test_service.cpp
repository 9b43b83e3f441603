#include <atomic>
#include <string>
#include <thread>
#include <vector>

#include <doctest.h>

#include "msig/classifiers.hpp"
#include "msig/errors.hpp"
#include "msig/service.hpp"
#include "msig/store.hpp"
#include "msig/synth.hpp"
#include "helpers.hpp"

namespace {

/// One trained model plus the corpus it was fitted on, shared by the service
/// tests (training once keeps the suite fast).
struct Fixture {
  msig::SignatureCorpus corpus;
  msig::VerificationModel model;

  Fixture()
      : corpus(testutil::small_corpus()),
        model(msig::train_logistic(msig::build_training_set(corpus, 7))) {}
};

const Fixture& fixture() {
  static const Fixture f;
  return f;
}

std::vector<msig::SignatureRecording> first_genuine(const msig::UserRecord& user,
                                                    std::size_t n) {
  return {user.genuine.begin(), user.genuine.begin() + n};
}

msig::VerifyRequest verify_request(const std::string& user_id,
                                   msig::SignatureRecording rec,
                                   std::int64_t at, std::string nonce) {
  msig::VerifyRequest req;
  req.user_id = user_id;
  req.recording = std::move(rec);
  req.signed_at_unix = at;
  req.nonce = std::move(nonce);
  return req;
}

}  // namespace

TEST_CASE("enrollment is idempotent per content and guarded otherwise") {
  const Fixture& f = fixture();
  testutil::TempDir dir;
  msig::ReferenceStore store(dir / "refs.bin");
  msig::VerificationService service(f.model, store);

  msig::EnrollRequest req;
  req.user_id = "u001";
  req.recordings = first_genuine(f.corpus.users[0], 5);

  const msig::EnrollResponse created = service.handle_enroll(req);
  CHECK(created.user_id == "u001");
  CHECK(created.n_references == 5);
  CHECK(!created.already_enrolled);
  CHECK(service.enrolled_users() == 1);

  // The identical payload is acknowledged, not re-written.
  const msig::EnrollResponse repeat = service.handle_enroll(req);
  CHECK(repeat.already_enrolled);
  CHECK(repeat.n_references == 5);
  CHECK(service.enrolled_users() == 1);

  // Different references for an enrolled user conflict unless overwriting.
  msig::EnrollRequest changed = req;
  changed.recordings = first_genuine(f.corpus.users[0], 6);
  CHECK_THROWS_AS(service.handle_enroll(changed), msig::UserAlreadyEnrolled);
  changed.overwrite = true;
  const msig::EnrollResponse replaced = service.handle_enroll(changed);
  CHECK(!replaced.already_enrolled);
  CHECK(replaced.n_references == 6);
}

TEST_CASE("verification separates the signer from a skilled forger") {
  const Fixture& f = fixture();
  testutil::TempDir dir;
  msig::ReferenceStore store(dir / "refs.bin");

  std::int64_t now = 1700000000;
  msig::VerificationService service(f.model, store, {}, [&now] { return now; });

  const msig::UserRecord& user = f.corpus.users[1];
  msig::EnrollRequest enroll;
  enroll.user_id = user.user_id;
  enroll.recordings = first_genuine(user, 5);
  service.handle_enroll(enroll);

  const msig::VerifyResponse own = service.handle_verify(
      verify_request(user.user_id, user.genuine[10], now, "n1"));
  CHECK(own.decision == msig::ClassLabel::Genuine);
  CHECK(own.score >= 0.5);
  CHECK(own.model_version == msig::kModelFormatVersion);

  const msig::VerifyResponse forged = service.handle_verify(
      verify_request(user.user_id, user.skilled_forgeries[0], now, "n2"));
  CHECK(forged.score < own.score);
}

TEST_CASE("replay protection covers nonces and signing times") {
  const Fixture& f = fixture();
  testutil::TempDir dir;
  msig::ReferenceStore store(dir / "refs.bin");

  std::int64_t now = 1700000000;
  msig::ServiceConfig cfg;
  cfg.replay_window_s = 600;
  msig::VerificationService service(f.model, store, cfg, [&now] { return now; });

  const msig::UserRecord& user = f.corpus.users[0];
  msig::EnrollRequest enroll;
  enroll.user_id = user.user_id;
  enroll.recordings = first_genuine(user, 5);
  service.handle_enroll(enroll);

  const msig::SignatureRecording probe = user.genuine[9];

  SUBCASE("a reused nonce is rejected") {
    service.handle_verify(verify_request(user.user_id, probe, now, "once"));
    CHECK_THROWS_AS(
        service.handle_verify(verify_request(user.user_id, probe, now, "once")),
        msig::ReplayRejected);
    // A fresh nonce still passes.
    CHECK_NOTHROW(
        service.handle_verify(verify_request(user.user_id, probe, now, "twice")));
  }

  SUBCASE("signing times outside the window are rejected in both directions") {
    CHECK_THROWS_AS(service.handle_verify(verify_request(
                        user.user_id, probe, now - cfg.replay_window_s - 1, "old")),
                    msig::ReplayRejected);
    CHECK_THROWS_AS(service.handle_verify(verify_request(
                        user.user_id, probe, now + cfg.replay_window_s + 1, "future")),
                    msig::ReplayRejected);
    CHECK_NOTHROW(service.handle_verify(verify_request(
        user.user_id, probe, now - cfg.replay_window_s, "edge")));
  }

  SUBCASE("nonces are evicted once the window rule alone protects them") {
    service.handle_verify(verify_request(user.user_id, probe, now, "n1"));
    service.handle_verify(verify_request(user.user_id, probe, now, "n2"));
    CHECK(service.live_nonces() == 2);

    now += 2 * cfg.replay_window_s + 1;
    service.handle_verify(verify_request(user.user_id, probe, now, "n3"));
    CHECK(service.live_nonces() == 1);  // n1/n2 evicted, n3 live
  }
}

TEST_CASE("verify rejects unknown users and malformed requests") {
  const Fixture& f = fixture();
  testutil::TempDir dir;
  msig::ReferenceStore store(dir / "refs.bin");
  std::int64_t now = 1700000000;
  msig::VerificationService service(f.model, store, {}, [&now] { return now; });

  const msig::SignatureRecording probe = f.corpus.users[0].genuine[0];
  CHECK_THROWS_AS(service.handle_verify(verify_request("ghost", probe, now, "n")),
                  msig::UnknownUser);
  CHECK_THROWS_AS(service.handle_verify(verify_request("", probe, now, "n")),
                  msig::MalformedRecording);
  CHECK_THROWS_AS(service.handle_verify(verify_request("ghost", probe, now, "")),
                  msig::MalformedRecording);

  msig::EnrollRequest enroll;
  enroll.user_id = "u001";
  enroll.recordings = first_genuine(f.corpus.users[0], 5);
  service.handle_enroll(enroll);

  msig::SignatureRecording ragged = probe;
  ragged.signals[2].samples.resize(3);
  CHECK_THROWS_AS(
      service.handle_verify(verify_request("u001", ragged, now, "n2")),
      msig::MalformedRecording);

  // The service stays usable after rejected requests.
  CHECK_NOTHROW(service.handle_verify(
      verify_request("u001", f.corpus.users[0].genuine[9], now, "n3")));
}

TEST_CASE("enroll validates its payload") {
  const Fixture& f = fixture();
  testutil::TempDir dir;
  msig::ReferenceStore store(dir / "refs.bin");
  msig::VerificationService service(f.model, store);

  msig::EnrollRequest req;
  req.recordings = first_genuine(f.corpus.users[0], 2);
  CHECK_THROWS_AS(service.handle_enroll(req), msig::MalformedRecording);

  req.user_id = "u001";
  req.recordings.clear();
  CHECK_THROWS_AS(service.handle_enroll(req), msig::EmptyEnrollment);

  req.recordings = first_genuine(f.corpus.users[0], 2);
  req.recordings[1].signals[0].samples.clear();
  CHECK_THROWS_AS(service.handle_enroll(req), msig::MalformedRecording);
  CHECK(service.enrolled_users() == 0);
}

TEST_CASE("service configuration is validated") {
  const Fixture& f = fixture();
  testutil::TempDir dir;
  msig::ReferenceStore store(dir / "refs.bin");

  msig::ServiceConfig bad;
  bad.threshold = 1.5;
  CHECK_THROWS_AS(msig::VerificationService(f.model, store, bad), msig::InvalidParams);
  bad = {};
  bad.replay_window_s = 0;
  CHECK_THROWS_AS(msig::VerificationService(f.model, store, bad), msig::InvalidParams);
  bad = {};
  bad.n_coefficients = 0;
  CHECK_THROWS_AS(msig::VerificationService(f.model, store, bad), msig::InvalidParams);
}

TEST_CASE("concurrent verifies settle on one accepted request per nonce") {
  const Fixture& f = fixture();
  testutil::TempDir dir;
  msig::ReferenceStore store(dir / "refs.bin");
  std::int64_t now = 1700000000;
  msig::VerificationService service(f.model, store, {}, [&now] { return now; });

  const msig::UserRecord& user = f.corpus.users[0];
  msig::EnrollRequest enroll;
  enroll.user_id = user.user_id;
  enroll.recordings = first_genuine(user, 5);
  service.handle_enroll(enroll);

  std::atomic<int> accepted{0};
  std::atomic<int> replays{0};
  std::vector<std::thread> threads;
  for (int t = 0; t < 8; ++t) {
    threads.emplace_back([&] {
      try {
        service.handle_verify(
            verify_request(user.user_id, user.genuine[10], now, "shared"));
        accepted.fetch_add(1);
      } catch (const msig::ReplayRejected&) {
        replays.fetch_add(1);
      }
    });
  }
  for (std::thread& t : threads) t.join();
  CHECK(accepted.load() == 1);
  CHECK(replays.load() == 7);
}
