#include <algorithm>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <json.hpp>

#include "msig/classifiers.hpp"
#include "msig/errors.hpp"
#include "msig/evaluation.hpp"
#include "msig/rng.hpp"
#include "helpers.hpp"

namespace {

msig::ExperimentConfig small_config() {
  msig::ExperimentConfig cfg;
  cfg.n_repetitions = 2;
  cfg.n_refs = 5;
  cfg.n_genuine_eval = 8;
  cfg.n_random_forgers = 4;  // small corpora have few candidate donors
  cfg.seed = 42;
  return cfg;
}

std::string serialized(const msig::VerificationModel& model) {
  std::ostringstream out;
  msig::save_model(model, out);
  return out.str();
}

std::vector<std::string> sorted_ids(const msig::SignatureCorpus& corpus) {
  std::vector<std::string> ids;
  for (const msig::UserRecord& u : corpus.users) ids.push_back(u.user_id);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

TEST_CASE("subset indices partition the channel space") {
  using msig::FeatureSubset;
  const auto all = msig::subset_indices(FeatureSubset::All);
  CHECK(all == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8});

  SUBCASE("axis subsets") {
    std::set<std::size_t> seen;
    for (FeatureSubset s : {FeatureSubset::X, FeatureSubset::Y, FeatureSubset::Z}) {
      const auto idx = msig::subset_indices(s);
      CHECK(idx.size() == 3);
      CHECK(std::is_sorted(idx.begin(), idx.end()));
      seen.insert(idx.begin(), idx.end());
    }
    CHECK(seen.size() == 9);
  }
  SUBCASE("sensor subsets") {
    std::set<std::size_t> seen;
    for (FeatureSubset s : {FeatureSubset::Accel, FeatureSubset::GyroAccel,
                            FeatureSubset::GyroVel}) {
      const auto idx = msig::subset_indices(s);
      CHECK(idx.size() == 3);
      seen.insert(idx.begin(), idx.end());
    }
    CHECK(seen.size() == 9);
  }
}

TEST_CASE("filter_features projects values and keeps metadata") {
  msig::FeatureVector fv;
  fv.values = {0, 10, 20, 30, 40, 50, 60, 70, 80};
  fv.label = msig::ClassLabel::Forged;
  fv.user_id = "u007";

  const msig::FeatureVector x = msig::filter_features(fv, msig::FeatureSubset::X);
  CHECK(x.values == std::vector<double>{0, 30, 60});
  CHECK(x.label == msig::ClassLabel::Forged);
  CHECK(x.user_id == "u007");

  const msig::FeatureVector gyro =
      msig::filter_features(fv, msig::FeatureSubset::GyroAccel);
  CHECK(gyro.values == std::vector<double>{30, 40, 50});

  const msig::FeatureVector all = msig::filter_features(fv, msig::FeatureSubset::All);
  CHECK(all.values == fv.values);

  fv.values.resize(5);
  CHECK_THROWS_AS(msig::filter_features(fv, msig::FeatureSubset::X),
                  msig::DimensionMismatch);
}

TEST_CASE("task and subset names round trip") {
  for (msig::Task t : {msig::Task::Skilled, msig::Task::Random, msig::Task::Any}) {
    const auto back = msig::task_from_name(msig::task_name(t));
    REQUIRE(back.has_value());
    CHECK(*back == t);
  }
  for (msig::FeatureSubset s :
       {msig::FeatureSubset::X, msig::FeatureSubset::Y, msig::FeatureSubset::Z,
        msig::FeatureSubset::Accel, msig::FeatureSubset::GyroAccel,
        msig::FeatureSubset::GyroVel, msig::FeatureSubset::All}) {
    const auto back = msig::subset_from_name(msig::subset_name(s));
    REQUIRE(back.has_value());
    CHECK(*back == s);
  }
  CHECK(!msig::task_from_name("bogus").has_value());
  CHECK(!msig::subset_from_name("").has_value());
}

TEST_CASE("make_split produces a disjoint, in-range partition") {
  const msig::SignatureCorpus corpus = testutil::small_corpus();
  const msig::ExperimentConfig cfg = small_config();
  const msig::UserSplit split = msig::make_split(corpus, "u002", 99, cfg);

  CHECK(split.user_id == "u002");
  REQUIRE(split.reference_indices.size() == cfg.n_refs);
  REQUIRE(split.eval_genuine_indices.size() == cfg.n_genuine_eval);
  REQUIRE(split.random_donors.size() == cfg.n_random_forgers);

  std::set<std::size_t> used;
  for (std::size_t i : split.reference_indices) {
    CHECK(i < 15);
    CHECK(used.insert(i).second);
  }
  for (std::size_t i : split.eval_genuine_indices) {
    CHECK(i < 15);
    CHECK(used.insert(i).second);  // disjoint from references
  }

  std::set<std::string> donors;
  for (const msig::DonorRef& d : split.random_donors) {
    CHECK(d.user_id != "u002");
    CHECK(donors.insert(d.user_id).second);  // distinct donors
    const msig::UserRecord* donor = corpus.find_user(d.user_id);
    REQUIRE(donor != nullptr);
    CHECK(d.genuine_index < donor->genuine.size());
  }
}

TEST_CASE("make_split is deterministic and seed-sensitive") {
  const msig::SignatureCorpus corpus = testutil::small_corpus();
  const msig::ExperimentConfig cfg = small_config();

  const msig::UserSplit a = msig::make_split(corpus, "u001", 7, cfg);
  const msig::UserSplit b = msig::make_split(corpus, "u001", 7, cfg);
  CHECK(a.reference_indices == b.reference_indices);
  CHECK(a.eval_genuine_indices == b.eval_genuine_indices);
  REQUIRE(a.random_donors.size() == b.random_donors.size());
  for (std::size_t i = 0; i < a.random_donors.size(); ++i) {
    CHECK(a.random_donors[i].user_id == b.random_donors[i].user_id);
    CHECK(a.random_donors[i].genuine_index == b.random_donors[i].genuine_index);
  }

  bool any_difference = false;
  for (std::uint64_t seed = 8; seed < 13; ++seed) {
    const msig::UserSplit c = msig::make_split(corpus, "u001", seed, cfg);
    if (c.reference_indices != a.reference_indices ||
        c.eval_genuine_indices != a.eval_genuine_indices) {
      any_difference = true;
    }
  }
  CHECK(any_difference);
}

TEST_CASE("sweeping n_refs fixes the eval block and prefixes the references") {
  const msig::SignatureCorpus corpus = testutil::small_corpus();
  msig::ExperimentConfig small = small_config();
  small.n_refs = 3;
  msig::ExperimentConfig large = small_config();
  large.n_refs = 7;

  const msig::UserSplit a = msig::make_split(corpus, "u004", 5, small);
  const msig::UserSplit b = msig::make_split(corpus, "u004", 5, large);

  CHECK(a.eval_genuine_indices == b.eval_genuine_indices);
  REQUIRE(b.reference_indices.size() >= a.reference_indices.size());
  for (std::size_t i = 0; i < a.reference_indices.size(); ++i) {
    CHECK(a.reference_indices[i] == b.reference_indices[i]);
  }
  // Donor selection runs on its own stream, untouched by the reference count.
  REQUIRE(a.random_donors.size() == b.random_donors.size());
  for (std::size_t i = 0; i < a.random_donors.size(); ++i) {
    CHECK(a.random_donors[i].user_id == b.random_donors[i].user_id);
    CHECK(a.random_donors[i].genuine_index == b.random_donors[i].genuine_index);
  }
}

TEST_CASE("make_split rejects impossible requests") {
  const msig::SignatureCorpus corpus = testutil::small_corpus();
  msig::ExperimentConfig cfg = small_config();

  CHECK_THROWS_AS(msig::make_split(corpus, "nobody", 1, cfg), msig::CorpusShapeError);

  cfg.n_refs = 10;  // 10 + 8 > 15 genuine
  CHECK_THROWS_AS(msig::make_split(corpus, "u001", 1, cfg), msig::CorpusShapeError);

  cfg = small_config();
  cfg.n_random_forgers = 6;  // only 5 other users
  CHECK_THROWS_AS(msig::make_split(corpus, "u001", 1, cfg), msig::CorpusShapeError);
}

TEST_CASE("leave_one_user_out emits one ordered execution per rep and user") {
  const msig::SignatureCorpus corpus = testutil::small_corpus();
  const msig::ExperimentConfig cfg = small_config();
  const std::vector<msig::ExecutionResult> execs =
      msig::leave_one_user_out(corpus, cfg, msig::ModelKind::Logistic);

  const std::vector<std::string> ids = sorted_ids(corpus);
  REQUIRE(execs.size() == cfg.n_repetitions * ids.size());
  for (std::size_t rep = 0; rep < cfg.n_repetitions; ++rep) {
    for (std::size_t u = 0; u < ids.size(); ++u) {
      const msig::ExecutionResult& e = execs[rep * ids.size() + u];
      CHECK(e.repetition == rep);
      CHECK(e.left_out_user == ids[u]);
    }
  }
}

TEST_CASE("execution score lists follow the genuine/skilled/random layout") {
  const msig::SignatureCorpus corpus = testutil::small_corpus();
  const msig::ExperimentConfig cfg = small_config();
  const std::vector<msig::ExecutionResult> execs =
      msig::leave_one_user_out(corpus, cfg, msig::ModelKind::Logistic);

  const std::size_t n_skilled = 3 * 2;  // forgers x forgeries per forger
  for (const msig::ExecutionResult& e : execs) {
    const auto& skilled = e.scores(msig::Task::Skilled);
    const auto& random = e.scores(msig::Task::Random);
    const auto& any = e.scores(msig::Task::Any);
    REQUIRE(skilled.size() == cfg.n_genuine_eval + n_skilled);
    REQUIRE(random.size() == cfg.n_genuine_eval + cfg.n_random_forgers);
    REQUIRE(any.size() == cfg.n_genuine_eval + n_skilled + cfg.n_random_forgers);

    const auto check_layout = [&](const std::vector<msig::ScoredSample>& scores) {
      for (std::size_t i = 0; i < scores.size(); ++i) {
        const msig::ClassLabel want = i < cfg.n_genuine_eval
                                          ? msig::ClassLabel::Genuine
                                          : msig::ClassLabel::Forged;
        CHECK(scores[i].label == want);
        CHECK(scores[i].score >= 0.0);
        CHECK(scores[i].score <= 1.0);
      }
    };
    check_layout(skilled);
    check_layout(random);
    check_layout(any);
  }
}

TEST_CASE("requesting a task subset leaves other score lists empty") {
  const msig::SignatureCorpus corpus = testutil::small_corpus(4);
  msig::ExperimentConfig cfg = small_config();
  cfg.n_repetitions = 1;
  cfg.n_random_forgers = 2;
  cfg.tasks = {msig::Task::Skilled};

  const std::vector<msig::ExecutionResult> execs =
      msig::leave_one_user_out(corpus, cfg, msig::ModelKind::GaussianNb);
  for (const msig::ExecutionResult& e : execs) {
    CHECK(!e.scores(msig::Task::Skilled).empty());
    CHECK(e.scores(msig::Task::Random).empty());
    CHECK(e.scores(msig::Task::Any).empty());
  }
}

TEST_CASE("executions are independent of the worker count") {
  const msig::SignatureCorpus corpus = testutil::small_corpus();
  msig::ExperimentConfig cfg = small_config();

  cfg.jobs = 1;
  const std::string serial = msig::executions_to_json(
      msig::leave_one_user_out(corpus, cfg, msig::ModelKind::Logistic));
  cfg.jobs = 4;
  const std::string parallel = msig::executions_to_json(
      msig::leave_one_user_out(corpus, cfg, msig::ModelKind::Logistic));
  CHECK(serial == parallel);
}

TEST_CASE("repetitions draw different splits") {
  const msig::SignatureCorpus corpus = testutil::small_corpus();
  const msig::ExperimentConfig cfg = small_config();
  const std::vector<msig::ExecutionResult> execs =
      msig::leave_one_user_out(corpus, cfg, msig::ModelKind::Logistic);

  const std::size_t n_users = corpus.users.size();
  bool different = false;
  for (std::size_t u = 0; u < n_users && !different; ++u) {
    const auto& rep0 = execs[u].scores(msig::Task::Any);
    const auto& rep1 = execs[n_users + u].scores(msig::Task::Any);
    for (std::size_t i = 0; i < rep0.size(); ++i) {
      if (rep0[i].score != rep1[i].score) different = true;
    }
  }
  CHECK(different);
}

TEST_CASE("fold models ignore the left-out user's recordings") {
  msig::SignatureCorpus corpus = testutil::small_corpus();
  const msig::ExperimentConfig cfg = small_config();
  const std::string target = "u003";

  const auto fold = [&](const msig::SignatureCorpus& c) {
    return serialized(msig::train_fold(c, target, cfg, msig::Task::Any,
                                       msig::FeatureSubset::All,
                                       msig::ModelKind::Logistic, 0));
  };
  const std::string baseline = fold(corpus);

  // Rewriting every sample the left-out user owns must not move the model.
  msig::SignatureCorpus mutated = corpus;
  for (msig::UserRecord& user : mutated.users) {
    if (user.user_id != target) continue;
    for (msig::SignatureRecording& rec : user.genuine) {
      for (auto& sig : rec.signals) {
        for (double& v : sig.samples) v = 2.0 * v + 1.0;
      }
    }
    for (msig::SignatureRecording& rec : user.skilled_forgeries) {
      for (auto& sig : rec.signals) {
        for (double& v : sig.samples) v = -v + 0.5;
      }
    }
  }
  CHECK(fold(mutated) == baseline);

  // Touching a training user's recordings must move it.
  msig::SignatureCorpus shifted = corpus;
  for (msig::UserRecord& user : shifted.users) {
    if (user.user_id != "u001") continue;
    for (msig::SignatureRecording& rec : user.genuine) {
      for (auto& sig : rec.signals) {
        for (double& v : sig.samples) v = 2.0 * v + 1.0;
      }
    }
  }
  CHECK(fold(shifted) != baseline);
}

TEST_CASE("run_experiment lays cells out in canonical order") {
  const msig::SignatureCorpus corpus = testutil::small_corpus();
  msig::ExperimentConfig cfg = small_config();
  cfg.n_repetitions = 1;
  cfg.classifiers = {msig::ModelKind::Logistic, msig::ModelKind::GaussianNb};
  cfg.tasks = {msig::Task::Skilled, msig::Task::Any};
  cfg.subsets = {msig::FeatureSubset::All, msig::FeatureSubset::X};
  cfg.n_refs_sweep = {2, 3};

  const msig::EvaluationReport report = msig::run_experiment(corpus, cfg);
  REQUIRE(report.cells.size() == 2 * 2 * 2 * 2);

  std::size_t i = 0;
  for (msig::ModelKind c : cfg.classifiers) {
    for (msig::Task t : cfg.tasks) {
      for (msig::FeatureSubset s : cfg.subsets) {
        for (std::size_t r : cfg.n_refs_sweep) {
          const msig::CellResult& cell = report.cells[i++];
          CHECK(cell.key.classifier == c);
          CHECK(cell.key.task == t);
          CHECK(cell.key.subset == s);
          CHECK(cell.key.n_refs == r);
          CHECK(cell.n_executions == cfg.n_repetitions * corpus.users.size());
          CHECK(cell.errors.empty());
          CHECK(cell.mean_auc >= 0.0);
          CHECK(cell.mean_auc <= 1.0);
          CHECK(cell.std_auc >= 0.0);
          CHECK(cell.mean_eer >= 0.0);
          CHECK(cell.mean_eer <= 1.0);
        }
      }
    }
  }
  CHECK(report.seed == cfg.seed);
  CHECK(report.n_repetitions == cfg.n_repetitions);
}

TEST_CASE("reports are byte-identical across worker counts") {
  const msig::SignatureCorpus corpus = testutil::small_corpus();
  msig::ExperimentConfig cfg = small_config();
  cfg.tasks = {msig::Task::Skilled, msig::Task::Random};

  cfg.jobs = 1;
  const std::string serial = msig::report_to_json(msig::run_experiment(corpus, cfg));
  cfg.jobs = 3;
  const std::string parallel = msig::report_to_json(msig::run_experiment(corpus, cfg));
  CHECK(serial == parallel);
}

TEST_CASE("pooled metrics collapse the spread to zero") {
  const msig::SignatureCorpus corpus = testutil::small_corpus(4);
  msig::ExperimentConfig cfg = small_config();
  cfg.n_repetitions = 1;
  cfg.n_random_forgers = 2;
  cfg.pooled_metrics = true;

  const msig::EvaluationReport report = msig::run_experiment(corpus, cfg);
  REQUIRE(!report.cells.empty());
  CHECK(report.pooled_metrics);
  for (const msig::CellResult& cell : report.cells) {
    CHECK(cell.std_auc == 0.0);
    CHECK(cell.std_eer == 0.0);
  }
}

TEST_CASE("per-execution failures are recorded without sinking the cell") {
  msig::SignatureCorpus corpus = testutil::small_corpus();
  corpus.users[2].skilled_forgeries.clear();  // u003 cannot be skilled-scored
  msig::ExperimentConfig cfg = small_config();
  cfg.tasks = {msig::Task::Skilled, msig::Task::Any};

  const msig::EvaluationReport report = msig::run_experiment(corpus, cfg);
  const std::size_t n_exec = cfg.n_repetitions * corpus.users.size();
  for (const msig::CellResult& cell : report.cells) {
    if (cell.key.task == msig::Task::Skilled) {
      CHECK(cell.n_executions == n_exec - cfg.n_repetitions);
      REQUIRE(cell.errors.size() == cfg.n_repetitions);
      for (const std::string& err : cell.errors) {
        CHECK(err.find("user u003") != std::string::npos);
      }
      CHECK(cell.mean_auc >= 0.0);  // metrics still computed from the survivors
    } else {
      CHECK(cell.n_executions == n_exec);
      CHECK(cell.errors.empty());
    }
  }
}

TEST_CASE("empty cells serialize their metrics as null") {
  msig::SignatureCorpus corpus = testutil::small_corpus(3);
  for (msig::UserRecord& user : corpus.users) user.skilled_forgeries.clear();
  msig::ExperimentConfig cfg = small_config();
  cfg.n_repetitions = 1;
  cfg.n_random_forgers = 2;
  cfg.tasks = {msig::Task::Skilled};

  const msig::EvaluationReport report = msig::run_experiment(corpus, cfg);
  REQUIRE(report.cells.size() == 1);
  CHECK(report.cells[0].n_executions == 0);
  CHECK(report.cells[0].errors.size() == corpus.users.size());

  const nlohmann::json j = nlohmann::json::parse(msig::report_to_json(report));
  CHECK(j["cells"][0]["mean_auc"].is_null());
  CHECK(j["cells"][0]["std_eer"].is_null());
  CHECK(msig::format_report_table(report).find("n/a") != std::string::npos);
}

TEST_CASE("report JSON carries the run parameters") {
  const msig::SignatureCorpus corpus = testutil::small_corpus(4);
  msig::ExperimentConfig cfg = small_config();
  cfg.n_repetitions = 1;
  cfg.n_random_forgers = 3;

  const nlohmann::json j =
      nlohmann::json::parse(msig::report_to_json(msig::run_experiment(corpus, cfg)));
  CHECK(j["format_version"] == 1);
  CHECK(j["seed"] == cfg.seed);
  CHECK(j["n_repetitions"] == cfg.n_repetitions);
  CHECK(j["n_genuine_eval"] == cfg.n_genuine_eval);
  CHECK(j["n_random_forgers"] == cfg.n_random_forgers);
  CHECK(j["pooled_metrics"] == false);
  REQUIRE(j["cells"].is_array());
  REQUIRE(j["cells"].size() == 3);  // one per default task
  CHECK(j["cells"][0]["classifier"] == "logistic");
  CHECK(j["cells"][0]["task"] == "skilled");
  CHECK(j["cells"][0]["subset"] == "all");
  CHECK(j["cells"][0]["n_refs"] == 5);
}

TEST_CASE("experiment configuration is validated up front") {
  const msig::SignatureCorpus corpus = testutil::small_corpus();
  const auto expect_invalid = [&](auto mutate) {
    msig::ExperimentConfig cfg = small_config();
    mutate(cfg);
    CHECK_THROWS_AS(msig::run_experiment(corpus, cfg), msig::InvalidParams);
  };
  expect_invalid([](msig::ExperimentConfig& c) { c.n_repetitions = 0; });
  expect_invalid([](msig::ExperimentConfig& c) { c.n_genuine_eval = 0; });
  expect_invalid([](msig::ExperimentConfig& c) { c.n_random_forgers = 0; });
  expect_invalid([](msig::ExperimentConfig& c) { c.n_random_forgers = 6; });
  expect_invalid([](msig::ExperimentConfig& c) { c.n_coefficients = 0; });
  expect_invalid([](msig::ExperimentConfig& c) { c.n_forest_trees = 0; });
  expect_invalid([](msig::ExperimentConfig& c) { c.n_refs_sweep = {3, 0}; });
  expect_invalid([](msig::ExperimentConfig& c) { c.tasks.clear(); });
  expect_invalid([](msig::ExperimentConfig& c) { c.classifiers.clear(); });
  expect_invalid([](msig::ExperimentConfig& c) { c.subsets.clear(); });
}

TEST_CASE("experiment rejects malformed corpora") {
  msig::ExperimentConfig cfg = small_config();

  msig::SignatureCorpus corpus = testutil::small_corpus();
  corpus.users[1].user_id = corpus.users[0].user_id;
  CHECK_THROWS_AS(msig::run_experiment(corpus, cfg), msig::CorpusShapeError);

  corpus = testutil::small_corpus();
  corpus.users[0].genuine.resize(4);  // below n_refs + n_genuine_eval
  CHECK_THROWS_WITH_AS(msig::run_experiment(corpus, cfg),
                       doctest::Contains("u001"), msig::CorpusShapeError);

  msig::SignatureCorpus tiny;
  tiny.users.resize(1);
  tiny.users[0].user_id = "solo";
  CHECK_THROWS_AS(msig::run_experiment(tiny, cfg), msig::CorpusShapeError);
}
