#include <atomic>
#include <csignal>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "msig/classifiers.hpp"
#include "msig/errors.hpp"
#include "msig/evaluation.hpp"
#include "msig/io.hpp"
#include "msig/service.hpp"
#include "msig/service_http.hpp"
#include "msig/signal.hpp"
#include "msig/store.hpp"
#include "msig/synth.hpp"

namespace {

// 0 success / GENUINE verdict; 1 FORGED verdict; 2 usage; 3 data; 4 internal.
constexpr int kExitGenuine = 0;
constexpr int kExitForged = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;
constexpr int kExitInternal = 4;

msig::ModelKind kind_from_name(const std::string& name) {
  for (msig::ModelKind k : {msig::ModelKind::Logistic, msig::ModelKind::GaussianNb,
                            msig::ModelKind::RandomForest}) {
    if (msig::model_kind_name(k) == name) return k;
  }
  throw msig::InvalidParams("unknown classifier: " + name);
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
}

msig::SignatureCorpus load_corpus(const std::string& path) {
  std::vector<std::string> warnings;
  msig::SignatureCorpus corpus = msig::read_corpus(path, &warnings);
  print_warnings(warnings);
  return corpus;
}

struct GenerateArgs {
  msig::GeneratorParams params;
  std::string out_dir;
};

int run_generate(const GenerateArgs& args) {
  const msig::SignatureCorpus corpus = msig::generate_corpus(args.params);
  msig::write_corpus(corpus, args.out_dir);
  std::size_t n_recordings = 0;
  for (const msig::UserRecord& u : corpus.users) {
    n_recordings += u.genuine.size() + u.skilled_forgeries.size();
  }
  std::cout << "wrote " << corpus.users.size() << " users (" << n_recordings
            << " recordings) to " << args.out_dir << "\n";
  return kExitGenuine;
}

struct TrainArgs {
  std::string corpus_dir;
  std::string classifier = "logistic";
  std::uint64_t seed = 0;
  std::size_t n_refs = 5;
  std::size_t coefficients = msig::kDefaultDctCoefficients;
  std::size_t trees = 100;
  std::string out_path;
};

int run_train(const TrainArgs& args) {
  const msig::SignatureCorpus corpus = load_corpus(args.corpus_dir);
  const msig::TrainingSet ts =
      msig::build_training_set(corpus, args.seed, args.n_refs, args.coefficients);
  const msig::ModelKind kind = kind_from_name(args.classifier);
  msig::VerificationModel model;
  switch (kind) {
    case msig::ModelKind::Logistic:
      model = msig::train_logistic(ts);
      break;
    case msig::ModelKind::GaussianNb:
      model = msig::train_gaussian_nb(ts);
      break;
    case msig::ModelKind::RandomForest: {
      msig::ForestConfig fc;
      fc.n_trees = args.trees;
      fc.seed = args.seed;
      model = msig::train_random_forest(ts, fc);
      break;
    }
  }
  msig::save_model(model, std::filesystem::path(args.out_path));
  std::cout << "trained " << msig::model_kind_name(kind) << " on "
            << ts.instances.size() << " instances; model written to "
            << args.out_path << "\n";
  return kExitGenuine;
}

struct EvaluateArgs {
  std::string corpus_dir;
  std::vector<std::string> classifiers = {"logistic"};
  std::vector<std::string> tasks = {"skilled", "random", "any"};
  std::vector<std::string> subsets = {"all"};
  std::size_t reps = 25;
  std::size_t n_refs = 5;
  std::vector<std::size_t> refs_sweep;
  std::size_t genuine_eval = 8;
  std::size_t random_forgers = 10;
  std::size_t coefficients = msig::kDefaultDctCoefficients;
  std::size_t trees = 100;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  bool pooled = false;
  std::string report_out;
  std::string executions_out;
};

msig::ExperimentConfig to_config(const EvaluateArgs& args) {
  msig::ExperimentConfig config;
  config.n_repetitions = args.reps;
  config.n_refs = args.n_refs;
  config.n_refs_sweep = args.refs_sweep;
  config.n_genuine_eval = args.genuine_eval;
  config.n_random_forgers = args.random_forgers;
  config.n_coefficients = args.coefficients;
  config.n_forest_trees = args.trees;
  config.seed = args.seed;
  config.jobs = args.jobs;
  config.pooled_metrics = args.pooled;
  config.classifiers.clear();
  for (const std::string& c : args.classifiers) config.classifiers.push_back(kind_from_name(c));
  config.tasks.clear();
  for (const std::string& t : args.tasks) {
    const auto task = msig::task_from_name(t);
    if (!task) throw msig::InvalidParams("unknown task: " + t);
    config.tasks.push_back(*task);
  }
  config.subsets.clear();
  for (const std::string& s : args.subsets) {
    const auto subset = msig::subset_from_name(s);
    if (!subset) throw msig::InvalidParams("unknown subset: " + s);
    config.subsets.push_back(*subset);
  }
  return config;
}

int run_evaluate(const EvaluateArgs& args) {
  const msig::SignatureCorpus corpus = load_corpus(args.corpus_dir);
  const msig::ExperimentConfig config = to_config(args);

  if (!args.executions_out.empty()) {
    if (config.classifiers.size() != 1 || config.subsets.size() != 1 ||
        !config.n_refs_sweep.empty()) {
      throw msig::InvalidParams(
          "--executions-out needs exactly one classifier, one subset, and no "
          "reference sweep");
    }
    const std::vector<msig::ExecutionResult> executions = msig::leave_one_user_out(
        corpus, config, config.classifiers.front(), config.subsets.front());
    std::ofstream out(args.executions_out, std::ios::binary | std::ios::trunc);
    if (!out) throw msig::Error("cannot write " + args.executions_out);
    out << msig::executions_to_json(executions);
  }

  const msig::EvaluationReport report = msig::run_experiment(corpus, config);
  std::cout << msig::format_report_table(report);
  if (!args.report_out.empty()) {
    msig::write_report(report, args.report_out);
    std::cerr << "report written to " << args.report_out << "\n";
  }
  return kExitGenuine;
}

struct EnrollArgs {
  std::string store_path;
  std::string user_id;
  std::vector<std::string> recordings;
  bool overwrite = false;
  std::size_t coefficients = msig::kDefaultDctCoefficients;
};

int run_enroll(const EnrollArgs& args) {
  std::vector<msig::SignatureRecording> recordings;
  std::vector<std::string> warnings;
  for (const std::string& path : args.recordings) {
    recordings.push_back(msig::read_recording(std::filesystem::path(path), &warnings));
  }
  print_warnings(warnings);
  msig::ReferenceStore store(args.store_path);
  store.enroll(args.user_id, recordings, args.overwrite, args.coefficients);
  std::cout << "enrolled " << args.user_id << " with " << recordings.size()
            << " reference(s) in " << args.store_path << "\n";
  return kExitGenuine;
}

struct VerifyArgs {
  std::string store_path;
  std::string model_path;
  std::string user_id;
  std::string recording_path;
  double threshold = 0.5;
  std::size_t coefficients = msig::kDefaultDctCoefficients;
};

int run_verify(const VerifyArgs& args) {
  msig::ReferenceStore store(args.store_path);
  const msig::VerificationModel model =
      msig::load_model(std::filesystem::path(args.model_path));
  std::vector<std::string> warnings;
  const msig::SignatureRecording recording =
      msig::read_recording(std::filesystem::path(args.recording_path), &warnings);
  print_warnings(warnings);

  const msig::ReferenceSet refs = store.get_references(args.user_id);
  const msig::CompressedSignature compressed =
      msig::preprocess(recording, args.coefficients);
  msig::FeatureVector features = msig::extract_features(compressed, refs);

  msig::FeatureVector masked;
  masked.label = features.label;
  masked.user_id = features.user_id;
  for (std::uint8_t i : model.feature_mask) masked.values.push_back(features.values[i]);

  const double score = msig::predict_score(model, masked).probability_genuine;
  const bool genuine = score >= args.threshold;
  std::cout << (genuine ? "GENUINE" : "FORGED") << " score=" << score << "\n";
  return genuine ? kExitGenuine : kExitForged;
}

struct ServeArgs {
  std::string model_path;
  std::string store_path;
  std::string host = "127.0.0.1";
  int port = 8077;
  double threshold = 0.5;
  std::int64_t replay_window_s = 120;
  std::size_t coefficients = msig::kDefaultDctCoefficients;
};

msig::ServiceServer* g_server = nullptr;

void handle_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

int run_serve(const ServeArgs& args) {
  const msig::VerificationModel model =
      msig::load_model(std::filesystem::path(args.model_path));
  msig::ReferenceStore store(args.store_path);
  msig::ServiceConfig config;
  config.threshold = args.threshold;
  config.replay_window_s = args.replay_window_s;
  config.n_coefficients = args.coefficients;
  msig::VerificationService service(model, store, config);
  msig::ServiceServer server(service);

  const int port = server.bind(args.host, args.port);
  if (port < 0) {
    throw msig::Error("cannot bind " + args.host + ":" + std::to_string(args.port));
  }
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  std::cout << "listening on " << args.host << ":" << port << std::endl;
  server.serve_forever();
  g_server = nullptr;
  std::cout << "stopped\n";
  return kExitGenuine;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"motion-signature verification toolkit"};
  app.set_config("--config", "", "read options from a config file");
  app.require_subcommand(1);

  GenerateArgs gen;
  CLI::App* generate = app.add_subcommand("generate", "write a synthetic corpus");
  generate->add_option("--users", gen.params.n_users, "number of users")
      ->capture_default_str();
  generate->add_option("--genuine", gen.params.n_genuine, "genuine recordings per user")
      ->capture_default_str();
  generate->add_option("--forgers", gen.params.n_forgers_per_user, "forgers per user")
      ->capture_default_str();
  generate
      ->add_option("--forgeries-per-forger", gen.params.n_forgeries_per_forger,
                   "forgeries each forger contributes")
      ->capture_default_str();
  generate->add_option("--min-duration", gen.params.min_duration_s, "seconds")
      ->capture_default_str();
  generate->add_option("--max-duration", gen.params.max_duration_s, "seconds")
      ->capture_default_str();
  generate->add_option("--rate", gen.params.sample_rate_hz, "sample rate in Hz")
      ->capture_default_str();
  generate->add_option("--genuine-noise", gen.params.genuine_noise, "noise sigma")
      ->capture_default_str();
  generate->add_option("--forger-noise", gen.params.forger_noise, "noise sigma")
      ->capture_default_str();
  generate->add_option("--genuine-warp", gen.params.genuine_warp, "warp magnitude")
      ->capture_default_str();
  generate->add_option("--forger-warp", gen.params.forger_warp, "warp magnitude")
      ->capture_default_str();
  generate->add_option("--style-bias", gen.params.style_bias, "forger style amplitude")
      ->capture_default_str();
  generate->add_option("--seed", gen.params.seed, "master seed")
      ->envname("MSIG_SEED")
      ->capture_default_str();
  generate->add_option("--out", gen.out_dir, "output corpus directory")->required();

  TrainArgs train;
  CLI::App* train_cmd = app.add_subcommand("train", "train a verification model");
  train_cmd->add_option("--corpus", train.corpus_dir, "corpus directory or manifest")
      ->required();
  train_cmd->add_option("--classifier", train.classifier,
                        "logistic | gaussian_nb | random_forest")
      ->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "master seed")
      ->envname("MSIG_SEED")
      ->capture_default_str();
  train_cmd->add_option("--n-refs", train.n_refs, "references per user")
      ->capture_default_str();
  train_cmd->add_option("--coeffs", train.coefficients, "DCT coefficients kept")
      ->capture_default_str();
  train_cmd->add_option("--trees", train.trees, "random-forest size")
      ->capture_default_str();
  train_cmd->add_option("--out", train.out_path, "model file")->required();

  EvaluateArgs eval;
  CLI::App* evaluate = app.add_subcommand("evaluate", "run the evaluation protocol");
  evaluate->add_option("--corpus", eval.corpus_dir, "corpus directory or manifest")
      ->required();
  evaluate->add_option("--classifier", eval.classifiers, "classifiers to evaluate")
      ->delimiter(',')
      ->capture_default_str();
  evaluate->add_option("--task", eval.tasks, "skilled | random | any")
      ->delimiter(',')
      ->capture_default_str();
  evaluate
      ->add_option("--subset", eval.subsets,
                   "x | y | z | accel | gyro_accel | gyro_vel | all")
      ->delimiter(',')
      ->capture_default_str();
  evaluate->add_option("--reps", eval.reps, "randomized repetitions")
      ->capture_default_str();
  evaluate->add_option("--n-refs", eval.n_refs, "references per user")
      ->capture_default_str();
  evaluate->add_option("--refs-sweep", eval.refs_sweep, "evaluate each count")
      ->delimiter(',');
  evaluate->add_option("--genuine-eval", eval.genuine_eval, "genuine eval samples")
      ->capture_default_str();
  evaluate->add_option("--random-forgers", eval.random_forgers, "random-forgery donors")
      ->capture_default_str();
  evaluate->add_option("--coeffs", eval.coefficients, "DCT coefficients kept")
      ->capture_default_str();
  evaluate->add_option("--trees", eval.trees, "random-forest size")
      ->capture_default_str();
  evaluate->add_option("--seed", eval.seed, "master seed")
      ->envname("MSIG_SEED")
      ->capture_default_str();
  evaluate->add_option("--jobs", eval.jobs, "parallel workers")
      ->envname("MSIG_JOBS")
      ->capture_default_str();
  evaluate->add_flag("--pooled", eval.pooled, "pool scores before computing metrics");
  evaluate->add_option("--out", eval.report_out, "machine-readable report file")
      ->envname("MSIG_OUT");
  evaluate->add_option("--executions-out", eval.executions_out,
                       "per-execution score dump (single-cell runs)");

  EnrollArgs enroll;
  CLI::App* enroll_cmd = app.add_subcommand("enroll", "store reference signatures");
  enroll_cmd->add_option("--store", enroll.store_path, "reference store file")
      ->required()
      ->envname("MSIG_STORE");
  enroll_cmd->add_option("--user", enroll.user_id, "user id")->required();
  enroll_cmd->add_flag("--overwrite", enroll.overwrite, "replace existing references");
  enroll_cmd->add_option("--coeffs", enroll.coefficients, "DCT coefficients kept")
      ->capture_default_str();
  enroll_cmd->add_option("recordings", enroll.recordings, "reference CSV files")
      ->required();

  VerifyArgs verify;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "verify a recording against stored references");
  verify_cmd->add_option("--store", verify.store_path, "reference store file")
      ->required()
      ->envname("MSIG_STORE");
  verify_cmd->add_option("--model", verify.model_path, "model file")
      ->required()
      ->envname("MSIG_MODEL");
  verify_cmd->add_option("--user", verify.user_id, "claimed identity")->required();
  verify_cmd->add_option("--threshold", verify.threshold, "GENUINE decision threshold")
      ->envname("MSIG_THRESHOLD")
      ->capture_default_str();
  verify_cmd->add_option("--coeffs", verify.coefficients, "DCT coefficients kept")
      ->capture_default_str();
  verify_cmd->add_option("recording", verify.recording_path, "questioned CSV file")
      ->required();

  ServeArgs serve;
  CLI::App* serve_cmd = app.add_subcommand("serve", "run the verification service");
  serve_cmd->add_option("--model", serve.model_path, "model file")
      ->required()
      ->envname("MSIG_MODEL");
  serve_cmd->add_option("--store", serve.store_path, "reference store file")
      ->required()
      ->envname("MSIG_STORE");
  serve_cmd->add_option("--host", serve.host, "bind address")
      ->envname("MSIG_HOST")
      ->capture_default_str();
  serve_cmd->add_option("--port", serve.port, "bind port (0 picks a free port)")
      ->envname("MSIG_PORT")
      ->capture_default_str();
  serve_cmd->add_option("--threshold", serve.threshold, "GENUINE decision threshold")
      ->envname("MSIG_THRESHOLD")
      ->capture_default_str();
  serve_cmd
      ->add_option("--replay-window", serve.replay_window_s,
                   "accepted |now - signed_at| in seconds")
      ->envname("MSIG_REPLAY_WINDOW")
      ->capture_default_str();
  serve_cmd->add_option("--coeffs", serve.coefficients, "DCT coefficients kept")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitGenuine : kExitUsage;
  }

  try {
    if (*generate) return run_generate(gen);
    if (*train_cmd) return run_train(train);
    if (*evaluate) return run_evaluate(eval);
    if (*enroll_cmd) return run_enroll(enroll);
    if (*verify_cmd) return run_verify(verify);
    if (*serve_cmd) return run_serve(serve);
  } catch (const msig::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitUsage;
}
