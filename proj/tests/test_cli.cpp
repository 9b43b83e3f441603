#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <doctest.h>
#include <json.hpp>

#include "msig/classifiers.hpp"
#include "helpers.hpp"

namespace {

using nlohmann::json;

struct CommandResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

/// Runs the installed binary through the shell; `env` may carry variable
/// assignments (sh syntax) that apply to this invocation only.
CommandResult run_cli(const std::string& args, const std::string& env = "") {
  static const testutil::TempDir capture_dir;
  static int counter = 0;
  const std::filesystem::path capture =
      capture_dir / ("out" + std::to_string(counter++));

  std::string cmd = env.empty() ? "" : env + " ";
  cmd += std::string(MSIG_CLI_PATH) + " " + args + " > " + capture.string() + " 2>&1";
  const int status = std::system(cmd.c_str());

  CommandResult result;
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(capture);
  std::stringstream buf;
  buf << in.rdbuf();
  result.output = buf.str();
  return result;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

/// Corpus + model generated once through the binary itself.
struct Workspace {
  testutil::TempDir dir;
  std::filesystem::path corpus;
  std::filesystem::path model;

  Workspace() : corpus(dir / "corpus"), model(dir / "model.bin") {
    const CommandResult gen = run_cli(
        "generate --users 6 --genuine 15 --forgers 3 --forgeries-per-forger 2 "
        "--min-duration 0.8 --max-duration 1.4 --seed 11 --out " +
        corpus.string());
    REQUIRE(gen.exit_code == 0);
    REQUIRE(std::filesystem::exists(corpus / "manifest.json"));

    const CommandResult train = run_cli("train --corpus " + corpus.string() +
                                        " --seed 3 --out " + model.string());
    REQUIRE(train.exit_code == 0);
    REQUIRE(std::filesystem::exists(model));
  }
};

const Workspace& workspace() {
  static const Workspace w;
  return w;
}

}  // namespace

TEST_CASE("usage errors exit with 2 and help with 0") {
  CHECK(run_cli("").exit_code == 2);
  CHECK(run_cli("frobnicate").exit_code == 2);
  CHECK(run_cli("train --no-such-flag x").exit_code == 2);
  CHECK(run_cli("verify --store s").exit_code == 2);  // missing required options

  const CommandResult help = run_cli("--help");
  CHECK(help.exit_code == 0);
  CHECK(help.output.find("generate") != std::string::npos);
  CHECK(help.output.find("serve") != std::string::npos);
}

TEST_CASE("generate writes a loadable corpus and respects MSIG_SEED") {
  const Workspace& ws = workspace();
  testutil::TempDir dir;

  const CommandResult env_run = run_cli(
      "generate --users 3 --genuine 6 --forgers 2 --forgeries-per-forger 1 "
      "--min-duration 0.8 --max-duration 1.2 --out " +
          (dir / "a").string(),
      "MSIG_SEED=11");
  REQUIRE(env_run.exit_code == 0);
  CHECK(env_run.output.find("wrote 3 users") != std::string::npos);

  const CommandResult flag_run = run_cli(
      "generate --users 3 --genuine 6 --forgers 2 --forgeries-per-forger 1 "
      "--min-duration 0.8 --max-duration 1.2 --seed 11 --out " +
      (dir / "b").string());
  REQUIRE(flag_run.exit_code == 0);

  CHECK(slurp(dir / "a/manifest.json") == slurp(dir / "b/manifest.json"));
  CHECK(slurp(dir / "a/u001/g000.csv") == slurp(dir / "b/u001/g000.csv"));
  CHECK(slurp(ws.corpus / "u001/g000.csv") != slurp(dir / "b/u001/g000.csv"));
}

TEST_CASE("train persists a model the library can load back") {
  const Workspace& ws = workspace();
  const msig::VerificationModel model = msig::load_model(ws.model);
  CHECK(model.kind == msig::ModelKind::Logistic);
  CHECK(model.feature_mask.size() == 9);

  testutil::TempDir dir;
  const CommandResult forest = run_cli(
      "train --corpus " + ws.corpus.string() +
      " --classifier random_forest --trees 20 --seed 4 --out " +
      (dir / "forest.bin").string());
  REQUIRE(forest.exit_code == 0);
  CHECK(msig::load_model(dir / "forest.bin").kind == msig::ModelKind::RandomForest);

  CHECK(run_cli("train --corpus /nonexistent --out " + (dir / "m.bin").string())
            .exit_code == 3);
  CHECK(run_cli("train --corpus " + ws.corpus.string() + " --classifier svm --out " +
                (dir / "m.bin").string())
            .exit_code == 3);
}

TEST_CASE("evaluate reports are byte-identical across --jobs") {
  const Workspace& ws = workspace();
  testutil::TempDir dir;
  const std::string base = "evaluate --corpus " + ws.corpus.string() +
                           " --reps 2 --task skilled,random --random-forgers 4 "
                           "--seed 9 ";

  const CommandResult serial =
      run_cli(base + "--jobs 1 --out " + (dir / "serial.json").string());
  REQUIRE(serial.exit_code == 0);
  CHECK(serial.output.find("classifier") != std::string::npos);  // table header

  const CommandResult parallel =
      run_cli(base + "--jobs 4 --out " + (dir / "parallel.json").string());
  REQUIRE(parallel.exit_code == 0);

  const std::string a = slurp(dir / "serial.json");
  CHECK(a == slurp(dir / "parallel.json"));

  const json report = json::parse(a);
  CHECK(report["n_repetitions"] == 2);
  REQUIRE(report["cells"].size() == 2);
  for (const json& cell : report["cells"]) {
    CHECK(cell["n_executions"] == 12);
    CHECK(cell["errors"].empty());
  }
}

TEST_CASE("evaluate can dump per-execution scores for one cell") {
  const Workspace& ws = workspace();
  testutil::TempDir dir;
  const std::filesystem::path dump = dir / "executions.json";

  const CommandResult ok = run_cli(
      "evaluate --corpus " + ws.corpus.string() +
      " --reps 1 --task any --random-forgers 4 --executions-out " + dump.string());
  REQUIRE(ok.exit_code == 0);
  const json executions = json::parse(slurp(dump));
  REQUIRE(executions["executions"].size() == 6);
  CHECK(executions["executions"][0]["tasks"].contains("any"));

  const CommandResult rejected = run_cli(
      "evaluate --corpus " + ws.corpus.string() +
      " --reps 1 --random-forgers 4 --classifier logistic,gaussian_nb "
      "--executions-out " +
      dump.string());
  CHECK(rejected.exit_code == 3);
}

TEST_CASE("enroll and verify drive the store end to end") {
  const Workspace& ws = workspace();
  testutil::TempDir dir;
  const std::filesystem::path store = dir / "refs.bin";

  std::string ref_files;
  for (int i = 0; i < 5; ++i) {
    ref_files += " " + (ws.corpus / ("u001/g00" + std::to_string(i) + ".csv")).string();
  }
  const std::string enroll_cmd =
      "enroll --store " + store.string() + " --user u001" + ref_files;

  REQUIRE(run_cli(enroll_cmd).exit_code == 0);
  CHECK(run_cli(enroll_cmd).exit_code == 3);  // already enrolled
  CHECK(run_cli(enroll_cmd + " --overwrite").exit_code == 0);

  const std::string verify_base =
      "verify --store " + store.string() + " --model " + ws.model.string();

  const CommandResult genuine =
      run_cli(verify_base + " --user u001 " + (ws.corpus / "u001/g009.csv").string());
  CHECK(genuine.exit_code == 0);
  CHECK(genuine.output.find("GENUINE score=") != std::string::npos);

  const CommandResult forged =
      run_cli(verify_base + " --user u001 " + (ws.corpus / "u001/f000.csv").string());
  CHECK(forged.exit_code == 1);
  CHECK(forged.output.find("FORGED score=") != std::string::npos);

  // A zero threshold flips the forgery decision: every score clears it.
  // (The scores saturate near 0 and 1 on this corpus, so neither a nearly-1
  // nor a tiny positive cutoff would be a stable probe.)
  CHECK(run_cli(verify_base + " --user u001 --threshold 0 " +
                (ws.corpus / "u001/f000.csv").string())
            .exit_code == 0);

  const CommandResult unknown =
      run_cli(verify_base + " --user nobody " + (ws.corpus / "u001/g009.csv").string());
  CHECK(unknown.exit_code == 3);
  CHECK(unknown.output.find("not enrolled") != std::string::npos);
}

TEST_CASE("options can come from a config file") {
  testutil::TempDir dir;
  {
    std::ofstream cfg(dir / "msig.toml");
    cfg << "[generate]\n"
        << "users=3\n"
        << "genuine=6\n"
        << "forgers=2\n"
        << "forgeries-per-forger=1\n"
        << "min-duration=0.8\n"
        << "max-duration=1.2\n"
        << "seed=11\n";
  }
  const CommandResult from_config =
      run_cli("--config " + (dir / "msig.toml").string() + " generate --out " +
              (dir / "a").string());
  REQUIRE(from_config.exit_code == 0);

  const CommandResult from_flags = run_cli(
      "generate --users 3 --genuine 6 --forgers 2 --forgeries-per-forger 1 "
      "--min-duration 0.8 --max-duration 1.2 --seed 11 --out " +
      (dir / "b").string());
  REQUIRE(from_flags.exit_code == 0);
  CHECK(slurp(dir / "a/manifest.json") == slurp(dir / "b/manifest.json"));
}
