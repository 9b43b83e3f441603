#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "msig/classifiers.hpp"
#include "msig/corpus.hpp"
#include "msig/metrics.hpp"

namespace msig {

/// Forgery population a verifier is evaluated against: skilled imitations,
/// random other-user signatures, or both.
enum class Task : std::uint8_t { Skilled = 0, Random = 1, Any = 2 };

/// The seven channel projections studied in the ablation: one per axis across
/// sensors, one per sensor across axes, and the full 9-channel vector.
enum class FeatureSubset : std::uint8_t {
  X = 0,
  Y = 1,
  Z = 2,
  Accel = 3,
  GyroAccel = 4,
  GyroVel = 5,
  All = 6,
};

std::string_view task_name(Task t);
std::string_view subset_name(FeatureSubset s);
std::optional<Task> task_from_name(std::string_view name);
std::optional<FeatureSubset> subset_from_name(std::string_view name);

/// Canonical channel indices (ascending) selected by a subset.
std::vector<std::size_t> subset_indices(FeatureSubset s);

/// Projects a feature vector onto a subset's channels, preserving order.
/// Input must be full-width (9 values).
FeatureVector filter_features(const FeatureVector& fv, FeatureSubset s);

struct ExperimentConfig {
  std::size_t n_repetitions = 25;
  std::size_t n_refs = 5;
  std::vector<std::size_t> n_refs_sweep;  // empty → use n_refs alone
  std::size_t n_genuine_eval = 8;
  std::size_t n_random_forgers = 10;
  std::vector<Task> tasks = {Task::Skilled, Task::Random, Task::Any};
  std::vector<ModelKind> classifiers = {ModelKind::Logistic};
  std::vector<FeatureSubset> subsets = {FeatureSubset::All};
  std::size_t n_coefficients = kDefaultDctCoefficients;
  std::size_t n_forest_trees = 100;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  /// false: AUC/EER per execution, then averaged (default).
  /// true: one AUC/EER over all scores pooled across executions.
  bool pooled_metrics = false;

  std::vector<std::size_t> refs_values() const {
    return n_refs_sweep.empty() ? std::vector<std::size_t>{n_refs} : n_refs_sweep;
  }
};

/// One donor contribution to the random-forgery list: a genuine recording of
/// another user, addressed by id and index into that user's genuine list.
struct DonorRef {
  std::string user_id;
  std::size_t genuine_index = 0;
};

/// Per-user randomized partition for one repetition. Reference and evaluation
/// indices point into the user's genuine list; all skilled forgeries are used
/// as-is and need no indices.
struct UserSplit {
  std::string user_id;
  std::vector<std::size_t> reference_indices;
  std::vector<std::size_t> eval_genuine_indices;
  std::vector<DonorRef> random_donors;
};

/// Deterministic split for (rep_seed, user_id). Streams are keyed by user id,
/// so corpus order is irrelevant, and reference selection for smaller n_refs
/// is a prefix of the selection for larger n_refs under the same seed.
UserSplit make_split(const SignatureCorpus& corpus, const std::string& user_id,
                     std::uint64_t rep_seed, const ExperimentConfig& config);

/// Scores for one (repetition, left-out user) execution. Each requested task
/// trains its own fold model (task-specific forgery composition) and scores
/// the genuine block first, then that task's forgeries: skilled, then random.
struct ExecutionResult {
  std::size_t repetition = 0;
  std::string left_out_user;
  std::array<std::vector<ScoredSample>, 3> task_scores;  // indexed by Task

  const std::vector<ScoredSample>& scores(Task t) const {
    return task_scores[static_cast<std::size_t>(t)];
  }
};

/// Full leave-one-user-out pass for one (classifier, subset, n_refs) cell:
/// n_repetitions × n_users executions, ordered by (repetition, user_id).
/// Training for left-out user u uses only other users' instances; any
/// random-forgery instance whose donor recording belongs to u is dropped.
std::vector<ExecutionResult> leave_one_user_out(const SignatureCorpus& corpus,
                                                const ExperimentConfig& config,
                                                ModelKind classifier,
                                                FeatureSubset subset = FeatureSubset::All);

/// The fold model leave_one_user_out trains for one execution, exposed so the
/// left-out user's influence on training can be audited byte-for-byte.
VerificationModel train_fold(const SignatureCorpus& corpus,
                             const std::string& left_out_user,
                             const ExperimentConfig& config, Task task,
                             FeatureSubset subset, ModelKind classifier,
                             std::size_t repetition);

struct CellKey {
  ModelKind classifier = ModelKind::Logistic;
  Task task = Task::Any;
  FeatureSubset subset = FeatureSubset::All;
  std::size_t n_refs = 5;
};

struct CellResult {
  CellKey key;
  std::size_t n_executions = 0;  // successfully scored executions
  double mean_auc = 0.0;
  double std_auc = 0.0;
  double mean_eer = 0.0;
  double std_eer = 0.0;
  std::vector<std::string> errors;  // per-execution failures, if any
};

struct EvaluationReport {
  std::uint64_t seed = 0;
  std::size_t n_repetitions = 0;
  std::size_t n_genuine_eval = 0;
  std::size_t n_random_forgers = 0;
  bool pooled_metrics = false;
  std::vector<CellResult> cells;  // canonical order: classifier, task, subset, n_refs
};

/// Cross-product experiment over classifiers × tasks × subsets × n_refs.
/// Per-execution failures are collected into the owning cell; other cells
/// proceed. Deterministic for a given config, independent of `jobs`.
EvaluationReport run_experiment(const SignatureCorpus& corpus,
                                const ExperimentConfig& config);

/// Machine-readable report (stable JSON; byte-identical for equal reports).
std::string report_to_json(const EvaluationReport& report);
void write_report(const EvaluationReport& report, const std::filesystem::path& path);

/// Human-readable fixed-width table.
std::string format_report_table(const EvaluationReport& report);

/// Per-execution score dump for external analysis (stable JSON).
std::string executions_to_json(const std::vector<ExecutionResult>& executions);

}  // namespace msig
