#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "msig/corpus.hpp"
#include "msig/features.hpp"

namespace msig {

enum class ModelKind : std::uint8_t { Logistic = 0, GaussianNb = 1, RandomForest = 2 };

std::string_view model_kind_name(ModelKind kind);

/// Labeled feature vectors plus the canonical dimension indices they were
/// projected onto (0..8; size 9 means all channels).
struct TrainingSet {
  std::vector<FeatureVector> instances;
  std::vector<std::uint8_t> feature_mask;

  std::size_t width() const { return feature_mask.size(); }
};

struct LogisticModel {
  std::vector<double> weights;  // on the standardized feature scale
  double bias = 0.0;
  std::vector<double> feature_means;
  std::vector<double> feature_sigmas;
  bool converged = false;
  std::uint32_t iterations = 0;
};

struct GaussianNbModel {
  double prior_genuine = 0.5;
  double prior_forged = 0.5;
  std::vector<double> mean_genuine, var_genuine;
  std::vector<double> mean_forged, var_forged;
};

struct TreeNode {
  std::int32_t feature = -1;  // -1 marks a leaf
  double threshold = 0.0;
  std::uint32_t left = 0;
  std::uint32_t right = 0;
  std::uint8_t leaf_genuine = 0;  // leaf vote: 1 = GENUINE
};

struct DecisionTree {
  std::vector<TreeNode> nodes;  // node 0 is the root
};

struct RandomForestModel {
  std::vector<DecisionTree> trees;
  std::uint64_t seed = 0;
};

struct TrainingMetadata {
  std::uint64_t seed = 0;
  std::uint64_t n_genuine = 0;
  std::uint64_t n_forged = 0;
};

struct VerificationModel {
  ModelKind kind = ModelKind::Logistic;
  std::vector<std::uint8_t> feature_mask;
  TrainingMetadata metadata;
  std::variant<LogisticModel, GaussianNbModel, RandomForestModel> params;

  std::size_t width() const { return feature_mask.size(); }
};

struct Score {
  double probability_genuine = 0.0;
};

struct LogisticConfig {
  double ridge = 1e-8;
  double gradient_tolerance = 1e-8;
  /// Convergence also triggers when no damped step can shave off more than
  /// loss_tolerance * (1 + |loss|): the objective is resolved to floating-
  /// point precision even if the gradient norm hasn't reached its tolerance
  /// (typical on quasi-separable data).
  double loss_tolerance = 1e-13;
  std::size_t max_iterations = 10000;
  std::vector<double>* loss_trace = nullptr;  // optional per-iteration NLL
};

struct ForestConfig {
  std::size_t n_trees = 100;
  std::uint64_t seed = 0;
};

/// Full-corpus training-set assembly: per user, select n_refs references,
/// then extract features for every remaining genuine (GENUINE) and every
/// skilled forgery (FORGED). References themselves never become instances.
TrainingSet build_training_set(const SignatureCorpus& corpus, std::uint64_t seed,
                               std::size_t n_refs = 5,
                               std::size_t k = kDefaultDctCoefficients);

/// The objective train_logistic minimizes, evaluated on the given instances:
/// negative log-likelihood plus 0.5 * ridge * ||weights||^2 (bias excluded).
/// When `gradient` is non-null it receives d(nll)/d(weights..., bias).
double logistic_nll(const std::vector<FeatureVector>& instances,
                    std::span<const double> weights, double bias, double ridge,
                    std::vector<double>* gradient = nullptr);

/// L2-regularized logistic regression fitted by damped Newton steps with
/// internal feature standardization. Deterministic given the data.
VerificationModel train_logistic(const TrainingSet& ts,
                                 const LogisticConfig& config = {});

/// Gaussian naive Bayes with population variances (floored) and frequency priors.
VerificationModel train_gaussian_nb(const TrainingSet& ts);

/// Bagged CART ensemble: per-node random feature subset of size ceil(sqrt(D)),
/// Gini splitting, unlimited depth. Score is the fraction of trees voting
/// GENUINE. Deterministic given (data, seed).
VerificationModel train_random_forest(const TrainingSet& ts,
                                      const ForestConfig& config = {});

Score predict_score(const VerificationModel& model, const FeatureVector& fv);

inline constexpr std::uint32_t kModelFormatVersion = 1;

void save_model(const VerificationModel& model, std::ostream& sink);
void save_model(const VerificationModel& model, const std::filesystem::path& path);
VerificationModel load_model(std::istream& source);
VerificationModel load_model(const std::filesystem::path& path);

}  // namespace msig
