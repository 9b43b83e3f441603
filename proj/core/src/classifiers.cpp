#include "msig/classifiers.hpp"

#include <cmath>

#include "classifier_detail.hpp"
#include "msig/errors.hpp"
#include "msig/signal.hpp"

namespace msig {

std::string_view model_kind_name(ModelKind kind) {
  switch (kind) {
    case ModelKind::Logistic: return "logistic";
    case ModelKind::GaussianNb: return "gaussian_nb";
    case ModelKind::RandomForest: return "random_forest";
  }
  return "unknown";
}

namespace detail {

void check_training_set(const TrainingSet& ts) {
  std::size_t genuine = 0, forged = 0;
  for (const FeatureVector& fv : ts.instances) {
    if (fv.values.size() != ts.width()) {
      throw FeatureWidthMismatch("instance width differs from feature mask");
    }
    if (fv.label == ClassLabel::Genuine) ++genuine;
    if (fv.label == ClassLabel::Forged) ++forged;
  }
  if (genuine == 0 || forged == 0) {
    throw SingleClassTrainingSet("training needs both GENUINE and FORGED instances");
  }
}

TrainingMetadata make_metadata(const TrainingSet& ts, std::uint64_t seed) {
  TrainingMetadata meta;
  meta.seed = seed;
  for (const FeatureVector& fv : ts.instances) {
    if (fv.label == ClassLabel::Genuine) ++meta.n_genuine;
    if (fv.label == ClassLabel::Forged) ++meta.n_forged;
  }
  return meta;
}

}  // namespace detail

TrainingSet build_training_set(const SignatureCorpus& corpus, std::uint64_t seed,
                               std::size_t n_refs, std::size_t k) {
  TrainingSet ts;
  ts.feature_mask.resize(kNumDimensions);
  for (std::size_t d = 0; d < kNumDimensions; ++d) {
    ts.feature_mask[d] = static_cast<std::uint8_t>(d);
  }

  for (const UserRecord& user : corpus.users) {
    if (user.genuine.size() < n_refs) {
      throw NotEnoughGenuineSamples("user " + user.user_id + " has " +
                                    std::to_string(user.genuine.size()) +
                                    " genuine signatures, need " +
                                    std::to_string(n_refs));
    }
    std::vector<CompressedSignature> genuine;
    genuine.reserve(user.genuine.size());
    for (const SignatureRecording& rec : user.genuine) {
      genuine.push_back(preprocess(rec, k));
    }

    Rng rng = keyed_rng(seed, {hash_key(user.user_id)});
    const ReferenceSplit split = select_references(genuine, n_refs, rng);
    for (const CompressedSignature& sig : split.remainder) {
      ts.instances.push_back(extract_features(sig, split.references));
    }
    for (const SignatureRecording& rec : user.skilled_forgeries) {
      ts.instances.push_back(
          extract_features(preprocess(rec, k), split.references));
    }
  }
  return ts;
}

namespace {

double predict_logistic(const LogisticModel& m, const std::vector<double>& x) {
  double margin = m.bias;
  for (std::size_t j = 0; j < m.weights.size(); ++j) {
    const double z = (x[j] - m.feature_means[j]) / m.feature_sigmas[j];
    margin += m.weights[j] * z;
  }
  return 1.0 / (1.0 + std::exp(-margin));
}

double predict_nb(const GaussianNbModel& m, const std::vector<double>& x) {
  double log_g = std::log(m.prior_genuine);
  double log_f = std::log(m.prior_forged);
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double dg = x[j] - m.mean_genuine[j];
    const double df = x[j] - m.mean_forged[j];
    log_g += -0.5 * std::log(2.0 * M_PI * m.var_genuine[j]) -
             dg * dg / (2.0 * m.var_genuine[j]);
    log_f += -0.5 * std::log(2.0 * M_PI * m.var_forged[j]) -
             df * df / (2.0 * m.var_forged[j]);
  }
  // log-sum-exp normalization
  const double hi = std::max(log_g, log_f);
  const double zg = std::exp(log_g - hi);
  const double zf = std::exp(log_f - hi);
  return zg / (zg + zf);
}

double predict_forest(const RandomForestModel& m, const std::vector<double>& x) {
  std::size_t genuine_votes = 0;
  for (const DecisionTree& tree : m.trees) {
    std::uint32_t node = 0;
    while (tree.nodes[node].feature >= 0) {
      const TreeNode& n = tree.nodes[node];
      node = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    genuine_votes += tree.nodes[node].leaf_genuine;
  }
  return static_cast<double>(genuine_votes) / static_cast<double>(m.trees.size());
}

}  // namespace

Score predict_score(const VerificationModel& model, const FeatureVector& fv) {
  if (fv.values.size() != model.width()) {
    throw FeatureWidthMismatch("feature vector width " +
                               std::to_string(fv.values.size()) +
                               " does not match model width " +
                               std::to_string(model.width()));
  }
  for (double v : fv.values) {
    if (!std::isfinite(v)) throw NonFiniteInput("non-finite feature value");
  }
  double p = 0.0;
  switch (model.kind) {
    case ModelKind::Logistic:
      p = predict_logistic(std::get<LogisticModel>(model.params), fv.values);
      break;
    case ModelKind::GaussianNb:
      p = predict_nb(std::get<GaussianNbModel>(model.params), fv.values);
      break;
    case ModelKind::RandomForest:
      p = predict_forest(std::get<RandomForestModel>(model.params), fv.values);
      break;
  }
  if (p < 0.0) p = 0.0;
  if (p > 1.0) p = 1.0;
  return Score{p};
}

}  // namespace msig
