#include <cmath>
#include <vector>

#include "classifier_detail.hpp"

namespace msig {

namespace {
// Keeps log-densities finite when a feature is constant within a class.
constexpr double kNbVarianceFloor = 1e-9;
}  // namespace

VerificationModel train_gaussian_nb(const TrainingSet& ts) {
  detail::check_training_set(ts);
  const std::size_t d = ts.width();
  const std::size_t n = ts.instances.size();

  std::size_t n_genuine = 0;
  for (const FeatureVector& fv : ts.instances) {
    if (fv.label == ClassLabel::Genuine) ++n_genuine;
  }
  const std::size_t n_forged = n - n_genuine;

  GaussianNbModel nb;
  nb.prior_genuine = static_cast<double>(n_genuine) / static_cast<double>(n);
  nb.prior_forged = static_cast<double>(n_forged) / static_cast<double>(n);
  nb.mean_genuine.assign(d, 0.0);
  nb.mean_forged.assign(d, 0.0);
  nb.var_genuine.assign(d, 0.0);
  nb.var_forged.assign(d, 0.0);

  for (const FeatureVector& fv : ts.instances) {
    auto& mean = fv.label == ClassLabel::Genuine ? nb.mean_genuine : nb.mean_forged;
    for (std::size_t j = 0; j < d; ++j) mean[j] += fv.values[j];
  }
  for (std::size_t j = 0; j < d; ++j) {
    nb.mean_genuine[j] /= static_cast<double>(n_genuine);
    nb.mean_forged[j] /= static_cast<double>(n_forged);
  }
  for (const FeatureVector& fv : ts.instances) {
    const bool gen = fv.label == ClassLabel::Genuine;
    auto& mean = gen ? nb.mean_genuine : nb.mean_forged;
    auto& var = gen ? nb.var_genuine : nb.var_forged;
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = fv.values[j] - mean[j];
      var[j] += diff * diff;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    nb.var_genuine[j] /= static_cast<double>(n_genuine);
    nb.var_forged[j] /= static_cast<double>(n_forged);
    if (nb.var_genuine[j] < kNbVarianceFloor) nb.var_genuine[j] = kNbVarianceFloor;
    if (nb.var_forged[j] < kNbVarianceFloor) nb.var_forged[j] = kNbVarianceFloor;
  }

  VerificationModel model;
  model.kind = ModelKind::GaussianNb;
  model.feature_mask = ts.feature_mask;
  model.metadata = detail::make_metadata(ts, 0);
  model.params = std::move(nb);
  return model;
}

}  // namespace msig
