#include <cmath>
#include <span>
#include <vector>

#include "classifier_detail.hpp"
#include "msig/errors.hpp"

namespace msig {

namespace {

// Solves A x = b for symmetric positive definite A (row-major d x d).
// Returns false if the factorization breaks down.
bool cholesky_solve(std::vector<double> a, std::vector<double> b,
                    std::size_t d, std::vector<double>& x) {
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double sum = a[i * d + j];
      for (std::size_t k = 0; k < j; ++k) sum -= a[i * d + k] * a[j * d + k];
      if (i == j) {
        if (sum <= 0.0) return false;
        a[i * d + j] = std::sqrt(sum);
      } else {
        a[i * d + j] = sum / a[j * d + j];
      }
    }
  }
  // forward then backward substitution
  for (std::size_t i = 0; i < d; ++i) {
    double sum = b[i];
    for (std::size_t k = 0; k < i; ++k) sum -= a[i * d + k] * b[k];
    b[i] = sum / a[i * d + i];
  }
  x.assign(d, 0.0);
  for (std::size_t ii = d; ii > 0; --ii) {
    const std::size_t i = ii - 1;
    double sum = b[i];
    for (std::size_t k = i + 1; k < d; ++k) sum -= a[k * d + i] * x[k];
    x[i] = sum / a[i * d + i];
  }
  return true;
}

double softplus(double m) {
  // log(1 + exp(m)) without overflow
  if (m > 0.0) return m + std::log1p(std::exp(-m));
  return std::log1p(std::exp(m));
}

}  // namespace

double logistic_nll(const std::vector<FeatureVector>& instances,
                    std::span<const double> weights, double bias, double ridge,
                    std::vector<double>* gradient) {
  const std::size_t d = weights.size();
  for (const FeatureVector& fv : instances) {
    if (fv.values.size() != d) {
      throw FeatureWidthMismatch("instance width does not match weight vector");
    }
  }
  if (gradient != nullptr) gradient->assign(d + 1, 0.0);

  double loss = 0.0;
  for (const FeatureVector& fv : instances) {
    double m = bias;
    for (std::size_t j = 0; j < d; ++j) m += weights[j] * fv.values[j];
    const double y = fv.label == ClassLabel::Genuine ? 1.0 : 0.0;
    loss += softplus(m) - y * m;
    if (gradient != nullptr) {
      const double r = 1.0 / (1.0 + std::exp(-m)) - y;
      for (std::size_t j = 0; j < d; ++j) (*gradient)[j] += r * fv.values[j];
      (*gradient)[d] += r;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    loss += 0.5 * ridge * weights[j] * weights[j];
    if (gradient != nullptr) (*gradient)[j] += ridge * weights[j];
  }
  return loss;
}

VerificationModel train_logistic(const TrainingSet& ts,
                                 const LogisticConfig& config) {
  detail::check_training_set(ts);
  const std::size_t n = ts.instances.size();
  const std::size_t d = ts.width();

  // Standardize features; DTW distances carry arbitrary scale.
  std::vector<double> means(d, 0.0), sigmas(d, 0.0);
  for (const FeatureVector& fv : ts.instances) {
    for (std::size_t j = 0; j < d; ++j) means[j] += fv.values[j];
  }
  for (std::size_t j = 0; j < d; ++j) means[j] /= static_cast<double>(n);
  for (const FeatureVector& fv : ts.instances) {
    for (std::size_t j = 0; j < d; ++j) {
      const double diff = fv.values[j] - means[j];
      sigmas[j] += diff * diff;
    }
  }
  for (std::size_t j = 0; j < d; ++j) {
    sigmas[j] = std::sqrt(sigmas[j] / static_cast<double>(n));
    if (sigmas[j] < 1e-12) sigmas[j] = 1.0;  // constant feature contributes 0
  }

  std::vector<FeatureVector> zs(n);
  for (std::size_t i = 0; i < n; ++i) {
    zs[i].label = ts.instances[i].label;
    zs[i].values.resize(d);
    for (std::size_t j = 0; j < d; ++j) {
      zs[i].values[j] = (ts.instances[i].values[j] - means[j]) / sigmas[j];
    }
  }

  const double lambda = config.ridge;
  const std::size_t dim = d + 1;  // weights + bias
  std::vector<double> w(dim, 0.0);

  auto nll_of = [&](const std::vector<double>& wv, std::vector<double>* grad) {
    return logistic_nll(zs, std::span<const double>(wv.data(), d), wv[d], lambda,
                        grad);
  };

  double loss = nll_of(w, nullptr);
  if (config.loss_trace) config.loss_trace->push_back(loss);

  bool converged = false;
  std::uint32_t iterations = 0;
  std::vector<double> grad(dim), hess(dim * dim), step(dim), trial(dim);

  for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
    nll_of(w, &grad);

    double grad_norm = 0.0;
    for (double g : grad) grad_norm += g * g;
    grad_norm = std::sqrt(grad_norm);
    if (grad_norm <= config.gradient_tolerance) {
      converged = true;
      break;
    }

    std::fill(hess.begin(), hess.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double m = w[d];
      for (std::size_t j = 0; j < d; ++j) m += w[j] * zs[i].values[j];
      const double p = 1.0 / (1.0 + std::exp(-m));
      const double s = p * (1.0 - p);
      for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = 0; k <= j; ++k) {
          hess[j * dim + k] += s * zs[i].values[j] * zs[i].values[k];
        }
        hess[d * dim + j] += s * zs[i].values[j];
      }
      hess[d * dim + d] += s;
    }
    for (std::size_t j = 0; j < d; ++j) hess[j * dim + j] += lambda;
    // mirror the lower triangle
    for (std::size_t j = 0; j < dim; ++j) {
      for (std::size_t k = j + 1; k < dim; ++k) hess[j * dim + k] = hess[k * dim + j];
    }

    // Newton direction, with growing diagonal damping if the Hessian is
    // numerically singular (separable data drives p(1-p) to 0).
    double damping = 1e-10;
    bool solved = false;
    while (damping < 1e6) {
      std::vector<double> hd = hess;
      for (std::size_t j = 0; j < dim; ++j) hd[j * dim + j] += damping;
      if (cholesky_solve(std::move(hd), grad, dim, step)) {
        solved = true;
        break;
      }
      damping *= 100.0;
    }
    if (!solved) break;

    // Step halving keeps the loss decreasing. Progress below the resolution
    // floor means the optimum is pinned as tightly as doubles allow; without
    // this stop, quasi-separable fits stall in noise until max_iterations.
    const double floor_decrease = config.loss_tolerance * (1.0 + std::abs(loss));
    double t = 1.0;
    double new_loss = loss;
    bool improved = false;
    while (t > 1e-14) {
      for (std::size_t j = 0; j < dim; ++j) trial[j] = w[j] - t * step[j];
      new_loss = nll_of(trial, nullptr);
      if (new_loss <= loss - floor_decrease) {
        improved = true;
        break;
      }
      t *= 0.5;
    }
    if (!improved) {
      converged = true;
      break;
    }

    w = trial;
    loss = new_loss;
    ++iterations;
    if (config.loss_trace) config.loss_trace->push_back(loss);
  }

  LogisticModel lm;
  lm.weights.assign(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(d));
  lm.bias = w[d];
  lm.feature_means = std::move(means);
  lm.feature_sigmas = std::move(sigmas);
  lm.converged = converged;
  lm.iterations = iterations;

  VerificationModel model;
  model.kind = ModelKind::Logistic;
  model.feature_mask = ts.feature_mask;
  model.metadata = detail::make_metadata(ts, 0);
  model.params = std::move(lm);
  return model;
}

}  // namespace msig
