#include "msig/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>

#include <json.hpp>

#include "msig/errors.hpp"
#include "msig/rng.hpp"
#include "msig/signal.hpp"

namespace msig {

namespace {

using ordered_json = nlohmann::ordered_json;

void parallel_for(std::size_t n, std::size_t jobs,
                  const std::function<void(std::size_t)>& body) {
  if (jobs <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex err_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) return;
      try {
        body(i);
      } catch (...) {
        const std::lock_guard<std::mutex> lock(err_mutex);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> threads;
  const std::size_t n_threads = std::min(jobs, n);
  threads.reserve(n_threads);
  for (std::size_t t = 0; t < n_threads; ++t) threads.emplace_back(worker);
  for (std::thread& t : threads) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

template <typename T>
std::vector<T> dedup(const std::vector<T>& v, const char* what) {
  std::vector<T> out;
  for (const T& x : v) {
    if (std::find(out.begin(), out.end(), x) == out.end()) out.push_back(x);
  }
  if (out.empty()) throw InvalidParams(std::string(what) + " list is empty");
  return out;
}

void validate(const SignatureCorpus& corpus, const ExperimentConfig& config) {
  if (corpus.users.size() < 2) {
    throw CorpusShapeError("evaluation needs at least 2 users");
  }
  const std::vector<std::string> violations = corpus_violations(corpus);
  if (!violations.empty()) {
    throw CorpusShapeError("corpus invalid: " + violations.front() +
                           (violations.size() > 1 ? " (and more)" : ""));
  }
  if (config.n_repetitions == 0) throw InvalidParams("n_repetitions must be >= 1");
  if (config.n_genuine_eval == 0) throw InvalidParams("n_genuine_eval must be >= 1");
  if (config.n_random_forgers == 0) throw InvalidParams("n_random_forgers must be >= 1");
  if (config.n_random_forgers >= corpus.users.size()) {
    throw InvalidParams("n_random_forgers must be smaller than the user count");
  }
  if (config.n_coefficients == 0) throw InvalidParams("n_coefficients must be >= 1");
  if (config.n_forest_trees == 0) throw InvalidParams("n_forest_trees must be >= 1");
  std::size_t max_refs = 0;
  for (std::size_t r : config.refs_values()) {
    if (r == 0) throw InvalidParams("n_refs must be >= 1");
    max_refs = std::max(max_refs, r);
  }
  for (const UserRecord& user : corpus.users) {
    if (user.genuine.size() < max_refs + config.n_genuine_eval) {
      throw CorpusShapeError(
          "user " + user.user_id + " has " + std::to_string(user.genuine.size()) +
          " genuine signatures; need " +
          std::to_string(max_refs + config.n_genuine_eval));
    }
  }
}

struct PUser {
  std::string user_id;
  std::vector<CompressedSignature> genuine;
  std::vector<CompressedSignature> skilled;
};

std::vector<std::size_t> sorted_user_order(const SignatureCorpus& corpus) {
  std::vector<std::size_t> order(corpus.users.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return corpus.users[a].user_id < corpus.users[b].user_id;
  });
  return order;
}

std::vector<PUser> preprocess_corpus(const SignatureCorpus& corpus,
                                     const std::vector<std::size_t>& order,
                                     std::size_t k, std::size_t jobs) {
  std::vector<PUser> out(order.size());
  parallel_for(order.size(), jobs, [&](std::size_t i) {
    const UserRecord& rec = corpus.users[order[i]];
    PUser pu;
    pu.user_id = rec.user_id;
    pu.genuine.reserve(rec.genuine.size());
    for (const SignatureRecording& g : rec.genuine) pu.genuine.push_back(preprocess(g, k));
    pu.skilled.reserve(rec.skilled_forgeries.size());
    for (const SignatureRecording& f : rec.skilled_forgeries) {
      pu.skilled.push_back(preprocess(f, k));
    }
    out[i] = std::move(pu);
  });
  return out;
}

/// One user's split plus the three feature lists for one repetition. The same
/// lists serve as test material when the user is left out and as training
/// instances when they are not.
struct UserFeatures {
  UserSplit split;
  std::vector<FeatureVector> genuine;
  std::vector<FeatureVector> skilled;
  std::vector<FeatureVector> random;
  std::vector<std::string> donor_ids;  // parallel to `random`
};

UserFeatures features_for_user(const SignatureCorpus& corpus,
                               const std::vector<PUser>& pcorpus,
                               const std::map<std::string, std::size_t>& index_of,
                               std::size_t i, std::uint64_t rep_seed,
                               const ExperimentConfig& config) {
  const PUser& pu = pcorpus[i];
  UserFeatures uf;
  uf.split = make_split(corpus, pu.user_id, rep_seed, config);

  ReferenceSet refs;
  refs.user_id = pu.user_id;
  refs.references.reserve(uf.split.reference_indices.size());
  for (std::size_t idx : uf.split.reference_indices) refs.references.push_back(pu.genuine[idx]);

  uf.genuine.reserve(uf.split.eval_genuine_indices.size());
  for (std::size_t idx : uf.split.eval_genuine_indices) {
    uf.genuine.push_back(extract_features(pu.genuine[idx], refs));
  }
  uf.skilled.reserve(pu.skilled.size());
  for (const CompressedSignature& f : pu.skilled) {
    uf.skilled.push_back(extract_features(f, refs));
  }
  uf.random.reserve(uf.split.random_donors.size());
  for (const DonorRef& donor : uf.split.random_donors) {
    const PUser& dw = pcorpus[index_of.at(donor.user_id)];
    FeatureVector fv = extract_features(dw.genuine[donor.genuine_index], refs);
    fv.label = ClassLabel::Forged;  // genuine of another user, questioned as u
    fv.user_id = pu.user_id;
    uf.random.push_back(std::move(fv));
    uf.donor_ids.push_back(donor.user_id);
  }
  return uf;
}

std::vector<std::uint8_t> full_mask() {
  std::vector<std::uint8_t> mask(kNumDimensions);
  std::iota(mask.begin(), mask.end(), std::uint8_t{0});
  return mask;
}

/// Training instances for the fold that leaves out `left_out_id`: every other
/// user's genuine block, plus that task's forgery blocks. Random-forgery
/// instances whose donor recording belongs to the left-out user are dropped.
TrainingSet assemble_training(const std::vector<UserFeatures>& pool,
                              std::size_t left_out, const std::string& left_out_id,
                              Task task) {
  TrainingSet ts;
  ts.feature_mask = full_mask();
  for (std::size_t v = 0; v < pool.size(); ++v) {
    if (v == left_out) continue;
    const UserFeatures& uf = pool[v];
    ts.instances.insert(ts.instances.end(), uf.genuine.begin(), uf.genuine.end());
    if (task != Task::Random) {
      ts.instances.insert(ts.instances.end(), uf.skilled.begin(), uf.skilled.end());
    }
    if (task != Task::Skilled) {
      for (std::size_t j = 0; j < uf.random.size(); ++j) {
        if (uf.donor_ids[j] == left_out_id) continue;
        ts.instances.push_back(uf.random[j]);
      }
    }
  }
  return ts;
}

TrainingSet project_training(const TrainingSet& full, FeatureSubset subset) {
  if (subset == FeatureSubset::All) return full;
  const std::vector<std::size_t> idx = subset_indices(subset);
  TrainingSet ts;
  ts.feature_mask.reserve(idx.size());
  for (std::size_t i : idx) ts.feature_mask.push_back(static_cast<std::uint8_t>(i));
  ts.instances.reserve(full.instances.size());
  for (const FeatureVector& fv : full.instances) {
    FeatureVector proj;
    proj.label = fv.label;
    proj.user_id = fv.user_id;
    proj.values.reserve(idx.size());
    for (std::size_t i : idx) proj.values.push_back(fv.values[i]);
    ts.instances.push_back(std::move(proj));
  }
  return ts;
}

std::uint64_t fold_forest_seed(std::uint64_t master, std::size_t rep,
                               const std::string& user_id, Task task,
                               FeatureSubset subset, std::size_t n_refs) {
  std::uint64_t k = mix_keys(master, hash_key("forest"));
  k = mix_keys(k, rep);
  k = mix_keys(k, hash_key(user_id));
  k = mix_keys(k, static_cast<std::uint64_t>(task));
  k = mix_keys(k, static_cast<std::uint64_t>(subset));
  k = mix_keys(k, n_refs);
  return k;
}

VerificationModel train_kind(const TrainingSet& ts, ModelKind kind,
                             std::uint64_t forest_seed, std::size_t n_trees) {
  switch (kind) {
    case ModelKind::Logistic:
      return train_logistic(ts);
    case ModelKind::GaussianNb:
      return train_gaussian_nb(ts);
    case ModelKind::RandomForest: {
      ForestConfig fc;
      fc.n_trees = n_trees;
      fc.seed = forest_seed;
      return train_random_forest(ts, fc);
    }
  }
  throw InvalidParams("unknown classifier kind");
}

std::vector<ScoredSample> score_task(const VerificationModel& model,
                                     const UserFeatures& uf, Task task,
                                     FeatureSubset subset) {
  std::vector<ScoredSample> out;
  auto add = [&](const std::vector<FeatureVector>& fvs) {
    for (const FeatureVector& fv : fvs) {
      const FeatureVector proj = filter_features(fv, subset);
      out.push_back({predict_score(model, proj).probability_genuine, fv.label});
    }
  };
  add(uf.genuine);
  if (task != Task::Random) add(uf.skilled);
  if (task != Task::Skilled) add(uf.random);
  return out;
}

std::string json_dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json num_or_null(double v) {
  if (std::isnan(v)) return nullptr;
  return v;
}

std::string metric_str(double v) {
  if (std::isnan(v)) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

std::string_view task_name(Task t) {
  switch (t) {
    case Task::Skilled: return "skilled";
    case Task::Random: return "random";
    case Task::Any: return "any";
  }
  return "unknown";
}

std::string_view subset_name(FeatureSubset s) {
  switch (s) {
    case FeatureSubset::X: return "x";
    case FeatureSubset::Y: return "y";
    case FeatureSubset::Z: return "z";
    case FeatureSubset::Accel: return "accel";
    case FeatureSubset::GyroAccel: return "gyro_accel";
    case FeatureSubset::GyroVel: return "gyro_vel";
    case FeatureSubset::All: return "all";
  }
  return "unknown";
}

std::optional<Task> task_from_name(std::string_view name) {
  for (Task t : {Task::Skilled, Task::Random, Task::Any}) {
    if (task_name(t) == name) return t;
  }
  return std::nullopt;
}

std::optional<FeatureSubset> subset_from_name(std::string_view name) {
  for (FeatureSubset s :
       {FeatureSubset::X, FeatureSubset::Y, FeatureSubset::Z, FeatureSubset::Accel,
        FeatureSubset::GyroAccel, FeatureSubset::GyroVel, FeatureSubset::All}) {
    if (subset_name(s) == name) return s;
  }
  return std::nullopt;
}

std::vector<std::size_t> subset_indices(FeatureSubset s) {
  switch (s) {
    case FeatureSubset::X: return {0, 3, 6};
    case FeatureSubset::Y: return {1, 4, 7};
    case FeatureSubset::Z: return {2, 5, 8};
    case FeatureSubset::Accel: return {0, 1, 2};
    case FeatureSubset::GyroAccel: return {3, 4, 5};
    case FeatureSubset::GyroVel: return {6, 7, 8};
    case FeatureSubset::All: return {0, 1, 2, 3, 4, 5, 6, 7, 8};
  }
  throw InvalidParams("unknown feature subset");
}

FeatureVector filter_features(const FeatureVector& fv, FeatureSubset s) {
  if (fv.values.size() != kNumDimensions) {
    throw DimensionMismatch("filter_features expects a full-width feature vector");
  }
  FeatureVector out;
  out.label = fv.label;
  out.user_id = fv.user_id;
  const std::vector<std::size_t> idx = subset_indices(s);
  out.values.reserve(idx.size());
  for (std::size_t i : idx) out.values.push_back(fv.values[i]);
  return out;
}

UserSplit make_split(const SignatureCorpus& corpus, const std::string& user_id,
                     std::uint64_t rep_seed, const ExperimentConfig& config) {
  const UserRecord* user = corpus.find_user(user_id);
  if (user == nullptr) throw CorpusShapeError("unknown user: " + user_id);
  const std::size_t need = config.n_refs + config.n_genuine_eval;
  if (user->genuine.size() < need) {
    throw CorpusShapeError("user " + user_id + " has " +
                           std::to_string(user->genuine.size()) +
                           " genuine signatures; need " + std::to_string(need));
  }

  UserSplit split;
  split.user_id = user_id;

  // The evaluation block is drawn first so sweeping n_refs leaves it fixed;
  // references then come from the remainder, and a smaller n_refs selects a
  // prefix of a larger one's references under the same stream.
  Rng gen_stream = keyed_rng(rep_seed, {hash_key(user_id), hash_key("genuine")});
  const IndexPartition eval_part =
      sample_partition(user->genuine.size(), config.n_genuine_eval, gen_stream);
  split.eval_genuine_indices = eval_part.selected;
  if (eval_part.remainder.size() < config.n_refs) {
    throw CorpusShapeError("user " + user_id + ": not enough genuine left for references");
  }
  const IndexPartition ref_part =
      sample_partition(eval_part.remainder.size(), config.n_refs, gen_stream);
  split.reference_indices.reserve(config.n_refs);
  for (std::size_t i : ref_part.selected) {
    split.reference_indices.push_back(eval_part.remainder[i]);
  }

  std::vector<const UserRecord*> others;
  others.reserve(corpus.users.size() - 1);
  for (const UserRecord& other : corpus.users) {
    if (other.user_id != user_id) others.push_back(&other);
  }
  std::sort(others.begin(), others.end(),
            [](const UserRecord* a, const UserRecord* b) { return a->user_id < b->user_id; });
  if (others.size() < config.n_random_forgers) {
    throw CorpusShapeError("user " + user_id + ": only " +
                           std::to_string(others.size()) + " possible donors, need " +
                           std::to_string(config.n_random_forgers));
  }

  Rng donor_stream = keyed_rng(rep_seed, {hash_key(user_id), hash_key("donors")});
  const IndexPartition donor_part =
      sample_partition(others.size(), config.n_random_forgers, donor_stream);
  split.random_donors.reserve(config.n_random_forgers);
  for (std::size_t i : donor_part.selected) {
    const UserRecord* donor = others[i];
    if (donor->genuine.empty()) {
      throw CorpusShapeError("donor " + donor->user_id + " has no genuine signatures");
    }
    const std::size_t gi = static_cast<std::size_t>(
        donor_stream.below(static_cast<std::uint64_t>(donor->genuine.size())));
    split.random_donors.push_back({donor->user_id, gi});
  }
  return split;
}

std::vector<ExecutionResult> leave_one_user_out(const SignatureCorpus& corpus,
                                                const ExperimentConfig& config,
                                                ModelKind classifier,
                                                FeatureSubset subset) {
  ExperimentConfig cfg = config;
  cfg.n_refs_sweep.clear();  // single-cell pass over config.n_refs
  validate(corpus, cfg);
  const std::vector<Task> tasks = dedup(cfg.tasks, "tasks");

  const std::vector<std::size_t> order = sorted_user_order(corpus);
  const std::size_t n_users = order.size();
  const std::vector<PUser> pcorpus =
      preprocess_corpus(corpus, order, cfg.n_coefficients, cfg.jobs);
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < n_users; ++i) index_of[pcorpus[i].user_id] = i;

  std::vector<ExecutionResult> results(cfg.n_repetitions * n_users);
  for (std::size_t rep = 0; rep < cfg.n_repetitions; ++rep) {
    const std::uint64_t rep_seed = mix_keys(cfg.seed, rep);
    std::vector<UserFeatures> pool(n_users);
    parallel_for(n_users, cfg.jobs, [&](std::size_t i) {
      pool[i] = features_for_user(corpus, pcorpus, index_of, i, rep_seed, cfg);
    });
    parallel_for(n_users, cfg.jobs, [&](std::size_t ui) {
      const std::string& uid = pcorpus[ui].user_id;
      ExecutionResult res;
      res.repetition = rep;
      res.left_out_user = uid;
      for (Task t : tasks) {
        try {
          const TrainingSet full = assemble_training(pool, ui, uid, t);
          const TrainingSet proj = project_training(full, subset);
          const VerificationModel model =
              train_kind(proj, classifier,
                         fold_forest_seed(cfg.seed, rep, uid, t, subset, cfg.n_refs),
                         cfg.n_forest_trees);
          res.task_scores[static_cast<std::size_t>(t)] =
              score_task(model, pool[ui], t, subset);
        } catch (const Error& e) {
          throw Error("rep " + std::to_string(rep) + " user " + uid + " task " +
                      std::string(task_name(t)) + ": " + e.what());
        }
      }
      results[rep * n_users + ui] = std::move(res);
    });
  }
  return results;
}

VerificationModel train_fold(const SignatureCorpus& corpus,
                             const std::string& left_out_user,
                             const ExperimentConfig& config, Task task,
                             FeatureSubset subset, ModelKind classifier,
                             std::size_t repetition) {
  ExperimentConfig cfg = config;
  cfg.n_refs_sweep.clear();
  validate(corpus, cfg);
  if (corpus.find_user(left_out_user) == nullptr) {
    throw CorpusShapeError("unknown user: " + left_out_user);
  }
  const std::uint64_t rep_seed = mix_keys(cfg.seed, repetition);
  const std::vector<std::size_t> order = sorted_user_order(corpus);

  // The left-out user's recordings are never preprocessed or featurized here:
  // the fold model is a pure function of the other users' recordings.
  std::vector<PUser> pcorpus;
  std::map<std::string, std::size_t> index_of;
  for (std::size_t oi : order) {
    const UserRecord& rec = corpus.users[oi];
    if (rec.user_id == left_out_user) continue;
    PUser pu;
    pu.user_id = rec.user_id;
    for (const SignatureRecording& g : rec.genuine) {
      pu.genuine.push_back(preprocess(g, cfg.n_coefficients));
    }
    for (const SignatureRecording& f : rec.skilled_forgeries) {
      pu.skilled.push_back(preprocess(f, cfg.n_coefficients));
    }
    index_of[pu.user_id] = pcorpus.size();
    pcorpus.push_back(std::move(pu));
  }

  TrainingSet full;
  full.feature_mask = full_mask();
  for (const PUser& pu : pcorpus) {
    const UserSplit split = make_split(corpus, pu.user_id, rep_seed, cfg);
    ReferenceSet refs;
    refs.user_id = pu.user_id;
    for (std::size_t idx : split.reference_indices) refs.references.push_back(pu.genuine[idx]);

    for (std::size_t idx : split.eval_genuine_indices) {
      full.instances.push_back(extract_features(pu.genuine[idx], refs));
    }
    if (task != Task::Random) {
      for (const CompressedSignature& f : pu.skilled) {
        full.instances.push_back(extract_features(f, refs));
      }
    }
    if (task != Task::Skilled) {
      for (const DonorRef& donor : split.random_donors) {
        if (donor.user_id == left_out_user) continue;
        const PUser& dw = pcorpus[index_of.at(donor.user_id)];
        FeatureVector fv = extract_features(dw.genuine[donor.genuine_index], refs);
        fv.label = ClassLabel::Forged;
        fv.user_id = pu.user_id;
        full.instances.push_back(std::move(fv));
      }
    }
  }

  const TrainingSet proj = project_training(full, subset);
  return train_kind(proj, classifier,
                    fold_forest_seed(cfg.seed, repetition, left_out_user, task,
                                     subset, cfg.n_refs),
                    cfg.n_forest_trees);
}

EvaluationReport run_experiment(const SignatureCorpus& corpus,
                                const ExperimentConfig& config) {
  validate(corpus, config);
  const std::vector<ModelKind> classifiers = dedup(config.classifiers, "classifiers");
  const std::vector<Task> tasks = dedup(config.tasks, "tasks");
  const std::vector<FeatureSubset> subsets = dedup(config.subsets, "subsets");
  const std::vector<std::size_t> refs_list = dedup(config.refs_values(), "n_refs");

  const std::vector<std::size_t> order = sorted_user_order(corpus);
  const std::size_t n_users = order.size();
  const std::size_t n_exec = config.n_repetitions * n_users;
  const std::vector<PUser> pcorpus =
      preprocess_corpus(corpus, order, config.n_coefficients, config.jobs);
  std::map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < n_users; ++i) index_of[pcorpus[i].user_id] = i;

  // Canonical cell order: classifier-major, then task, subset, n_refs.
  std::vector<CellKey> cells;
  std::map<std::tuple<int, int, int, std::size_t>, std::size_t> cell_index;
  for (ModelKind c : classifiers) {
    for (Task t : tasks) {
      for (FeatureSubset s : subsets) {
        for (std::size_t r : refs_list) {
          cell_index[{static_cast<int>(c), static_cast<int>(t), static_cast<int>(s), r}] =
              cells.size();
          cells.push_back({c, t, s, r});
        }
      }
    }
  }

  struct ExecOutcome {
    bool ok = false;
    double auc = 0.0;
    double eer = 0.0;
    std::vector<ScoredSample> scores;  // kept only for pooled metrics
    std::string error;
  };
  std::vector<std::vector<ExecOutcome>> outcomes(cells.size(),
                                                 std::vector<ExecOutcome>(n_exec));

  for (std::size_t r : refs_list) {
    ExperimentConfig cfg = config;
    cfg.n_refs = r;
    cfg.n_refs_sweep.clear();
    for (std::size_t rep = 0; rep < config.n_repetitions; ++rep) {
      const std::uint64_t rep_seed = mix_keys(config.seed, rep);
      std::vector<UserFeatures> pool(n_users);
      parallel_for(n_users, config.jobs, [&](std::size_t i) {
        pool[i] = features_for_user(corpus, pcorpus, index_of, i, rep_seed, cfg);
      });
      parallel_for(n_users, config.jobs, [&](std::size_t ui) {
        const std::string& uid = pcorpus[ui].user_id;
        const std::size_t exec_idx = rep * n_users + ui;
        for (Task t : tasks) {
          const TrainingSet full = assemble_training(pool, ui, uid, t);
          for (FeatureSubset s : subsets) {
            const TrainingSet proj = project_training(full, s);
            for (ModelKind c : classifiers) {
              const std::size_t ci = cell_index.at({static_cast<int>(c),
                                                    static_cast<int>(t),
                                                    static_cast<int>(s), r});
              ExecOutcome& out = outcomes[ci][exec_idx];
              try {
                const VerificationModel model =
                    train_kind(proj, c, fold_forest_seed(config.seed, rep, uid, t, s, r),
                               config.n_forest_trees);
                std::vector<ScoredSample> scores = score_task(model, pool[ui], t, s);
                out.auc = compute_auc(scores);
                out.eer = compute_eer(scores);
                out.ok = true;
                if (config.pooled_metrics) out.scores = std::move(scores);
              } catch (const std::exception& e) {
                out.error = "rep " + std::to_string(rep) + " user " + uid + ": " + e.what();
              }
            }
          }
        }
      });
    }
  }

  EvaluationReport report;
  report.seed = config.seed;
  report.n_repetitions = config.n_repetitions;
  report.n_genuine_eval = config.n_genuine_eval;
  report.n_random_forgers = config.n_random_forgers;
  report.pooled_metrics = config.pooled_metrics;
  report.cells.reserve(cells.size());

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    CellResult res;
    res.key = cells[ci];
    std::vector<double> aucs, eers;
    std::vector<ScoredSample> pooled;
    for (std::size_t e = 0; e < n_exec; ++e) {
      const ExecOutcome& out = outcomes[ci][e];
      if (out.ok) {
        ++res.n_executions;
        aucs.push_back(out.auc);
        eers.push_back(out.eer);
        if (config.pooled_metrics) {
          pooled.insert(pooled.end(), out.scores.begin(), out.scores.end());
        }
      } else {
        res.errors.push_back(out.error);
      }
    }
    auto mean_std = [](const std::vector<double>& xs) {
      double mean = 0.0;
      for (double x : xs) mean += x;
      mean /= static_cast<double>(xs.size());
      double var = 0.0;
      for (double x : xs) var += (x - mean) * (x - mean);
      return std::pair<double, double>(mean, std::sqrt(var / static_cast<double>(xs.size())));
    };
    if (res.n_executions == 0) {
      res.mean_auc = res.std_auc = res.mean_eer = res.std_eer = nan;
    } else if (config.pooled_metrics) {
      res.mean_auc = compute_auc(pooled);
      res.mean_eer = compute_eer(pooled);
      res.std_auc = res.std_eer = 0.0;
    } else {
      std::tie(res.mean_auc, res.std_auc) = mean_std(aucs);
      std::tie(res.mean_eer, res.std_eer) = mean_std(eers);
    }
    report.cells.push_back(std::move(res));
  }
  return report;
}

std::string report_to_json(const EvaluationReport& report) {
  ordered_json j;
  j["format_version"] = 1;
  j["seed"] = report.seed;
  j["n_repetitions"] = report.n_repetitions;
  j["n_genuine_eval"] = report.n_genuine_eval;
  j["n_random_forgers"] = report.n_random_forgers;
  j["pooled_metrics"] = report.pooled_metrics;
  j["cells"] = ordered_json::array();
  for (const CellResult& cell : report.cells) {
    ordered_json c;
    c["classifier"] = std::string(model_kind_name(cell.key.classifier));
    c["task"] = std::string(task_name(cell.key.task));
    c["subset"] = std::string(subset_name(cell.key.subset));
    c["n_refs"] = cell.key.n_refs;
    c["n_executions"] = cell.n_executions;
    c["mean_auc"] = num_or_null(cell.mean_auc);
    c["std_auc"] = num_or_null(cell.std_auc);
    c["mean_eer"] = num_or_null(cell.mean_eer);
    c["std_eer"] = num_or_null(cell.std_eer);
    c["errors"] = cell.errors;
    j["cells"].push_back(std::move(c));
  }
  return json_dump(j);
}

void write_report(const EvaluationReport& report, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open report file for writing: " + path.string());
  const std::string body = report_to_json(report);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  out.flush();
  if (!out) throw Error("failed writing report file: " + path.string());
}

std::string format_report_table(const EvaluationReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-14s %-8s %-11s %5s %6s %9s %8s %9s %8s %7s\n",
                "classifier", "task", "subset", "refs", "execs", "mean_auc",
                "std_auc", "mean_eer", "std_eer", "errors");
  out << line << std::string(93, '-') << "\n";
  for (const CellResult& cell : report.cells) {
    std::snprintf(line, sizeof(line), "%-14s %-8s %-11s %5zu %6zu %9s %8s %9s %8s %7zu\n",
                  std::string(model_kind_name(cell.key.classifier)).c_str(),
                  std::string(task_name(cell.key.task)).c_str(),
                  std::string(subset_name(cell.key.subset)).c_str(), cell.key.n_refs,
                  cell.n_executions, metric_str(cell.mean_auc).c_str(),
                  metric_str(cell.std_auc).c_str(), metric_str(cell.mean_eer).c_str(),
                  metric_str(cell.std_eer).c_str(), cell.errors.size());
    out << line;
  }
  return out.str();
}

std::string executions_to_json(const std::vector<ExecutionResult>& executions) {
  ordered_json j;
  j["format_version"] = 1;
  j["executions"] = ordered_json::array();
  for (const ExecutionResult& exec : executions) {
    ordered_json e;
    e["repetition"] = exec.repetition;
    e["left_out_user"] = exec.left_out_user;
    e["tasks"] = ordered_json::object();
    for (Task t : {Task::Skilled, Task::Random, Task::Any}) {
      const std::vector<ScoredSample>& scores = exec.scores(t);
      if (scores.empty()) continue;
      ordered_json list = ordered_json::array();
      for (const ScoredSample& s : scores) {
        ordered_json item;
        item["score"] = s.score;
        item["label"] = std::string(label_name(s.label));
        list.push_back(std::move(item));
      }
      e["tasks"][std::string(task_name(t))] = std::move(list);
    }
    j["executions"].push_back(std::move(e));
  }
  return json_dump(j);
}

}  // namespace msig
