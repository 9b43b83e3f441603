#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "msig/classifiers.hpp"
#include "msig/errors.hpp"

namespace msig {

namespace {

constexpr char kMagic[8] = {'M', 'S', 'I', 'G', 'M', 'D', 'L', '\0'};
constexpr std::uint64_t kMaxCount = 1u << 28;  // rejects absurd length fields

void put_bytes(std::ostream& out, const void* data, std::size_t n) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
}

void put_u8(std::ostream& out, std::uint8_t v) { put_bytes(out, &v, 1); }

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  put_bytes(out, b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  put_bytes(out, b, 8);
}

void put_f64(std::ostream& out, double v) {
  put_u64(out, std::bit_cast<std::uint64_t>(v));
}

void put_vec(std::ostream& out, const std::vector<double>& v) {
  put_u32(out, static_cast<std::uint32_t>(v.size()));
  for (double x : v) put_f64(out, x);
}

void get_bytes(std::istream& in, void* data, std::size_t n) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
  if (in.gcount() != static_cast<std::streamsize>(n)) {
    throw CorruptModelFile("model file truncated");
  }
}

std::uint8_t get_u8(std::istream& in) {
  std::uint8_t v;
  get_bytes(in, &v, 1);
  return v;
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  get_bytes(in, b, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  get_bytes(in, b, 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) { return std::bit_cast<double>(get_u64(in)); }

std::uint32_t get_count(std::istream& in) {
  const std::uint32_t n = get_u32(in);
  if (n > kMaxCount) throw CorruptModelFile("implausible length field");
  return n;
}

std::vector<double> get_vec(std::istream& in) {
  const std::uint32_t n = get_count(in);
  std::vector<double> v(n);
  for (std::uint32_t i = 0; i < n; ++i) v[i] = get_f64(in);
  return v;
}

}  // namespace

void save_model(const VerificationModel& model, std::ostream& sink) {
  put_bytes(sink, kMagic, sizeof(kMagic));
  put_u32(sink, kModelFormatVersion);
  put_u8(sink, static_cast<std::uint8_t>(model.kind));

  put_u32(sink, static_cast<std::uint32_t>(model.feature_mask.size()));
  for (std::uint8_t m : model.feature_mask) put_u8(sink, m);

  put_u64(sink, model.metadata.seed);
  put_u64(sink, model.metadata.n_genuine);
  put_u64(sink, model.metadata.n_forged);

  switch (model.kind) {
    case ModelKind::Logistic: {
      const auto& lm = std::get<LogisticModel>(model.params);
      put_vec(sink, lm.weights);
      put_f64(sink, lm.bias);
      put_vec(sink, lm.feature_means);
      put_vec(sink, lm.feature_sigmas);
      put_u8(sink, lm.converged ? 1 : 0);
      put_u32(sink, lm.iterations);
      break;
    }
    case ModelKind::GaussianNb: {
      const auto& nb = std::get<GaussianNbModel>(model.params);
      put_f64(sink, nb.prior_genuine);
      put_f64(sink, nb.prior_forged);
      put_vec(sink, nb.mean_genuine);
      put_vec(sink, nb.var_genuine);
      put_vec(sink, nb.mean_forged);
      put_vec(sink, nb.var_forged);
      break;
    }
    case ModelKind::RandomForest: {
      const auto& rf = std::get<RandomForestModel>(model.params);
      put_u64(sink, rf.seed);
      put_u32(sink, static_cast<std::uint32_t>(rf.trees.size()));
      for (const DecisionTree& tree : rf.trees) {
        put_u32(sink, static_cast<std::uint32_t>(tree.nodes.size()));
        for (const TreeNode& node : tree.nodes) {
          put_u32(sink, static_cast<std::uint32_t>(node.feature));
          put_f64(sink, node.threshold);
          put_u32(sink, node.left);
          put_u32(sink, node.right);
          put_u8(sink, node.leaf_genuine);
        }
      }
      break;
    }
  }
  if (!sink) throw Error("failed writing model stream");
}

VerificationModel load_model(std::istream& source) {
  char magic[8];
  get_bytes(source, magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CorruptModelFile("bad magic; not a model file");
  }
  const std::uint32_t version = get_u32(source);
  if (version != kModelFormatVersion) {
    throw UnsupportedVersion("model format version " + std::to_string(version) +
                             " (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  const std::uint8_t kind_tag = get_u8(source);
  if (kind_tag > 2) throw CorruptModelFile("unknown model kind tag");

  VerificationModel model;
  model.kind = static_cast<ModelKind>(kind_tag);

  const std::uint32_t mask_len = get_count(source);
  model.feature_mask.resize(mask_len);
  for (std::uint32_t i = 0; i < mask_len; ++i) model.feature_mask[i] = get_u8(source);

  model.metadata.seed = get_u64(source);
  model.metadata.n_genuine = get_u64(source);
  model.metadata.n_forged = get_u64(source);

  switch (model.kind) {
    case ModelKind::Logistic: {
      LogisticModel lm;
      lm.weights = get_vec(source);
      lm.bias = get_f64(source);
      lm.feature_means = get_vec(source);
      lm.feature_sigmas = get_vec(source);
      lm.converged = get_u8(source) != 0;
      lm.iterations = get_u32(source);
      if (lm.weights.size() != mask_len || lm.feature_means.size() != mask_len ||
          lm.feature_sigmas.size() != mask_len) {
        throw CorruptModelFile("logistic parameter widths disagree with mask");
      }
      model.params = std::move(lm);
      break;
    }
    case ModelKind::GaussianNb: {
      GaussianNbModel nb;
      nb.prior_genuine = get_f64(source);
      nb.prior_forged = get_f64(source);
      nb.mean_genuine = get_vec(source);
      nb.var_genuine = get_vec(source);
      nb.mean_forged = get_vec(source);
      nb.var_forged = get_vec(source);
      if (nb.mean_genuine.size() != mask_len || nb.var_genuine.size() != mask_len ||
          nb.mean_forged.size() != mask_len || nb.var_forged.size() != mask_len) {
        throw CorruptModelFile("naive-bayes parameter widths disagree with mask");
      }
      model.params = std::move(nb);
      break;
    }
    case ModelKind::RandomForest: {
      RandomForestModel rf;
      rf.seed = get_u64(source);
      const std::uint32_t n_trees = get_count(source);
      rf.trees.resize(n_trees);
      for (std::uint32_t t = 0; t < n_trees; ++t) {
        const std::uint32_t n_nodes = get_count(source);
        if (n_nodes == 0) throw CorruptModelFile("tree with no nodes");
        rf.trees[t].nodes.resize(n_nodes);
        for (std::uint32_t i = 0; i < n_nodes; ++i) {
          TreeNode& node = rf.trees[t].nodes[i];
          node.feature = static_cast<std::int32_t>(get_u32(source));
          node.threshold = get_f64(source);
          node.left = get_u32(source);
          node.right = get_u32(source);
          node.leaf_genuine = get_u8(source);
          if (node.feature >= 0) {
            if (static_cast<std::uint32_t>(node.feature) >= mask_len) {
              throw CorruptModelFile("split on out-of-range feature");
            }
          }
        }
        for (const TreeNode& node : rf.trees[t].nodes) {
          if (node.feature >= 0 && (node.left >= n_nodes || node.right >= n_nodes)) {
            throw CorruptModelFile("tree child index out of range");
          }
        }
      }
      model.params = std::move(rf);
      break;
    }
  }
  if (source.peek() != std::char_traits<char>::eof()) {
    throw CorruptModelFile("trailing bytes after model payload");
  }
  return model;
}

void save_model(const VerificationModel& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open model file for writing: " + path.string());
  save_model(model, out);
  out.flush();
  if (!out) throw Error("failed writing model file: " + path.string());
}

VerificationModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CorruptModelFile("cannot open model file: " + path.string());
  return load_model(in);
}

}  // namespace msig
