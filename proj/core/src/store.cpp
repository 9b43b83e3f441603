#include "msig/store.hpp"

#include <bit>
#include <chrono>
#include <cstring>
#include <fstream>
#include <utility>

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include "msig/errors.hpp"
#include "msig/rng.hpp"
#include "msig/signal.hpp"

namespace msig {

namespace {

constexpr char kMagic[8] = {'M', 'S', 'I', 'G', 'R', 'E', 'F', '\0'};
constexpr std::uint64_t kMaxCount = 1u << 28;

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<std::uint64_t>(v)); }

void put_str(std::string& out, const std::string& s) {
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  out.append(s);
}

struct Reader {
  const std::string& data;
  std::size_t pos = 0;

  void need(std::size_t n) const {
    if (pos + n > data.size()) throw CorruptStoreFile("store file truncated");
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data[pos++]);
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) {
      v |= static_cast<std::uint32_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
    }
    pos += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data[pos + i])) << (8 * i);
    }
    pos += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::uint32_t count() {
    const std::uint32_t n = u32();
    if (n > kMaxCount) throw CorruptStoreFile("implausible length field");
    return n;
  }
  std::string str() {
    const std::uint32_t n = count();
    need(n);
    std::string s = data.substr(pos, n);
    pos += n;
    return s;
  }
};

void serialize_signature(std::string& out, const CompressedSignature& cs) {
  put_str(out, cs.user_id);
  out.push_back(static_cast<char>(cs.label));
  put_str(out, cs.forger_id);
  for (const CoefficientVector& cv : cs.vectors) {
    put_u32(out, static_cast<std::uint32_t>(cv.coefficients.size()));
    for (double c : cv.coefficients) put_f64(out, c);
  }
}

CompressedSignature deserialize_signature(Reader& r) {
  CompressedSignature cs;
  cs.user_id = r.str();
  const std::uint8_t label = r.u8();
  if (label > 2) throw CorruptStoreFile("bad label tag");
  cs.label = static_cast<ClassLabel>(label);
  cs.forger_id = r.str();
  for (std::size_t d = 0; d < kNumDimensions; ++d) {
    cs.vectors[d].dimension_id = static_cast<Dimension>(d);
    const std::uint32_t n = r.count();
    cs.vectors[d].coefficients.resize(n);
    for (std::uint32_t i = 0; i < n; ++i) cs.vectors[d].coefficients[i] = r.f64();
  }
  return cs;
}

std::int64_t wall_clock_seconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

/// RAII advisory lock on `<store>.lock`; serializes writers across processes.
class FileLock {
 public:
  explicit FileLock(const std::filesystem::path& path) {
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR | O_CLOEXEC, 0644);
    if (fd_ < 0) throw Error("cannot open lock file: " + path.string());
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw Error("cannot lock " + path.string());
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_;
};

void fsync_path(const std::filesystem::path& path, int open_flags) {
  const int fd = ::open(path.c_str(), open_flags | O_CLOEXEC);
  if (fd < 0) return;  // directory fsync is best-effort
  ::fsync(fd);
  ::close(fd);
}

}  // namespace

std::uint64_t recordings_content_hash(const std::vector<SignatureRecording>& recordings) {
  std::uint64_t h = hash_key("enrollment");
  h = mix_keys(h, recordings.size());
  for (const SignatureRecording& rec : recordings) {
    h = mix_keys(h, hash_key(rec.user_id));
    h = mix_keys(h, std::bit_cast<std::uint64_t>(rec.sample_rate_hz));
    h = mix_keys(h, rec.length());
    for (const MotionSignal& sig : rec.signals) {
      for (double v : sig.samples) h = mix_keys(h, std::bit_cast<std::uint64_t>(v));
    }
  }
  return h;
}

ReferenceStore::ReferenceStore(std::filesystem::path path)
    : path_(std::move(path)), clock_(wall_clock_seconds) {
  reload();
}

void ReferenceStore::set_clock(std::function<std::int64_t()> clock) {
  clock_ = std::move(clock);
}

void ReferenceStore::reload() {
  entries_.clear();
  std::ifstream in(path_, std::ios::binary);
  if (!in) return;  // no file yet: empty store
  std::string data((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());

  Reader r{data};
  r.need(sizeof(kMagic));
  if (std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0) {
    throw CorruptStoreFile("bad magic; not a reference store: " + path_.string());
  }
  r.pos = sizeof(kMagic);
  const std::uint32_t version = r.u32();
  if (version != kStoreFormatVersion) {
    throw UnsupportedVersion("store format version " + std::to_string(version));
  }
  const std::uint32_t n_users = r.count();
  for (std::uint32_t u = 0; u < n_users; ++u) {
    const std::string user_id = r.str();
    Entry entry;
    entry.enrolled_at_unix = static_cast<std::int64_t>(r.u64());
    entry.content_hash = r.u64();
    const std::uint32_t n_refs = r.count();
    entry.references.reserve(n_refs);
    for (std::uint32_t i = 0; i < n_refs; ++i) {
      entry.references.push_back(deserialize_signature(r));
    }
    entries_[user_id] = std::move(entry);
  }
  if (r.pos != data.size()) throw CorruptStoreFile("trailing bytes in store file");
}

void ReferenceStore::save() const {
  std::string blob;
  blob.append(kMagic, sizeof(kMagic));
  put_u32(blob, kStoreFormatVersion);
  put_u32(blob, static_cast<std::uint32_t>(entries_.size()));
  for (const auto& [user_id, entry] : entries_) {
    put_str(blob, user_id);
    put_u64(blob, static_cast<std::uint64_t>(entry.enrolled_at_unix));
    put_u64(blob, entry.content_hash);
    put_u32(blob, static_cast<std::uint32_t>(entry.references.size()));
    for (const CompressedSignature& cs : entry.references) {
      serialize_signature(blob, cs);
    }
  }

  const FileLock lock(path_.string() + ".lock");
  const std::filesystem::path tmp = path_.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write store temp file: " + tmp.string());
    out.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    out.flush();
    if (!out) throw Error("failed writing store temp file: " + tmp.string());
  }
  fsync_path(tmp, O_RDONLY);
  std::error_code ec;
  std::filesystem::rename(tmp, path_, ec);
  if (ec) throw Error("cannot replace store file: " + ec.message());
  const std::filesystem::path dir = path_.parent_path();
  fsync_path(dir.empty() ? "." : dir, O_RDONLY | O_DIRECTORY);
}

void ReferenceStore::enroll(const std::string& user_id,
                            const std::vector<SignatureRecording>& recordings,
                            bool overwrite, std::size_t k) {
  if (recordings.empty()) throw EmptyEnrollment("no recordings for " + user_id);
  std::vector<CompressedSignature> refs;
  refs.reserve(recordings.size());
  for (const SignatureRecording& rec : recordings) {
    CompressedSignature cs = preprocess(rec, k);
    cs.user_id = user_id;  // references belong to the enrolled identity
    cs.label = ClassLabel::Genuine;
    cs.forger_id.clear();
    refs.push_back(std::move(cs));
  }
  enroll_compressed(user_id, std::move(refs), recordings_content_hash(recordings),
                    overwrite);
}

void ReferenceStore::enroll_compressed(const std::string& user_id,
                                       std::vector<CompressedSignature> references,
                                       std::uint64_t content_hash, bool overwrite) {
  if (user_id.empty()) throw InvalidParams("user_id must be non-empty");
  if (references.empty()) throw EmptyEnrollment("no references for " + user_id);
  if (!overwrite && entries_.count(user_id) != 0) {
    throw UserAlreadyEnrolled(user_id + " is already enrolled");
  }
  Entry entry;
  entry.references = std::move(references);
  entry.enrolled_at_unix = clock_();
  entry.content_hash = content_hash;

  // Stage in memory, persist, and only then expose: a failed save must not
  // leave the in-memory view ahead of the file.
  auto previous = entries_.find(user_id);
  Entry backup;
  const bool had = previous != entries_.end();
  if (had) backup = previous->second;
  entries_[user_id] = std::move(entry);
  try {
    save();
  } catch (...) {
    if (had) {
      entries_[user_id] = std::move(backup);
    } else {
      entries_.erase(user_id);
    }
    throw;
  }
}

ReferenceSet ReferenceStore::get_references(const std::string& user_id) const {
  const auto it = entries_.find(user_id);
  if (it == entries_.end()) throw UnknownUser(user_id + " is not enrolled");
  ReferenceSet refs;
  refs.user_id = user_id;
  refs.references = it->second.references;
  return refs;
}

bool ReferenceStore::has_user(const std::string& user_id) const {
  return entries_.count(user_id) != 0;
}

std::vector<std::string> ReferenceStore::user_ids() const {
  std::vector<std::string> ids;
  ids.reserve(entries_.size());
  for (const auto& [id, entry] : entries_) ids.push_back(id);
  return ids;
}

std::int64_t ReferenceStore::enrolled_at(const std::string& user_id) const {
  const auto it = entries_.find(user_id);
  if (it == entries_.end()) throw UnknownUser(user_id + " is not enrolled");
  return it->second.enrolled_at_unix;
}

std::uint64_t ReferenceStore::content_hash(const std::string& user_id) const {
  const auto it = entries_.find(user_id);
  if (it == entries_.end()) throw UnknownUser(user_id + " is not enrolled");
  return it->second.content_hash;
}

}  // namespace msig
