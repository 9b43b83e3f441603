#pragma once

#include <string>
#include <vector>

#include "msig/types.hpp"

namespace msig {

/// One user's partition: genuine recordings and the skilled forgeries made
/// of their signature (each carrying the forger's id).
struct UserRecord {
  std::string user_id;
  std::vector<SignatureRecording> genuine;
  std::vector<SignatureRecording> skilled_forgeries;
};

struct SignatureCorpus {
  std::vector<UserRecord> users;

  const UserRecord* find_user(const std::string& user_id) const;
};

/// Structural invariants: unique user ids, labels coherent with the lists
/// they sit in, forger_id present and distinct from user_id on every forgery.
/// Returns one message per violation (empty means valid).
std::vector<std::string> corpus_violations(const SignatureCorpus& corpus);

}  // namespace msig
