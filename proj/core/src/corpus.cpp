#include "msig/corpus.hpp"

#include <set>

namespace msig {

const UserRecord* SignatureCorpus::find_user(const std::string& user_id) const {
  for (const UserRecord& user : users) {
    if (user.user_id == user_id) return &user;
  }
  return nullptr;
}

std::vector<std::string> corpus_violations(const SignatureCorpus& corpus) {
  std::vector<std::string> problems;
  std::set<std::string> seen;
  for (const UserRecord& user : corpus.users) {
    if (user.user_id.empty()) {
      problems.push_back("empty user_id");
      continue;
    }
    if (!seen.insert(user.user_id).second) {
      problems.push_back("duplicate user_id: " + user.user_id);
    }
    for (const SignatureRecording& rec : user.genuine) {
      if (rec.label != ClassLabel::Genuine) {
        problems.push_back(user.user_id + ": genuine list holds a non-GENUINE recording");
      }
      if (!rec.forger_id.empty()) {
        problems.push_back(user.user_id + ": genuine recording carries a forger_id");
      }
    }
    for (const SignatureRecording& rec : user.skilled_forgeries) {
      if (rec.label != ClassLabel::Forged) {
        problems.push_back(user.user_id + ": forgery list holds a non-FORGED recording");
      }
      if (rec.forger_id.empty()) {
        problems.push_back(user.user_id + ": forgery without forger_id");
      } else if (rec.forger_id == user.user_id) {
        problems.push_back(user.user_id + ": forgery attributed to the user themself");
      }
    }
  }
  return problems;
}

}  // namespace msig
