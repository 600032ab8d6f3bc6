#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "guifusion/reporting.hpp"

namespace guifusion {

struct SimilarityConfig {
  double w_lcs = 0.5;
  double w_ngram = 0.5;
  double tau = 0.8;

  /// Throws Error(InvalidArgument) unless weights are non-negative, sum to 1
  /// and tau lies in [0, 1].
  void validate() const;
};

/// Length of the longest common subsequence of two token sequences.
std::size_t lcs_length(const std::vector<EventToken>& a, const std::vector<EventToken>& b);

/// Cosine similarity of the bigram bags of two token sequences.
double bigram_cosine(const std::vector<EventToken>& a, const std::vector<EventToken>& b);

/// Structural similarity in [0, 1]; throws Error(AppMismatch) across apps.
double report_similarity(const BugReport& a, const BugReport& b, const SimilarityConfig& cfg = {});

struct DuplicatePair {
  std::string first;   // lexicographically smaller report id
  std::string second;
  double score = 0.0;

  friend bool operator==(const DuplicatePair&, const DuplicatePair&) = default;
};

struct DuplicateResult {
  std::vector<DuplicatePair> pairs;               // score desc, then ids
  std::vector<std::vector<std::string>> clusters; // each sorted; ordered by first id

  friend bool operator==(const DuplicateResult&, const DuplicateResult&) = default;
};

Json to_json(const DuplicateResult& result);

DuplicateResult detect_duplicates(const std::vector<BugReport>& corpus, const SimilarityConfig& cfg = {});

/// developer id -> activity -> touch count
using OwnershipMap = std::map<std::string, std::map<std::string, std::uint64_t>>;

OwnershipMap ownership_from_json(const Json& json);
Json to_json(const std::vector<std::pair<std::string, std::uint64_t>>& ranking);

/// Developers ranked by summed ownership of the distinct activities the
/// report's steps touch; ties by ascending id.
std::vector<std::pair<std::string, std::uint64_t>> triage_report(const BugReport& report,
                                                                 const OwnershipMap& owners);

}  // namespace guifusion
