#include "guifusion/maintenance.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "guifusion/error.hpp"

namespace guifusion {

namespace {

using Bigram = std::pair<std::string, std::string>;

std::map<Bigram, double> bigram_bag(const std::vector<EventToken>& tokens) {
  std::map<Bigram, double> bag;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    bag[{tokens[i - 1].to_text(), tokens[i].to_text()}] += 1.0;
  }
  return bag;
}

// Union-find over report indices.
std::size_t find_root(std::vector<std::size_t>& parent, std::size_t i) {
  while (parent[i] != i) {
    parent[i] = parent[parent[i]];
    i = parent[i];
  }
  return i;
}

}  // namespace

void SimilarityConfig::validate() const {
  if (w_lcs < 0.0 || w_ngram < 0.0 || std::abs(w_lcs + w_ngram - 1.0) > 1e-12) {
    throw Error(ErrorCode::InvalidArgument, "similarity weights must be non-negative and sum to 1");
  }
  if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::InvalidArgument, "tau must lie in [0, 1]");
}

std::size_t lcs_length(const std::vector<EventToken>& a, const std::vector<EventToken>& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double bigram_cosine(const std::vector<EventToken>& a, const std::vector<EventToken>& b) {
  const auto bag_a = bigram_bag(a);
  const auto bag_b = bigram_bag(b);
  // Sequences too short to have bigrams compare by identity.
  if (bag_a.empty() && bag_b.empty()) return a == b ? 1.0 : 0.0;
  if (bag_a.empty() || bag_b.empty()) return 0.0;
  double dot = 0.0, norm_a = 0.0, norm_b = 0.0;
  for (const auto& [k, v] : bag_a) {
    norm_a += v * v;
    if (auto it = bag_b.find(k); it != bag_b.end()) dot += v * it->second;
  }
  for (const auto& [_, v] : bag_b) norm_b += v * v;
  // One sqrt keeps identical bags at exactly 1.
  return std::clamp(dot / std::sqrt(norm_a * norm_b), 0.0, 1.0);
}

double report_similarity(const BugReport& a, const BugReport& b, const SimilarityConfig& cfg) {
  cfg.validate();
  if (a.app_id != b.app_id) {
    throw Error(ErrorCode::AppMismatch, "reports " + a.report_id + " and " + b.report_id + " belong to different apps");
  }
  const auto ta = a.tokens();
  const auto tb = b.tokens();
  const std::size_t total = ta.size() + tb.size();
  const double lcs_term = total == 0 ? 1.0 : 2.0 * static_cast<double>(lcs_length(ta, tb)) / static_cast<double>(total);
  return std::clamp(cfg.w_lcs * lcs_term + cfg.w_ngram * bigram_cosine(ta, tb), 0.0, 1.0);
}

Json to_json(const DuplicateResult& result) {
  Json pairs = Json::array();
  for (const auto& p : result.pairs) {
    Json jp = Json::object();
    jp["first"] = p.first;
    jp["second"] = p.second;
    jp["score"] = p.score;
    pairs.push_back(std::move(jp));
  }
  Json j = Json::object();
  j["pairs"] = std::move(pairs);
  j["clusters"] = result.clusters;
  return j;
}

DuplicateResult detect_duplicates(const std::vector<BugReport>& corpus, const SimilarityConfig& cfg) {
  cfg.validate();
  DuplicateResult result;
  std::vector<std::size_t> parent(corpus.size());
  std::iota(parent.begin(), parent.end(), 0);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (std::size_t j = i + 1; j < corpus.size(); ++j) {
      if (corpus[i].app_id != corpus[j].app_id) continue;
      const double score = report_similarity(corpus[i], corpus[j], cfg);
      if (score < cfg.tau) continue;
      auto [lo, hi] = std::minmax(corpus[i].report_id, corpus[j].report_id);
      result.pairs.push_back(DuplicatePair{lo, hi, score});
      parent[find_root(parent, i)] = find_root(parent, j);
    }
  }
  std::sort(result.pairs.begin(), result.pairs.end(), [](const auto& a, const auto& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.first, a.second) < std::tie(b.first, b.second);
  });
  std::map<std::size_t, std::vector<std::string>> groups;
  for (std::size_t i = 0; i < corpus.size(); ++i) groups[find_root(parent, i)].push_back(corpus[i].report_id);
  for (auto& [_, ids] : groups) {
    if (ids.size() < 2) continue;
    std::sort(ids.begin(), ids.end());
    result.clusters.push_back(std::move(ids));
  }
  std::sort(result.clusters.begin(), result.clusters.end());
  return result;
}

OwnershipMap ownership_from_json(const Json& j) {
  OwnershipMap owners;
  for (const auto& [dev, activities] : j.items()) {
    auto& row = owners[dev];
    for (const auto& [activity, count] : activities.items()) {
      if (!count.is_number_unsigned() && !(count.is_number_integer() && count.get<long long>() >= 0)) {
        throw Error(ErrorCode::InvalidArgument, "ownership count for " + dev + "/" + activity + " must be >= 0");
      }
      row[activity] = count.get<std::uint64_t>();
    }
  }
  return owners;
}

Json to_json(const std::vector<std::pair<std::string, std::uint64_t>>& ranking) {
  Json out = Json::array();
  for (const auto& [dev, score] : ranking) {
    Json row = Json::object();
    row["developer"] = dev;
    row["score"] = score;
    out.push_back(std::move(row));
  }
  return out;
}

std::vector<std::pair<std::string, std::uint64_t>> triage_report(const BugReport& report,
                                                                 const OwnershipMap& owners) {
  if (owners.empty()) throw Error(ErrorCode::EmptyOwnershipMap, "ownership map has no developers");
  std::set<std::string> activities;
  for (const auto& s : report.steps) activities.insert(s.record.activity);
  std::vector<std::pair<std::string, std::uint64_t>> ranking;
  for (const auto& [dev, touched] : owners) {
    std::uint64_t score = 0;
    for (const auto& activity : activities) {
      if (auto it = touched.find(activity); it != touched.end()) score += it->second;
    }
    ranking.emplace_back(dev, score);
  }
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return ranking;
}

}  // namespace guifusion
