#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qra/core.hpp"

namespace qra {

// Latest rating per (user, product) plus each product's current trust-filtered score.
class RatingHistory {
 public:
  void record(const std::string& user, const std::string& product, int rating);
  void set_consensus(const std::string& product, double score);
  void clear_consensus(const std::string& product);

  // product -> rating for one user; empty if the user is unknown
  const std::map<std::string, int>& ratings_of(const std::string& user) const;
  std::optional<double> consensus(const std::string& product) const;

  const std::map<std::string, std::map<std::string, int>>& by_user() const noexcept { return by_user_; }
  const std::map<std::string, double>& consensus_map() const noexcept { return consensus_; }

 private:
  std::map<std::string, std::map<std::string, int>> by_user_;
  std::map<std::string, double> consensus_;
};

struct BehaviorConfig {
  double dev_cap = 1.0;
  int min_common = 2;
  double sim_threshold = 0.95;
  // When a suspect has neither other-product history nor comparable peers.
  bool rescue_without_evidence = false;
};

struct BehaviorVerdict {
  std::string user_id;
  double cross_product_deviation = 0.0;
  double max_peer_similarity = 0.0;
  std::optional<std::string> peer;
  bool has_evidence = false;
  bool rescued = false;
};

using StatusLookup = std::map<std::string, UserStatus>;

// Both users' ratings over their commonly rated products, ordered by product id.
std::pair<std::vector<double>, std::vector<double>> rating_vector(const RatingHistory& history,
                                                                  const std::string& user_a,
                                                                  const std::string& user_b);

// Cosine of two rating vectors; nullopt when empty, mismatched, or either is all-zero.
std::optional<double> user_similarity(const std::vector<double>& a, const std::vector<double>& b);

// Mean |rating - consensus| over the user's products other than `exclude`. Products
// without a consensus are skipped. Zero when nothing is left.
double cross_product_profile(const RatingHistory& history, const std::string& user,
                             const std::string& exclude = {});

// Connected components over suspects joined by >= min_common shared products and
// similarity >= sim_threshold. Groups and members are sorted.
std::vector<std::vector<std::string>> collusion_groups(const RatingHistory& history,
                                                       const std::set<std::string>& suspects,
                                                       double sim_threshold, int min_common = 2);

BehaviorVerdict adjudicate_suspect(const RatingHistory& history, const std::string& user,
                                   const std::string& product, const StatusLookup& statuses,
                                   const BehaviorConfig& config);

}  // namespace qra
