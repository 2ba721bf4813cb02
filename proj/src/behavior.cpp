#include "qra/behavior.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qra {

void RatingHistory::record(const std::string& user, const std::string& product, int rating) {
  by_user_[user][product] = rating;
}

void RatingHistory::set_consensus(const std::string& product, double score) {
  consensus_[product] = score;
}

void RatingHistory::clear_consensus(const std::string& product) { consensus_.erase(product); }

const std::map<std::string, int>& RatingHistory::ratings_of(const std::string& user) const {
  static const std::map<std::string, int> empty;
  auto it = by_user_.find(user);
  return it == by_user_.end() ? empty : it->second;
}

std::optional<double> RatingHistory::consensus(const std::string& product) const {
  auto it = consensus_.find(product);
  if (it == consensus_.end()) return std::nullopt;
  return it->second;
}

std::pair<std::vector<double>, std::vector<double>> rating_vector(const RatingHistory& history,
                                                                  const std::string& user_a,
                                                                  const std::string& user_b) {
  const auto& ra = history.ratings_of(user_a);
  const auto& rb = history.ratings_of(user_b);
  std::pair<std::vector<double>, std::vector<double>> out;
  auto ia = ra.begin();
  auto ib = rb.begin();
  while (ia != ra.end() && ib != rb.end()) {
    if (ia->first < ib->first) {
      ++ia;
    } else if (ib->first < ia->first) {
      ++ib;
    } else {
      out.first.push_back(ia->second);
      out.second.push_back(ib->second);
      ++ia;
      ++ib;
    }
  }
  return out;
}

std::optional<double> user_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || a.size() != b.size()) return std::nullopt;
  const double dot = std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
  const double na = std::sqrt(std::inner_product(a.begin(), a.end(), a.begin(), 0.0));
  const double nb = std::sqrt(std::inner_product(b.begin(), b.end(), b.begin(), 0.0));
  if (na == 0.0 || nb == 0.0) return std::nullopt;
  return std::clamp(dot / (na * nb), -1.0, 1.0);
}

namespace {

struct Profile {
  double mean_abs_dev = 0.0;
  int products = 0;
};

Profile profile(const RatingHistory& history, const std::string& user, const std::string& exclude) {
  Profile p;
  double total = 0.0;
  for (const auto& [product, rating] : history.ratings_of(user)) {
    if (product == exclude) continue;
    auto c = history.consensus(product);
    if (!c) continue;
    total += std::abs(static_cast<double>(rating) - *c);
    ++p.products;
  }
  if (p.products > 0) p.mean_abs_dev = total / p.products;
  return p;
}

}  // namespace

double cross_product_profile(const RatingHistory& history, const std::string& user,
                             const std::string& exclude) {
  return profile(history, user, exclude).mean_abs_dev;
}

std::vector<std::vector<std::string>> collusion_groups(const RatingHistory& history,
                                                       const std::set<std::string>& suspects,
                                                       double sim_threshold, int min_common) {
  const std::vector<std::string> users(suspects.begin(), suspects.end());
  std::vector<std::size_t> parent(users.size());
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  for (std::size_t i = 0; i < users.size(); ++i) {
    for (std::size_t j = i + 1; j < users.size(); ++j) {
      auto [a, b] = rating_vector(history, users[i], users[j]);
      if (static_cast<int>(a.size()) < min_common) continue;
      auto sim = user_similarity(a, b);
      if (sim && *sim >= sim_threshold) parent[find(i)] = find(j);
    }
  }

  std::map<std::size_t, std::vector<std::string>> by_root;
  for (std::size_t i = 0; i < users.size(); ++i) by_root[find(i)].push_back(users[i]);
  std::vector<std::vector<std::string>> groups;
  for (auto& [root, g] : by_root) groups.push_back(std::move(g));
  std::sort(groups.begin(), groups.end());
  return groups;
}

BehaviorVerdict adjudicate_suspect(const RatingHistory& history, const std::string& user,
                                   const std::string& product, const StatusLookup& statuses,
                                   const BehaviorConfig& config) {
  BehaviorVerdict v;
  v.user_id = user;

  const Profile p = profile(history, user, product);
  v.cross_product_deviation = p.mean_abs_dev;

  bool peer_evidence = false;
  bool colludes_with_malicious = false;
  double best = -2.0;
  for (const auto& [other, ratings] : history.by_user()) {
    if (other == user) continue;
    auto [a, b] = rating_vector(history, user, other);
    if (static_cast<int>(a.size()) < config.min_common) continue;
    auto sim = user_similarity(a, b);
    if (!sim) continue;
    peer_evidence = true;
    if (*sim > best) {
      best = *sim;
      v.peer = other;
    }
    if (*sim >= config.sim_threshold) {
      auto st = statuses.find(other);
      if (st != statuses.end() && st->second == UserStatus::MaliciousUser) colludes_with_malicious = true;
    }
  }
  v.max_peer_similarity = peer_evidence ? best : 0.0;
  v.has_evidence = p.products > 0 || peer_evidence;

  if (!v.has_evidence) {
    v.rescued = config.rescue_without_evidence;
  } else {
    v.rescued = v.cross_product_deviation <= config.dev_cap && !colludes_with_malicious;
  }
  return v;
}

}  // namespace qra
