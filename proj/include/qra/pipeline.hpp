#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qra/behavior.hpp"
#include "qra/change_detector.hpp"
#include "qra/core.hpp"
#include "qra/quality_repository.hpp"

namespace qra {

struct PipelineConfig {
  RatingScale scale = RatingScale::five_point();
  double sensitivity = 0.0;
  RepositoryConfig repository;
  BehaviorConfig behavior;
  bool strict_feedback = false;  // non-responders to a feedback request are condemned outright
  double attack_epsilon = 0.05;
};

// Manufacturer quality information used to seed a product's two repositories.
struct ProductSeed {
  std::vector<std::string> upgrading;
  std::vector<std::string> downgrading;
};

// excluding_malicious is the reputation score as reported (two decimals, truncated);
// excluding_exact keeps full precision. difference = excluding_malicious - including_all.
struct ScorePair {
  double including_all = 0.0;
  double excluding_malicious = 0.0;
  double difference = 0.0;
  double excluding_exact = 0.0;
};

ScorePair make_score_pair(double including_all, double reputation);

class ProductEngine {
 public:
  ProductEngine(std::string product_id, const ProductSeed& seed, const PipelineConfig& config);
  ProductEngine(std::string product_id, DetectorState detector, QualityRepository up_repo,
                QualityRepository down_repo, std::vector<UserVerdict> verdict_log);

  // Runs one event through threshold check, feedback consultation and behavior analysis.
  // Throws WrongProduct if the event belongs to another product.
  UserVerdict process(const RatingEvent& event, const PipelineConfig& config,
                      RatingHistory& history, StatusLookup& statuses);

  const std::string& product_id() const noexcept { return product_id_; }
  const DetectorState& detector() const noexcept { return detector_; }
  const QualityRepository& up_repo() const noexcept { return up_repo_; }
  const QualityRepository& down_repo() const noexcept { return down_repo_; }
  const std::vector<UserVerdict>& verdict_log() const noexcept { return verdict_log_; }
  std::optional<double> score() const;

 private:
  std::string product_id_;
  DetectorState detector_;
  QualityRepository up_repo_;
  QualityRepository down_repo_;
  std::vector<UserVerdict> verdict_log_;
};

// Mean of accepted ratings. Throws NoAcceptedRatings.
double reputation_score(const ProductEngine& engine);

// Throws NoEvents.
ScorePair score_pair(const ProductEngine& engine);

AttackType attack_type(const ScorePair& pair, double epsilon);

// All products of a run, sharing the cross-product rating history and user statuses.
class ReputationEngine {
 public:
  ReputationEngine(PipelineConfig config, std::map<std::string, ProductSeed> seeds,
                   std::optional<ProductSeed> default_seed = std::nullopt);

  // Products without a seed of their own fall back to the default; InvalidConfig if neither.
  UserVerdict process(const RatingEvent& event);

  const PipelineConfig& config() const noexcept { return config_; }
  const std::map<std::string, ProductSeed>& seeds() const noexcept { return seeds_; }
  const std::optional<ProductSeed>& default_seed() const noexcept { return default_seed_; }
  const std::map<std::string, ProductEngine>& products() const noexcept { return products_; }
  const RatingHistory& history() const noexcept { return history_; }
  const StatusLookup& statuses() const noexcept { return statuses_; }
  const std::vector<UserVerdict>& log() const noexcept { return log_; }

  std::set<std::string> malicious_users() const;
  std::vector<std::vector<std::string>> collusion_groups() const;

  // Used by snapshot restore.
  void restore(std::map<std::string, ProductEngine> products, RatingHistory history,
               StatusLookup statuses, std::vector<UserVerdict> log);

 private:
  PipelineConfig config_;
  std::map<std::string, ProductSeed> seeds_;
  std::optional<ProductSeed> default_seed_;
  std::map<std::string, ProductEngine> products_;
  RatingHistory history_;
  StatusLookup statuses_;
  std::vector<UserVerdict> log_;
};

}  // namespace qra
