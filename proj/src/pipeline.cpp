#include "qra/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <numeric>

namespace qra {

namespace {

bool blank(const std::optional<std::string>& text) {
  return !text || std::all_of(text->begin(), text->end(),
                              [](char c) { return std::isspace(static_cast<unsigned char>(c)); });
}

std::int64_t newest_doc(const QualityRepository& repo) {
  std::int64_t t = 0;
  for (const auto& d : repo.docs()) t = std::max(t, d.timestamp);
  return t;
}

}  // namespace

ProductEngine::ProductEngine(std::string product_id, const ProductSeed& seed,
                             const PipelineConfig& config)
    : product_id_(std::move(product_id)),
      detector_(config.scale, config.sensitivity),
      up_repo_(init_repository(product_id_, Direction::Upgrading, seed.upgrading, config.repository)),
      down_repo_(init_repository(product_id_, Direction::Downgrading, seed.downgrading,
                                 config.repository)) {}

ProductEngine::ProductEngine(std::string product_id, DetectorState detector,
                             QualityRepository up_repo, QualityRepository down_repo,
                             std::vector<UserVerdict> verdict_log)
    : product_id_(std::move(product_id)),
      detector_(std::move(detector)),
      up_repo_(std::move(up_repo)),
      down_repo_(std::move(down_repo)),
      verdict_log_(std::move(verdict_log)) {}

std::optional<double> ProductEngine::score() const {
  const auto& acc = detector_.accepted();
  if (acc.empty()) return std::nullopt;
  return std::accumulate(acc.begin(), acc.end(), 0.0) / static_cast<double>(acc.size());
}

UserVerdict ProductEngine::process(const RatingEvent& event, const PipelineConfig& config,
                                   RatingHistory& history, StatusLookup& statuses) {
  if (event.product_id != product_id_)
    throw Error(ErrorCode::WrongProduct, event.product_id + " sent to engine for " + product_id_);

  UserVerdict v;
  v.user_id = event.user_id;
  v.product_id = product_id_;
  v.rating = event.rating;
  v.thresholds_in_force = detector_.thresholds();

  history.record(event.user_id, product_id_, event.rating);

  const int position = static_cast<int>(verdict_log_.size()) + 1;
  v.alarm = check_alarm(event.rating, v.thresholds_in_force, position).direction;

  bool accept = true;
  if (v.alarm != Direction::None) {
    auto& repo = v.alarm == Direction::Upgrading ? up_repo_ : down_repo_;
    repo = apply_forgetting(std::move(repo), std::max(event.timestamp, newest_doc(repo)));

    bool suspect = false;
    if (blank(event.feedback)) {
      suspect = !config.strict_feedback;
      accept = false;
    } else {
      const auto sv = consult(repo, *event.feedback);
      v.similarity = sv.best_sim;
      v.level = sv.level;
      if (sv.level == 1) {
        repo = admit_feedback(std::move(repo), *event.feedback, event.timestamp);
      } else if (sv.level == 3) {
        suspect = true;
        accept = false;
      }
    }

    if (suspect) {
      accept = adjudicate_suspect(history, event.user_id, product_id_, statuses, config.behavior).rescued;
      v.level = accept ? 2 : 3;
    }
    if (!accept) {
      v.status = UserStatus::MaliciousUser;
      v.level = 3;
    }
  }

  if (accept) {
    detector_ = refresh_state(std::move(detector_), event.rating);
    history.set_consensus(product_id_, *score());
    statuses.try_emplace(event.user_id, UserStatus::TrueUser);
  } else {
    statuses[event.user_id] = UserStatus::MaliciousUser;
  }
  v.score_after = score();
  verdict_log_.push_back(v);
  return v;
}

double reputation_score(const ProductEngine& engine) {
  auto s = engine.score();
  if (!s) throw Error(ErrorCode::NoAcceptedRatings, engine.product_id());
  return *s;
}

ScorePair score_pair(const ProductEngine& engine) {
  const auto& log = engine.verdict_log();
  if (log.empty()) throw Error(ErrorCode::NoEvents, engine.product_id());
  double total = 0.0;
  for (const auto& v : log) total += v.rating;
  return make_score_pair(total / static_cast<double>(log.size()), reputation_score(engine));
}

ScorePair make_score_pair(double including_all, double reputation) {
  ScorePair p;
  p.including_all = including_all;
  p.excluding_exact = reputation;
  p.excluding_malicious = truncate_to(reputation, 2);
  p.difference = p.excluding_malicious - p.including_all;
  return p;
}

AttackType attack_type(const ScorePair& pair, double epsilon) {
  AttackType a;
  a.magnitude = std::abs(pair.difference);
  if (pair.difference > epsilon) {
    a.kind = Direction::Downgrading;
  } else if (pair.difference < -epsilon) {
    a.kind = Direction::Upgrading;
  }
  return a;
}

ReputationEngine::ReputationEngine(PipelineConfig config, std::map<std::string, ProductSeed> seeds,
                                   std::optional<ProductSeed> default_seed)
    : config_(std::move(config)), seeds_(std::move(seeds)), default_seed_(std::move(default_seed)) {}

UserVerdict ReputationEngine::process(const RatingEvent& event) {
  auto it = products_.find(event.product_id);
  if (it == products_.end()) {
    const ProductSeed* seed = nullptr;
    if (auto s = seeds_.find(event.product_id); s != seeds_.end()) {
      seed = &s->second;
    } else if (default_seed_) {
      seed = &*default_seed_;
    } else {
      throw Error(ErrorCode::InvalidConfig, "no repository seed for product " + event.product_id);
    }
    it = products_.emplace(event.product_id, ProductEngine(event.product_id, *seed, config_)).first;
  }
  auto v = it->second.process(event, config_, history_, statuses_);
  log_.push_back(v);
  return v;
}

std::set<std::string> ReputationEngine::malicious_users() const {
  std::set<std::string> out;
  for (const auto& [user, st] : statuses_)
    if (st == UserStatus::MaliciousUser) out.insert(user);
  return out;
}

std::vector<std::vector<std::string>> ReputationEngine::collusion_groups() const {
  return qra::collusion_groups(history_, malicious_users(), config_.behavior.sim_threshold,
                               config_.behavior.min_common);
}

void ReputationEngine::restore(std::map<std::string, ProductEngine> products, RatingHistory history,
                               StatusLookup statuses, std::vector<UserVerdict> log) {
  products_ = std::move(products);
  history_ = std::move(history);
  statuses_ = std::move(statuses);
  log_ = std::move(log);
}

}  // namespace qra
