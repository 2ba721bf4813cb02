#include "qra/quality_repository.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace qra {

std::string_view to_string(DocOrigin o) {
  return o == DocOrigin::Manufacturer ? "MANUFACTURER" : "TRUE_USER";
}

DocOrigin origin_from_string(std::string_view s) {
  if (s == "MANUFACTURER") return DocOrigin::Manufacturer;
  if (s == "TRUE_USER") return DocOrigin::TrueUser;
  throw Error(ErrorCode::ParseError, "unknown document origin '" + std::string(s) + "'");
}

int similarity_level(double sim, double sim_high, double sim_low) {
  if (sim >= sim_high) return 1;
  if (sim >= sim_low) return 2;
  return 3;
}

QualityRepository::QualityRepository(std::string product_id, Direction direction,
                                     RepositoryConfig config, std::vector<RepositoryDoc> docs,
                                     std::uint64_t next_seq)
    : product_id_(std::move(product_id)),
      direction_(direction),
      config_(std::move(config)),
      docs_(std::move(docs)),
      next_seq_(next_seq) {
  if (!(config_.sim_low >= 0.0 && config_.sim_low < config_.sim_high && config_.sim_high <= 1.0))
    throw Error(ErrorCode::InvalidConfig, "need 0 <= sim_low < sim_high <= 1");
  if (config_.k < 1) throw Error(ErrorCode::InvalidConfig, "rank k must be >= 1");
  rebuild();
}

void QualityRepository::rebuild() {
  if (docs_.empty()) {
    index_.reset();
    return;
  }
  std::vector<std::pair<std::string, std::string>> corpus;
  corpus.reserve(docs_.size());
  for (const auto& d : docs_) corpus.emplace_back(d.doc_id, d.text);
  try {
    index_ = lsi::build_index(corpus, config_.k, config_.stop_words, lsi::RankPolicy::ClampToRank);
  } catch (const Error& e) {
    // A corpus of stop words only has nothing to match against.
    if (e.code() != ErrorCode::EmptyCorpus) throw;
    index_.reset();
  }
}

QualityRepository init_repository(std::string product_id, Direction direction,
                                  const std::vector<std::string>& manufacturer_docs,
                                  const RepositoryConfig& config, std::int64_t timestamp) {
  std::vector<RepositoryDoc> docs;
  std::uint64_t seq = 1;
  for (const auto& text : manufacturer_docs)
    docs.push_back({"doc" + std::to_string(seq++), text, timestamp, 1.0, DocOrigin::Manufacturer});
  QualityRepository repo(std::move(product_id), direction, config, std::move(docs), seq);
  if (!repo.index()) throw Error(ErrorCode::EmptyCorpus, "manufacturer seed has no indexable terms");
  return repo;
}

SimilarityVerdict consult(const QualityRepository& repo, std::string_view feedback) {
  if (std::all_of(feedback.begin(), feedback.end(),
                  [](char c) { return std::isspace(static_cast<unsigned char>(c)); }))
    throw Error(ErrorCode::MissingFeedback, "feedback text is empty");

  const auto& cfg = repo.config();
  SimilarityVerdict v;
  if (!repo.index()) {
    v.no_overlap = true;
    v.level = similarity_level(0.0, cfg.sim_high, cfg.sim_low);
    return v;
  }
  const auto query = lsi::project_query(*repo.index(), feedback);
  const auto sims = lsi::similarities(*repo.index(), query);
  v.no_overlap = sims.no_overlap;
  v.best_doc = sims.ranked.front().doc_id;
  v.best_sim = sims.ranked.front().similarity;
  v.level = similarity_level(v.best_sim, cfg.sim_high, cfg.sim_low);
  return v;
}

QualityRepository admit_feedback(QualityRepository repo, std::string_view feedback,
                                 std::int64_t timestamp) {
  repo.docs_.push_back({"doc" + std::to_string(repo.next_seq_++), std::string(feedback), timestamp,
                        1.0, DocOrigin::TrueUser});
  repo.rebuild();
  return repo;
}

double forgetting_weight(std::int64_t age_seconds, double half_life_seconds) {
  if (age_seconds <= 0) return 1.0;
  return std::pow(0.5, static_cast<double>(age_seconds) / half_life_seconds);
}

QualityRepository apply_forgetting(QualityRepository repo, std::int64_t now) {
  const auto& cfg = repo.config_;
  const auto before = repo.docs_.size();
  for (auto& d : repo.docs_) {
    if (d.origin == DocOrigin::Manufacturer && cfg.pin_manufacturer) continue;
    d.weight = forgetting_weight(now - d.timestamp, cfg.half_life_seconds);
  }
  std::erase_if(repo.docs_, [&](const RepositoryDoc& d) { return d.weight < cfg.epsilon_weight; });
  if (repo.docs_.size() != before) repo.rebuild();
  return repo;
}

}  // namespace qra
