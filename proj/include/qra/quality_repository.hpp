#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qra/core.hpp"
#include "qra/lsi.hpp"

namespace qra {

struct RepositoryConfig {
  double sim_high = 0.8;
  double sim_low = 0.3;
  int k = 2;
  double half_life_seconds = 90.0 * 86400.0;
  double epsilon_weight = 0.01;
  bool pin_manufacturer = true;
  lsi::StopWords stop_words = lsi::default_stop_words();
};

enum class DocOrigin { Manufacturer, TrueUser };

std::string_view to_string(DocOrigin o);
DocOrigin origin_from_string(std::string_view s);

struct RepositoryDoc {
  std::string doc_id;
  std::string text;
  std::int64_t timestamp = 0;
  double weight = 1.0;
  DocOrigin origin = DocOrigin::Manufacturer;

  friend bool operator==(const RepositoryDoc&, const RepositoryDoc&) = default;
};

struct SimilarityVerdict {
  std::string best_doc;  // empty when the repository holds no documents
  double best_sim = 0.0;
  int level = 3;
  bool no_overlap = false;
};

// Trust level from a similarity: 1 at or above sim_high, 3 below sim_low, 2 in between.
int similarity_level(double sim, double sim_high, double sim_low);

// Feedback corpus for one (product, direction). The LSI index is rebuilt whenever the
// document set changes, so a repository is always consistent with its docs.
class QualityRepository {
 public:
  QualityRepository(std::string product_id, Direction direction, RepositoryConfig config,
                    std::vector<RepositoryDoc> docs, std::uint64_t next_seq);

  const std::string& product_id() const noexcept { return product_id_; }
  Direction direction() const noexcept { return direction_; }
  const RepositoryConfig& config() const noexcept { return config_; }
  const std::vector<RepositoryDoc>& docs() const noexcept { return docs_; }
  const std::optional<lsi::LsiIndex>& index() const noexcept { return index_; }
  std::uint64_t next_seq() const noexcept { return next_seq_; }

 private:
  friend QualityRepository admit_feedback(QualityRepository repo, std::string_view feedback,
                                          std::int64_t timestamp);
  friend QualityRepository apply_forgetting(QualityRepository repo, std::int64_t now);
  void rebuild();

  std::string product_id_;
  Direction direction_;
  RepositoryConfig config_;
  std::vector<RepositoryDoc> docs_;
  std::optional<lsi::LsiIndex> index_;
  std::uint64_t next_seq_ = 1;
};

// Throws EmptyCorpus when the manufacturer text yields no indexable term.
QualityRepository init_repository(std::string product_id, Direction direction,
                                  const std::vector<std::string>& manufacturer_docs,
                                  const RepositoryConfig& config, std::int64_t timestamp = 0);

// Throws MissingFeedback on blank text.
SimilarityVerdict consult(const QualityRepository& repo, std::string_view feedback);

QualityRepository admit_feedback(QualityRepository repo, std::string_view feedback,
                                 std::int64_t timestamp);

double forgetting_weight(std::int64_t age_seconds, double half_life_seconds);

QualityRepository apply_forgetting(QualityRepository repo, std::int64_t now);

}  // namespace qra
