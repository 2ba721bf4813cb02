#pragma once

#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace qra::lsi {

using StopWords = std::set<std::string, std::less<>>;

// {a, an, and, is, it, so, the, than, more, very, also}
const StopWords& default_stop_words();

// Lowercases, splits on non-alphanumerics, drops stop words. Duplicates are kept.
std::vector<std::string> tokenize(std::string_view text,
                                  const StopWords& stop_words = default_stop_words());

struct TermDocMatrix {
  std::vector<std::string> vocabulary;  // sorted
  Eigen::MatrixXd counts;               // terms x documents, raw term frequency
  std::vector<std::string> doc_ids;
};

struct SvdFactors {
  Eigen::MatrixXd u;  // m x r, orthonormal columns
  Eigen::VectorXd s;  // r non-increasing positive values
  Eigen::MatrixXd v;  // n x r, orthonormal columns

  Eigen::Index rank() const { return s.size(); }
};

// Thin SVD trimmed to the numerically non-zero singular values. Signs are fixed so that
// the largest-magnitude entry of every right singular vector is negative.
SvdFactors svd(const Eigen::MatrixXd& a);

struct QueryCoords {
  Eigen::VectorXd coords;
  bool is_zero = true;
};

struct Ranked {
  std::string doc_id;
  std::size_t doc_index = 0;
  double similarity = 0.0;
};

struct SimilarityResult {
  std::vector<Ranked> ranked;  // descending by similarity
  bool no_overlap = false;
};

enum class RankPolicy {
  Exact,        // k above the corpus rank is an error
  ClampToRank,  // k is lowered to the corpus rank
};

class LsiIndex {
 public:
  const TermDocMatrix& matrix() const noexcept { return matrix_; }
  const SvdFactors& factors() const noexcept { return factors_; }
  int k() const noexcept { return k_; }
  // Row i holds document i's rank-k coordinates (row i of V_k).
  const Eigen::MatrixXd& doc_coords() const noexcept { return doc_coords_; }
  const StopWords& stop_words() const noexcept { return stop_words_; }

  // Raw term-frequency vector of text over this index's vocabulary; unknown terms dropped.
  Eigen::VectorXd term_vector(std::string_view text) const;

 private:
  friend LsiIndex build_index(const std::vector<std::pair<std::string, std::string>>&, int,
                              const StopWords&, RankPolicy);

  TermDocMatrix matrix_;
  SvdFactors factors_;
  int k_ = 0;
  Eigen::MatrixXd doc_coords_;
  StopWords stop_words_;
};

// Throws EmptyCorpus when no document contributes a term, KExceedsRank when k is out of range.
LsiIndex build_index(const std::vector<std::pair<std::string, std::string>>& docs, int k,
                     const StopWords& stop_words = default_stop_words(),
                     RankPolicy policy = RankPolicy::Exact);

// Folds a query into the index: q^T U_k S_k^-1.
QueryCoords project_query(const LsiIndex& index, std::string_view text);

SimilarityResult similarities(const LsiIndex& index, const QueryCoords& query);

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace qra::lsi
