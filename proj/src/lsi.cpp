#include "qra/lsi.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>

#include "qra/core.hpp"

namespace qra::lsi {

const StopWords& default_stop_words() {
  static const StopWords words{"a", "an", "and", "is", "it", "so", "the", "than", "more", "very", "also"};
  return words;
}

std::vector<std::string> tokenize(std::string_view text, const StopWords& stop_words) {
  std::vector<std::string> terms;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty() && !stop_words.contains(cur)) terms.push_back(cur);
    cur.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    } else {
      flush();
    }
  }
  flush();
  return terms;
}

SvdFactors svd(const Eigen::MatrixXd& a) {
  if (a.size() == 0) throw Error(ErrorCode::EmptyInput, "svd of an empty matrix");
  if (!a.allFinite()) throw Error(ErrorCode::NumericalFailure, "matrix has non-finite entries");

  Eigen::JacobiSVD<Eigen::MatrixXd> dec(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (dec.info() != Eigen::Success) throw Error(ErrorCode::NumericalFailure, "JacobiSVD did not converge");

  const Eigen::VectorXd& sv = dec.singularValues();
  const double cutoff = sv.size() > 0 ? sv(0) * static_cast<double>(std::max(a.rows(), a.cols())) *
                                            std::numeric_limits<double>::epsilon()
                                      : 0.0;
  Eigen::Index r = 0;
  while (r < sv.size() && sv(r) > cutoff && sv(r) > 0.0) ++r;

  SvdFactors f;
  f.s = sv.head(r);
  f.u = dec.matrixU().leftCols(r);
  f.v = dec.matrixV().leftCols(r);

  for (Eigen::Index j = 0; j < r; ++j) {
    Eigen::Index at = 0;
    f.v.col(j).cwiseAbs().maxCoeff(&at);
    if (f.v(at, j) > 0.0) {
      f.v.col(j) *= -1.0;
      f.u.col(j) *= -1.0;
    }
  }
  return f;
}

LsiIndex build_index(const std::vector<std::pair<std::string, std::string>>& docs, int k,
                     const StopWords& stop_words, RankPolicy policy) {
  std::vector<std::vector<std::string>> tokens;
  tokens.reserve(docs.size());
  std::map<std::string, Eigen::Index> vocab;
  for (const auto& [id, text] : docs) {
    tokens.push_back(tokenize(text, stop_words));
    for (const auto& t : tokens.back()) vocab.emplace(t, 0);
  }
  if (docs.empty() || vocab.empty()) throw Error(ErrorCode::EmptyCorpus, "no indexable terms");

  LsiIndex index;
  index.stop_words_ = stop_words;
  auto& m = index.matrix_;
  for (auto& [term, row] : vocab) {
    row = static_cast<Eigen::Index>(m.vocabulary.size());
    m.vocabulary.push_back(term);
  }
  m.counts = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(vocab.size()),
                                   static_cast<Eigen::Index>(docs.size()));
  for (std::size_t d = 0; d < docs.size(); ++d) {
    m.doc_ids.push_back(docs[d].first);
    for (const auto& t : tokens[d]) m.counts(vocab.at(t), static_cast<Eigen::Index>(d)) += 1.0;
  }

  index.factors_ = svd(m.counts);
  if (policy == RankPolicy::ClampToRank && k > index.factors_.rank())
    k = static_cast<int>(index.factors_.rank());
  if (k < 1 || k > index.factors_.rank())
    throw Error(ErrorCode::KExceedsRank,
                "k=" + std::to_string(k) + " but rank is " + std::to_string(index.factors_.rank()));
  index.k_ = k;
  index.doc_coords_ = index.factors_.v.leftCols(k);
  return index;
}

Eigen::VectorXd LsiIndex::term_vector(std::string_view text) const {
  Eigen::VectorXd q = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(matrix_.vocabulary.size()));
  for (const auto& t : tokenize(text, stop_words_)) {
    auto it = std::lower_bound(matrix_.vocabulary.begin(), matrix_.vocabulary.end(), t);
    if (it != matrix_.vocabulary.end() && *it == t) q(it - matrix_.vocabulary.begin()) += 1.0;
  }
  return q;
}

QueryCoords project_query(const LsiIndex& index, std::string_view text) {
  const Eigen::VectorXd q = index.term_vector(text);
  const auto& f = index.factors();
  QueryCoords out;
  out.is_zero = q.isZero(0.0);
  out.coords = (f.u.leftCols(index.k()).transpose() * q).cwiseQuotient(f.s.head(index.k()));
  return out;
}

double cosine(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm();
  const double nb = b.norm();
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(a.dot(b) / (na * nb), -1.0, 1.0);
}

SimilarityResult similarities(const LsiIndex& index, const QueryCoords& query) {
  SimilarityResult res;
  res.no_overlap = query.is_zero;
  const auto& ids = index.matrix().doc_ids;
  for (std::size_t d = 0; d < ids.size(); ++d) {
    const double sim =
        query.is_zero ? 0.0
                      : cosine(query.coords, index.doc_coords().row(static_cast<Eigen::Index>(d)).transpose());
    res.ranked.push_back({ids[d], d, sim});
  }
  std::stable_sort(res.ranked.begin(), res.ranked.end(),
                   [](const Ranked& a, const Ranked& b) { return a.similarity > b.similarity; });
  return res;
}

}  // namespace qra::lsi
