#include "qra/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qra {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::OutOfScaleRating: return "OUT_OF_SCALE_RATING";
    case ErrorCode::MissingField: return "MISSING_FIELD";
    case ErrorCode::NegativeTimestamp: return "NEGATIVE_TIMESTAMP";
    case ErrorCode::InvalidScale: return "INVALID_SCALE";
    case ErrorCode::EmptyInput: return "EMPTY_INPUT";
    case ErrorCode::EmptyCorpus: return "EMPTY_CORPUS";
    case ErrorCode::KExceedsRank: return "K_EXCEEDS_RANK";
    case ErrorCode::NumericalFailure: return "NUMERICAL_FAILURE";
    case ErrorCode::MissingFeedback: return "MISSING_FEEDBACK";
    case ErrorCode::WrongProduct: return "WRONG_PRODUCT";
    case ErrorCode::NoAcceptedRatings: return "NO_ACCEPTED_RATINGS";
    case ErrorCode::NoEvents: return "NO_EVENTS";
    case ErrorCode::UnknownUser: return "UNKNOWN_USER";
    case ErrorCode::InvalidConfig: return "INVALID_CONFIG";
    case ErrorCode::ParseError: return "PARSE_ERROR";
    case ErrorCode::CorruptSnapshot: return "CORRUPT_SNAPSHOT";
  }
  return "UNKNOWN";
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::None: return "NONE";
    case Direction::Upgrading: return "UPGRADING";
    case Direction::Downgrading: return "DOWNGRADING";
  }
  return "NONE";
}

std::string_view to_string(UserStatus s) {
  return s == UserStatus::TrueUser ? "T-USER" : "M-USER";
}

Direction direction_from_string(std::string_view s) {
  if (s == "NONE") return Direction::None;
  if (s == "UPGRADING") return Direction::Upgrading;
  if (s == "DOWNGRADING") return Direction::Downgrading;
  throw Error(ErrorCode::ParseError, "unknown direction '" + std::string(s) + "'");
}

UserStatus status_from_string(std::string_view s) {
  if (s == "T-USER") return UserStatus::TrueUser;
  if (s == "M-USER") return UserStatus::MaliciousUser;
  throw Error(ErrorCode::ParseError, "unknown status '" + std::string(s) + "'");
}

RatingScale::RatingScale(std::vector<int> levels) : levels_(std::move(levels)) {
  if (levels_.size() < 2) throw Error(ErrorCode::InvalidScale, "a scale needs at least 2 levels");
  if (levels_.front() <= 0) throw Error(ErrorCode::InvalidScale, "levels must be positive");
  if (std::adjacent_find(levels_.begin(), levels_.end(), std::greater_equal<>()) != levels_.end())
    throw Error(ErrorCode::InvalidScale, "levels must be strictly increasing");
}

bool RatingScale::contains(int rating) const noexcept {
  return std::binary_search(levels_.begin(), levels_.end(), rating);
}

namespace {

const nlohmann::json& require(const nlohmann::json& raw, const char* key) {
  auto it = raw.find(key);
  if (it == raw.end() || it->is_null()) throw Error(ErrorCode::MissingField, key);
  return *it;
}

std::string require_id(const nlohmann::json& raw, const char* key) {
  const auto& v = require(raw, key);
  std::string id;
  if (v.is_string()) {
    id = v.get<std::string>();
  } else if (v.is_number_integer()) {
    id = std::to_string(v.get<long long>());
  } else {
    throw Error(ErrorCode::ParseError, std::string(key) + " must be a string");
  }
  if (id.empty()) throw Error(ErrorCode::MissingField, key);
  return id;
}

}  // namespace

RatingEvent validate_event(const nlohmann::json& raw, const RatingScale& scale) {
  if (!raw.is_object()) throw Error(ErrorCode::ParseError, "record is not an object");

  RatingEvent ev;
  ev.user_id = require_id(raw, "user_id");
  ev.product_id = require_id(raw, "product_id");

  const auto& rating = require(raw, "rating");
  if (!rating.is_number()) throw Error(ErrorCode::ParseError, "rating must be a number");
  const double r = rating.get<double>();
  if (!std::isfinite(r) || r < scale.min() || r > scale.max() || r != std::floor(r) ||
      !scale.contains(static_cast<int>(r)))
    throw Error(ErrorCode::OutOfScaleRating, "rating " + rating.dump() + " is not a scale level");
  ev.rating = static_cast<int>(r);

  const auto& ts = require(raw, "timestamp");
  if (!ts.is_number_integer()) throw Error(ErrorCode::ParseError, "timestamp must be an integer");
  if (ts.get<long long>() < 0) throw Error(ErrorCode::NegativeTimestamp, ts.dump());
  ev.timestamp = ts.get<std::int64_t>();

  if (auto it = raw.find("feedback"); it != raw.end() && !it->is_null()) {
    if (!it->is_string()) throw Error(ErrorCode::ParseError, "feedback must be a string");
    ev.feedback = it->get<std::string>();
  }
  return ev;
}

double truncate_to(double value, int decimals) {
  const double scale = std::pow(10.0, decimals);
  return std::floor(value * scale + 1e-7) / scale;
}

double initial_threshold(const RatingScale& scale) {
  const auto& lv = scale.levels();
  return std::accumulate(lv.begin(), lv.end(), 0.0) / static_cast<double>(lv.size());
}

}  // namespace qra
