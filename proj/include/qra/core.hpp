#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace qra {

enum class ErrorCode {
  OutOfScaleRating,
  MissingField,
  NegativeTimestamp,
  InvalidScale,
  EmptyInput,
  EmptyCorpus,
  KExceedsRank,
  NumericalFailure,
  MissingFeedback,
  WrongProduct,
  NoAcceptedRatings,
  NoEvents,
  UnknownUser,
  InvalidConfig,
  ParseError,
  CorruptSnapshot,
};

std::string_view to_string(ErrorCode code);

// Every recoverable failure in the engine is reported through this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

class RatingScale {
 public:
  // Throws InvalidScale unless levels are >= 2 strictly increasing positive integers.
  explicit RatingScale(std::vector<int> levels);

  static RatingScale five_point() { return RatingScale({1, 2, 3, 4, 5}); }

  const std::vector<int>& levels() const noexcept { return levels_; }
  int min() const noexcept { return levels_.front(); }
  int max() const noexcept { return levels_.back(); }
  bool contains(int rating) const noexcept;

  friend bool operator==(const RatingScale&, const RatingScale&) = default;

 private:
  std::vector<int> levels_;
};

struct RatingEvent {
  std::string user_id;
  std::string product_id;
  int rating = 0;
  std::optional<std::string> feedback;
  std::int64_t timestamp = 0;

  friend bool operator==(const RatingEvent&, const RatingEvent&) = default;
};

enum class Direction { None, Upgrading, Downgrading };
enum class UserStatus { TrueUser, MaliciousUser };

std::string_view to_string(Direction d);
std::string_view to_string(UserStatus s);
Direction direction_from_string(std::string_view s);
UserStatus status_from_string(std::string_view s);

struct ThresholdPair {
  double upgrading = 0.0;
  double downgrading = 0.0;
  double deviation = 0.0;
  double sensitivity = 0.0;

  friend bool operator==(const ThresholdPair&, const ThresholdPair&) = default;
};

struct UserVerdict {
  std::string user_id;
  std::string product_id;
  int rating = 0;
  UserStatus status = UserStatus::TrueUser;
  int level = 1;  // trust level 1..3
  Direction alarm = Direction::None;
  ThresholdPair thresholds_in_force;
  std::optional<double> similarity;
  std::optional<double> score_after;  // unset while no rating has been accepted

  friend bool operator==(const UserVerdict&, const UserVerdict&) = default;
};

struct AttackType {
  Direction kind = Direction::None;
  double magnitude = 0.0;
};

// Parses an untyped ingestion record into a RatingEvent, enforcing every invariant.
RatingEvent validate_event(const nlohmann::json& raw, const RatingScale& scale);

// Rounds toward negative infinity at `decimals` places, the convention the published
// tables use (4.1667 prints as 4.16). Tolerates representation error such as 4.2999...
double truncate_to(double value, int decimals);

// Mean of all scale levels; both thresholds start here before any rating is accepted.
double initial_threshold(const RatingScale& scale);

}  // namespace qra
