#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qra/core.hpp"

namespace qra {

// Outcome of the iterated mean-bisector split.
struct BisectorResult {
  double mid = 0.0;
  double mean = 0.0;
  double low_mean = 0.0;   // mean of the group below the pivot (equals mid when that group is empty)
  double high_mean = 0.0;  // mean of the group at or above the pivot
  std::vector<double> low_group;
  std::vector<double> high_group;
  int iterations = 0;
  bool converged = true;  // false when the iteration cap was hit; mid is then the last iterate
};

struct AlarmOutcome {
  Direction direction = Direction::None;
  std::optional<int> position;
};

struct BisectorOptions {
  double tolerance = 1e-9;
  int max_iterations = 100;
};

// Throws EmptyInput on an empty multiset.
BisectorResult mean_bisector(std::span<const double> ratings, const BisectorOptions& opts = {});

// Sample standard deviation (n-1) plus sensitivity, clamped at zero.
double deviation(std::span<const double> ratings, double sensitivity);

ThresholdPair thresholds(double mid, double dev, double sensitivity);

// Strict inequalities: a rating sitting exactly on a threshold is normal.
AlarmOutcome check_alarm(double rating, const ThresholdPair& thresholds, int position);

// Per-product detector state. Only ratings adjudicated TRUE are ever fed in.
class DetectorState {
 public:
  DetectorState(const RatingScale& scale, double sensitivity);

  // Restores a state from its accepted history; thresholds are recomputed.
  DetectorState(const RatingScale& scale, double sensitivity, std::vector<double> accepted);

  const std::vector<double>& accepted() const noexcept { return accepted_; }
  const ThresholdPair& thresholds() const noexcept { return thresholds_; }
  double mid() const noexcept { return mid_; }
  double sensitivity() const noexcept { return sensitivity_; }

 private:
  friend DetectorState refresh_state(DetectorState state, double accepted_rating);
  void recompute();

  double initial_ = 0.0;
  double sensitivity_ = 0.0;
  std::vector<double> accepted_;
  ThresholdPair thresholds_;
  double mid_ = 0.0;
};

DetectorState refresh_state(DetectorState state, double accepted_rating);

}  // namespace qra
