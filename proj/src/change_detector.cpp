#include "qra/change_detector.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace qra {

namespace {

double mean_of(std::span<const double> xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

}  // namespace

BisectorResult mean_bisector(std::span<const double> ratings, const BisectorOptions& opts) {
  if (ratings.empty()) throw Error(ErrorCode::EmptyInput, "mean_bisector needs at least one rating");

  BisectorResult res;
  res.mean = mean_of(ratings);
  double pivot = res.mean;

  for (int iter = 1;; ++iter) {
    res.iterations = iter;
    res.low_group.clear();
    res.high_group.clear();
    for (double r : ratings) (r < pivot ? res.low_group : res.high_group).push_back(r);

    if (res.low_group.empty() || res.high_group.empty()) {
      res.mid = res.mean;
      res.low_mean = res.high_mean = res.mean;
      return res;
    }

    res.low_mean = mean_of(res.low_group);
    res.high_mean = mean_of(res.high_group);
    res.mid = 0.5 * (res.low_mean + res.high_mean);

    if (std::abs(res.mid - pivot) < opts.tolerance) return res;
    if (iter >= opts.max_iterations) {
      res.converged = false;
      return res;
    }
    pivot = res.mid;
  }
}

double deviation(std::span<const double> ratings, double sensitivity) {
  const std::size_t n = ratings.size();
  if (n < 2) return std::max(0.0, sensitivity);
  const double mu = mean_of(ratings);
  double ss = 0.0;
  for (double r : ratings) ss += (r - mu) * (r - mu);
  return std::max(0.0, std::sqrt(ss / static_cast<double>(n - 1)) + sensitivity);
}

ThresholdPair thresholds(double mid, double dev, double sensitivity) {
  return ThresholdPair{mid + dev, mid - dev, dev, sensitivity};
}

AlarmOutcome check_alarm(double rating, const ThresholdPair& t, int position) {
  if (rating > t.upgrading) return {Direction::Upgrading, position};
  if (rating < t.downgrading) return {Direction::Downgrading, position};
  return {};
}

DetectorState::DetectorState(const RatingScale& scale, double sensitivity)
    : DetectorState(scale, sensitivity, {}) {}

DetectorState::DetectorState(const RatingScale& scale, double sensitivity,
                             std::vector<double> accepted)
    : initial_(initial_threshold(scale)), sensitivity_(sensitivity), accepted_(std::move(accepted)) {
  recompute();
}

void DetectorState::recompute() {
  if (accepted_.empty()) {
    mid_ = initial_;
    thresholds_ = ThresholdPair{initial_, initial_, 0.0, sensitivity_};
    return;
  }
  mid_ = mean_bisector(accepted_).mid;
  thresholds_ = qra::thresholds(mid_, deviation(accepted_, sensitivity_), sensitivity_);
}

DetectorState refresh_state(DetectorState state, double accepted_rating) {
  state.accepted_.push_back(accepted_rating);
  state.recompute();
  return state;
}

}  // namespace qra
