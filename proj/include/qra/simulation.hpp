#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "qra/core.hpp"
#include "qra/pipeline.hpp"

namespace qra::sim {

enum class Mu0Mode { RunningMean, Fixed };

struct CusumConfig {
  Mu0Mode mu0_mode = Mu0Mode::RunningMean;
  double mu0 = 3.0;  // only read in Fixed mode
  double nu = 1.0;
  double h = 2.0;
};

struct CusumState {
  double mu0 = 0.0;
  double nu = 1.0;
  double h = 2.0;
  double g_plus = 0.0;
  double g_minus = 0.0;
};

// Two-sided CUSUM recursion. The statistic that crosses h is reset to zero.
std::pair<CusumState, Direction> cusum_step(CusumState state, double rating);

// CUSUM used as a user detector: an alarm condemns the rater, with no feedback rescue.
// mu0 tracks the mean of prior un-flagged ratings per product in RunningMean mode.
std::vector<UserVerdict> run_cusum(const std::vector<RatingEvent>& events, const RatingScale& scale,
                                   const CusumConfig& config);

enum class Truth { Honest, Malicious };

std::string_view to_string(Truth t);
Truth truth_from_string(std::string_view s);

struct ScenarioOptions {
  RatingScale scale = RatingScale::five_point();
  std::string product_id = "p1";
  // probabilities of honest noise -1, 0, +1
  double p_minus = 0.2;
  double p_zero = 0.6;
  double p_plus = 0.2;
  std::int64_t start_time = 1'600'000'000;
  std::int64_t spacing = 3600;
};

struct Scenario {
  std::vector<RatingEvent> events;
  std::map<std::string, Truth> truth;
  double quality = 0.0;
  std::uint64_t seed = 0;
  ProductSeed repository_seed;
};

// Manufacturer text for the simulated product.
ProductSeed scenario_product_seed();

// Deterministic in all arguments including seed. `attack` must be Upgrading or Downgrading.
Scenario generate_scenario(int n_honest, int n_malicious, double quality, Direction attack,
                           std::uint64_t seed, const ScenarioOptions& options = {});

struct Metrics {
  double false_alarm_rate = 0.0;
  double detection_rate = 1.0;
  int true_flagged = 0;
  int true_total = 0;
  int malicious_flagged = 0;
  int malicious_total = 0;
};

// Per-user counting: a user is flagged if any verdict marks them malicious. Throws UnknownUser.
Metrics evaluate(const std::vector<UserVerdict>& verdicts, const std::map<std::string, Truth>& truth);

struct Comparison {
  int n_users = 0;
  Metrics qra;
  Metrics cusum;
};

Comparison compare_detectors(const Scenario& scenario, const PipelineConfig& qra_config,
                             const CusumConfig& cusum_config);

struct SuiteRow {
  int n_users = 0;
  double qra_far = 0.0;
  double cusum_far = 0.0;
  double qra_detection = 0.0;
  double cusum_detection = 0.0;
  int seeds = 0;
};

struct SuiteOptions {
  std::vector<int> sizes{0, 10, 15, 20, 25};
  int seeds = 100;
  std::uint64_t base_seed = 1;
  double malicious_fraction = 0.3;
  double quality = 4.0;
  Direction attack = Direction::Downgrading;
  ScenarioOptions scenario;
};

// round(fraction * n) colluders among n raters.
int colluder_count(int n_users, double fraction);

std::vector<SuiteRow> run_suite(const SuiteOptions& options, const PipelineConfig& qra_config,
                                const CusumConfig& cusum_config);

}  // namespace qra::sim
