#include "qra/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

namespace qra::sim {

std::pair<CusumState, Direction> cusum_step(CusumState s, double rating) {
  s.g_plus = std::max(0.0, s.g_plus + rating - s.mu0 - s.nu / 2.0);
  s.g_minus = std::max(0.0, s.g_minus + s.mu0 - s.nu / 2.0 - rating);
  Direction alarm = Direction::None;
  if (s.g_plus > s.h) {
    alarm = Direction::Upgrading;
    s.g_plus = 0.0;
  }
  if (s.g_minus > s.h) {
    if (alarm == Direction::None) alarm = Direction::Downgrading;
    s.g_minus = 0.0;
  }
  return {s, alarm};
}

std::vector<UserVerdict> run_cusum(const std::vector<RatingEvent>& events, const RatingScale& scale,
                                   const CusumConfig& config) {
  struct Track {
    CusumState state;
    double sum = 0.0;
    int count = 0;
  };
  std::map<std::string, Track> tracks;
  std::vector<UserVerdict> out;
  out.reserve(events.size());

  for (const auto& ev : events) {
    auto [it, fresh] = tracks.try_emplace(ev.product_id);
    auto& t = it->second;
    if (fresh) {
      t.state.nu = config.nu;
      t.state.h = config.h;
    }
    if (config.mu0_mode == Mu0Mode::Fixed) {
      t.state.mu0 = config.mu0;
    } else {
      t.state.mu0 = t.count > 0 ? t.sum / t.count : initial_threshold(scale);
    }

    auto [next, alarm] = cusum_step(t.state, ev.rating);
    t.state = next;

    UserVerdict v;
    v.user_id = ev.user_id;
    v.product_id = ev.product_id;
    v.rating = ev.rating;
    v.alarm = alarm;
    if (alarm != Direction::None) {
      v.status = UserStatus::MaliciousUser;
      v.level = 3;
    } else {
      t.sum += ev.rating;
      ++t.count;
    }
    if (t.count > 0) v.score_after = t.sum / t.count;
    out.push_back(std::move(v));
  }
  return out;
}

std::string_view to_string(Truth t) { return t == Truth::Honest ? "HONEST" : "MALICIOUS"; }

Truth truth_from_string(std::string_view s) {
  if (s == "HONEST") return Truth::Honest;
  if (s == "MALICIOUS") return Truth::Malicious;
  throw Error(ErrorCode::ParseError, "unknown truth label '" + std::string(s) + "'");
}

namespace {

// std::*_distribution output is implementation-defined; these keep scenarios byte-stable
// across standard libraries.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t below(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

template <typename T>
void shuffle(std::vector<T>& xs, std::mt19937_64& rng) {
  for (std::size_t i = xs.size(); i > 1; --i) std::swap(xs[i - 1], xs[below(rng, i)]);
}

int nearest_level(const RatingScale& scale, double x) {
  int best = scale.min();
  for (int lv : scale.levels())
    if (std::abs(lv - x) < std::abs(best - x)) best = lv;
  return best;
}

// Honest feedback stays on the two topics the seed repositories cover (battery and
// display), so a rank-2 index separates it from off-topic spam.
const std::vector<std::string>& praise_corpus() {
  static const std::vector<std::string> c{
      "touch screen and display is very good",
      "battery backup is very good, more than 2 hrs",
      "display is good and touch screen is very good",
      "battery backup yields more than 2 hrs",
      "very good battery backup",
      "touch screen is good and display is bright",
  };
  return c;
}

const std::vector<std::string>& balanced_corpus() {
  static const std::vector<std::string> c{
      "battery backup is good but display is dim",
      "display is good but battery drains quickly",
      "touch screen is good but battery backup is poor",
      "battery backup is good but touch screen is slow",
      "display is good, battery backup is average",
  };
  return c;
}

const std::vector<std::string>& critical_corpus() {
  static const std::vector<std::string> c{
      "battery drains quickly",
      "display is dim under sunlight",
      "touch screen is slow and display is dim",
      "backup is poor, battery drains quickly",
      "battery drains quickly under heavy use",
  };
  return c;
}

const std::vector<std::string>& smear_corpus() {
  static const std::vector<std::string> c{
      "worst seller ever, fake product",
      "waste of money dont buy",
      "delivery late and box damaged",
      "customer care never answered, cheating",
      "total fraud, refund denied",
  };
  return c;
}

const std::vector<std::string>& hype_corpus() {
  static const std::vector<std::string> c{
      "best deal ever buy now",
      "amazing offer must buy",
      "five stars super seller",
      "excellent purchase recommended to everyone",
      "unbelievable price grab it",
  };
  return c;
}

const std::string& pick(const std::vector<std::string>& corpus, std::mt19937_64& rng) {
  return corpus[below(rng, corpus.size())];
}

}  // namespace

ProductSeed scenario_product_seed() {
  return ProductSeed{
      {
          "battery backup yields more than 2 hrs, so it is very good",
          "touch screen is very good and display also good",
          "battery backup yields more so it is very good",
          "touch screen is very good and display good",
      },
      {
          "battery drains quickly and backup is poor",
          "display is dim and touch screen is slow",
          "battery drains quickly, backup is poor under heavy use",
          "display is dim under sunlight and touch screen is slow",
      },
  };
}

Scenario generate_scenario(int n_honest, int n_malicious, double quality, Direction attack,
                           std::uint64_t seed, const ScenarioOptions& options) {
  if (n_honest < 0 || n_malicious < 0)
    throw Error(ErrorCode::InvalidConfig, "rater counts must be non-negative");
  if (attack == Direction::None)
    throw Error(ErrorCode::InvalidConfig, "attack must be UPGRADING or DOWNGRADING");
  const auto& scale = options.scale;
  if (quality < scale.min() || quality > scale.max())
    throw Error(ErrorCode::InvalidConfig, "quality must lie on the rating scale");

  std::mt19937_64 rng(seed);
  Scenario sc;
  sc.quality = quality;
  sc.seed = seed;
  sc.repository_seed = scenario_product_seed();

  std::vector<Truth> roles(static_cast<std::size_t>(n_honest), Truth::Honest);
  roles.resize(static_cast<std::size_t>(n_honest + n_malicious), Truth::Malicious);
  shuffle(roles, rng);

  const int target = nearest_level(scale, quality);
  for (std::size_t i = 0; i < roles.size(); ++i) {
    RatingEvent ev;
    ev.user_id = "u" + std::to_string(i + 1);
    ev.product_id = options.product_id;
    ev.timestamp = options.start_time + static_cast<std::int64_t>(i) * options.spacing;

    if (roles[i] == Truth::Honest) {
      const double u = unit(rng);
      const int noise = u < options.p_minus ? -1 : (u < options.p_minus + options.p_zero ? 0 : 1);
      ev.rating = nearest_level(scale, std::clamp(std::round(quality + noise),
                                                  static_cast<double>(scale.min()),
                                                  static_cast<double>(scale.max())));
      const auto& corpus = ev.rating > target   ? praise_corpus()
                           : ev.rating < target ? critical_corpus()
                                                : balanced_corpus();
      ev.feedback = pick(corpus, rng);
    } else {
      ev.rating = attack == Direction::Downgrading ? scale.min() : scale.max();
      ev.feedback = pick(attack == Direction::Downgrading ? smear_corpus() : hype_corpus(), rng);
    }
    sc.truth[ev.user_id] = roles[i];
    sc.events.push_back(std::move(ev));
  }
  return sc;
}

Metrics evaluate(const std::vector<UserVerdict>& verdicts, const std::map<std::string, Truth>& truth) {
  std::set<std::string> seen;
  std::set<std::string> flagged;
  for (const auto& v : verdicts) {
    if (!truth.contains(v.user_id)) throw Error(ErrorCode::UnknownUser, v.user_id);
    seen.insert(v.user_id);
    if (v.status == UserStatus::MaliciousUser) flagged.insert(v.user_id);
  }

  Metrics m;
  for (const auto& user : seen) {
    const bool f = flagged.contains(user);
    if (truth.at(user) == Truth::Honest) {
      ++m.true_total;
      m.true_flagged += f;
    } else {
      ++m.malicious_total;
      m.malicious_flagged += f;
    }
  }
  m.false_alarm_rate = m.true_total ? static_cast<double>(m.true_flagged) / m.true_total : 0.0;
  m.detection_rate =
      m.malicious_total ? static_cast<double>(m.malicious_flagged) / m.malicious_total : 1.0;
  return m;
}

Comparison compare_detectors(const Scenario& scenario, const PipelineConfig& qra_config,
                             const CusumConfig& cusum_config) {
  ReputationEngine engine(qra_config, {}, scenario.repository_seed);
  for (const auto& ev : scenario.events) engine.process(ev);

  Comparison c;
  c.n_users = static_cast<int>(scenario.truth.size());
  c.qra = evaluate(engine.log(), scenario.truth);
  c.cusum = evaluate(run_cusum(scenario.events, qra_config.scale, cusum_config), scenario.truth);
  return c;
}

int colluder_count(int n_users, double fraction) {
  return static_cast<int>(std::lround(fraction * n_users));
}

std::vector<SuiteRow> run_suite(const SuiteOptions& options, const PipelineConfig& qra_config,
                                const CusumConfig& cusum_config) {
  std::vector<SuiteRow> rows;
  for (int n : options.sizes) {
    SuiteRow row;
    row.n_users = n;
    row.seeds = options.seeds;
    const int bad = colluder_count(n, options.malicious_fraction);
    for (int i = 0; i < options.seeds; ++i) {
      const auto sc = generate_scenario(n - bad, bad, options.quality, options.attack,
                                        options.base_seed + static_cast<std::uint64_t>(i),
                                        options.scenario);
      const auto c = compare_detectors(sc, qra_config, cusum_config);
      row.qra_far += c.qra.false_alarm_rate;
      row.cusum_far += c.cusum.false_alarm_rate;
      row.qra_detection += c.qra.detection_rate;
      row.cusum_detection += c.cusum.detection_rate;
    }
    if (options.seeds > 0) {
      row.qra_far /= options.seeds;
      row.cusum_far /= options.seeds;
      row.qra_detection /= options.seeds;
      row.cusum_detection /= options.seeds;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace qra::sim
