#include <gtest/gtest.h>

#include <random>

#include "fixture.hpp"
#include "qra/io.hpp"
#include "qra/pipeline.hpp"

using namespace qra;

namespace {

const std::vector<std::string> kFeedback{
    "touch screen and display is very good",
    "battery backup yields more than 2 hrs and touch screen is good",
    "battery drains quickly with heavy camera use",
    "display is dim under bright sunlight",
    "worst seller ever, fake product",
    "delivery late, box damaged",
    "",
};

RatingEvent ev(std::string user, std::string product, int rating, std::optional<std::string> text,
               std::int64_t ts) {
  return RatingEvent{std::move(user), std::move(product), rating, std::move(text), ts};
}

std::vector<RatingEvent> random_stream(std::mt19937_64& rng, int products) {
  std::uniform_int_distribution<int> len(1, 40);
  std::uniform_int_distribution<int> rating(1, 5);
  std::uniform_int_distribution<std::size_t> text(0, kFeedback.size());
  std::uniform_int_distribution<int> prod(0, products - 1);
  std::uniform_int_distribution<int> gap(1, 40 * 86400);
  const int n = len(rng);
  std::vector<RatingEvent> out;
  std::int64_t t = 1'600'000'000;
  for (int i = 0; i < n; ++i) {
    t += gap(rng);
    const auto pick = text(rng);
    std::optional<std::string> fb;
    if (pick < kFeedback.size()) fb = kFeedback[pick];
    out.push_back(ev("u" + std::to_string(i), "p" + std::to_string(prod(rng)), rating(rng), fb, t));
  }
  return out;
}

ProductSeed fixture_seed() { return fixture::load().seeds.products.at("phone"); }

}  // namespace

TEST(Pipeline, TableOneReplay) {
  const auto f = fixture::load();
  ASSERT_EQ(f.events.size(), 15u);
  const auto engine = fixture::replay(f);
  const auto& log = engine.log();
  ASSERT_EQ(log.size(), 15u);
  for (std::size_t i = 0; i < log.size(); ++i) {
    const auto& row = fixture::kTable[i];
    SCOPED_TRACE("uid " + std::to_string(row.uid));
    EXPECT_EQ(log[i].user_id, std::to_string(row.uid));
    EXPECT_EQ(log[i].rating, row.rating);
    EXPECT_EQ(log[i].status == UserStatus::MaliciousUser, row.malicious);
    EXPECT_NEAR(truncate_to(*log[i].score_after, 2), row.final_rating, 1e-9);
    if (fixture::threshold_row_checked(row.uid)) {
      EXPECT_NEAR(log[i].thresholds_in_force.upgrading, row.up, 0.005);
      EXPECT_NEAR(log[i].thresholds_in_force.downgrading, row.down, 0.005);
    }
  }
  EXPECT_EQ(engine.malicious_users(), (std::set<std::string>{"3", "5", "10", "14"}));

  const auto pair = score_pair(engine.products().at("phone"));
  EXPECT_NEAR(pair.excluding_malicious, 4.36, 1e-4);
  EXPECT_NEAR(pair.including_all, 3.5333, 1e-4);
  EXPECT_NEAR(pair.difference, 0.8267, 2e-4);
  EXPECT_EQ(attack_type(pair, 0.05).kind, Direction::Downgrading);
}

TEST(Pipeline, TableOneFeedbackSimilarities) {
  const auto engine = fixture::replay(fixture::load());
  const auto& log = engine.log();
  ASSERT_TRUE(log[1].similarity);
  EXPECT_NEAR(*log[1].similarity, 1.0, 1e-3);
  EXPECT_EQ(log[1].level, 1);
  EXPECT_EQ(log[0].alarm, Direction::None);
  EXPECT_EQ(log[2].alarm, Direction::Downgrading);
  EXPECT_EQ(log[2].level, 3);
}

TEST(Pipeline, WrongProductRejected) {
  PipelineConfig cfg;
  RatingHistory h;
  StatusLookup st;
  ProductEngine engine("a", fixture_seed(), cfg);
  try {
    engine.process(ev("u", "b", 3, std::nullopt, 0), cfg, h, st);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::WrongProduct);
  }
  EXPECT_TRUE(engine.verdict_log().empty());
}

TEST(Pipeline, UnseededProductRejected) {
  ReputationEngine engine(PipelineConfig{}, {});
  try {
    engine.process(ev("u", "x", 3, std::nullopt, 0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidConfig);
  }
}

TEST(Pipeline, MissingFeedbackRouting) {
  auto run = [](PipelineConfig cfg) {
    ReputationEngine engine(std::move(cfg), {{"p", fixture_seed()}});
    engine.process(ev("a", "p", 3, std::nullopt, 10));
    return engine.process(ev("b", "p", 1, std::nullopt, 20));
  };
  PipelineConfig cfg;
  auto v = run(cfg);
  EXPECT_EQ(v.alarm, Direction::Downgrading);
  EXPECT_EQ(v.status, UserStatus::MaliciousUser);

  cfg.behavior.rescue_without_evidence = true;
  v = run(cfg);
  EXPECT_EQ(v.status, UserStatus::TrueUser);
  EXPECT_EQ(v.level, 2);
  EXPECT_NEAR(*v.score_after, 2.0, 1e-12);

  cfg.strict_feedback = true;
  v = run(cfg);
  EXPECT_EQ(v.status, UserStatus::MaliciousUser);
  EXPECT_EQ(v.level, 3);
}

TEST(Pipeline, LevelTwoAcceptsWithoutAdmitting) {
  PipelineConfig cfg;
  cfg.repository.stop_words = {};
  cfg.repository.sim_high = 0.95;
  ReputationEngine engine(cfg, {{"p", fixture_seed()}});
  engine.process(ev("a", "p", 3, std::nullopt, 10));
  const auto v = engine.process(
      ev("b", "p", 5, "battery backup yields more than 2 hrs and touch screen is good", 20));
  EXPECT_EQ(v.alarm, Direction::Upgrading);
  EXPECT_EQ(v.level, 2);
  EXPECT_EQ(v.status, UserStatus::TrueUser);
  EXPECT_EQ(engine.products().at("p").up_repo().docs().size(), 4u);
}

TEST(Pipeline, LevelOneAdmitsFeedback) {
  PipelineConfig cfg;
  cfg.repository.stop_words = {};
  ReputationEngine engine(cfg, {{"p", fixture_seed()}});
  engine.process(ev("a", "p", 3, std::nullopt, 10));
  const auto v = engine.process(ev("b", "p", 5, "touch screen and display is very good", 20));
  EXPECT_EQ(v.level, 1);
  const auto& docs = engine.products().at("p").up_repo().docs();
  ASSERT_EQ(docs.size(), 5u);
  EXPECT_EQ(docs.back().origin, DocOrigin::TrueUser);
  EXPECT_EQ(engine.products().at("p").down_repo().docs().size(), 3u);
}

TEST(Pipeline, BehaviorRescueAcrossProducts) {
  PipelineConfig cfg;
  const auto seed = fixture_seed();
  ReputationEngine engine(cfg, {{"a", seed}, {"b", seed}, {"c", seed}});
  std::int64_t t = 0;
  for (const char* p : {"a", "b", "c"}) engine.process(ev("x", p, 3, std::nullopt, ++t));
  engine.process(ev("u", "a", 3, std::nullopt, ++t));
  engine.process(ev("u", "b", 3, std::nullopt, ++t));
  const auto v = engine.process(ev("u", "c", 1, "delivery late, box damaged", ++t));
  EXPECT_EQ(v.alarm, Direction::Downgrading);
  EXPECT_EQ(v.status, UserStatus::TrueUser);
  EXPECT_EQ(v.level, 2);
  EXPECT_NEAR(*engine.products().at("c").score(), 2.0, 1e-12);
}

TEST(Pipeline, ColluderWithMaliciousPeerCondemned) {
  PipelineConfig cfg;
  cfg.behavior.rescue_without_evidence = true;
  cfg.behavior.dev_cap = 10.0;
  auto run = [&](UserStatus peer_status) {
    RatingHistory h;
    StatusLookup st;
    for (const char* u : {"m", "s"}) {
      h.record(u, "a", 1);
      h.record(u, "b", 1);
    }
    h.set_consensus("a", 3.0);
    h.set_consensus("b", 3.0);
    st["m"] = peer_status;
    ProductEngine engine("c", fixture_seed(), cfg);
    engine.process(ev("x", "c", 3, std::nullopt, 1), cfg, h, st);
    return engine.process(ev("s", "c", 1, "delivery late, box damaged", 2), cfg, h, st);
  };
  EXPECT_EQ(run(UserStatus::MaliciousUser).status, UserStatus::MaliciousUser);
  EXPECT_EQ(run(UserStatus::TrueUser).status, UserStatus::TrueUser);
}

TEST(Pipeline, ScoreHelpers) {
  const auto pair = make_score_pair(11.0 / 3.0, 5.0);
  EXPECT_NEAR(pair.including_all, 3.6667, 1e-4);
  EXPECT_DOUBLE_EQ(pair.excluding_malicious, 5.0);
  EXPECT_NEAR(pair.difference, 1.3333, 1e-4);
  EXPECT_EQ(attack_type(pair, 0.05).kind, Direction::Downgrading);

  ScorePair up;
  up.difference = -0.5;
  EXPECT_EQ(attack_type(up, 0.05).kind, Direction::Upgrading);
  EXPECT_DOUBLE_EQ(attack_type(up, 0.05).magnitude, 0.5);
  ScorePair none;
  EXPECT_EQ(attack_type(none, 0.05).kind, Direction::None);
  none.difference = 0.05;
  EXPECT_EQ(attack_type(none, 0.05).kind, Direction::None);
}

TEST(Pipeline, ScoreErrors) {
  PipelineConfig cfg;
  ProductEngine engine("p", fixture_seed(), cfg);
  try {
    score_pair(engine);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoEvents);
  }
  try {
    reputation_score(engine);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoAcceptedRatings);
  }
}

TEST(PipelineProperties, MaliciousVerdictLeavesStateUntouched) {
  std::mt19937_64 rng(51);
  const auto seed = fixture_seed();
  for (int trial = 0; trial < 300; ++trial) {
    ReputationEngine engine(PipelineConfig{}, {}, seed);
    for (const auto& e : random_stream(rng, 2)) {
      std::optional<ThresholdPair> before;
      std::optional<double> score_before;
      if (auto it = engine.products().find(e.product_id); it != engine.products().end()) {
        before = it->second.detector().thresholds();
        score_before = it->second.score();
      }
      const auto v = engine.process(e);
      if (v.status != UserStatus::MaliciousUser || !before) continue;
      const auto& p = engine.products().at(e.product_id);
      EXPECT_EQ(p.detector().thresholds().upgrading, before->upgrading);
      EXPECT_EQ(p.detector().thresholds().downgrading, before->downgrading);
      EXPECT_EQ(p.score(), score_before);
    }
  }
}

TEST(PipelineProperties, ReplayDeterminismAndScoreBounds) {
  std::mt19937_64 rng(52);
  const auto seed = fixture_seed();
  const PipelineConfig cfg;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto events = random_stream(rng, 3);
    ReputationEngine a(cfg, {}, seed), b(cfg, {}, seed);
    for (const auto& e : events) {
      a.process(e);
      b.process(e);
    }
    ASSERT_EQ(a.log().size(), events.size());
    EXPECT_EQ(io::format_trace_csv(a.log()), io::format_trace_csv(b.log()));
    EXPECT_EQ(io::format_verdict_csv(a.log()), io::format_verdict_csv(b.log()));
    for (const auto& [pid, p] : a.products()) {
      if (auto s = p.score()) {
        EXPECT_GE(*s, 1.0);
        EXPECT_LE(*s, 5.0);
      }
    }
  }
}

TEST(PipelineProperties, FilteringEquivalence) {
  std::mt19937_64 rng(53);
  const auto seed = fixture_seed();
  const PipelineConfig cfg;
  int with_malicious = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto events = random_stream(rng, 1);
    ReputationEngine full(cfg, {}, seed);
    std::vector<RatingEvent> kept;
    for (const auto& e : events)
      if (full.process(e).status == UserStatus::TrueUser) kept.push_back(e);
    if (kept.size() != events.size()) ++with_malicious;

    ReputationEngine filtered(cfg, {}, seed);
    for (const auto& e : kept) EXPECT_EQ(filtered.process(e).status, UserStatus::TrueUser);
    const auto& p = full.products().at("p0");
    if (kept.empty()) {
      EXPECT_FALSE(p.score());
      continue;
    }
    const auto& q = filtered.products().at("p0");
    EXPECT_EQ(p.score(), q.score());
    EXPECT_EQ(p.detector().accepted(), q.detector().accepted());
  }
  EXPECT_GT(with_malicious, 300);
}
