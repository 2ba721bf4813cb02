#pragma once

#include <array>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qra/io.hpp"
#include "qra/pipeline.hpp"

namespace fixture {

struct Row {
  int uid;
  int rating;
  double up;
  double down;
  double final_rating;
  bool malicious;
};

// The published reference trace. Rows 9-12 disagree with their own neighbours and are
// compared only for status and final rating.
inline const std::array<Row, 15> kTable{{
    {1, 3, 3.000, 3.000, 3.00, false},  {2, 5, 3.000, 3.000, 4.00, false},
    {3, 1, 5.414, 2.585, 4.00, true},   {4, 5, 5.414, 2.585, 4.33, false},
    {5, 2, 5.154, 2.845, 4.33, true},   {6, 3, 5.154, 2.845, 4.00, false},
    {7, 4, 5.154, 2.845, 4.00, false},  {8, 5, 4.833, 2.833, 4.16, false},
    {9, 4, 4.858, 2.891, 4.14, false},  {10, 1, 4.699, 2.900, 4.14, true},
    {11, 4, 4.699, 2.900, 4.12, false}, {12, 5, 4.584, 2.915, 4.22, false},
    {13, 5, 5.133, 3.466, 4.30, false}, {14, 1, 5.123, 3.476, 4.30, true},
    {15, 5, 5.123, 3.476, 4.36, false},
}};

inline bool threshold_row_checked(int uid) { return uid < 9 || uid > 12; }

inline std::string path(const std::string& name) { return std::string(QRA_DATA_DIR) + "/table1/" + name; }

struct Loaded {
  qra::io::RunConfig config;
  qra::io::SeedCatalog seeds;
  std::vector<qra::RatingEvent> events;
};

inline Loaded load() {
  Loaded out;
  out.config = qra::io::parse_config(qra::io::read_file(path("config.cfg")));
  out.seeds = qra::io::parse_seed_catalog(qra::io::read_file(path("repos.json")));
  std::ifstream in(path("events.jsonl"));
  auto parsed = qra::io::parse_events(in, out.config.pipeline.scale);
  out.events = std::move(parsed.events);
  return out;
}

inline qra::ReputationEngine replay(const Loaded& f) {
  qra::ReputationEngine engine(f.config.pipeline, f.seeds.products, f.seeds.fallback);
  for (const auto& e : f.events) engine.process(e);
  return engine;
}

}  // namespace fixture
