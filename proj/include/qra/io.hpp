#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "qra/pipeline.hpp"
#include "qra/simulation.hpp"

namespace qra::io {

// Everything a command needs besides its input files.
struct RunConfig {
  PipelineConfig pipeline;
  sim::CusumConfig cusum;
  std::uint64_t seed = 1;
  // scenario generation and comparison suites
  int seeds = 100;
  double malicious_fraction = 0.3;
  double quality = 4.0;
  Direction attack = Direction::Downgrading;
  std::vector<int> sizes{0, 10, 15, 20, 25};
};

// Applies one `key = value` setting; unknown keys and out-of-range values throw InvalidConfig.
void set_option(RunConfig& config, std::string_view key, std::string_view value);

// Cross-field checks (sim_low < sim_high, quality on the scale, ...). Throws InvalidConfig.
void check_config(const RunConfig& config);

// Line-oriented `key = value` text; `#` starts a comment.
RunConfig parse_config(std::string_view text, RunConfig base = {});

// Inverse of parse_config. Doubles are written with round-trip precision.
std::string format_config(const RunConfig& config);

struct ParsedEvents {
  std::vector<RatingEvent> events;
  std::vector<std::string> errors;  // "line N: message"
};

// One JSON object per line; blank lines and lines starting with '#' are skipped.
ParsedEvents parse_events(std::istream& in, const RatingScale& scale);
std::string format_event(const RatingEvent& event);

struct SeedCatalog {
  std::map<std::string, ProductSeed> products;
  std::optional<ProductSeed> fallback;
};

// {"default": {"upgrading": [...], "downgrading": [...]}, "products": {"<id>": {...}}}
SeedCatalog parse_seed_catalog(std::string_view json_text);
std::string format_seed_catalog(const SeedCatalog& catalog);

// Truncates toward negative infinity at `decimals` places, the way the reference tables print.
std::string truncate_fixed(double value, int decimals);

// uid,rating,up_threshold,down_threshold,final_rating,status,alarm,similarity
std::string format_verdict_csv(const std::vector<UserVerdict>& verdicts);

// Full-precision rated-data-vs-thresholds trace for plotting.
std::string format_trace_csv(const std::vector<UserVerdict>& verdicts);

// Per-product score pair and attack type, flagged users, collusion groups, echoed config.
std::string format_summary(const std::vector<UserVerdict>& verdicts, const RunConfig& config,
                           const std::vector<std::vector<std::string>>& collusion = {});

std::string format_truth_csv(const std::map<std::string, sim::Truth>& truth);
std::map<std::string, sim::Truth> parse_truth_csv(std::string_view text);

// n_users,qra_far,cusum_far,qra_detection,cusum_detection,seeds
std::string format_comparison_csv(const std::vector<sim::SuiteRow>& rows);

// Versioned JSON document whose checksum field is SHA-256 over the payload.
std::string snapshot_state(const ReputationEngine& engine);
// Throws CorruptSnapshot on parse failure, version mismatch or checksum mismatch.
ReputationEngine restore_state(std::string_view snapshot);

std::string sha256_hex(std::string_view data);

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temp file, then renames over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace qra::io
