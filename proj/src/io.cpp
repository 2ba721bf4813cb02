#include "qra/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include <json.hpp>
#include <openssl/evp.h>

namespace qra::io {

using nlohmann::json;

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

[[noreturn]] void bad(std::string_view key, std::string_view why) {
  throw Error(ErrorCode::InvalidConfig, std::string(key) + ": " + std::string(why));
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || !std::isfinite(out))
    bad(key, "expected a number, got '" + std::string(v) + "'");
  return out;
}

long long to_int(std::string_view key, std::string_view v) {
  long long out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) bad(key, "expected an integer, got '" + std::string(v) + "'");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  bad(key, "expected true/false");
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  while (true) {
    const auto at = s.find(sep);
    out.push_back(trim(s.substr(0, at)));
    if (at == std::string_view::npos) break;
    s.remove_prefix(at + 1);
  }
  return out;
}

std::string num(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

std::string fixed(double x, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
  return buf;
}

void in_range(std::string_view key, double x, double lo, double hi) {
  if (!(x >= lo && x <= hi)) bad(key, "must lie in [" + num(lo) + ", " + num(hi) + "]");
}

double to_seconds(std::string_view key, std::string_view v) {
  double unit = 1.0;
  if (!v.empty()) {
    switch (v.back()) {
      case 's': unit = 1.0; v.remove_suffix(1); break;
      case 'm': unit = 60.0; v.remove_suffix(1); break;
      case 'h': unit = 3600.0; v.remove_suffix(1); break;
      case 'd': unit = 86400.0; v.remove_suffix(1); break;
      default: break;
    }
  }
  const double secs = to_double(key, v) * unit;
  if (!(secs > 0.0)) bad(key, "must be positive");
  return secs;
}

}  // namespace

void set_option(RunConfig& c, std::string_view key, std::string_view raw) {
  const auto v = trim(raw);
  auto& p = c.pipeline;
  if (key == "scale") {
    std::vector<int> levels;
    for (auto part : split(v, ',')) levels.push_back(static_cast<int>(to_int(key, part)));
    try {
      p.scale = RatingScale(levels);
    } catch (const Error& e) {
      bad(key, e.what());
    }
  } else if (key == "sensitivity") {
    p.sensitivity = to_double(key, v);
    in_range(key, p.sensitivity, -2.0, 2.0);
  } else if (key == "sim_high") {
    p.repository.sim_high = to_double(key, v);
    in_range(key, p.repository.sim_high, 0.0, 1.0);
  } else if (key == "sim_low") {
    p.repository.sim_low = to_double(key, v);
    in_range(key, p.repository.sim_low, 0.0, 1.0);
  } else if (key == "rank_k") {
    const auto k = to_int(key, v);
    if (k < 1 || k > 1000) bad(key, "must lie in [1, 1000]");
    p.repository.k = static_cast<int>(k);
  } else if (key == "half_life") {
    p.repository.half_life_seconds = to_seconds(key, v);
  } else if (key == "epsilon_weight") {
    p.repository.epsilon_weight = to_double(key, v);
    if (!(p.repository.epsilon_weight > 0.0 && p.repository.epsilon_weight < 1.0)) bad(key, "must lie in (0, 1)");
  } else if (key == "pin_manufacturer") {
    p.repository.pin_manufacturer = to_bool(key, v);
  } else if (key == "stop_words") {
    if (v == "default") {
      p.repository.stop_words = lsi::default_stop_words();
    } else if (v == "none") {
      p.repository.stop_words.clear();
    } else {
      p.repository.stop_words.clear();
      for (auto w : split(v, ',')) {
        std::string word(w);
        std::transform(word.begin(), word.end(), word.begin(),
                       [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
        if (!word.empty()) p.repository.stop_words.insert(word);
      }
    }
  } else if (key == "dev_cap") {
    p.behavior.dev_cap = to_double(key, v);
    in_range(key, p.behavior.dev_cap, 0.0, 1e6);
  } else if (key == "min_common") {
    const auto m = to_int(key, v);
    if (m < 1 || m > 1'000'000) bad(key, "must be >= 1");
    p.behavior.min_common = static_cast<int>(m);
  } else if (key == "collusion_sim") {
    p.behavior.sim_threshold = to_double(key, v);
    if (!(p.behavior.sim_threshold > 0.0 && p.behavior.sim_threshold <= 1.0)) bad(key, "must lie in (0, 1]");
  } else if (key == "rescue_without_evidence") {
    p.behavior.rescue_without_evidence = to_bool(key, v);
  } else if (key == "strict_feedback") {
    p.strict_feedback = to_bool(key, v);
  } else if (key == "attack_epsilon") {
    p.attack_epsilon = to_double(key, v);
    in_range(key, p.attack_epsilon, 0.0, 1e6);
  } else if (key == "cusum_mu0") {
    if (v == "running") {
      c.cusum.mu0_mode = sim::Mu0Mode::RunningMean;
    } else {
      c.cusum.mu0_mode = sim::Mu0Mode::Fixed;
      c.cusum.mu0 = to_double(key, v);
    }
  } else if (key == "cusum_nu") {
    c.cusum.nu = to_double(key, v);
    if (!(c.cusum.nu > 0.0)) bad(key, "must be positive");
  } else if (key == "cusum_h") {
    c.cusum.h = to_double(key, v);
    if (!(c.cusum.h > 0.0)) bad(key, "must be positive");
  } else if (key == "seed") {
    const auto s = to_int(key, v);
    if (s < 0) bad(key, "must be non-negative");
    c.seed = static_cast<std::uint64_t>(s);
  } else if (key == "seeds") {
    const auto s = to_int(key, v);
    if (s < 1 || s > 1'000'000) bad(key, "must lie in [1, 1000000]");
    c.seeds = static_cast<int>(s);
  } else if (key == "malicious_fraction") {
    c.malicious_fraction = to_double(key, v);
    in_range(key, c.malicious_fraction, 0.0, 1.0);
  } else if (key == "quality") {
    c.quality = to_double(key, v);
  } else if (key == "attack") {
    if (v == "DOWNGRADING" || v == "down") {
      c.attack = Direction::Downgrading;
    } else if (v == "UPGRADING" || v == "up") {
      c.attack = Direction::Upgrading;
    } else {
      bad(key, "expected UPGRADING or DOWNGRADING");
    }
  } else if (key == "sizes") {
    c.sizes.clear();
    for (auto part : split(v, ',')) {
      const auto n = to_int(key, part);
      if (n < 0 || n > 100'000) bad(key, "sizes must lie in [0, 100000]");
      c.sizes.push_back(static_cast<int>(n));
    }
  } else {
    bad(key, "unknown key");
  }
}

void check_config(const RunConfig& c) {
  const auto& r = c.pipeline.repository;
  if (!(r.sim_low < r.sim_high)) bad("sim_low", "must be below sim_high");
  const auto& scale = c.pipeline.scale;
  if (c.quality < scale.min() || c.quality > scale.max()) bad("quality", "must lie on the rating scale");
}

RunConfig parse_config(std::string_view text, RunConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view l = line;
    if (auto hash = l.find('#'); hash != std::string_view::npos) l = l.substr(0, hash);
    l = trim(l);
    if (l.empty()) continue;
    const auto eq = l.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::InvalidConfig, "line " + std::to_string(lineno) + ": expected key = value");
    set_option(base, trim(l.substr(0, eq)), trim(l.substr(eq + 1)));
  }
  check_config(base);
  return base;
}

std::string format_config(const RunConfig& c) {
  const auto& p = c.pipeline;
  std::ostringstream out;
  std::string levels;
  for (int lv : p.scale.levels()) levels += (levels.empty() ? "" : ",") + std::to_string(lv);
  std::string stops;
  for (const auto& w : p.repository.stop_words) stops += (stops.empty() ? "" : ",") + w;
  std::string sizes;
  for (int n : c.sizes) sizes += (sizes.empty() ? "" : ",") + std::to_string(n);

  out << "scale = " << levels << '\n'
      << "sensitivity = " << num(p.sensitivity) << '\n'
      << "sim_high = " << num(p.repository.sim_high) << '\n'
      << "sim_low = " << num(p.repository.sim_low) << '\n'
      << "rank_k = " << p.repository.k << '\n'
      << "half_life = " << num(p.repository.half_life_seconds) << "s\n"
      << "epsilon_weight = " << num(p.repository.epsilon_weight) << '\n'
      << "pin_manufacturer = " << (p.repository.pin_manufacturer ? "true" : "false") << '\n'
      << "stop_words = " << (stops.empty() ? "none" : stops) << '\n'
      << "dev_cap = " << num(p.behavior.dev_cap) << '\n'
      << "min_common = " << p.behavior.min_common << '\n'
      << "collusion_sim = " << num(p.behavior.sim_threshold) << '\n'
      << "rescue_without_evidence = " << (p.behavior.rescue_without_evidence ? "true" : "false") << '\n'
      << "strict_feedback = " << (p.strict_feedback ? "true" : "false") << '\n'
      << "attack_epsilon = " << num(p.attack_epsilon) << '\n'
      << "cusum_mu0 = " << (c.cusum.mu0_mode == sim::Mu0Mode::RunningMean ? "running" : num(c.cusum.mu0)) << '\n'
      << "cusum_nu = " << num(c.cusum.nu) << '\n'
      << "cusum_h = " << num(c.cusum.h) << '\n'
      << "seed = " << c.seed << '\n'
      << "seeds = " << c.seeds << '\n'
      << "malicious_fraction = " << num(c.malicious_fraction) << '\n'
      << "quality = " << num(c.quality) << '\n'
      << "attack = " << to_string(c.attack) << '\n'
      << "sizes = " << sizes << '\n';
  return out.str();
}

ParsedEvents parse_events(std::istream& in, const RatingScale& scale) {
  ParsedEvents out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto l = trim(line);
    if (l.empty() || l.front() == '#') continue;
    try {
      out.events.push_back(validate_event(json::parse(l), scale));
    } catch (const json::exception& e) {
      out.errors.push_back("line " + std::to_string(lineno) + ": " + e.what());
    } catch (const Error& e) {
      out.errors.push_back("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::string format_event(const RatingEvent& ev) {
  json j{{"user_id", ev.user_id}, {"product_id", ev.product_id}, {"rating", ev.rating}};
  if (ev.feedback) j["feedback"] = *ev.feedback;
  j["timestamp"] = ev.timestamp;
  return j.dump();
}

namespace {

std::vector<std::string> text_list(const json& j, const std::string& where) {
  if (!j.is_array()) throw Error(ErrorCode::InvalidConfig, where + " must be a list of strings");
  std::vector<std::string> out;
  for (const auto& s : j) {
    if (!s.is_string()) throw Error(ErrorCode::InvalidConfig, where + " must be a list of strings");
    out.push_back(s.get<std::string>());
  }
  return out;
}

ProductSeed seed_from_json(const json& j, const std::string& where) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, where + " must be an object");
  ProductSeed s;
  s.upgrading = text_list(j.value("upgrading", json::array()), where + ".upgrading");
  s.downgrading = text_list(j.value("downgrading", json::array()), where + ".downgrading");
  return s;
}

json seed_to_json(const ProductSeed& s) {
  return json{{"upgrading", s.upgrading}, {"downgrading", s.downgrading}};
}

}  // namespace

SeedCatalog parse_seed_catalog(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("seed file: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "seed file must hold a JSON object");
  SeedCatalog cat;
  for (const auto& [key, val] : j.items()) {
    if (key == "default") {
      cat.fallback = seed_from_json(val, "default");
    } else if (key == "products") {
      if (!val.is_object()) throw Error(ErrorCode::InvalidConfig, "products must be an object");
      for (const auto& [pid, seed] : val.items()) cat.products[pid] = seed_from_json(seed, "products." + pid);
    } else if (key != "comment") {
      throw Error(ErrorCode::InvalidConfig, "unknown seed file key '" + key + "'");
    }
  }
  return cat;
}

std::string format_seed_catalog(const SeedCatalog& cat) {
  json j = json::object();
  if (cat.fallback) j["default"] = seed_to_json(*cat.fallback);
  json products = json::object();
  for (const auto& [pid, s] : cat.products) products[pid] = seed_to_json(s);
  j["products"] = products;
  return j.dump(2) + "\n";
}

std::string truncate_fixed(double value, int decimals) {
  return fixed(truncate_to(value, decimals), decimals);
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

std::string format_verdict_csv(const std::vector<UserVerdict>& verdicts) {
  std::string out = "uid,rating,up_threshold,down_threshold,final_rating,status,alarm,similarity\n";
  for (const auto& v : verdicts) {
    out += csv_field(v.user_id) + ',' + std::to_string(v.rating) + ',' +
           truncate_fixed(v.thresholds_in_force.upgrading, 3) + ',' +
           truncate_fixed(v.thresholds_in_force.downgrading, 3) + ',' +
           (v.score_after ? truncate_fixed(*v.score_after, 2) : std::string()) + ',' +
           std::string(to_string(v.status)) + ',' + std::string(to_string(v.alarm)) + ',' +
           (v.similarity ? fixed(*v.similarity, 4) : std::string()) + '\n';
  }
  return out;
}

std::string format_trace_csv(const std::vector<UserVerdict>& verdicts) {
  std::string out = "position,product_id,uid,rating,up_threshold,down_threshold,mid,alarm,status\n";
  std::map<std::string, int> positions;
  for (const auto& v : verdicts) {
    const auto& t = v.thresholds_in_force;
    out += std::to_string(++positions[v.product_id]) + ',' + csv_field(v.product_id) + ',' +
           csv_field(v.user_id) + ',' + std::to_string(v.rating) + ',' + fixed(t.upgrading, 6) + ',' +
           fixed(t.downgrading, 6) + ',' + fixed(0.5 * (t.upgrading + t.downgrading), 6) + ',' +
           std::string(to_string(v.alarm)) + ',' + std::string(to_string(v.status)) + '\n';
  }
  return out;
}

std::string format_summary(const std::vector<UserVerdict>& verdicts, const RunConfig& config,
                           const std::vector<std::vector<std::string>>& collusion) {
  std::ostringstream out;
  if (verdicts.empty()) {
    out << "no events\n";
  } else {
    struct Acc {
      double all = 0.0, kept = 0.0;
      int n_all = 0, n_kept = 0;
      std::vector<std::string> flagged;
    };
    std::map<std::string, Acc> by_product;
    std::vector<std::string> order;
    for (const auto& v : verdicts) {
      if (!by_product.contains(v.product_id)) order.push_back(v.product_id);
      auto& a = by_product[v.product_id];
      a.all += v.rating;
      ++a.n_all;
      if (v.status == UserStatus::TrueUser) {
        a.kept += v.rating;
        ++a.n_kept;
      } else {
        a.flagged.push_back(v.user_id);
      }
    }
    for (const auto& pid : order) {
      const auto& a = by_product[pid];
      out << "[product " << pid << "]\n";
      out << "events = " << a.n_all << '\n';
      std::string flagged;
      for (const auto& u : a.flagged) flagged += (flagged.empty() ? "" : ",") + u;
      out << "malicious_users = " << (flagged.empty() ? "none" : flagged) << '\n';
      const double incl = a.all / a.n_all;
      out << "including_all = " << fixed(incl, 4) << '\n';
      if (a.n_kept == 0) {
        out << "excluding_malicious = none\n";
        continue;
      }
      const ScorePair sp = make_score_pair(incl, a.kept / a.n_kept);
      const auto at = attack_type(sp, config.pipeline.attack_epsilon);
      out << "excluding_malicious = " << fixed(sp.excluding_malicious, 4) << '\n'
          << "excluding_malicious_exact = " << fixed(sp.excluding_exact, 6) << '\n'
          << "difference = " << fixed(sp.difference, 4) << '\n'
          << "attack_type = " << to_string(at.kind) << '\n'
          << "attack_magnitude = " << fixed(at.magnitude, 4) << '\n';
    }
  }
  if (!collusion.empty()) {
    out << "[collusion groups]\n";
    for (const auto& g : collusion) {
      std::string line;
      for (const auto& u : g) line += (line.empty() ? "" : ",") + u;
      out << line << '\n';
    }
  }
  out << "[config]\n" << format_config(config);
  return out.str();
}

std::string format_truth_csv(const std::map<std::string, sim::Truth>& truth) {
  // Natural order so u2 precedes u10.
  std::vector<std::pair<std::string, sim::Truth>> rows(truth.begin(), truth.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.first.size() != b.first.size() ? a.first.size() < b.first.size() : a.first < b.first;
  });
  std::string out = "user_id,label\n";
  for (const auto& [u, t] : rows) out += csv_field(u) + ',' + std::string(sim::to_string(t)) + '\n';
  return out;
}

std::map<std::string, sim::Truth> parse_truth_csv(std::string_view text) {
  std::map<std::string, sim::Truth> out;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto l = trim(line);
    if (l.empty() || (lineno == 1 && l.starts_with("user_id"))) continue;
    const auto comma = l.rfind(',');
    if (comma == std::string_view::npos)
      throw Error(ErrorCode::ParseError, "truth line " + std::to_string(lineno) + ": expected user_id,label");
    out[std::string(trim(l.substr(0, comma)))] = sim::truth_from_string(trim(l.substr(comma + 1)));
  }
  return out;
}

std::string format_comparison_csv(const std::vector<sim::SuiteRow>& rows) {
  std::string out = "n_users,qra_far,cusum_far,qra_detection,cusum_detection,seeds\n";
  for (const auto& r : rows) {
    out += std::to_string(r.n_users) + ',' + fixed(r.qra_far, 4) + ',' + fixed(r.cusum_far, 4) + ',' +
           fixed(r.qra_detection, 4) + ',' + fixed(r.cusum_detection, 4) + ',' + std::to_string(r.seeds) + '\n';
  }
  return out;
}

std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::NumericalFailure, "sha256 failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

namespace {

constexpr int kSnapshotVersion = 1;

json thresholds_json(const ThresholdPair& t) {
  return json{{"upgrading", t.upgrading}, {"downgrading", t.downgrading}, {"deviation", t.deviation},
              {"sensitivity", t.sensitivity}};
}

ThresholdPair thresholds_from(const json& j) {
  return ThresholdPair{j.at("upgrading").get<double>(), j.at("downgrading").get<double>(),
                       j.at("deviation").get<double>(), j.at("sensitivity").get<double>()};
}

json verdict_json(const UserVerdict& v) {
  json j{{"user_id", v.user_id},
         {"product_id", v.product_id},
         {"rating", v.rating},
         {"status", to_string(v.status)},
         {"level", v.level},
         {"alarm", to_string(v.alarm)},
         {"thresholds", thresholds_json(v.thresholds_in_force)}};
  j["similarity"] = v.similarity ? json(*v.similarity) : json(nullptr);
  j["score_after"] = v.score_after ? json(*v.score_after) : json(nullptr);
  return j;
}

UserVerdict verdict_from(const json& j) {
  UserVerdict v;
  v.user_id = j.at("user_id").get<std::string>();
  v.product_id = j.at("product_id").get<std::string>();
  v.rating = j.at("rating").get<int>();
  v.status = status_from_string(j.at("status").get<std::string>());
  v.level = j.at("level").get<int>();
  v.alarm = direction_from_string(j.at("alarm").get<std::string>());
  v.thresholds_in_force = thresholds_from(j.at("thresholds"));
  if (!j.at("similarity").is_null()) v.similarity = j.at("similarity").get<double>();
  if (!j.at("score_after").is_null()) v.score_after = j.at("score_after").get<double>();
  return v;
}

json repo_json(const QualityRepository& r) {
  json docs = json::array();
  for (const auto& d : r.docs())
    docs.push_back({{"doc_id", d.doc_id}, {"text", d.text}, {"timestamp", d.timestamp},
                    {"weight", d.weight}, {"origin", to_string(d.origin)}});
  return json{{"direction", to_string(r.direction())}, {"next_seq", r.next_seq()}, {"docs", docs}};
}

QualityRepository repo_from(const json& j, const std::string& product, const RepositoryConfig& cfg) {
  std::vector<RepositoryDoc> docs;
  for (const auto& d : j.at("docs"))
    docs.push_back({d.at("doc_id").get<std::string>(), d.at("text").get<std::string>(),
                    d.at("timestamp").get<std::int64_t>(), d.at("weight").get<double>(),
                    origin_from_string(d.at("origin").get<std::string>())});
  return QualityRepository(product, direction_from_string(j.at("direction").get<std::string>()), cfg,
                           std::move(docs), j.at("next_seq").get<std::uint64_t>());
}

}  // namespace

std::string snapshot_state(const ReputationEngine& engine) {
  RunConfig rc;
  rc.pipeline = engine.config();

  json seeds = json::object();
  for (const auto& [pid, s] : engine.seeds()) seeds[pid] = seed_to_json(s);

  json products = json::object();
  for (const auto& [pid, pe] : engine.products()) {
    json log = json::array();
    for (const auto& v : pe.verdict_log()) log.push_back(verdict_json(v));
    products[pid] = json{{"accepted", pe.detector().accepted()},
                         {"up_repo", repo_json(pe.up_repo())},
                         {"down_repo", repo_json(pe.down_repo())},
                         {"verdict_log", log}};
  }

  json ratings = json::object();
  for (const auto& [user, per] : engine.history().by_user()) ratings[user] = per;
  json statuses = json::object();
  for (const auto& [user, st] : engine.statuses()) statuses[user] = to_string(st);
  json log = json::array();
  for (const auto& v : engine.log()) log.push_back(verdict_json(v));

  json payload{{"config", format_config(rc)},
               {"seeds", seeds},
               {"default_seed", engine.default_seed() ? seed_to_json(*engine.default_seed()) : json(nullptr)},
               {"products", products},
               {"history", {{"ratings", ratings}, {"consensus", engine.history().consensus_map()}}},
               {"statuses", statuses},
               {"log", log}};

  const std::string body = payload.dump();
  json doc{{"format", "qra-snapshot"}, {"version", kSnapshotVersion}, {"checksum", sha256_hex(body)},
           {"payload", payload}};
  return doc.dump(1) + "\n";
}

ReputationEngine restore_state(std::string_view snapshot) {
  json doc;
  try {
    doc = json::parse(snapshot);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptSnapshot, e.what());
  }
  try {
    if (doc.at("format") != "qra-snapshot") throw Error(ErrorCode::CorruptSnapshot, "not a snapshot");
    if (doc.at("version") != kSnapshotVersion) throw Error(ErrorCode::CorruptSnapshot, "unsupported version");
    const json& payload = doc.at("payload");
    if (sha256_hex(payload.dump()) != doc.at("checksum").get<std::string>())
      throw Error(ErrorCode::CorruptSnapshot, "checksum mismatch");

    const PipelineConfig cfg = parse_config(payload.at("config").get<std::string>()).pipeline;
    std::map<std::string, ProductSeed> seeds;
    for (const auto& [pid, s] : payload.at("seeds").items()) seeds[pid] = seed_from_json(s, pid);
    std::optional<ProductSeed> fallback;
    if (!payload.at("default_seed").is_null()) fallback = seed_from_json(payload.at("default_seed"), "default");

    ReputationEngine engine(cfg, std::move(seeds), std::move(fallback));

    std::map<std::string, ProductEngine> products;
    for (const auto& [pid, pj] : payload.at("products").items()) {
      std::vector<UserVerdict> log;
      for (const auto& v : pj.at("verdict_log")) log.push_back(verdict_from(v));
      products.emplace(pid, ProductEngine(pid,
                                          DetectorState(cfg.scale, cfg.sensitivity,
                                                        pj.at("accepted").get<std::vector<double>>()),
                                          repo_from(pj.at("up_repo"), pid, cfg.repository),
                                          repo_from(pj.at("down_repo"), pid, cfg.repository), std::move(log)));
    }

    RatingHistory history;
    for (const auto& [user, per] : payload.at("history").at("ratings").items())
      for (const auto& [pid, r] : per.items()) history.record(user, pid, r.get<int>());
    for (const auto& [pid, c] : payload.at("history").at("consensus").items())
      history.set_consensus(pid, c.get<double>());

    StatusLookup statuses;
    for (const auto& [user, st] : payload.at("statuses").items())
      statuses[user] = status_from_string(st.get<std::string>());

    std::vector<UserVerdict> log;
    for (const auto& v : payload.at("log")) log.push_back(verdict_from(v));

    engine.restore(std::move(products), std::move(history), std::move(statuses), std::move(log));
    return engine;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::CorruptSnapshot, e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::CorruptSnapshot) throw;
    throw Error(ErrorCode::CorruptSnapshot, e.what());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::ParseError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw Error(ErrorCode::ParseError, "short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace qra::io
