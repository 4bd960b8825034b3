#include "dmta/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "dmta/errors.hpp"
#include "dmta/strategy.hpp"

namespace dmta {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    std::size_t comma = s.find(',', pos);
    if (comma == std::string_view::npos) comma = s.size();
    std::string item = trim(s.substr(pos, comma - pos));
    if (!item.empty()) out.push_back(std::move(item));
    pos = comma + 1;
  }
  return out;
}

struct BadValue {
  std::string expected;
};

template <typename T>
T parse_integer(std::string_view s) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) throw BadValue{"an integer"};
  return v;
}

double parse_double(std::string_view s) {
  std::string tmp(s);
  char* end = nullptr;
  double v = std::strtod(tmp.c_str(), &end);
  if (tmp.empty() || end != tmp.c_str() + tmp.size()) throw BadValue{"a number"};
  return v;
}

bool parse_bool(std::string_view s) {
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw BadValue{"a boolean (true/false)"};
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

struct Key {
  const char* name;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

Key int_key(const char* name, int RunConfig::*field) {
  return {name, [field](RunConfig& c, std::string_view v) { c.*field = parse_integer<int>(v); },
          [field](const RunConfig& c) { return std::to_string(c.*field); }};
}

Key bool_key(const char* name, bool RunConfig::*field) {
  return {name, [field](RunConfig& c, std::string_view v) { c.*field = parse_bool(v); },
          [field](const RunConfig& c) { return fmt_bool(c.*field); }};
}

template <typename Sub>
Key sub_int(const char* name, Sub RunConfig::*sub, int Sub::*field) {
  return {name, [=](RunConfig& c, std::string_view v) { (c.*sub).*field = parse_integer<int>(v); },
          [=](const RunConfig& c) { return std::to_string((c.*sub).*field); }};
}

template <typename Sub>
Key sub_double(const char* name, Sub RunConfig::*sub, double Sub::*field) {
  return {name, [=](RunConfig& c, std::string_view v) { (c.*sub).*field = parse_double(v); },
          [=](const RunConfig& c) { return fmt_double((c.*sub).*field); }};
}

template <typename Sub>
Key sub_bool(const char* name, Sub RunConfig::*sub, bool Sub::*field) {
  return {name, [=](RunConfig& c, std::string_view v) { (c.*sub).*field = parse_bool(v); },
          [=](const RunConfig& c) { return fmt_bool((c.*sub).*field); }};
}

const std::vector<Key>& keys() {
  static const std::vector<Key> table = [] {
    std::vector<Key> t;
    t.push_back(int_key("cycles", &RunConfig::cycles));
    t.push_back(int_key("k", &RunConfig::k));
    t.push_back({"seeds",
                 [](RunConfig& c, std::string_view v) {
                   c.seeds.clear();
                   for (const auto& s : split_list(v)) c.seeds.push_back(parse_integer<std::uint64_t>(s));
                 },
                 [](const RunConfig& c) {
                   std::string out;
                   for (auto s : c.seeds) out += (out.empty() ? "" : ",") + std::to_string(s);
                   return out;
                 }});
    t.push_back({"master_seed",
                 [](RunConfig& c, std::string_view v) { c.master_seed = parse_integer<std::uint64_t>(v); },
                 [](const RunConfig& c) { return std::to_string(c.master_seed); }});
    t.push_back({"strategies", [](RunConfig& c, std::string_view v) { c.strategies = split_list(v); },
                 [](const RunConfig& c) {
                   std::string out;
                   for (const auto& s : c.strategies) out += (out.empty() ? "" : ",") + s;
                   return out;
                 }});
    t.push_back({"out_dir", [](RunConfig& c, std::string_view v) { c.out_dir = std::string(v); },
                 [](const RunConfig& c) { return c.out_dir; }});
    t.push_back(bool_key("paper_scale", &RunConfig::paper_scale));
    t.push_back(bool_key("dump_balls", &RunConfig::dump_balls));
    t.push_back(bool_key("emit_plots", &RunConfig::emit_plots));
    t.push_back(int_key("threads", &RunConfig::threads));
    t.push_back(int_key("bootstrap_active", &RunConfig::bootstrap_active));
    t.push_back(int_key("bootstrap_inactive", &RunConfig::bootstrap_inactive));
    t.push_back(bool_key("train_on_true_labels", &RunConfig::train_on_true_labels));

    t.push_back(sub_int("batch_size", &RunConfig::generator, &GeneratorConfig::batch_size));
    t.push_back(sub_int("min_iterations", &RunConfig::generator, &GeneratorConfig::min_iterations));
    t.push_back(sub_int("max_iterations", &RunConfig::generator, &GeneratorConfig::max_iterations));
    t.push_back(sub_int("patience", &RunConfig::generator, &GeneratorConfig::patience));
    t.push_back(sub_double("min_improvement", &RunConfig::generator, &GeneratorConfig::min_improvement));
    t.push_back(sub_int("bucket_size", &RunConfig::generator, &GeneratorConfig::bucket_size));
    t.push_back(sub_double("min_score", &RunConfig::generator, &GeneratorConfig::min_score));
    t.push_back(sub_double("min_similarity", &RunConfig::generator, &GeneratorConfig::min_similarity));
    t.push_back(sub_int("population_size", &RunConfig::generator, &GeneratorConfig::population_size));
    t.push_back(sub_int("max_edit_depth", &RunConfig::generator, &GeneratorConfig::max_edit_depth));
    t.push_back(sub_int("max_candidates_per_cycle", &RunConfig::generator,
                        &GeneratorConfig::max_candidates_per_cycle));

    t.push_back(sub_double("co_lo", &RunConfig::truth, &GroundTruthConfig::co_lo));
    t.push_back(sub_double("co_hi", &RunConfig::truth, &GroundTruthConfig::co_hi));
    t.push_back(sub_double("cn_lo", &RunConfig::truth, &GroundTruthConfig::cn_lo));
    t.push_back(sub_double("cn_hi", &RunConfig::truth, &GroundTruthConfig::cn_hi));
    t.push_back(sub_double("on_lo", &RunConfig::truth, &GroundTruthConfig::on_lo));
    t.push_back(sub_double("on_hi", &RunConfig::truth, &GroundTruthConfig::on_hi));
    t.push_back(sub_double("flip_prob", &RunConfig::truth, &GroundTruthConfig::flip_prob));

    t.push_back(sub_double("eps_min", &RunConfig::epsilon, &EpsilonConfig::eps_min));
    t.push_back(sub_double("eps_max", &RunConfig::epsilon, &EpsilonConfig::eps_max));
    t.push_back(sub_double("c_d", &RunConfig::epsilon, &EpsilonConfig::c_d));
    t.push_back(sub_bool("literal_epsilon", &RunConfig::epsilon, &EpsilonConfig::literal_sign));

    t.push_back(sub_double("l2", &RunConfig::scoring, &ScoringHyper::l2));
    t.push_back(sub_int("max_epochs", &RunConfig::scoring, &ScoringHyper::max_epochs));
    t.push_back(sub_double("grad_tol", &RunConfig::scoring, &ScoringHyper::grad_tol));
    t.push_back(sub_double("rel_tol", &RunConfig::scoring, &ScoringHyper::rel_tol));
    t.push_back(sub_bool("balance_classes", &RunConfig::scoring, &ScoringHyper::balance_classes));

    t.push_back({"backfill_mode",
                 [](RunConfig& c, std::string_view v) {
                   if (v == "domain") c.backfill = BackfillMode::kDomain;
                   else if (v == "ball") c.backfill = BackfillMode::kBall;
                   else throw BadValue{"'domain' or 'ball'"};
                 },
                 [](const RunConfig& c) {
                   return std::string(c.backfill == BackfillMode::kDomain ? "domain" : "ball");
                 }});
    return t;
  }();
  return table;
}

const Key* find_key(std::string_view name) {
  for (const Key& k : keys())
    if (name == k.name) return &k;
  return nullptr;
}

struct Entry {
  std::string key;
  std::string value;
  std::string where;  // "line 3", "--k", ...
};

RunConfig resolve(const std::vector<Entry>& entries) {
  for (const Entry& e : entries)
    if (!find_key(e.key)) throw ParseError(e.where + ": unknown key '" + e.key + "'");

  RunConfig cfg;
  // The preset sits under explicit values, so look for the flag first.
  bool full_scale = false;
  for (const Entry& e : entries) {
    if (e.key != "paper_scale") continue;
    try {
      full_scale = parse_bool(e.value);
    } catch (const BadValue& bad) {
      throw ParseError(e.where + ": key 'paper_scale' expects " + bad.expected + ", got '" + e.value + "'");
    }
  }
  if (full_scale) apply_paper_scale(cfg);

  for (const Entry& e : entries) {
    try {
      find_key(e.key)->set(cfg, e.value);
    } catch (const BadValue& bad) {
      throw ParseError(e.where + ": key '" + e.key + "' expects " + bad.expected + ", got '" + e.value + "'");
    }
  }
  if (auto errors = cfg.check(); !errors.empty()) {
    std::string msg = "invalid configuration:";
    for (const auto& err : errors) msg += "\n  - " + err;
    throw ValidationError(msg);
  }
  return cfg;
}

std::vector<Entry> parse_lines(const std::string& text) {
  std::vector<Entry> entries;
  std::istringstream in(text);
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = "line " + std::to_string(lineno);
    if (eq == std::string::npos) throw ParseError(where + ": expected 'key = value', got '" + body + "'");
    std::string key = trim(std::string_view(body).substr(0, eq));
    if (key.empty()) throw ParseError(where + ": missing key");
    entries.push_back({std::move(key), trim(std::string_view(body).substr(eq + 1)), where});
  }
  return entries;
}

std::vector<Entry> parse_manifest(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.contains("config") || !doc["config"].is_object())
    throw ParseError("manifest has no \"config\" object");
  std::vector<Entry> entries;
  for (const auto& [key, value] : doc["config"].items()) {
    if (!value.is_string()) throw ParseError("manifest config." + key + ": expected a string value");
    entries.push_back({key, value.get<std::string>(), "manifest config." + key});
  }
  return entries;
}

void append_overrides(std::vector<Entry>& entries, const ConfigOverrides& overrides) {
  for (const auto& [key, value] : overrides) entries.push_back({key, value, "override '" + key + "'"});
}

}  // namespace

std::vector<std::string> RunConfig::check() const {
  std::vector<std::string> errors;
  if (cycles < 1) errors.emplace_back("cycles must be >= 1");
  if (k < 1) errors.emplace_back("k must be >= 1");
  if (k >= generator.max_candidates_per_cycle) errors.emplace_back("k must be < max_candidates_per_cycle");
  if (seeds.empty()) errors.emplace_back("seeds must not be empty");
  if (strategies.empty()) errors.emplace_back("strategies must not be empty");
  for (const auto& s : strategies)
    if (!is_known_strategy(s)) errors.push_back("unknown strategy '" + s + "'");
  if (threads < 0) errors.emplace_back("threads must be >= 0");
  if (bootstrap_active < 0 || bootstrap_inactive < 0) errors.emplace_back("bootstrap quotas must be >= 0");
  if (bootstrap_active + bootstrap_inactive < 1) errors.emplace_back("bootstrap needs at least one molecule");
  if (scoring.l2 < 0) errors.emplace_back("l2 must be >= 0");
  if (scoring.max_epochs < 0) errors.emplace_back("max_epochs must be >= 0");
  if (!(scoring.grad_tol > 0)) errors.emplace_back("grad_tol must be positive");
  if (!(scoring.rel_tol >= 0)) errors.emplace_back("rel_tol must be >= 0");
  for (auto& e : generator.check()) errors.push_back(std::move(e));
  for (auto& e : truth.check()) errors.push_back(std::move(e));
  for (auto& e : epsilon.check()) errors.push_back(std::move(e));
  return errors;
}

void apply_paper_scale(RunConfig& cfg) {
  cfg.paper_scale = true;
  cfg.cycles = 200;
  cfg.k = 100;
  cfg.seeds.clear();
  for (std::uint64_t s = 1; s <= 10; ++s) cfg.seeds.push_back(s);
}

RunConfig parse_config_text(const std::string& text, const ConfigOverrides& overrides) {
  auto entries = parse_lines(text);
  append_overrides(entries, overrides);
  return resolve(entries);
}

RunConfig parse_config(const std::filesystem::path& file, const ConfigOverrides& overrides) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw ParseError("cannot open config file '" + file.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  auto entries = file.extension() == ".json" ? parse_manifest(buf.str()) : parse_lines(buf.str());
  append_overrides(entries, overrides);
  return resolve(entries);
}

std::map<std::string, std::string> config_echo(const RunConfig& cfg) {
  std::map<std::string, std::string> out;
  for (const Key& k : keys()) out[k.name] = k.get(cfg);
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const Key& k : keys()) out.emplace_back(k.name);
  return out;
}

}  // namespace dmta
