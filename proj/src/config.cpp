#include "slgad/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

#include "slgad/error.hpp"

namespace slgad {

Mode parse_mode(const std::string& name) {
  if (name == "full") return Mode::kFull;
  if (name == "gen-only") return Mode::kGenOnly;
  if (name == "con-only") return Mode::kConOnly;
  if (name == "unweighted") return Mode::kUnweighted;
  if (name == "unscaled") return Mode::kUnscaled;
  throw ConfigError("unknown mode '" + name +
                    "' (expected full, gen-only, con-only, unweighted, unscaled)");
}

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::kFull: return "full";
    case Mode::kGenOnly: return "gen-only";
    case Mode::kConOnly: return "con-only";
    case Mode::kUnweighted: return "unweighted";
    case Mode::kUnscaled: return "unscaled";
  }
  return "full";
}

void RunConfig::validate() const {
  std::vector<std::string> problems;
  if (k < 1) problems.push_back("k must be >= 1");
  if (d_hidden < 1) problems.push_back("d_hidden must be >= 1");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) problems.push_back("alpha must be >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) problems.push_back("beta must be >= 0");
  if (!(alpha + beta > 0.0)) problems.push_back("alpha + beta must be > 0");
  if (!(lr > 0.0) || !std::isfinite(lr)) problems.push_back("lr must be > 0");
  if (batch_size < 2) problems.push_back("batch_size must be >= 2 (negatives come from the batch)");
  if (rounds < 1) problems.push_back("rounds must be >= 1");
  if (negative_ratio < 1) problems.push_back("negative_ratio must be >= 1");
  if (negative_ratio >= batch_size) problems.push_back("negative_ratio must be < batch_size");
  if (!(restart_prob > 0.0 && restart_prob < 1.0)) {
    problems.push_back("restart_prob must lie in (0, 1)");
  }
  if (threads < 1) problems.push_back("threads must be >= 1");
  if (effective_alpha() + effective_beta() <= 0.0) {
    problems.push_back("mode " + to_string(mode) + " leaves no active objective");
  }
  if (problems.empty()) return;
  std::string msg = "invalid configuration:";
  for (const auto& p : problems) msg += "\n  - " + p;
  throw ConfigError(msg);
}

double RunConfig::effective_alpha() const {
  switch (mode) {
    case Mode::kGenOnly: return 0.0;
    case Mode::kUnweighted: return 1.0;
    default: return alpha;
  }
}

double RunConfig::effective_beta() const {
  switch (mode) {
    case Mode::kConOnly: return 0.0;
    case Mode::kUnweighted: return 1.0;
    default: return beta;
  }
}

namespace {

std::string format_real(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T v{};
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw ConfigError("config key '" + key + "': cannot parse '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("config key '" + key + "': expected true/false, got '" + text + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string RunConfig::serialize() const {
  std::ostringstream out;
  out << "alpha = " << format_real(alpha) << '\n'
      << "batch_size = " << batch_size << '\n'
      << "beta = " << format_real(beta) << '\n'
      << "d_hidden = " << d_hidden << '\n'
      << "epochs = " << epochs << '\n'
      << "k = " << k << '\n'
      << "lr = " << format_real(lr) << '\n'
      << "mode = " << to_string(mode) << '\n'
      << "negative_ratio = " << negative_ratio << '\n'
      << "restart_prob = " << format_real(restart_prob) << '\n'
      << "rounds = " << rounds << '\n'
      << "scale_after_averaging = " << (scale_after_averaging ? "true" : "false") << '\n'
      << "seed = " << seed << '\n'
      << "threads = " << threads << '\n';
  return out.str();
}

std::uint64_t RunConfig::hash() const {
  RunConfig copy = *this;
  copy.threads = 1;
  const std::string text = copy.serialize();
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void RunConfig::apply(const std::map<std::string, std::string>& values) {
  for (const auto& [key, value] : values) {
    if (key == "k") k = parse_number<std::size_t>(key, value);
    else if (key == "d_hidden") d_hidden = parse_number<std::size_t>(key, value);
    else if (key == "alpha") alpha = parse_number<double>(key, value);
    else if (key == "beta") beta = parse_number<double>(key, value);
    else if (key == "lr") lr = parse_number<double>(key, value);
    else if (key == "epochs") epochs = parse_number<std::size_t>(key, value);
    else if (key == "batch_size") batch_size = parse_number<std::size_t>(key, value);
    else if (key == "rounds") rounds = parse_number<std::size_t>(key, value);
    else if (key == "negative_ratio") negative_ratio = parse_number<std::size_t>(key, value);
    else if (key == "seed") seed = parse_number<std::uint64_t>(key, value);
    else if (key == "restart_prob") restart_prob = parse_number<double>(key, value);
    else if (key == "threads") threads = parse_number<std::size_t>(key, value);
    else if (key == "mode") mode = parse_mode(value);
    else if (key == "scale_after_averaging") scale_after_averaging = parse_bool(key, value);
    else if (key == "preset") apply_preset(*this, value);
    else throw ConfigError("unknown config key '" + key + "'");
  }
}

Preset preset_for(const std::string& dataset) {
  if (dataset == "cora" || dataset == "citeseer" || dataset == "pubmed") return {0.001, 100};
  if (dataset == "flickr") return {0.001, 400};
  if (dataset == "blogcatalog") return {0.003, 400};
  if (dataset == "acm") return {0.0005, 400};
  if (dataset == "toy") return {0.01, 50, 16, 64};
  throw ConfigError("unknown preset '" + dataset +
                    "' (expected cora, citeseer, pubmed, acm, flickr, blogcatalog, toy)");
}

void apply_preset(RunConfig& cfg, const std::string& dataset) {
  const auto p = preset_for(dataset);
  cfg.lr = p.lr;
  cfg.epochs = p.epochs;
  cfg.k = 4;
  cfg.d_hidden = p.d_hidden;
  cfg.alpha = 1.0;
  cfg.beta = 0.6;
  cfg.rounds = p.rounds;
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return out;
}

}  // namespace slgad
