#include "pgamarket/cli/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "pgamarket/errors.hpp"

namespace pgamarket::cli {

namespace {

using json = nlohmann::json;

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys = {
      "pi",         "theta",       "v_bar",     "N",          "C",
      "family",     "rate",        "alpha",     "beta",       "M",
      "M_range",    "T_grid",      "depth",     "y0",         "bt_v_bar0",
      "bt_T0",      "bt_N0",       "bt_lambda", "shutdown_bracket",
      "n_blocks",   "seed",        "workers",   "format",     "out",
      "m_cap",      "grid_points", "br_samples", "trace",     "trace_blocks",
      "noise_size", "dex_mode"};
  return keys;
}

std::size_t line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + offset, '\n'));
}

std::size_t line_of_key(const std::string& text, const std::string& key) {
  const auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 1 : line_of_offset(text, pos);
}

class Reader {
 public:
  Reader(const std::string& text, const std::string& source) : text_(text), source_(source) {}

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    std::ostringstream os;
    os << source_ << ":" << line_of_key(text_, key) << ": " << message;
    throw ConfigError(os.str());
  }

  double number(const std::string& key, const json& v) const {
    if (!v.is_number()) fail(key, "'" + key + "' must be a number");
    return v.get<double>();
  }

  std::int64_t integer(const std::string& key, const json& v) const {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d == static_cast<double>(static_cast<std::int64_t>(d))) return static_cast<std::int64_t>(d);
    }
    fail(key, "'" + key + "' must be an integer");
  }

  std::uint64_t unsigned_integer(const std::string& key, const json& v) const {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    const auto i = integer(key, v);
    if (i < 0) fail(key, "'" + key + "' must be nonnegative");
    return static_cast<std::uint64_t>(i);
  }

  std::string string(const std::string& key, const json& v) const {
    if (!v.is_string()) fail(key, "'" + key + "' must be a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, const json& v) const {
    if (v.is_number()) return {v.get<double>()};
    if (!v.is_array()) fail(key, "'" + key + "' must be a number or a list of numbers");
    std::vector<double> out;
    for (const auto& x : v) out.push_back(number(key, x));
    if (out.empty()) fail(key, "'" + key + "' must not be empty");
    return out;
  }

  std::pair<double, double> pair(const std::string& key, const json& v) const {
    const auto xs = numbers(key, v);
    if (xs.size() != 2) fail(key, "'" + key + "' must be a two-element list");
    return {xs[0], xs[1]};
  }

 private:
  const std::string& text_;
  const std::string& source_;
};

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& source) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << line_of_offset(text, e.byte == 0 ? 0 : e.byte - 1)
       << ": malformed JSON (" << e.what() << ")";
    throw ConfigError(os.str());
  }
  if (!doc.is_object()) throw ConfigError(source + ":1: config must be a JSON object");
  if (doc.contains("config") && doc["config"].is_object()) doc = doc["config"];

  const Reader r(text, source);
  RunConfig cfg;
  for (const auto& [key, v] : doc.items()) {
    if (!known_keys().count(key)) r.fail(key, "unknown key '" + key + "'");
    if (key == "pi") cfg.pi = r.number(key, v);
    else if (key == "theta") cfg.theta = r.number(key, v);
    else if (key == "v_bar") cfg.v_bar = r.number(key, v);
    else if (key == "N") cfg.N = r.numbers(key, v);
    else if (key == "C") cfg.C = r.numbers(key, v);
    else if (key == "family") cfg.family = r.string(key, v);
    else if (key == "rate") cfg.rate = r.number(key, v);
    else if (key == "alpha") cfg.alpha = r.number(key, v);
    else if (key == "beta") cfg.beta = r.number(key, v);
    else if (key == "M") cfg.M = static_cast<int>(r.integer(key, v));
    else if (key == "M_range") {
      const auto [lo, hi] = r.pair(key, v);
      cfg.M_range = {static_cast<int>(lo), static_cast<int>(hi)};
      if (lo != cfg.M_range->first || hi != cfg.M_range->second) {
        r.fail(key, "'M_range' bounds must be integers");
      }
    } else if (key == "T_grid") cfg.T_grid = r.numbers(key, v);
    else if (key == "depth") cfg.depth = r.number(key, v);
    else if (key == "y0") cfg.y0 = r.number(key, v);
    else if (key == "bt_v_bar0") cfg.bt_v_bar0 = r.number(key, v);
    else if (key == "bt_T0") cfg.bt_T0 = r.number(key, v);
    else if (key == "bt_N0") cfg.bt_N0 = r.number(key, v);
    else if (key == "bt_lambda") cfg.bt_lambda = r.number(key, v);
    else if (key == "shutdown_bracket") cfg.shutdown_bracket = r.pair(key, v);
    else if (key == "n_blocks") cfg.n_blocks = r.unsigned_integer(key, v);
    else if (key == "seed") cfg.seed = r.unsigned_integer(key, v);
    else if (key == "workers") cfg.workers = static_cast<int>(r.integer(key, v));
    else if (key == "format") cfg.format = r.string(key, v);
    else if (key == "out") cfg.out = r.string(key, v);
    else if (key == "m_cap") cfg.m_cap = static_cast<int>(r.integer(key, v));
    else if (key == "grid_points") cfg.grid_points = static_cast<int>(r.integer(key, v));
    else if (key == "br_samples") cfg.br_samples = r.unsigned_integer(key, v);
    else if (key == "trace") cfg.trace = r.string(key, v);
    else if (key == "trace_blocks") cfg.trace_blocks = r.unsigned_integer(key, v);
    else if (key == "noise_size") cfg.noise_size = r.number(key, v);
    else if (key == "dex_mode") cfg.dex_mode = r.string(key, v);
  }
  if (cfg.format != "json" && cfg.format != "csv") r.fail("format", "format must be json or csv");
  if (cfg.dex_mode != "linear" && cfg.dex_mode != "exact") {
    r.fail("dex_mode", "dex_mode must be linear or exact");
  }
  if (cfg.workers < 1) r.fail("workers", "workers must be at least 1");
  if (cfg.grid_points < 2) r.fail("grid_points", "grid_points must be at least 2");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ":1: cannot open config file");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str(), path);
}

nlohmann::ordered_json config_to_json(const RunConfig& cfg) {
  nlohmann::ordered_json j;
  j["pi"] = cfg.pi;
  j["theta"] = cfg.theta;
  j["v_bar"] = cfg.v_bar;
  j["N"] = cfg.N;
  if (!cfg.C.empty()) j["C"] = cfg.C;
  j["family"] = cfg.family;
  if (cfg.rate) j["rate"] = *cfg.rate;
  if (cfg.alpha) j["alpha"] = *cfg.alpha;
  if (cfg.beta) j["beta"] = *cfg.beta;
  if (cfg.M) j["M"] = *cfg.M;
  if (cfg.M_range) j["M_range"] = {cfg.M_range->first, cfg.M_range->second};
  if (!cfg.T_grid.empty()) j["T_grid"] = cfg.T_grid;
  if (cfg.depth) j["depth"] = *cfg.depth;
  if (cfg.y0) j["y0"] = *cfg.y0;
  j["bt_v_bar0"] = cfg.bt_v_bar0;
  j["bt_T0"] = cfg.bt_T0;
  j["bt_N0"] = cfg.bt_N0;
  j["bt_lambda"] = cfg.bt_lambda;
  j["shutdown_bracket"] = {cfg.shutdown_bracket.first, cfg.shutdown_bracket.second};
  if (cfg.n_blocks) j["n_blocks"] = *cfg.n_blocks;
  if (cfg.seed) j["seed"] = *cfg.seed;
  j["workers"] = cfg.workers;
  j["format"] = cfg.format;
  j["m_cap"] = cfg.m_cap;
  j["grid_points"] = cfg.grid_points;
  j["br_samples"] = cfg.br_samples;
  j["trace_blocks"] = cfg.trace_blocks;
  j["noise_size"] = cfg.noise_size;
  j["dex_mode"] = cfg.dex_mode;
  return j;
}

ValuationModel build_model(const RunConfig& cfg, double v_bar) {
  const auto family = valuation_family_from_string(cfg.family);
  auto reject = [&](const std::optional<double>& x, const char* name) {
    if (x) throw DomainError(std::string("'") + name + "' does not apply to family " + cfg.family);
  };
  switch (family) {
    case ValuationFamily::UniformOnFeeToMax:
      reject(cfg.rate, "rate");
      reject(cfg.alpha, "alpha");
      reject(cfg.beta, "beta");
      return ValuationModel::uniform_on_fee_to_max(cfg.pi, v_bar);
    case ValuationFamily::UniformOnZeroToMax:
      reject(cfg.rate, "rate");
      reject(cfg.alpha, "alpha");
      reject(cfg.beta, "beta");
      return ValuationModel::uniform_on_zero_to_max(v_bar);
    case ValuationFamily::TruncatedExponential:
      if (!cfg.rate) throw DomainError("truncated_exponential needs 'rate'");
      reject(cfg.alpha, "alpha");
      reject(cfg.beta, "beta");
      return ValuationModel::truncated_exponential(*cfg.rate, v_bar);
    case ValuationFamily::ScaledBeta:
      if (!cfg.alpha || !cfg.beta) throw DomainError("scaled_beta needs 'alpha' and 'beta'");
      reject(cfg.rate, "rate");
      return ValuationModel::scaled_beta(*cfg.alpha, *cfg.beta, v_bar);
  }
  throw DomainError("unknown valuation family");
}

MarketParams build_params(const RunConfig& cfg, double N, double C) {
  MarketParams p;
  p.pi = cfg.pi;
  p.theta = cfg.theta;
  p.N = N;
  p.C = C;
  p.model = build_model(cfg, cfg.v_bar);
  p.validate();
  return p;
}

BlockTimeFamily build_block_time_family(const RunConfig& cfg) {
  if (cfg.family != "uniform_fee_to_max") {
    throw DomainError("block-time statics use the uniform_fee_to_max family");
  }
  DefaultBlockTimeParams p;
  p.v_bar0 = cfg.bt_v_bar0;
  p.T0 = cfg.bt_T0;
  p.N0 = cfg.bt_N0;
  p.lambda = cfg.bt_lambda;
  return default_block_time_family(cfg.pi, p);
}

std::vector<double> parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ConfigError(flag + ": '" + item + "' is not a number");
    }
  }
  if (out.empty()) throw ConfigError(flag + ": empty list");
  return out;
}

}  // namespace pgamarket::cli
