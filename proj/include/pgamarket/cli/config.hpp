#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "pgamarket/stage2.hpp"
#include "pgamarket/valuations.hpp"

namespace pgamarket::cli {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  double pi = 0.1;
  double theta = 10.0;
  double v_bar = 1.0;
  std::vector<double> N{1000.0};
  std::vector<double> C;  // empty: no entry solve
  std::string family = "uniform_fee_to_max";
  std::optional<double> rate;
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<int> M;
  std::optional<std::pair<int, int>> M_range;
  std::vector<double> T_grid;
  std::optional<double> depth;
  std::optional<double> y0;

  double bt_v_bar0 = 0.95;
  double bt_T0 = 12.0;
  double bt_N0 = 1000.0;
  double bt_lambda = 0.01;
  std::pair<double, double> shutdown_bracket{1.0, 1e4};

  std::optional<std::uint64_t> n_blocks;
  std::optional<std::uint64_t> seed;
  int workers = 1;
  std::string format = "json";
  std::optional<std::string> out;
  int m_cap = 10000;
  int grid_points = 11;
  std::uint64_t br_samples = 20000;
  std::optional<std::string> trace;
  std::uint64_t trace_blocks = 100;
  double noise_size = 0.0;
  std::string dex_mode = "linear";
};

/// Reads a flat JSON object. A report with an embedded "config" object is
/// accepted and its config used. Errors carry "path:line: message".
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& source);

/// Every parameter key; output destinations (out, trace) are left out.
nlohmann::ordered_json config_to_json(const RunConfig& cfg);

ValuationModel build_model(const RunConfig& cfg, double v_bar);
MarketParams build_params(const RunConfig& cfg, double N, double C);
BlockTimeFamily build_block_time_family(const RunConfig& cfg);

/// Parses "a,b,c" into doubles; throws ConfigError naming `flag`.
std::vector<double> parse_list(const std::string& text, const std::string& flag);

}  // namespace pgamarket::cli
